#include "coopalloc/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace coopalloc {

bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& out) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-13) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * out[k];
        out[r] = s / a[r][r];
    }
    return true;
}

MiniLp::Result MiniLp::solve(double tol) const {
    const std::size_t nv = c.size();
    const std::size_t ne = a_eq.size();
    Result best;

    if (nv == 0) {
        best.feasible = true;
        for (std::size_t r = 0; r < ne; ++r)
            if (std::abs(b_eq[r]) > tol) best.feasible = false;
        for (std::size_t r = 0; r < a_ub.size(); ++r)
            if (b_ub[r] < -tol) best.feasible = false;
        return best;
    }
    if (ne > nv) return best;  // over-determined systems do not arise here

    // Candidate active rows: every upper bound, then every sign constraint.
    struct Row {
        std::vector<double> a;
        double b;
    };
    std::vector<Row> extra;
    for (std::size_t r = 0; r < a_ub.size(); ++r) extra.push_back({a_ub[r], b_ub[r]});
    for (std::size_t v = 0; v < nv; ++v) {
        Row row{std::vector<double>(nv, 0.0), 0.0};
        row.a[v] = 1.0;
        extra.push_back(row);
    }

    const std::size_t need = nv - ne;
    {
        double combos = 1.0;
        for (std::size_t k = 0; k < need; ++k)
            combos *= static_cast<double>(extra.size() - k) / static_cast<double>(k + 1);
        if (combos > 2e6)
            throw std::invalid_argument("MiniLp: basic-solution enumeration too large");
    }
    std::vector<std::size_t> pick(need);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == need) {
            std::vector<std::vector<double>> a(nv, std::vector<double>(nv, 0.0));
            std::vector<double> b(nv, 0.0);
            for (std::size_t r = 0; r < ne; ++r) {
                a[r] = a_eq[r];
                b[r] = b_eq[r];
            }
            for (std::size_t k = 0; k < need; ++k) {
                a[ne + k] = extra[pick[k]].a;
                b[ne + k] = extra[pick[k]].b;
            }
            std::vector<double> x;
            if (!solve_linear(a, b, x)) return;
            for (double v : x)
                if (!std::isfinite(v) || v < -tol) return;
            for (std::size_t r = 0; r < a_ub.size(); ++r) {
                double s = 0.0;
                for (std::size_t v = 0; v < nv; ++v) s += a_ub[r][v] * x[v];
                if (s > b_ub[r] + tol) return;
            }
            for (std::size_t r = 0; r < ne; ++r) {
                double s = 0.0;
                for (std::size_t v = 0; v < nv; ++v) s += a_eq[r][v] * x[v];
                if (std::abs(s - b_eq[r]) > tol * std::max(1.0, std::abs(b_eq[r]))) return;
            }
            double obj = 0.0;
            for (std::size_t v = 0; v < nv; ++v) obj += c[v] * x[v];
            if (!best.feasible || obj < best.objective - 1e-15) {
                best.feasible = true;
                best.objective = obj;
                best.x = x;
            }
            return;
        }
        for (std::size_t r = start; r < extra.size(); ++r) {
            pick[depth] = r;
            rec(r + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    unsigned workers = std::max(1u, threads);
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers == 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t k = w; k < count; k += workers) fn(k);
        });
    }
    for (auto& t : pool) t.join();
}

double SplitMix64::exponential() {
    double u = uniform();
    return -std::log1p(-u);
}

}  // namespace coopalloc
