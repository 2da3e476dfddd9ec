#include "coopalloc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "coopalloc/model.hpp"
#include "coopalloc/util.hpp"

namespace coopalloc {

namespace {

constexpr double kGainTol = 1e-12;

bool rates_hold(const Instance& inst, const Allocation& alloc, const Tolerances& tol) {
    if (alloc.x.rows() != inst.num_bs() || alloc.x.cols() != inst.num_ue()) return false;
    EvalReport rep = evaluate(inst, alloc);
    for (std::size_t j = 0; j < inst.num_ue(); ++j) {
        if (alloc.y[j] <= 0.0) return false;
        const double need = received_power_needed(inst.rate[j], alloc.y[j]);
        if (std::abs(rep.rate_residuals[j]) > tol.rate_rel * std::max(1.0, need)) return false;
    }
    return true;
}

// Two-BS/two-UE shift: drain the smaller gamma-product diagonal into the
// larger one. Returns the cycle in canonical cell order with its step limit.
std::optional<ShiftCycle> make_block_shift(const Instance& inst, const Allocation& alloc,
                                           std::size_t a, std::size_t b, std::size_t u,
                                           std::size_t v, double zero_tol) {
    const double gau = inst.gamma(a, u), gav = inst.gamma(a, v);
    const double gbu = inst.gamma(b, u), gbv = inst.gamma(b, v);
    if (gau <= 0.0 || gav <= 0.0 || gbu <= 0.0 || gbv <= 0.0) return std::nullopt;
    if (gau * gbv < gav * gbu) return make_block_shift(inst, alloc, a, b, v, u, zero_tol);

    ShiftCycle c;
    c.cells = {{a, u}, {b, u}, {b, v}, {a, v}};
    c.coef = {gbu / gau, -1.0, 1.0, -gbv / gav};
    c.gain = gbu / gau - gbv / gav;
    c.magnitude = std::min(alloc.x(b, u), alloc.x(a, v) * gav / gbv);
    if (c.magnitude <= zero_tol) return std::nullopt;
    return c;
}

// Prune the positive-support matrix to its 2-core and extract one cycle of
// alternating row/column moves, smallest indices first.
std::optional<std::vector<std::pair<std::size_t, std::size_t>>> support_cycle(
    const Instance& inst, const Allocation& alloc, double zero_tol) {
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    std::vector<std::vector<char>> on(m, std::vector<char>(n, 0));
    std::vector<std::size_t> rdeg(m, 0), cdeg(n, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (alloc.x(i, j) > zero_tol && inst.gamma(i, j) > 0.0) {
                on[i][j] = 1;
                ++rdeg[i];
                ++cdeg[j];
            }
    bool pruned = true;
    while (pruned) {
        pruned = false;
        for (std::size_t i = 0; i < m; ++i) {
            if (rdeg[i] == 0 || rdeg[i] > 1) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (on[i][j]) {
                    on[i][j] = 0;
                    --rdeg[i];
                    --cdeg[j];
                }
            pruned = true;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (cdeg[j] == 0 || cdeg[j] > 1) continue;
            for (std::size_t i = 0; i < m; ++i)
                if (on[i][j]) {
                    on[i][j] = 0;
                    --rdeg[i];
                    --cdeg[j];
                }
            pruned = true;
        }
    }
    std::size_t c0 = n;
    for (std::size_t j = 0; j < n && c0 == n; ++j)
        if (cdeg[j] >= 2) c0 = j;
    if (c0 == n) return std::nullopt;

    // Walk: column -> smallest row -> smallest other column -> ... until a
    // column repeats; every active node has degree >= 2 so the walk never
    // stalls.
    std::vector<std::size_t> cols = {c0}, rows;
    std::vector<int> seen_col(n, -1);
    std::vector<char> seen_row(m, 0);
    seen_col[c0] = 0;
    std::size_t cur_col = c0, prev_row = m;
    for (std::size_t step = 0; step < 2 * m * n + 4; ++step) {
        std::size_t r = m;
        for (std::size_t i = 0; i < m && r == m; ++i)
            if (on[i][cur_col] && i != prev_row && !seen_row[i]) r = i;
        if (r == m) return std::nullopt;
        seen_row[r] = 1;
        std::size_t nxt = n;
        for (std::size_t j = 0; j < n && nxt == n; ++j)
            if (on[r][j] && j != cur_col) nxt = j;
        if (nxt == n) return std::nullopt;
        rows.push_back(r);
        if (seen_col[nxt] >= 0) {
            // close the cycle at the first repeat
            const std::size_t start = static_cast<std::size_t>(seen_col[nxt]);
            std::vector<std::pair<std::size_t, std::size_t>> cells;
            for (std::size_t k = start; k < rows.size(); ++k) {
                cells.emplace_back(rows[k], cols[k]);
                cells.emplace_back(rows[k], k + 1 < cols.size() ? cols[k + 1] : nxt);
            }
            // cells currently pair (row, col_in), (row, col_out); rotate so the
            // pattern starts on (row0, col0) and alternates row/column links.
            return cells;
        }
        seen_col[nxt] = static_cast<int>(cols.size());
        cols.push_back(nxt);
        prev_row = r;
        cur_col = nxt;
    }
    return std::nullopt;
}

std::optional<ShiftCycle> make_cycle_shift(const Instance& inst, const Allocation& alloc,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& cells,
                                           double zero_tol) {
    const std::size_t len = cells.size();
    if (len < 4 || len % 2 != 0) return std::nullopt;
    ShiftCycle c;
    c.cells = cells;
    c.coef.assign(len, 0.0);
    c.coef[0] = 1.0;
    // Links alternate: even->odd same row (net-zero), odd->even same column
    // (throughput-preserving). The closing column link fixes the last cell and
    // the final row absorbs the objective change.
    for (std::size_t k = 1; k + 1 < len; ++k) {
        if (k % 2 == 1) {
            c.coef[k] = -c.coef[k - 1];
        } else {
            const double gp = inst.gamma(cells[k - 1].first, cells[k - 1].second);
            const double gc = inst.gamma(cells[k].first, cells[k].second);
            if (gc <= 0.0) return std::nullopt;
            c.coef[k] = -c.coef[k - 1] * gp / gc;
        }
    }
    {
        const double g_last = inst.gamma(cells[len - 1].first, cells[len - 1].second);
        const double g_first = inst.gamma(cells[0].first, cells[0].second);
        if (g_last <= 0.0) return std::nullopt;
        c.coef[len - 1] = -c.coef[0] * g_first / g_last;
    }
    c.gain = 0.0;
    for (double v : c.coef) c.gain += v;
    if (c.gain > 0.0) {
        for (double& v : c.coef) v = -v;
        c.gain = -c.gain;
    }
    c.magnitude = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k)
        if (c.coef[k] < 0.0)
            c.magnitude = std::min(c.magnitude, alloc.x(cells[k].first, cells[k].second) / -c.coef[k]);
    if (!std::isfinite(c.magnitude) || c.magnitude <= zero_tol) return std::nullopt;
    return c;
}

std::string serving_signature(const std::vector<std::vector<std::size_t>>& serving) {
    std::string s;
    for (const auto& lst : serving) {
        for (std::size_t i : lst) {
            s += static_cast<char>('a' + i);
        }
        s += '|';
    }
    return s;
}

std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    std::size_t rho = 0;
    double cum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) {
            rho = k + 1;
            css = cum;
        }
    }
    theta = (css - 1.0) / static_cast<double>(rho);
    for (double& x : v) x = std::max(0.0, x - theta);
    return v;
}

}  // namespace

std::optional<ShiftCycle> find_improving_shift(const Instance& inst, const Allocation& alloc,
                                               const Tolerances& tol) {
    if (!rates_hold(inst, alloc, tol))
        throw std::invalid_argument("find_improving_shift: allocation violates rate equalities");
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    std::optional<ShiftCycle> tie;

    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            std::vector<std::size_t> common;
            for (std::size_t j = 0; j < n; ++j)
                if (alloc.x(a, j) > tol.zero && alloc.x(b, j) > tol.zero) common.push_back(j);
            for (std::size_t p = 0; p < common.size(); ++p) {
                for (std::size_t q = p + 1; q < common.size(); ++q) {
                    auto c = make_block_shift(inst, alloc, a, b, common[p], common[q], tol.zero);
                    if (!c) continue;
                    if (c->gain < -kGainTol) return c;
                    if (!tie) tie = c;
                }
            }
        }
    }
    if (auto cells = support_cycle(inst, alloc, tol.zero)) {
        if (auto c = make_cycle_shift(inst, alloc, *cells, tol.zero)) {
            if (c->gain < -kGainTol) return c;
            if (!tie) tie = c;
        }
    }
    return tie;
}

Allocation apply_shift(const Allocation& alloc, const ShiftCycle& cycle, double t) {
    if (t < 0.0) t = cycle.magnitude;
    Allocation out = alloc;
    std::map<std::size_t, double> row_net;
    for (std::size_t k = 0; k < cycle.cells.size(); ++k) {
        const auto [i, j] = cycle.cells[k];
        const double nx = out.x(i, j) + cycle.coef[k] * t;
        if (nx < -1e-12)
            throw std::invalid_argument("apply_shift: step drives cell (" + std::to_string(i) +
                                        "," + std::to_string(j) + ") negative");
        row_net[i] += cycle.coef[k] * t;
    }
    for (const auto& [i, net] : row_net) {
        if (net <= 1e-12) continue;
        double used = 0.0;
        for (std::size_t j = 0; j < out.x.cols(); ++j) used += out.x(i, j);
        if (used + net > 1.0 + 1e-9)
            throw std::invalid_argument("apply_shift: step breaks the budget of BS " +
                                        std::to_string(i));
    }
    for (std::size_t k = 0; k < cycle.cells.size(); ++k) {
        const auto [i, j] = cycle.cells[k];
        out.x(i, j) = std::max(0.0, out.x(i, j) + cycle.coef[k] * t);
    }
    out.recompute_z();
    return out;
}

std::size_t iterate_shifts(const Instance& inst, Allocation& alloc, std::size_t max_steps) {
    std::size_t steps = 0;
    while (steps < max_steps) {
        auto c = find_improving_shift(inst, alloc);
        if (!c) break;
        alloc = apply_shift(alloc, *c);
        ++steps;
    }
    return steps;
}

double full_support_value(const Instance& inst, const std::vector<double>& y) {
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    MiniLp lp;
    std::vector<std::pair<std::size_t, std::size_t>> vars;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (inst.gamma(i, j) > 0.0) vars.emplace_back(i, j);
    lp.c.assign(vars.size(), 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (y[j] <= 0.0) return std::numeric_limits<double>::infinity();
        std::vector<double> row(vars.size(), 0.0);
        for (std::size_t v = 0; v < vars.size(); ++v)
            if (vars[v].second == j) row[v] = inst.gamma(vars[v].first, j);
        lp.a_eq.push_back(std::move(row));
        const double need = received_power_needed(inst.rate[j], y[j]);
        if (!std::isfinite(need)) return std::numeric_limits<double>::infinity();
        lp.b_eq.push_back(need);
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(vars.size(), 0.0);
        for (std::size_t v = 0; v < vars.size(); ++v)
            if (vars[v].first == i) row[v] = 1.0;
        lp.a_ub.push_back(std::move(row));
        lp.b_ub.push_back(1.0);
    }
    MiniLp::Result res = lp.solve(1e-10);
    if (!res.feasible) return std::numeric_limits<double>::infinity();
    return res.objective;
}

double projected_descent_value(const Instance& inst, std::size_t starts, std::uint64_t seed) {
    const std::size_t n = inst.num_ue();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < starts; ++s) {
        std::vector<double> y(n, 1.0 / static_cast<double>(n));
        if (s > 0) {
            SplitMix64 rng(seed, s);
            double tot = 0.0;
            for (double& v : y) {
                v = rng.exponential() + 1e-3;
                tot += v;
            }
            for (double& v : y) v /= tot;
        }
        double v = full_support_value(inst, y);
        double alpha = 0.05;
        for (int it = 0; it < 400 && alpha > 1e-12; ++it) {
            // one-sided differences near the infeasible boundary
            std::vector<double> grad(n, 0.0);
            const double h = 1e-7;
            for (std::size_t j = 0; j < n; ++j) {
                std::vector<double> yp = y, ym = y;
                yp[j] += h;
                ym[j] = std::max(1e-12, ym[j] - h);
                double fp = full_support_value(inst, yp);
                double fm = full_support_value(inst, ym);
                if (std::isfinite(fp) && std::isfinite(fm))
                    grad[j] = (fp - fm) / (yp[j] - ym[j]);
                else if (std::isfinite(fm) && std::isfinite(v))
                    grad[j] = (v - fm) / (y[j] - ym[j]);
                else if (std::isfinite(fp) && std::isfinite(v))
                    grad[j] = (fp - v) / (yp[j] - y[j]);
            }
            std::vector<double> cand(n);
            for (std::size_t j = 0; j < n; ++j) cand[j] = y[j] - alpha * grad[j];
            cand = project_simplex(cand);
            const double fc = full_support_value(inst, cand);
            if (fc < v - 1e-14) {
                y = cand;
                v = fc;
                alpha *= 1.25;
            } else {
                alpha *= 0.4;
            }
        }
        best = std::min(best, v);
    }
    return best;
}

BruteForceResult brute_force(const Instance& inst) {
    if (inst.num_bs() > 4 || inst.num_ue() > 6)
        throw std::invalid_argument("brute_force: guarded to M <= 4, N <= 6");
    inst.validate();
    PairOrders orders(inst);
    BoundaryEnumerator en(inst, orders);
    BruteForceResult best;
    std::set<std::string> seen;
    en.for_each([&](const BoundaryVector& bv, const Association& assoc, std::uint64_t) {
        const std::string sig = serving_signature(assoc.serving);
        if (!seen.insert(sig).second) return true;
        FixedAssocProblem fp = FixedAssocProblem::from_association(inst, assoc);
        Allocation alloc = solve_fixed(fp);
        ++best.candidates_solved;
        if (alloc.feasible && (!best.found || alloc.z < best.alloc.z)) {
            best.found = true;
            best.alloc = alloc;
            best.boundaries = bv;
        }
        return true;
    });
    if (best.found && inst.num_bs() * inst.num_ue() <= 8) {
        const double ref = projected_descent_value(inst);
        if (std::isfinite(ref) && best.alloc.z > ref + 5e-4 * std::max(1.0, ref))
            throw solver_error("brute_force: enumeration missed the descent optimum");
    }
    return best;
}

CertifyReport certify(const Instance& inst, const Allocation& alloc, const Tolerances& tol) {
    CertifyReport rep;
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    rep.feasible = allocation_feasible(inst, alloc, tol);

    std::vector<std::vector<std::size_t>> serving(n);
    std::size_t zeros = 0, multi_count = 0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            if (std::abs(alloc.x(i, j)) < tol.zero)
                ++zeros;
            else
                serving[j].push_back(i);
        }
    for (std::size_t j = 0; j < n; ++j)
        if (serving[j].size() >= 2) ++multi_count;
    rep.sparsity_ok = multi_count + 1 <= m && zeros >= (m - 1) * (n - 1);

    // Existence of a boundary vector reproducing the induced structure: put
    // every UE on the side of each pair it draws power from, designate the
    // jointly powered UE of a pair at its own position, then check that the
    // resolved association matches.
    rep.cluster_order_ok = false;
    bool constructible = true;
    for (std::size_t j = 0; j < n && constructible; ++j)
        if (serving[j].empty()) constructible = false;
    if (constructible) {
        PairOrders orders(inst);
        BoundaryVector bv;
        bv.cuts.resize(orders.pairs.count());
        for (std::size_t p = 0; p < orders.pairs.count() && constructible; ++p) {
            auto [a, b] = orders.pairs.pair(p);
            const PairOrder& po = orders.by_pair[p];
            std::vector<std::size_t> shared;
            std::size_t max_a = 0, min_b = n + 1;  // positions
            for (std::size_t j = 0; j < n; ++j) {
                const bool sa = std::find(serving[j].begin(), serving[j].end(), a) != serving[j].end();
                const bool sb = std::find(serving[j].begin(), serving[j].end(), b) != serving[j].end();
                if (sa && sb)
                    shared.push_back(j);
                else if (sa)
                    max_a = std::max(max_a, po.pos[j]);
                else if (sb)
                    min_b = std::min(min_b, po.pos[j]);
            }
            if (shared.size() > 1) {
                constructible = false;
                break;
            }
            PairCut cut;
            if (shared.size() == 1) {
                cut.cut = po.pos[shared[0]];
                cut.joint = true;
                if (max_a >= cut.cut || min_b <= cut.cut) constructible = false;
            } else {
                cut.cut = max_a;
                cut.joint = false;
                if (min_b <= max_a) constructible = false;
            }
            bv.cuts[p] = cut;
        }
        if (constructible) {
            try {
                Association re = associate(inst, orders, bv);
                rep.cluster_order_ok = true;
                for (std::size_t j = 0; j < n; ++j) {
                    std::vector<std::size_t> got = re.serving[j];
                    std::vector<std::size_t> want = serving[j];
                    std::sort(got.begin(), got.end());
                    std::sort(want.begin(), want.end());
                    if (got != want) rep.cluster_order_ok = false;
                }
            } catch (const association_error&) {
                rep.cluster_order_ok = false;
            }
        }
    }

    rep.no_improving_shift = false;
    if (rates_hold(inst, alloc, tol))
        rep.no_improving_shift = !find_improving_shift(inst, alloc, tol).has_value();

    rep.kkt_ok = false;
    if (rep.feasible && constructible) {
        try {
            FixedAssocProblem fp;
            fp.inst = &inst;
            fp.serving = serving;
            Allocation re = solve_fixed(fp);
            rep.kkt_ok = re.feasible && std::abs(re.z - alloc.z) <= 1e-6 * std::max(1.0, alloc.z);
        } catch (const std::exception&) {
            rep.kkt_ok = false;
        }
    }
    return rep;
}

}  // namespace coopalloc
