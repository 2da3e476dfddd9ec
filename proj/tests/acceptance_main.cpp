// Acceptance suite: end-to-end checks of the optimizer against the exhaustive
// reference, the structural guarantees of returned allocations, the solver's
// KKT residuals, and the Monte-Carlo trend comparisons. Prints one line per
// criterion; exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "coopalloc/harness.hpp"
#include "coopalloc/jspa.hpp"
#include "coopalloc/model.hpp"
#include "coopalloc/oracle.hpp"
#include "coopalloc/solver.hpp"
#include "coopalloc/util.hpp"
#include "test_util.hpp"

using namespace coopalloc;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

struct BatchItem {
    Instance inst;
    OptimizeResult opt;
    BruteForceResult ref;
};

std::vector<BatchItem> g_batch;  // shared by criteria 1-5

bool criterion1(std::string& note) {
    const auto t0 = clk::now();
    std::size_t agree = 0, total = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < 200; ++k) {
        const std::size_t m = 2 + (k % 2);
        const std::size_t n = 2 + (k / 2) % 4;
        SplitMix64 rng(5000 + k, 3);
        const double eps = 0.35 + 0.6 * rng.uniform();
        BatchItem item;
        item.inst = testutil::random_instance(m, n, 40000 + k, eps, 4.0);
        item.ref = brute_force(item.inst);
        item.opt = optimize_detailed(item.inst);
        ++total;
        bool ok = item.opt.found == item.ref.found;
        if (ok && item.ref.found) {
            const double rel = std::abs(item.opt.alloc.z - item.ref.alloc.z) /
                               std::max(1.0, std::abs(item.ref.alloc.z));
            worst = std::max(worst, rel);
            ok = rel <= 1e-6;
        }
        if (ok) ++agree;
        g_batch.push_back(std::move(item));
    }
    const double secs = seconds_since(t0);
    note = std::to_string(agree) + "/" + std::to_string(total) +
           " agree, worst rel dev " + std::to_string(worst) + ", " +
           std::to_string(secs) + "s single-threaded";
    return agree == total && secs < 300.0;
}

bool criterion2(std::string& note) {
    std::size_t checked = 0, violations = 0;
    for (const BatchItem& item : g_batch) {
        if (!item.opt.found) continue;
        ++checked;
        const std::size_t m = item.inst.num_bs(), n = item.inst.num_ue();
        std::size_t multi = 0, zeros = 0;
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t served = 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (std::abs(item.opt.alloc.x(i, j)) < 1e-8)
                    ++zeros;
                else
                    ++served;
            }
            if (served >= 2) ++multi;
        }
        if (multi > m - 1 || zeros < (m - 1) * (n - 1)) ++violations;
    }
    note = std::to_string(checked) + " optima, " + std::to_string(violations) + " violations";
    return checked > 0 && violations == 0;
}

bool criterion3(std::string& note) {
    std::size_t checked = 0, bad = 0;
    for (const BatchItem& item : g_batch) {
        if (!item.opt.found) continue;
        ++checked;
        CertifyReport rep = certify(item.inst, item.opt.alloc);
        if (!rep.cluster_order_ok) ++bad;
    }
    note = std::to_string(checked) + " optima, " + std::to_string(bad) + " without a boundary vector";
    return checked > 0 && bad == 0;
}

bool criterion4(std::string& note) {
    // soundness on the two-BS slice of the batch
    std::size_t sound_total = 0, sound_ok = 0;
    for (const BatchItem& item : g_batch) {
        if (item.inst.num_bs() != 2 || !item.ref.found) continue;
        PairOrders orders(item.inst);
        PairContext ctx;
        ctx.serving.assign(item.inst.num_ue(), {});
        for (std::size_t u = 0; u < item.inst.num_ue(); ++u) ctx.remaining.push_back(u);
        RelaxedResult s1;
        PairBounds b = pair_search_bounds(item.inst, orders, 0, 1, ctx, &s1, nullptr);
        ++sound_total;
        if (b.full_range) {
            ++sound_ok;  // no pruning claimed, trivially sound
        } else if (b.already_optimal) {
            const double rel = std::abs(s1.alloc.z - item.ref.alloc.z) /
                               std::max(1.0, std::abs(item.ref.alloc.z));
            if (rel <= 1e-6) ++sound_ok;
        } else if (item.ref.boundaries.cuts[0].cut >= b.lo &&
                   item.ref.boundaries.cuts[0].cut <= b.hi) {
            ++sound_ok;
        }
    }

    // measured pruning on twenty N=20 snapshots
    Scenario sc;
    sc.num_bs = 2;
    sc.num_ue = 20;
    sc.seed = 4242;
    double reduction_sum = 0.0;
    std::size_t runs = 0;
    for (std::size_t snap = 0; snap < 20; ++snap) {
        Snapshot s = generate_snapshot(sc, snap);
        SplitMix64 rng(6000 + snap, 5);
        Instance inst = instance_with_demand(s, 0.6 + 0.6 * rng.uniform());
        OptimizeResult res = optimize_detailed(inst);
        if (res.stats.candidates_unpruned == 0) continue;
        const double solved = static_cast<double>(res.stats.candidates_solved);
        const double baseline = static_cast<double>(res.stats.candidates_unpruned);
        reduction_sum += 1.0 - solved / baseline;
        ++runs;
    }
    const double avg_reduction = runs ? reduction_sum / runs : 1.0;
    note = "soundness " + std::to_string(sound_ok) + "/" + std::to_string(sound_total) +
           ", mean candidate reduction " + std::to_string(100.0 * avg_reduction) + "%";
    return sound_total > 0 && sound_ok == sound_total && avg_reduction >= 0.30;
}

bool criterion5(std::string& note) {
    const Tolerances tol;
    std::size_t clean = 0, optima = 0;
    std::size_t perturbed = 0, improved = 0, applied_ok = 0;
    for (const BatchItem& item : g_batch) {
        if (!item.opt.found) continue;
        ++optima;
        if (!find_improving_shift(item.inst, item.opt.alloc).has_value()) ++clean;

        if (item.inst.num_bs() != 2) continue;
        const Instance& inst = item.inst;
        const Allocation& base = item.opt.alloc;
        const std::size_t n = inst.num_ue();
        // pick one exclusive UE per BS with all four block gains live
        std::size_t u = n, v = n;
        for (std::size_t j = 0; j < n; ++j) {
            const bool on0 = base.x(0, j) > tol.zero, on1 = base.x(1, j) > tol.zero;
            if (on0 && !on1 && inst.gamma(1, j) > 0.0 && u == n) u = j;
            if (on1 && !on0 && inst.gamma(0, j) > 0.0 && v == n) v = j;
        }
        if (u == n || v == n) continue;
        double slack0 = 1.0, slack1 = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            slack0 -= base.x(0, j);
            slack1 -= base.x(1, j);
        }
        const double du = 0.2 * std::min(slack1, base.x(0, u) * inst.gamma(0, u) / inst.gamma(1, u));
        const double dv = 0.2 * std::min(slack0, base.x(1, v) * inst.gamma(1, v) / inst.gamma(0, v));
        if (du < 1e-6 || dv < 1e-6) continue;
        Allocation pert = base;
        pert.x(1, u) += du;
        pert.x(0, u) -= du * inst.gamma(1, u) / inst.gamma(0, u);
        pert.x(0, v) += dv;
        pert.x(1, v) -= dv * inst.gamma(0, v) / inst.gamma(1, v);
        pert.recompute_z();
        ++perturbed;
        auto cycle = find_improving_shift(inst, pert);
        if (cycle && cycle->gain < -1e-12) {
            ++improved;
            Allocation shifted = apply_shift(pert, *cycle);
            EvalReport before = evaluate(inst, pert), after = evaluate(inst, shifted);
            bool ok = shifted.z <= pert.z + 1e-12;
            for (std::size_t j = 0; j < n; ++j)
                if (std::abs(after.rate_residuals[j] - before.rate_residuals[j]) > 1e-9) ok = false;
            if (ok) ++applied_ok;
        }
    }
    note = "no shift at " + std::to_string(clean) + "/" + std::to_string(optima) +
           " optima; improving cycle on " + std::to_string(improved) + "/" +
           std::to_string(perturbed) + " perturbed, " + std::to_string(applied_ok) +
           " applied cleanly";
    return clean == optima && perturbed >= 40 &&
           improved * 100 >= perturbed * 95 && applied_ok == improved;
}

bool criterion6(std::string& note) {
    double worst_stat = 0.0, worst_slack = 0.0;
    std::size_t solves = 0;
    for (std::size_t k = 0; k < 40; ++k) {
        const BatchItem& item = g_batch[k * 4 % g_batch.size()];
        PairOrders orders(item.inst);
        BoundaryEnumerator en(item.inst, orders);
        std::size_t taken = 0;
        en.for_each([&](const BoundaryVector&, const Association& assoc, std::uint64_t) {
            SolveDetail detail;
            Allocation a = solve_fixed(FixedAssocProblem::from_association(item.inst, assoc), detail);
            if (a.feasible) {
                worst_stat = std::max(worst_stat, detail.kkt_stationarity);
                worst_slack = std::max(worst_slack, detail.kkt_compslack);
                ++solves;
            }
            return ++taken < 12;
        });
    }

    bool grid_ok = true;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Instance inst = testutil::random_instance(1, 2, 70000 + s, 0.8, 4.0);
        FixedAssocProblem fp;
        fp.inst = &inst;
        fp.serving = {{0}, {0}};
        Allocation a = solve_fixed(fp);
        if (!a.feasible) continue;
        auto grid = testutil::grid_solve_m1_n2(inst);
        if (std::abs(a.y[0] - grid.y0) > 1e-4) grid_ok = false;
    }
    note = std::to_string(solves) + " solves, max stationarity " + std::to_string(worst_stat) +
           ", max compl. slackness " + std::to_string(worst_slack) +
           (grid_ok ? ", grid match ok" : ", grid mismatch");
    return solves > 100 && worst_stat < 1e-6 && worst_slack < 1e-6 && grid_ok;
}

bool criterion7(std::string& note) {
    const auto t0 = clk::now();
    const unsigned threads = std::max(2u, std::thread::hardware_concurrency());
    const std::vector<double> eps = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    bool ok = true;
    std::string detail;
    for (std::size_t m : {std::size_t{2}, std::size_t{3}}) {
        Scenario sc;
        sc.num_bs = m;
        sc.num_ue = 20;
        sc.snapshots = 200;
        sc.seed = 20252025 + m;
        McSummary sum = run_monte_carlo(sc, eps, threads);
        double prev_jspa_loss = -1.0, prev_jmpc_loss = -1.0;
        for (std::size_t e = 0; e < eps.size(); ++e) {
            const McRow& jspa = sum.rows[3 * e];
            const McRow& jmpc = sum.rows[3 * e + 1];
            if (jspa.n_feasible > 0 && jmpc.n_feasible > 0 && jspa.mean_z > jmpc.mean_z + 1e-9) {
                ok = false;
                detail += " meanZ flip m=" + std::to_string(m) + " eps=" + std::to_string(eps[e]);
            }
            if (eps[e] <= 1.0 + 1e-12 && jspa.loss_rate != 0.0) {
                ok = false;
                detail += " loss>0 at eps<=1 m=" + std::to_string(m);
            }
            if (jspa.loss_rate < prev_jspa_loss - 1e-12 || jmpc.loss_rate < prev_jmpc_loss - 1e-12) {
                ok = false;
                detail += " loss not monotone m=" + std::to_string(m);
            }
            if (jspa.loss_rate > jmpc.loss_rate + 1e-12) {
                ok = false;
                detail += " loss nesting broken m=" + std::to_string(m);
            }
            prev_jspa_loss = jspa.loss_rate;
            prev_jmpc_loss = jmpc.loss_rate;
        }
    }
    const double secs = seconds_since(t0);
    note = "trends over 2x200 snapshots x 8 demand scales, " + std::to_string(secs) + "s on " +
           std::to_string(threads) + " threads" + detail;
    return ok && secs < 900.0;
}

bool criterion8(std::string& note) {
    Scenario sc;
    sc.num_bs = 2;
    sc.num_ue = 20;
    sc.snapshots = 24;
    sc.seed = 99;
    const std::vector<double> eps = {0.5, 1.0, 1.4};
    McSummary a = run_monte_carlo(sc, eps, 2);
    McSummary b = run_monte_carlo(sc, eps, 2);
    const std::string csv_a = to_csv(a), csv_b = to_csv(b);
    emit(a, "acceptance_run_a.csv", EmitFormat::csv);
    emit(b, "acceptance_run_b.csv", EmitFormat::csv);
    note = csv_a == csv_b ? "byte-identical CSV across runs" : "CSV outputs differ";
    return csv_a == csv_b;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Entry entries[] = {
        {"criterion 1 (optimizer matches exhaustive reference)", criterion1},
        {"criterion 2 (sparse link structure of optima)", criterion2},
        {"criterion 3 (consistent cluster boundaries exist)", criterion3},
        {"criterion 4 (boundary range soundness and pruning)", criterion4},
        {"criterion 5 (power-shift certification)", criterion5},
        {"criterion 6 (solver KKT residuals and grid match)", criterion6},
        {"criterion 7 (Monte-Carlo trend comparisons)", criterion7},
        {"criterion 8 (bitwise deterministic output)", criterion8},
    };
    bool all_ok = true;
    for (const Entry& e : entries) {
        std::string note;
        bool ok = false;
        try {
            ok = e.fn(note);
        } catch (const std::exception& ex) {
            note = std::string("exception: ") + ex.what();
        }
        std::printf("%s: %s (%s)\n", e.name, ok ? "PASS" : "FAIL", note.c_str());
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
