#include "coopalloc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coopalloc/model.hpp"
#include "coopalloc/util.hpp"

namespace coopalloc {

namespace {

constexpr double kTolInner = 1e-10;   // budget slack treated as exact
constexpr double kBisectRel = 1e-12;  // multiplier bisection width, relative
constexpr int kBisectMax = 200;
constexpr double kWeightCap = 1e12;   // beyond this a budget cannot be met
constexpr int kSweepMax = 18;

// Root of nu * f'(y) + mu = 0 where f is the received-power curve of demand r.
// f' is strictly increasing from -inf to 0, so the root is unique. Newton with
// a maintained bracket; falls back to bisection steps when Newton leaves it.
double stationarity_root(double r, double nu, double mu, double seed) {
    const double target = -mu / nu;
    double lo, hi;
    double y = seed > 0.0 ? seed : r;
    if (!(y > 0.0) || !std::isfinite(y)) y = std::max(r, 1e-12);
    if (received_power_needed_d1(r, y) < target) {
        lo = y;
        hi = y;
        for (int k = 0; k < 2000; ++k) {
            hi *= 2.0;
            if (received_power_needed_d1(r, hi) >= target) break;
            lo = hi;
            if (hi > 1e280) return hi;  // mu effectively zero
        }
    } else {
        hi = y;
        lo = y;
        for (int k = 0; k < 2000; ++k) {
            lo *= 0.5;
            if (received_power_needed_d1(r, lo) < target) break;
            hi = lo;
            if (lo < 1e-280) return lo;
        }
    }
    y = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const double phi = nu * received_power_needed_d1(r, y) + mu;
        if (phi > 0.0)
            hi = y;
        else if (phi < 0.0)
            lo = y;
        else
            return y;
        const double dphi = nu * received_power_needed_d2(r, y);
        double step = dphi > 0.0 ? y - phi / dphi : lo;
        if (!(step > lo) || !(step < hi)) step = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * hi) break;
        y = step;
    }
    return 0.5 * (lo + hi);
}

struct InnerState {
    std::vector<double> nu;             // per-UE marginal power cost
    std::vector<std::size_t> assign;    // per-UE cheapest serving BS
    std::vector<double> y;
    double mu = 1.0;
};

class CandidateSolver {
public:
    CandidateSolver(const Instance& inst, const std::vector<std::vector<std::size_t>>& serving,
                    std::vector<char> enforced, double budget, const Tolerances& tol,
                    int max_passes = kSweepMax)
        : inst_(inst), serving_(serving), enforced_(std::move(enforced)), budget_(budget), tol_(tol),
          max_passes_(max_passes) {
        const std::size_t m = inst.num_bs(), n = inst.num_ue();
        w_.assign(m, 1.0);
        st_.nu.assign(n, 0.0);
        st_.assign.assign(n, 0);
        st_.y.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (serving[j].size() > 1) multi_.push_back(j);
    }

    enum class Status { ok, infeasible, stalled };

    Status run() {
        // Total budget reachable by the served BSs; infinite when a relaxed BS
        // can serve.
        double capacity = 0.0;
        bool capacity_bounded = true;
        {
            std::vector<char> touched(w_.size(), 0);
            for (std::size_t j = 0; j < serving_.size(); ++j)
                for (std::size_t i : serving_[j])
                    if (inst_.gamma(i, j) > 0.0) touched[i] = 1;
            for (std::size_t i = 0; i < w_.size(); ++i) {
                if (!touched[i]) continue;
                if (!enforced_[i])
                    capacity_bounded = false;
                else
                    capacity += budget_;
            }
        }
        inner_solve();
        bool any_enforced = false;
        for (char e : enforced_) any_enforced = any_enforced || e;
        if (!any_enforced) return Status::ok;  // free assignment is optimal
        for (int pass = 0; pass < max_passes_; ++pass) {
            if (capacity_bounded) {
                // Lagrangian lower bound above the joint budget: infeasible.
                const std::vector<double> d = loads();
                double q = 0.0;
                for (std::size_t i = 0; i < d.size(); ++i) {
                    q += d[i];
                    if (enforced_[i]) q += (w_[i] - 1.0) * (d[i] - budget_);
                }
                if (q > capacity + 1e-10) return Status::infeasible;
            }
            if (duality_gap_closed()) return Status::ok;
            bool changed = false;
            for (std::size_t i = 0; i < w_.size(); ++i) {
                if (!enforced_[i]) continue;
                std::vector<double> d = loads();
                if (d[i] > budget_ + kTolInner) {
                    const std::vector<std::size_t> before = st_.assign;
                    if (!bisect_weight_up(i)) return Status::infeasible;
                    changed = true;
                    // A UE that left this BS during the bisection marks an
                    // assignment tie. Two coordinates trading the same UE on
                    // consecutive adjustments creep toward a cost tie at
                    // bisection precision; jump there directly instead.
                    std::size_t moved = serving_.size();
                    for (std::size_t j = 0; j < st_.assign.size(); ++j)
                        if (before[j] == i && st_.assign[j] != i) moved = j;
                    if (moved < serving_.size()) {
                        if (flip_ue_ == moved && flip_coord_ != i) {
                            tie_bisection(moved, flip_coord_, i);
                            flip_ue_ = serving_.size();
                        } else {
                            flip_ue_ = moved;
                            flip_coord_ = i;
                        }
                    }
                } else if (w_[i] > 1.0 + 1e-14 && d[i] < budget_ - kTolInner) {
                    // A load jump just below this weight means the multiplier
                    // is pinned at an assignment tie; the assembly recovers the
                    // split there. Only genuinely slack weights are lowered.
                    const double save = w_[i];
                    w_[i] = save * (1.0 - 1e-9);
                    inner_solve();
                    const double low_side = load_of(i);
                    w_[i] = save;
                    inner_solve();
                    if (low_side > budget_ + kTolInner) continue;
                    bisect_weight_down(i);
                    changed = true;
                }
            }
            if (!changed) return Status::ok;
        }
        return Status::stalled;
    }

    // Raise the common marginal cost of UE u via BSs a and b with their
    // weights tied, maximizing the dual along the ray by golden section.
    // This reaches degenerate multi-binding optima that per-coordinate
    // bisection can only approach at bracket precision.
    void tie_bisection(std::size_t u, std::size_t a, std::size_t b) {
        const double ga = inst_.gamma(a, u), gb = inst_.gamma(b, u);
        if (ga <= 0.0 || gb <= 0.0) return;
        auto dual_at = [&](double theta) {
            w_[a] = std::max(1.0, theta * ga);
            w_[b] = std::max(1.0, theta * gb);
            inner_solve();
            const std::vector<double> d = loads();
            double q = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                q += d[i];
                if (enforced_[i]) q += (w_[i] - 1.0) * (d[i] - budget_);
            }
            return q;
        };
        double lo = std::max(w_[a] / ga, w_[b] / gb);
        double q_lo = dual_at(lo);
        double hi = lo, q_hi = q_lo;
        for (int k = 0; k < 60; ++k) {
            const double next = hi * 2.0;
            if (next * std::max(ga, gb) > kWeightCap) break;
            const double q_next = dual_at(next);
            if (q_next < q_hi) {
                hi = next;  // past the peak
                break;
            }
            hi = next;
            q_hi = q_next;
        }
        const double phi = 0.6180339887498949;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = dual_at(x1), f2 = dual_at(x2);
        for (int it = 0; it < 90 && hi - lo > kBisectRel * hi; ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = dual_at(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = dual_at(x1);
            }
        }
        dual_at(0.5 * (lo + hi));
    }

    // Primal assembly meets the Lagrangian bound: the dual point is optimal
    // and the assembled allocation is the candidate optimum.
    bool duality_gap_closed() {
        const std::vector<double> d = loads();
        double q = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            q += d[i];
            if (enforced_[i]) q += (w_[i] - 1.0) * (d[i] - budget_);
        }
        Allocation scratch;
        if (!assemble(scratch)) return false;
        return scratch.z <= q + 1e-7 * std::max(1.0, std::abs(q));
    }

    // Builds the allocation at the current dual point: closed-form powers for
    // singly served UEs, an exact small LP for the joint splits.
    bool assemble(Allocation& out) const {
        const std::size_t m = inst_.num_bs(), n = inst_.num_ue();
        out.x = Matrix(m, n, 0.0);
        out.y = st_.y;
        std::vector<double> base(m, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (serving_[j].size() != 1) continue;
            const std::size_t i = serving_[j][0];
            const double need = received_power_needed(inst_.rate[j], st_.y[j]);
            out.x(i, j) = need / inst_.gamma(i, j);
            base[i] += out.x(i, j);
        }
        if (!multi_.empty()) {
            MiniLp lp;
            std::vector<std::pair<std::size_t, std::size_t>> vars;  // (ue, bs)
            for (std::size_t j : multi_)
                for (std::size_t i : serving_[j])
                    if (inst_.gamma(i, j) > 0.0) vars.emplace_back(j, i);
            lp.c.assign(vars.size(), 1.0);
            for (std::size_t j : multi_) {
                std::vector<double> row(vars.size(), 0.0);
                for (std::size_t v = 0; v < vars.size(); ++v)
                    if (vars[v].first == j) row[v] = inst_.gamma(vars[v].second, j);
                lp.a_eq.push_back(std::move(row));
                lp.b_eq.push_back(received_power_needed(inst_.rate[j], st_.y[j]));
            }
            for (std::size_t i = 0; i < m; ++i) {
                if (!enforced_[i]) continue;
                bool touches = false;
                std::vector<double> row(vars.size(), 0.0);
                for (std::size_t v = 0; v < vars.size(); ++v)
                    if (vars[v].second == i) {
                        row[v] = 1.0;
                        touches = true;
                    }
                if (!touches) continue;
                lp.a_ub.push_back(std::move(row));
                lp.b_ub.push_back(budget_ - base[i]);
            }
            MiniLp::Result res = lp.solve(1e-11);
            if (!res.feasible) return false;
            for (std::size_t v = 0; v < vars.size(); ++v)
                out.x(vars[v].second, vars[v].first) = res.x[v];
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (!enforced_[i]) continue;
            double used = 0.0;
            for (std::size_t j = 0; j < n; ++j) used += out.x(i, j);
            if (used > budget_ + tol_.eq) return false;
        }
        out.recompute_z();
        return true;
    }

    const InnerState& state() const { return st_; }
    const std::vector<double>& weights() const { return w_; }

    // Objective of the free assignment at the current duals: exact when no
    // budget is enforced (every UE rides its cheapest serving BS).
    double free_value() const {
        double z = 0.0;
        for (double v : loads()) z += v;
        return z;
    }

    void fill_detail(const Allocation& alloc, SolveDetail& detail) const {
        const std::size_t m = inst_.num_bs(), n = inst_.num_ue();
        detail.dual.mu = st_.mu;
        detail.dual.w = w_;
        detail.binding.assign(m, 0);
        detail.kkt_stationarity = 0.0;
        detail.kkt_compslack = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double used = 0.0;
            for (std::size_t j = 0; j < n; ++j) used += alloc.x(i, j);
            if (std::abs(used - budget_) <= 64 * tol_.eq) detail.binding[i] = 1;
            if (enforced_[i])
                detail.kkt_compslack =
                    std::max(detail.kkt_compslack, std::abs((w_[i] - 1.0) * (budget_ - used)));
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (st_.y[j] <= tol_.y_min * 2.0) continue;
            const double resid =
                st_.nu[j] * received_power_needed_d1(inst_.rate[j], st_.y[j]) + st_.mu;
            detail.kkt_stationarity =
                std::max(detail.kkt_stationarity, std::abs(resid) / std::max(st_.mu, 1e-300));
        }
    }

private:
    void inner_solve() {
        const std::size_t n = inst_.num_ue();
        for (std::size_t j = 0; j < n; ++j) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t who = serving_[j][0];
            for (std::size_t i : serving_[j]) {
                const double g = inst_.gamma(i, j);
                if (g <= 0.0) continue;
                const double cost = w_[i] / g;
                if (cost < best) {
                    best = cost;
                    who = i;
                }
            }
            st_.nu[j] = best;
            st_.assign[j] = who;
        }
        // Bracket mu so that sum(y) crosses 1, then bisect. sum(y) is strictly
        // decreasing in mu.
        double lo = st_.mu, hi = st_.mu;
        if (spectrum_used(st_.mu) > 1.0) {
            for (int k = 0; k < 2000 && spectrum_used(hi) > 1.0; ++k) {
                lo = hi;
                hi *= 4.0;
                if (hi > 1e290) break;
            }
        } else {
            for (int k = 0; k < 2000 && spectrum_used(lo) < 1.0; ++k) {
                hi = lo;
                lo *= 0.25;
                if (lo < 1e-290) break;
            }
        }
        for (int it = 0; it < kBisectMax && hi - lo > kBisectRel * lo; ++it) {
            const double mid = std::sqrt(lo * hi);
            const double s = spectrum_used(mid);
            if (s > 1.0)
                lo = mid;
            else
                hi = mid;
            if (std::abs(s - 1.0) < 1e-13) break;
        }
        st_.mu = std::sqrt(lo * hi);
        double total = spectrum_used(st_.mu);
        // Exact spectrum equality; skip when a share sits on the floor.
        bool floored = false;
        for (double v : st_.y)
            if (v <= tol_.y_min) floored = true;
        if (!floored && total > 0.0)
            for (double& v : st_.y) v /= total;
    }

    double spectrum_used(double mu) {
        double s = 0.0;
        for (std::size_t j = 0; j < st_.y.size(); ++j) {
            double y = stationarity_root(inst_.rate[j], st_.nu[j], mu, st_.y[j]);
            y = std::max(y, tol_.y_min);
            st_.y[j] = y;
            s += y;
        }
        return s;
    }

    std::vector<double> loads() const {
        std::vector<double> d(inst_.num_bs(), 0.0);
        for (std::size_t j = 0; j < st_.y.size(); ++j) {
            const std::size_t i = st_.assign[j];
            d[i] += received_power_needed(inst_.rate[j], st_.y[j]) / inst_.gamma(i, j);
        }
        return d;
    }

    double load_of(std::size_t i) { return loads()[i]; }

    bool bisect_weight_up(std::size_t i) {
        double lo = w_[i];
        double hi = std::max(2.0, 2.0 * w_[i]);
        while (true) {
            w_[i] = hi;
            inner_solve();
            if (load_of(i) <= budget_) break;
            lo = hi;
            hi *= 2.0;
            if (hi > kWeightCap) return false;  // irreducible load above budget
        }
        for (int it = 0; it < kBisectMax && hi - lo > kBisectRel * hi; ++it) {
            const double mid = std::sqrt(lo * hi);
            w_[i] = mid;
            inner_solve();
            if (load_of(i) > budget_)
                lo = mid;
            else
                hi = mid;
        }
        w_[i] = hi;
        inner_solve();
        return true;
    }

    void bisect_weight_down(std::size_t i) {
        double hi = w_[i];  // load below budget here
        double lo = 1.0;
        w_[i] = lo;
        inner_solve();
        if (load_of(i) <= budget_) return;  // multiplier no longer needed
        for (int it = 0; it < kBisectMax && hi - lo > kBisectRel * hi; ++it) {
            const double mid = std::sqrt(lo * hi);
            w_[i] = mid;
            inner_solve();
            if (load_of(i) > budget_)
                lo = mid;
            else
                hi = mid;
        }
        w_[i] = hi;
        inner_solve();
    }

    const Instance& inst_;
    const std::vector<std::vector<std::size_t>>& serving_;
    std::vector<char> enforced_;
    double budget_;
    Tolerances tol_;
    int max_passes_ = kSweepMax;
    std::size_t flip_ue_ = SIZE_MAX;     // UE moved by the last up-bisection
    std::size_t flip_coord_ = SIZE_MAX;  // coordinate it moved away from
    std::vector<double> w_;
    std::vector<std::size_t> multi_;
    InnerState st_;
};

std::vector<char> enforced_mask(const FixedAssocProblem& fp) {
    std::vector<char> enforced(fp.inst->num_bs(), 1);
    for (std::size_t i : fp.relaxed) enforced[i] = 0;
    return enforced;
}

// One solve attempt at a fixed budget level. Returns true with a filled
// allocation when the dual sweep and the assembly both succeed.
bool solve_at_level(const Instance& inst, const std::vector<std::vector<std::size_t>>& serving,
                    const std::vector<char>& enforced, double level, const Tolerances& tol,
                    Allocation& out, CandidateSolver::Status& status,
                    SolveDetail* detail, int max_passes = kSweepMax) {
    CandidateSolver solver(inst, serving, enforced, level, tol, max_passes);
    status = solver.run();
    if (status == CandidateSolver::Status::infeasible) return false;
    if (!solver.assemble(out)) return false;
    if (detail) solver.fill_detail(out, *detail);
    return status == CandidateSolver::Status::ok;
}

// Smallest budget level admitting a valid allocation, by bisection.
double minmax_level(const Instance& inst, const std::vector<std::vector<std::size_t>>& serving,
                    const std::vector<char>& enforced, const Tolerances& tol, Allocation& best,
                    bool& have_alloc) {
    constexpr int kProbePasses = 10;
    CandidateSolver::Status status;
    Allocation trial;
    double lo = 0.0, hi = 1.0;
    have_alloc = false;
    if (solve_at_level(inst, serving, enforced, hi, tol, trial, status, nullptr, kProbePasses)) {
        best = trial;
        have_alloc = true;
        lo = 0.0;
        double probe = 0.5;
        while (probe > 1e-9 &&
               solve_at_level(inst, serving, enforced, probe, tol, trial, status, nullptr,
                              kProbePasses)) {
            best = trial;
            hi = probe;
            probe *= 0.5;
        }
        lo = probe;
        if (probe <= 1e-9) return hi;
    } else {
        lo = 1.0;
        hi = 2.0;
        while (!solve_at_level(inst, serving, enforced, hi, tol, trial, status, nullptr,
                               kProbePasses)) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e9) return hi;  // demands unmeetable at any sane level
        }
        best = trial;
        have_alloc = true;
    }
    for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (solve_at_level(inst, serving, enforced, mid, tol, trial, status, nullptr,
                           kProbePasses)) {
            best = trial;
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

FixedAssocProblem FixedAssocProblem::from_association(const Instance& inst,
                                                      const Association& assoc) {
    FixedAssocProblem fp;
    fp.inst = &inst;
    fp.serving = assoc.serving;
    return fp;
}

void FixedAssocProblem::validate() const {
    if (!inst) throw std::invalid_argument("problem: instance missing");
    if (serving.size() != inst->num_ue()) throw std::invalid_argument("problem: serving size");
    for (std::size_t j = 0; j < serving.size(); ++j) {
        if (serving[j].empty()) throw std::invalid_argument("problem: UE without a serving BS");
        double best = 0.0;
        for (std::size_t i : serving[j]) {
            if (i >= inst->num_bs()) throw std::invalid_argument("problem: BS index out of range");
            best = std::max(best, inst->gamma(i, j));
        }
        if (best <= 0.0) throw std::invalid_argument("problem: UE served only by dead links");
    }
    for (std::size_t i : capped)
        for (std::size_t r : relaxed)
            if (i == r) throw std::invalid_argument("problem: capped and relaxed overlap");
    if (budget <= 0.0) throw std::invalid_argument("problem: budget must be positive");
}

BandwidthShare per_ue_bandwidth(double r_prime, double gamma_eff, double w_eff, double mu,
                                const Tolerances& tol) {
    if (r_prime <= 0.0 || gamma_eff <= 0.0 || w_eff <= 0.0 || mu <= 0.0)
        throw std::domain_error("per_ue_bandwidth: all inputs must be positive");
    const double nu = w_eff / gamma_eff;
    BandwidthShare out;
    // Saturation: the stationarity point sits at or below the floor.
    if (nu * received_power_needed_d1(r_prime, tol.y_min) + mu >= 0.0) {
        out.y = tol.y_min;
        out.saturated = true;
        return out;
    }
    out.y = stationarity_root(r_prime, nu, mu, r_prime);
    return out;
}

Allocation solve_fixed(const FixedAssocProblem& fp) {
    SolveDetail detail;
    return solve_fixed(fp, detail);
}

namespace {
Allocation solve_fixed_impl(const FixedAssocProblem& fp, SolveDetail& detail, bool allow_fallback);
}

Allocation solve_fixed(const FixedAssocProblem& fp, SolveDetail& detail) {
    return solve_fixed_impl(fp, detail, true);
}

namespace {
Allocation solve_fixed_impl(const FixedAssocProblem& fp, SolveDetail& detail,
                            bool allow_fallback) {
    fp.validate();
    const Instance& inst = *fp.inst;
    const Tolerances tol;
    std::vector<char> enforced = enforced_mask(fp);

    Allocation alloc;
    CandidateSolver::Status status;
    bool ok = solve_at_level(inst, fp.serving, enforced, fp.budget, tol, alloc, status, &detail,
                             allow_fallback ? kSweepMax : 8);
    detail.used_minmax_fallback = false;

    if (!ok) {
        if (status == CandidateSolver::Status::infeasible) {
            // Cap-out: some BS's irreducible load exceeds its budget. Report
            // the budget-free optimum as the best effort.
            std::vector<char> none(inst.num_bs(), 0);
            CandidateSolver::Status st2;
            solve_at_level(inst, fp.serving, none, fp.budget, tol, alloc, st2, &detail);
            alloc.feasible = false;
            return alloc;
        }
        if (!allow_fallback) {
            alloc.x = Matrix(inst.num_bs(), inst.num_ue(), 0.0);
            alloc.y.assign(inst.num_ue(), 0.0);
            alloc.feasible = false;
            return alloc;
        }
        // Degenerate or stuck cases: fall back to the min-max level search.
        Allocation fb;
        bool have = false;
        const double level = minmax_level(inst, fp.serving, enforced, tol, fb, have);
        detail.used_minmax_fallback = true;
        if (!have) {
            if (status == CandidateSolver::Status::stalled)
                throw solver_error("solve_fixed: dual sweep stalled and no fallback level found");
            alloc.x = Matrix(inst.num_bs(), inst.num_ue(), 0.0);
            alloc.y.assign(inst.num_ue(), 0.0);
            alloc.feasible = false;
            return alloc;
        }
        alloc = fb;
        alloc.feasible = level <= fp.budget + tol.eq && allocation_feasible(inst, alloc, tol);
        return alloc;
    }

    alloc.feasible = allocation_feasible(inst, alloc, tol);
    detail.capped_unbound = false;
    for (std::size_t i : fp.capped)
        if (!detail.binding[i]) detail.capped_unbound = true;
    return alloc;
}
}  // namespace

double budget_free_bound(const FixedAssocProblem& fp) {
    fp.validate();
    const Tolerances tol;
    std::vector<char> enforced(fp.inst->num_bs(), 0);
    CandidateSolver solver(*fp.inst, fp.serving, enforced, fp.budget, tol);
    solver.run();  // no enforced budgets: one inner solve
    return solver.free_value();
}

double coarse_free_bound(const FixedAssocProblem& fp, int iterations) {
    const Instance& inst = *fp.inst;
    const std::size_t n = inst.num_ue();
    std::vector<double> nu(n);
    for (std::size_t j = 0; j < n; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i : fp.serving[j]) {
            const double g = inst.gamma(i, j);
            if (g > 0.0) best = std::min(best, 1.0 / g);
        }
        nu[j] = best;
    }
    std::vector<double> y(n, 0.0);
    auto spectrum = [&](double mu) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = stationarity_root(inst.rate[j], nu[j], mu, y[j]);
            s += y[j];
        }
        return s;
    };
    double lo = 1.0, hi = 1.0;
    if (spectrum(1.0) > 1.0) {
        for (int k = 0; k < 400 && spectrum(hi) > 1.0; ++k) {
            lo = hi;
            hi *= 8.0;
            if (hi > 1e280) break;
        }
    } else {
        for (int k = 0; k < 400 && spectrum(lo) < 1.0; ++k) {
            hi = lo;
            lo *= 0.125;
            if (lo < 1e-280) break;
        }
    }
    for (int it = 0; it < iterations; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (spectrum(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    const double mu = std::sqrt(lo * hi);
    double q = -mu;
    for (std::size_t j = 0; j < n; ++j) {
        y[j] = stationarity_root(inst.rate[j], nu[j], mu, y[j]);
        q += nu[j] * received_power_needed(inst.rate[j], y[j]) + mu * y[j];
    }
    return q;
}

RelaxedResult solve_relaxed(const FixedAssocProblem& fp) {
    SolveDetail detail;
    return solve_relaxed(fp, detail);
}

RelaxedResult solve_relaxed(const FixedAssocProblem& fp, SolveDetail& detail) {
    if (fp.relaxed.empty())
        throw std::invalid_argument("solve_relaxed: a relaxed BS must be named");
    const Tolerances tol;
    RelaxedResult out;
    out.alloc = solve_fixed_impl(fp, detail, false);
    out.bs_power.assign(fp.inst->num_bs(), 0.0);
    for (std::size_t i = 0; i < fp.inst->num_bs(); ++i)
        for (std::size_t j = 0; j < fp.inst->num_ue(); ++j) out.bs_power[i] += out.alloc.x(i, j);
    out.enforced_ok = true;
    std::vector<char> is_relaxed(fp.inst->num_bs(), 0);
    for (std::size_t i : fp.relaxed) is_relaxed[i] = 1;
    for (std::size_t i = 0; i < fp.inst->num_bs(); ++i)
        if (!is_relaxed[i] && out.bs_power[i] > fp.budget + tol.eq) out.enforced_ok = false;
    // rate and spectrum residuals must hold regardless of the dropped budget
    if (out.enforced_ok) {
        EvalReport rep = evaluate(*fp.inst, out.alloc);
        if (std::abs(rep.spectrum_residual) > tol.eq) out.enforced_ok = false;
        for (std::size_t j = 0; j < fp.inst->num_ue() && out.enforced_ok; ++j) {
            const double need = received_power_needed(fp.inst->rate[j], out.alloc.y[j]);
            if (std::abs(rep.rate_residuals[j]) > tol.rate_rel * std::max(1.0, need))
                out.enforced_ok = false;
        }
    }
    return out;
}

ProbeResult feasibility_probe(const Instance& inst, const Association& assoc) {
    const Tolerances tol;
    FixedAssocProblem fp = FixedAssocProblem::from_association(inst, assoc);
    fp.validate();
    std::vector<char> enforced(inst.num_bs(), 1);
    Allocation best;
    bool have = false;
    ProbeResult res;
    res.min_max_power = minmax_level(inst, fp.serving, enforced, tol, best, have);
    res.feasible = have && res.min_max_power <= 1.0 + tol.eq;
    return res;
}

}  // namespace coopalloc
