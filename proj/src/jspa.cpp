#include "coopalloc/jspa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "coopalloc/model.hpp"

namespace coopalloc {

namespace {

constexpr double kBudgetTol = 1e-9;
constexpr double kCullMargin = 1e-9;
constexpr double kRelaxedEqTol = 1e-9;

std::string serving_signature(const std::vector<std::vector<std::size_t>>& serving) {
    std::string s;
    s.reserve(serving.size() * 2);
    for (const auto& lst : serving) {
        for (std::size_t i : lst) s += static_cast<char>('a' + i);
        s += '|';
    }
    return s;
}

struct Incumbent {
    bool found = false;
    double z = std::numeric_limits<double>::infinity();
    Allocation alloc;
    BoundaryVector bv;
    // No candidate can beat min(best seen, total budget M).
    double cull_level(double m) const { return found ? std::min(z, m) : m; }
};

// Wideband infimum r*ln2/gamma of the singly served UEs per BS: a load below
// which no bandwidth split can go. Any BS whose sum exceeds its budget makes
// the serving structure infeasible outright.
bool wideband_overloaded(const Instance& inst,
                         const std::vector<std::vector<std::size_t>>& serving) {
    constexpr double kLn2 = 0.69314718055994530942;
    std::vector<double> wb(inst.num_bs(), 0.0);
    for (std::size_t j = 0; j < serving.size(); ++j) {
        if (serving[j].size() != 1) continue;
        const std::size_t i = serving[j][0];
        wb[i] += inst.rate[j] * kLn2 / inst.gamma(i, j);
        if (wb[i] > 1.0 + 1e-9) return true;
    }
    return false;
}

// Arithmetic-only total lower bound: every UE needs at least its wideband
// infimum from the best link it is allowed to use.
double wideband_total(const Instance& inst,
                      const std::vector<std::vector<std::size_t>>& serving) {
    constexpr double kLn2 = 0.69314718055994530942;
    double total = 0.0;
    for (std::size_t j = 0; j < serving.size(); ++j) {
        double best = 0.0;
        for (std::size_t i : serving[j]) best = std::max(best, inst.gamma(i, j));
        if (best <= 0.0) return std::numeric_limits<double>::infinity();
        total += inst.rate[j] * kLn2 / best;
    }
    return total;
}

void consider(Incumbent& inc, const Allocation& alloc, const BoundaryVector& bv) {
    if (!alloc.feasible) return;
    if (!inc.found || alloc.z < inc.z) {
        inc.found = true;
        inc.z = alloc.z;
        inc.alloc = alloc;
        inc.bv = bv;
    }
}

// Boundary vector of the best-SNR clustering: each pair cut at its initial
// boundary, nothing designated joint.
BoundaryVector initial_boundaries(const PairOrders& orders) {
    BoundaryVector bv;
    bv.cuts.resize(orders.pairs.count());
    for (std::size_t p = 0; p < bv.cuts.size(); ++p)
        bv.cuts[p] = PairCut{orders.by_pair[p].initial_boundary, false};
    return bv;
}

struct ContextInfo {
    PairContext ctx;
    std::vector<std::size_t> joint_designees;  // distinct, from context pairs
    bool consistent = true;
};

// Resolve which UEs the non-focus BSs settle under the context cuts. Only
// pairs other than the focus pair matter: ownership by a non-focus BS never
// depends on the focus cut.
ContextInfo resolve_context(const Instance& inst, const PairOrders& orders, std::size_t i1,
                            std::size_t i2, const BoundaryVector& bv) {
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    const std::size_t focal = orders.pairs.index(i1, i2);
    ContextInfo info;
    info.ctx.serving.assign(n, {});

    auto kept_by = [&](std::size_t i, std::size_t i2_, std::size_t u) {
        const std::size_t a = std::min(i, i2_), b = std::max(i, i2_);
        const std::size_t p = orders.pairs.index(a, b);
        const PairCut& cut = bv.cuts[p];
        const std::size_t pos = orders.by_pair[p].pos[u];
        if (i == a) return pos + (cut.joint ? 1 : 0) <= cut.cut;
        return pos >= cut.cut + 1;
    };

    std::vector<std::vector<std::size_t>> joint_pairs(n);
    for (std::size_t p = 0; p < bv.cuts.size(); ++p) {
        if (p == focal || !bv.cuts[p].joint) continue;
        joint_pairs[orders.by_pair[p].order[bv.cuts[p].cut - 1]].push_back(p);
    }

    std::vector<char> seen(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        std::size_t owner = m;
        for (std::size_t b = 0; b < m && owner == m; ++b) {
            if (b == i1 || b == i2) continue;
            bool all = true;
            for (std::size_t o = 0; o < m && all; ++o)
                if (o != b) all = kept_by(b, o, u);
            if (all) owner = b;
        }
        if (owner < m) {
            if (inst.gamma(owner, u) <= 0.0) {
                info.consistent = false;
                return info;
            }
            info.ctx.serving[u] = {owner};
        } else if (!joint_pairs[u].empty()) {
            std::vector<std::size_t> servers;
            for (std::size_t p : joint_pairs[u]) {
                auto [a, b] = orders.pairs.pair(p);
                servers.push_back(a);
                servers.push_back(b);
            }
            std::sort(servers.begin(), servers.end());
            servers.erase(std::unique(servers.begin(), servers.end()), servers.end());
            double best = 0.0;
            for (std::size_t i : servers) best = std::max(best, inst.gamma(i, u));
            if (best <= 0.0) {
                info.consistent = false;
                return info;
            }
            info.ctx.serving[u] = servers;
            if (!seen[u]) {
                seen[u] = 1;
                info.joint_designees.push_back(u);
            }
        } else {
            info.ctx.remaining.push_back(u);
        }
    }
    return info;
}

}  // namespace

PairBounds pair_search_bounds(const Instance& inst, const PairOrders& orders, std::size_t i1,
                              std::size_t i2, const PairContext& ctx,
                              RelaxedResult* relaxed_first, RelaxedResult* relaxed_second) {
    const PairOrder& po = orders.of(i1, i2);
    PairBounds out;

    std::vector<std::size_t> rem_order;  // remaining UEs in pair order
    std::vector<char> is_rem(inst.num_ue(), 0);
    for (std::size_t u : ctx.remaining) is_rem[u] = 1;
    for (std::size_t u : po.order)
        if (is_rem[u]) rem_order.push_back(u);
    const std::size_t n_rem = rem_order.size();

    std::size_t c0 = 0;
    for (std::size_t u : rem_order)
        if (inst.gamma(i1, u) >= inst.gamma(i2, u)) ++c0;

    FixedAssocProblem fp;
    fp.inst = &inst;
    fp.serving = ctx.serving;
    for (std::size_t u : ctx.remaining)
        fp.serving[u] = {inst.gamma(i1, u) >= inst.gamma(i2, u) ? i1 : i2};

    fp.relaxed = {i1};
    RelaxedResult s1 = solve_relaxed(fp);
    fp.relaxed = {i2};
    RelaxedResult s2 = solve_relaxed(fp);
    if (relaxed_first) *relaxed_first = s1;
    if (relaxed_second) *relaxed_second = s2;

    out.lo = 0;
    out.hi = n_rem;
    if (!s1.enforced_ok && !s2.enforced_ok) {
        // kept budgets failed with either focus dropped: nothing to learn
        out.full_range = true;
        return out;
    }

    if (s1.enforced_ok && s2.enforced_ok) {
        bool equal = true;
        for (std::size_t i = 0; i < inst.num_bs() && equal; ++i)
            equal = std::abs(s1.bs_power[i] - s2.bs_power[i]) <= kRelaxedEqTol;
        if (equal && s1.alloc.feasible) {
            out.already_optimal = true;
            out.lo = out.hi = c0;
            return out;
        }
    }

    const bool over1 = s1.bs_power[i1] > 1.0 + kBudgetTol;
    const bool over2 = s2.bs_power[i2] > 1.0 + kBudgetTol;

    auto crossing_lo = [&]() -> std::size_t {
        double cum = 0.0;
        for (std::size_t u = 0; u < inst.num_ue(); ++u)
            if (!is_rem[u]) cum += s1.alloc.x(i1, u);
        for (std::size_t p = 0; p < n_rem; ++p) {
            cum += s1.alloc.x(i1, rem_order[p]);
            if (cum > 1.0 + kBudgetTol) return p + 1;
        }
        return n_rem + 1;  // no crossing: numerical disagreement
    };
    auto crossing_hi = [&]() -> std::size_t {
        double cum = 0.0;
        for (std::size_t u = 0; u < inst.num_ue(); ++u)
            if (!is_rem[u]) cum += s2.alloc.x(i2, u);
        for (std::size_t p = n_rem; p-- > 0;) {
            cum += s2.alloc.x(i2, rem_order[p]);
            if (cum > 1.0 + kBudgetTol) return p + 1;
        }
        return 0;
    };

    // Each usable relaxed solve contributes its half of the range; a side
    // whose kept budgets failed contributes nothing.
    if (s1.enforced_ok && s2.enforced_ok && !over1 && !over2) {
        out.lo = out.hi = c0;
    } else {
        if (s1.enforced_ok) {
            if (over1) {
                const std::size_t j1 = crossing_lo();
                if (j1 > n_rem) {
                    out.full_range = true;
                    return out;
                }
                out.lo = std::max(out.lo, j1);
            } else {
                out.lo = std::max(out.lo, c0);
            }
        }
        if (s2.enforced_ok) {
            if (over2) {
                const std::size_t j2 = crossing_hi();
                if (j2 == 0) {
                    out.full_range = true;
                    return out;
                }
                out.hi = std::min(out.hi, j2);
                if (s1.enforced_ok && !over1) out.lo = std::max(out.lo, std::min(c0 + 1, n_rem));
            } else {
                out.hi = std::min(out.hi, c0);
            }
        }
    }
    if (out.lo > out.hi) {
        out.full_range = true;
        out.lo = 0;
        out.hi = n_rem;
    }
    return out;
}

OptimizeResult optimize_detailed(const Instance& inst) {
    inst.validate();
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    OptimizeResult res;

    if (m == 1) {
        FixedAssocProblem fp;
        fp.inst = &inst;
        fp.serving.assign(n, {0});
        res.alloc = solve_fixed(fp);
        res.found = res.alloc.feasible;
        res.stats.candidates_solved = 1;
        res.boundaries.cuts.clear();
        return res;
    }

    PairOrders orders(inst);
    Incumbent inc;
    OptimizeStats& stats = res.stats;
    std::map<std::string, double> solved;  // serving signature -> z (inf: failed)

    auto attempt = [&](const BoundaryVector& bv, const Association& assoc) {
        const std::string sig = serving_signature(assoc.serving);
        auto it = solved.find(sig);
        if (it != solved.end()) {
            ++stats.candidates_deduped;
            return;
        }
        FixedAssocProblem fp = FixedAssocProblem::from_association(inst, assoc);
        const double level = inc.cull_level(static_cast<double>(inst.num_bs()));
        if (wideband_overloaded(inst, assoc.serving) ||
            wideband_total(inst, assoc.serving) > level + kCullMargin) {
            ++stats.candidates_culled;
            solved[sig] = std::numeric_limits<double>::infinity();
            return;
        }
        const double lb = coarse_free_bound(fp);
        if (lb > level + kCullMargin) {
            ++stats.candidates_culled;
            solved[sig] = lb;
            return;
        }
        Allocation alloc = solve_fixed(fp);
        ++stats.candidates_solved;
        solved[sig] = alloc.feasible ? alloc.z : std::numeric_limits<double>::infinity();
        consider(inc, alloc, bv);
    };

    // Best-SNR clustering first: a strong incumbent makes the bound cull bite.
    {
        BoundaryVector bv0 = initial_boundaries(orders);
        Association assoc;
        if (try_associate(inst, orders, bv0, assoc) &&
            verify_association(inst, orders, bv0, assoc))
            attempt(bv0, assoc);
    }

    const std::size_t np = orders.pairs.count();
    const std::uint64_t opts = m == 2 ? n + 1 : 2 * n + 1;
    struct CachedBounds {
        bool culled = false;
        PairBounds bounds;
    };
    std::map<std::string, CachedBounds> bounds_cache;

    for (std::size_t focal = 0; focal < np; ++focal) {
        auto [i1, i2] = orders.pairs.pair(focal);
        std::vector<std::size_t> other;
        for (std::size_t p = 0; p < np; ++p)
            if (p != focal) other.push_back(p);

        std::uint64_t ctx_count = 1;
        for (std::size_t k = 0; k < other.size(); ++k) ctx_count *= opts;

        for (std::uint64_t code = 0; code < ctx_count; ++code) {
            BoundaryVector bv;
            bv.cuts.assign(np, PairCut{0, false});
            std::uint64_t rest = code;
            for (std::size_t k = other.size(); k-- > 0;) {
                const std::uint64_t o = rest % opts;
                rest /= opts;
                PairCut c;
                if (m == 2) {
                    c.cut = static_cast<std::size_t>(o);
                    c.joint = o > 0;
                } else if (o == 0) {
                    c.cut = 0;
                    c.joint = false;
                } else {
                    c.cut = static_cast<std::size_t>((o + 1) / 2);
                    c.joint = (o % 2) == 1;
                }
                bv.cuts[other[k]] = c;
            }
            ContextInfo info = resolve_context(inst, orders, i1, i2, bv);
            if (!info.consistent) continue;
            if (info.joint_designees.size() + 1 > m) continue;

            const std::string ctx_sig =
                std::to_string(focal) + ':' + serving_signature(info.ctx.serving);
            PairBounds bounds;
            auto bit = bounds_cache.find(ctx_sig);
            if (bit != bounds_cache.end()) {
                if (bit->second.culled) {
                    ++stats.context_culled;
                    continue;
                }
                bounds = bit->second.bounds;
            } else {
                // Bound the whole context before paying for the relaxed solves:
                // every candidate in it serves each remaining UE from i1 or i2.
                const double level = inc.cull_level(static_cast<double>(m));
                if (wideband_overloaded(inst, info.ctx.serving)) {
                    ++stats.context_culled;
                    bounds_cache[ctx_sig] = CachedBounds{true, {}};
                    continue;
                }
                {
                    FixedAssocProblem lb_fp;
                    lb_fp.inst = &inst;
                    lb_fp.serving = info.ctx.serving;
                    bool lb_ok = true;
                    for (std::size_t u : info.ctx.remaining) {
                        std::vector<std::size_t> both;
                        if (inst.gamma(i1, u) > 0.0) both.push_back(i1);
                        if (inst.gamma(i2, u) > 0.0) both.push_back(i2);
                        if (both.empty()) lb_ok = false;
                        lb_fp.serving[u] = both;
                    }
                    if (!lb_ok) {
                        bounds_cache[ctx_sig] = CachedBounds{true, {}};
                        continue;
                    }
                    if (wideband_total(inst, lb_fp.serving) > level + kCullMargin) {
                        ++stats.context_culled;
                        bounds_cache[ctx_sig] = CachedBounds{true, {}};
                        continue;
                    }
                    const double lb = coarse_free_bound(lb_fp);
                    if (lb > level + kCullMargin) {
                        ++stats.context_culled;
                        bounds_cache[ctx_sig] = CachedBounds{true, {}};
                        continue;
                    }
                }
                RelaxedResult s1;
                bounds = pair_search_bounds(inst, orders, i1, i2, info.ctx, &s1, nullptr);
                stats.relaxed_solves += 2;
                if (bounds.full_range) ++stats.bound_fallbacks;
                bounds_cache[ctx_sig] = CachedBounds{false, bounds};
                if (bounds.already_optimal) {
                    // the relaxed optimum satisfies all budgets: a candidate as-is
                    BoundaryVector won = bv;
                    std::vector<std::size_t> rem_order;
                    for (std::size_t u : orders.of(i1, i2).order)
                        if (std::find(info.ctx.remaining.begin(), info.ctx.remaining.end(), u) !=
                            info.ctx.remaining.end())
                            rem_order.push_back(u);
                    won.cuts[focal] =
                        bounds.lo == 0 ? PairCut{0, false}
                                       : PairCut{orders.of(i1, i2).pos[rem_order[bounds.lo - 1]], false};
                    consider(inc, s1.alloc, won);
                }
            }
            if (bounds.already_optimal) continue;

            std::vector<std::size_t> rem_order;
            std::vector<char> is_rem(n, 0);
            for (std::size_t u : info.ctx.remaining) is_rem[u] = 1;
            for (std::size_t u : orders.of(i1, i2).order)
                if (is_rem[u]) rem_order.push_back(u);
            const std::size_t n_rem = rem_order.size();
            stats.candidates_unpruned += n_rem + 1;

            const std::size_t lo = bounds.full_range ? 0 : bounds.lo;
            const std::size_t hi = bounds.full_range ? n_rem : std::min(bounds.hi, n_rem);
            for (std::size_t p = lo; p <= hi; ++p) {
                if (p == 0) {
                    bv.cuts[focal] = PairCut{0, false};
                } else {
                    const std::size_t designee = rem_order[p - 1];
                    bv.cuts[focal] = PairCut{orders.of(i1, i2).pos[designee], true};
                    bool fresh = std::find(info.joint_designees.begin(), info.joint_designees.end(),
                                           designee) == info.joint_designees.end();
                    if (fresh && info.joint_designees.size() + 2 > m) continue;  // designee budget
                }
                Association assoc;
                if (!try_associate(inst, orders, bv, assoc)) continue;
                if (!verify_association(inst, orders, bv, assoc)) continue;
                attempt(bv, assoc);
            }
        }
    }

    if (inc.found) {
        res.alloc = inc.alloc;
        res.found = true;
        res.boundaries = inc.bv;
    } else {
        res.alloc.x = Matrix(m, n, 0.0);
        res.alloc.y.assign(n, 0.0);
        res.alloc.feasible = false;
    }
    return res;
}

Allocation optimize(const Instance& inst) { return optimize_detailed(inst).alloc; }

OptimizeResult optimize_two_bs_detailed(const Instance& inst) {
    if (inst.num_bs() != 2)
        throw std::invalid_argument("optimize_two_bs: needs exactly two BSs");
    return optimize_detailed(inst);
}

Allocation optimize_two_bs(const Instance& inst) { return optimize_two_bs_detailed(inst).alloc; }

}  // namespace coopalloc
