#include "coopalloc/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace coopalloc {

double snr_ratio(const Instance& inst, std::size_t i, std::size_t i2, std::size_t j) {
    const double a = inst.gamma(i, j), b = inst.gamma(i2, j);
    if (b > 0.0) return a / b;
    if (a > 0.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("snr_ratio: UE unreachable from both BSs of the pair");
}

std::pair<std::size_t, std::size_t> PairTable::pair(std::size_t idx) const {
    for (std::size_t i1 = 0; i1 + 1 < num_bs; ++i1) {
        const std::size_t row = num_bs - i1 - 1;
        if (idx < row) return {i1, i1 + 1 + idx};
        idx -= row;
    }
    throw std::out_of_range("PairTable: pair index out of range");
}

namespace {

// Descending-ratio comparison via cross products; ties by ascending UE index.
// Returns true when UE j sorts before UE k for pair (a, b).
inline bool ratio_before(const Instance& inst, std::size_t a, std::size_t b,
                         std::size_t j, std::size_t k) {
    const double lhs = inst.gamma(a, j) * inst.gamma(b, k);
    const double rhs = inst.gamma(a, k) * inst.gamma(b, j);
    if (lhs != rhs) return lhs > rhs;
    return j < k;
}

// Is UE u on BS i's side of the pair boundary between i and i2?
inline bool kept(const PairOrders& orders, std::size_t i, std::size_t i2, std::size_t u,
                 const BoundaryVector& bv) {
    const std::size_t a = std::min(i, i2), b = std::max(i, i2);
    const std::size_t p = orders.pairs.index(a, b);
    const PairCut& cut = bv.cuts[p];
    const std::size_t pos = orders.by_pair[p].pos[u];
    if (i == a) return pos + (cut.joint ? 1 : 0) <= cut.cut;
    return pos >= cut.cut + 1;
}

}  // namespace

PairOrders::PairOrders(const Instance& inst) : pairs(inst.num_bs()) {
    const std::size_t n = inst.num_ue();
    by_pair.resize(pairs.count());
    for (std::size_t i1 = 0; i1 < inst.num_bs(); ++i1) {
        for (std::size_t i2 = i1 + 1; i2 < inst.num_bs(); ++i2) {
            PairOrder& po = by_pair[pairs.index(i1, i2)];
            po.order.resize(n);
            for (std::size_t j = 0; j < n; ++j) po.order[j] = j;
            std::sort(po.order.begin(), po.order.end(), [&](std::size_t j, std::size_t k) {
                return ratio_before(inst, i1, i2, j, k);
            });
            po.pos.resize(n);
            for (std::size_t k = 0; k < n; ++k) po.pos[po.order[k]] = k + 1;
            po.initial_boundary = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (inst.gamma(i1, j) >= inst.gamma(i2, j)) ++po.initial_boundary;
        }
    }
}

std::vector<std::vector<std::size_t>> initial_clusters(const Instance& inst) {
    std::vector<std::size_t> all_bs(inst.num_bs()), all_ue(inst.num_ue());
    for (std::size_t i = 0; i < all_bs.size(); ++i) all_bs[i] = i;
    for (std::size_t j = 0; j < all_ue.size(); ++j) all_ue[j] = j;
    return initial_clusters_restricted(inst, all_bs, all_ue);
}

std::vector<std::vector<std::size_t>> initial_clusters_restricted(
    const Instance& inst, const std::vector<std::size_t>& bs_subset,
    const std::vector<std::size_t>& ue_subset) {
    std::vector<std::vector<std::size_t>> out(inst.num_bs());
    for (std::size_t j : ue_subset) {
        std::size_t best = bs_subset.front();
        for (std::size_t i : bs_subset)
            if (inst.gamma(i, j) > inst.gamma(best, j)) best = i;
        out[best].push_back(j);
    }
    return out;
}

bool try_associate(const Instance& inst, const PairOrders& orders, const BoundaryVector& bv,
                   Association& out) {
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    if (bv.cuts.size() != orders.pairs.count())
        throw std::invalid_argument("associate: boundary vector size mismatch");

    out.clusters.assign(m, {});
    out.multi.assign(m, {});
    out.initial = initial_clusters(inst);
    out.serving.assign(n, {});

    // Joint designees per pair.
    std::vector<std::vector<std::size_t>> joint_pairs(n);  // UE -> designating pair ids
    for (std::size_t p = 0; p < bv.cuts.size(); ++p) {
        const PairCut& c = bv.cuts[p];
        if (c.joint) {
            if (c.cut == 0) throw std::invalid_argument("associate: joint flag requires cut >= 1");
            joint_pairs[orders.by_pair[p].order[c.cut - 1]].push_back(p);
        }
    }

    // A UE settles with the unique BS that keeps it against every other BS;
    // failing that it must be a joint designee, else the boundaries are
    // inconsistent. Keeps are mutually exclusive per pair, so the owner is
    // unambiguous and no iteration order can change the outcome.
    for (std::size_t u = 0; u < n; ++u) {
        std::size_t owner = m;
        for (std::size_t i = 0; i < m; ++i) {
            bool keeps_all = true;
            for (std::size_t i2 = 0; i2 < m && keeps_all; ++i2)
                if (i2 != i) keeps_all = kept(orders, i, i2, u, bv);
            if (keeps_all) {
                owner = i;
                break;
            }
        }
        if (owner < m) {
            if (inst.gamma(owner, u) <= 0.0) return false;  // settles with a dead link
            out.clusters[owner].push_back(u);
            out.serving[u] = {owner};
        } else if (!joint_pairs[u].empty()) {
            double best_gain = 0.0;
            std::set<std::size_t> servers;
            for (std::size_t p : joint_pairs[u]) {
                auto [a, b] = orders.pairs.pair(p);
                servers.insert(a);
                servers.insert(b);
            }
            for (std::size_t i : servers) best_gain = std::max(best_gain, inst.gamma(i, u));
            if (best_gain <= 0.0) return false;  // joint UE unreachable from its pair
            for (std::size_t i : servers) {
                out.multi[i].push_back(u);
                out.serving[u].push_back(i);
            }
        } else {
            return false;  // boundaries leave the UE unclaimed
        }
    }
    return true;
}

Association associate(const Instance& inst, const PairOrders& orders, const BoundaryVector& bv) {
    Association out;
    if (!try_associate(inst, orders, bv, out))
        throw association_error("associate: boundaries admit no consistent partition");
    return out;
}

bool verify_association(const Instance& inst, const PairOrders& orders,
                        const BoundaryVector& bv, const Association& assoc) {
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    std::vector<int> covered(n, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t u : assoc.clusters[i]) ++covered[u];
    std::set<std::size_t> multi_union;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t u : assoc.multi[i]) multi_union.insert(u);
    for (std::size_t u : multi_union)
        if (covered[u] > 0) return false;  // joint UEs stay out of the clusters
    for (std::size_t u = 0; u < n; ++u)
        if (covered[u] + (multi_union.count(u) ? 1 : 0) != 1) return false;
    if (multi_union.size() + 1 > m) return false;

    for (std::size_t p = 0; p < orders.pairs.count(); ++p) {
        auto [a, b] = orders.pairs.pair(p);
        const PairOrder& po = orders.by_pair[p];
        const PairCut& cut = bv.cuts[p];
        for (std::size_t u : assoc.clusters[a])
            if (po.pos[u] + (cut.joint ? 1 : 0) > cut.cut) return false;
        for (std::size_t u : assoc.clusters[b])
            if (po.pos[u] < cut.cut + 1) return false;
        // UEs jointly powered by this pair must be its designee.
        for (std::size_t u : assoc.multi[a]) {
            bool also_b = std::find(assoc.multi[b].begin(), assoc.multi[b].end(), u) !=
                          assoc.multi[b].end();
            if (also_b && !(cut.joint && cut.cut >= 1 && po.order[cut.cut - 1] == u)) {
                // joint via another pair chain is fine only if some designation
                // covers the (a, b) service; require the direct designation.
                bool direct = false;
                for (std::size_t q = 0; q < bv.cuts.size(); ++q) {
                    if (!bv.cuts[q].joint) continue;
                    auto [qa, qb] = orders.pairs.pair(q);
                    if (orders.by_pair[q].order[bv.cuts[q].cut - 1] != u) continue;
                    if (qa == a || qa == b || qb == a || qb == b) direct = true;
                }
                if (!direct) return false;
            }
        }
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (assoc.serving[u].empty()) return false;
        double best = 0.0;
        for (std::size_t i : assoc.serving[u]) best = std::max(best, inst.gamma(i, u));
        if (best <= 0.0) return false;
    }
    return true;
}

BoundaryEnumerator::BoundaryEnumerator(const Instance& inst, const PairOrders& orders)
    : inst_(inst), orders_(orders) {
    const std::size_t n = inst.num_ue();
    // Two BSs: a boundary-with-joint-candidate per cut covers the exclusive
    // variant as a degenerate split, so one option per cut suffices. Three or
    // more BSs need the exclusive variant too: the joint-designee budget
    // (M-1 distinct UEs) may be spent elsewhere.
    options_per_pair_ = inst.num_bs() == 2 ? n + 1 : 2 * n + 1;
    raw_count_ = 1;
    for (std::size_t p = 0; p < orders.pairs.count(); ++p) raw_count_ *= options_per_pair_;
}

BoundaryVector BoundaryEnumerator::decode(std::uint64_t raw_index) const {
    const std::size_t np = orders_.pairs.count();
    BoundaryVector bv;
    bv.cuts.resize(np);
    for (std::size_t p = np; p-- > 0;) {
        const std::uint64_t o = raw_index % options_per_pair_;
        raw_index /= options_per_pair_;
        PairCut c;
        if (inst_.num_bs() == 2) {
            c.cut = static_cast<std::size_t>(o);
            c.joint = o > 0;
        } else if (o == 0) {
            c.cut = 0;
            c.joint = false;
        } else {
            c.cut = static_cast<std::size_t>((o + 1) / 2);
            c.joint = (o % 2) == 1;
        }
        bv.cuts[p] = c;
    }
    return bv;
}

std::optional<Association> BoundaryEnumerator::filter(const BoundaryVector& bv) const {
    std::set<std::size_t> designees;
    for (std::size_t p = 0; p < bv.cuts.size(); ++p)
        if (bv.cuts[p].joint)
            designees.insert(orders_.by_pair[p].order[bv.cuts[p].cut - 1]);
    if (designees.size() + 1 > inst_.num_bs()) return std::nullopt;
    Association assoc;
    if (!try_associate(inst_, orders_, bv, assoc)) return std::nullopt;
    if (!verify_association(inst_, orders_, bv, assoc)) return std::nullopt;
    return assoc;
}

void BoundaryEnumerator::for_each(
    const std::function<bool(const BoundaryVector&, const Association&, std::uint64_t)>& visit)
    const {
    for (std::uint64_t idx = 0; idx < raw_count_; ++idx) {
        BoundaryVector bv = decode(idx);
        auto assoc = filter(bv);
        if (!assoc) continue;
        if (!visit(bv, *assoc, idx)) return;
    }
}

}  // namespace coopalloc
