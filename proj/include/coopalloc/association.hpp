#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "coopalloc/types.hpp"

namespace coopalloc {

// Raised when a boundary vector admits no consistent partition.
struct association_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// SNR ratio gamma(i,j)/gamma(i2,j). Returns +inf when the denominator link is
// dead but the numerator is live; throws std::domain_error when both are dead.
double snr_ratio(const Instance& inst, std::size_t i, std::size_t i2, std::size_t j);

// Lexicographic enumeration of unordered BS pairs (i1 < i2).
struct PairTable {
    std::size_t num_bs = 0;
    explicit PairTable(std::size_t m) : num_bs(m) {}
    std::size_t count() const { return num_bs * (num_bs - 1) / 2; }
    std::size_t index(std::size_t i1, std::size_t i2) const {
        return i1 * num_bs - i1 * (i1 + 1) / 2 + (i2 - i1 - 1);
    }
    std::pair<std::size_t, std::size_t> pair(std::size_t idx) const;
};

// UEs sorted in descending SNR-ratio order for one BS pair. Ratio comparisons
// are done on cross products so dead links (gamma = 0) order exactly, and ties
// break by ascending UE index, fixed once per instance.
struct PairOrder {
    std::vector<std::size_t> order;  // UE indices, best-for-i1 first
    std::vector<std::size_t> pos;    // 1-based position of each UE in `order`
    std::size_t initial_boundary = 0;  // #UEs with gamma(i1,j) >= gamma(i2,j)
};

// All pair orders of an instance.
struct PairOrders {
    PairTable pairs;
    std::vector<PairOrder> by_pair;
    explicit PairOrders(const Instance& inst);
    const PairOrder& of(std::size_t i1, std::size_t i2) const {
        return by_pair[pairs.index(i1, i2)];
    }
};

// One pair's boundary: UEs at sorted positions 1..cut side with the first BS,
// the rest with the second. If joint is set (cut >= 1), the UE at position
// `cut` is designated a joint candidate and belongs to neither side.
struct PairCut {
    std::size_t cut = 0;
    bool joint = false;
    bool operator==(const PairCut&) const = default;
};

// Per-pair boundary choices for every BS pair, pair-table order.
struct BoundaryVector {
    std::vector<PairCut> cuts;
    bool operator==(const BoundaryVector&) const = default;
};

struct Association {
    std::vector<std::vector<std::size_t>> clusters;  // J_i: UEs powered by BS i only
    std::vector<std::vector<std::size_t>> multi;     // J_i^mul: joint candidates touching BS i
    std::vector<std::vector<std::size_t>> initial;   // J_i^0: best-SNR clusters
    std::vector<std::vector<std::size_t>> serving;   // per UE: sorted serving BS list
};

// Best-SNR clustering: UE j joins argmax_i gamma(i,j), ties to the lowest BS
// index. Restriction masks let callers re-run it on sub-systems.
std::vector<std::vector<std::size_t>> initial_clusters(const Instance& inst);
std::vector<std::vector<std::size_t>> initial_clusters_restricted(
    const Instance& inst, const std::vector<std::size_t>& bs_subset,
    const std::vector<std::size_t>& ue_subset);

// Resolve a boundary vector into disjoint clusters and joint candidates.
// Throws association_error when the boundaries leave some UE unclaimable.
Association associate(const Instance& inst, const PairOrders& orders, const BoundaryVector& bv);

// Non-throwing variant for enumeration loops; returns false on inconsistency.
bool try_associate(const Instance& inst, const PairOrders& orders, const BoundaryVector& bv,
                   Association& out);

// Check the ordering condition, the partition property and the joint-UE
// count bound on a resolved association.
bool verify_association(const Instance& inst, const PairOrders& orders,
                        const BoundaryVector& bv, const Association& assoc);

// Enumeration of candidate boundary vectors. Yields, in a fixed mixed-radix
// order, every boundary vector whose distinct joint designees number at most
// M-1 and that resolves to a verified association. The visitor receives the
// boundary vector, its resolved association and its raw enumeration index;
// return false to stop early.
class BoundaryEnumerator {
public:
    BoundaryEnumerator(const Instance& inst, const PairOrders& orders);
    std::uint64_t raw_count() const { return raw_count_; }
    // Decode a raw index into per-pair cuts; does not filter.
    BoundaryVector decode(std::uint64_t raw_index) const;
    // Visit filtered candidates in raw-index order.
    void for_each(const std::function<bool(const BoundaryVector&, const Association&,
                                           std::uint64_t)>& visit) const;
    // Filter one decoded candidate; returns the association when consistent.
    std::optional<Association> filter(const BoundaryVector& bv) const;

private:
    const Instance& inst_;
    const PairOrders& orders_;
    std::uint64_t options_per_pair_ = 0;
    std::uint64_t raw_count_ = 0;
};

}  // namespace coopalloc
