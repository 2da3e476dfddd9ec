#pragma once
#include <cstdint>

#include "coopalloc/association.hpp"
#include "coopalloc/solver.hpp"
#include "coopalloc/types.hpp"

namespace coopalloc {

// Search range for a focus pair's boundary, in positions of the pair's
// remaining-UE order (0 = everything to the second BS). Derived from the two
// budget-relaxed solves; an unusable range falls back to full enumeration.
struct PairBounds {
    std::size_t lo = 0;
    std::size_t hi = 0;
    bool already_optimal = false;  // relaxed optima coincide
    bool full_range = false;
};

// Fixed surroundings for a focus pair: which UEs are still in play and the
// serving sets of everyone already settled by the other BSs.
struct PairContext {
    std::vector<std::size_t> remaining;
    std::vector<std::vector<std::size_t>> serving;  // empty lists for remaining UEs
};

PairBounds pair_search_bounds(const Instance& inst, const PairOrders& orders, std::size_t i1,
                              std::size_t i2, const PairContext& ctx,
                              RelaxedResult* relaxed_first = nullptr,
                              RelaxedResult* relaxed_second = nullptr);

struct OptimizeStats {
    std::uint64_t candidates_solved = 0;
    std::uint64_t candidates_culled = 0;    // dominated by the incumbent's bound
    std::uint64_t candidates_deduped = 0;   // association already solved
    std::uint64_t candidates_unpruned = 0;  // boundary options a full sweep would visit
    std::uint64_t relaxed_solves = 0;
    std::uint64_t context_culled = 0;
    std::uint64_t bound_fallbacks = 0;
};

struct OptimizeResult {
    Allocation alloc;
    bool found = false;
    BoundaryVector boundaries;
    OptimizeStats stats;
};

// Minimum-total-power joint bandwidth/power allocation. Enumerates candidate
// boundary vectors pair by pair, restricts each focus pair's boundary with
// the relaxed-solution bounds, solves the surviving fixed associations, and
// returns the best. Returns feasible = false when every candidate fails.
Allocation optimize(const Instance& inst);
OptimizeResult optimize_detailed(const Instance& inst);

// Two-BS fast path; optimize() dispatches here for M = 2.
Allocation optimize_two_bs(const Instance& inst);
OptimizeResult optimize_two_bs_detailed(const Instance& inst);

}  // namespace coopalloc
