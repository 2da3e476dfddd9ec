#pragma once
#include <optional>

#include "coopalloc/association.hpp"
#include "coopalloc/solver.hpp"
#include "coopalloc/types.hpp"

namespace coopalloc {

// A throughput-preserving power redistribution along a cycle of (BS, UE)
// cells. Moving a step t changes cell k by coef[k] * t, leaves every UE's
// received power unchanged, and changes the objective by gain * t.
struct ShiftCycle {
    std::vector<std::pair<std::size_t, std::size_t>> cells;  // (bs, ue)
    std::vector<double> coef;
    double gain = 0.0;       // sum of coef, <= 0 for returned cycles
    double magnitude = 0.0;  // largest step keeping donors nonnegative
};

// Search for a power shift that strictly decreases total power, or failing
// that one that zeroes a donor cell at unchanged power. Covers two-UE/two-BS
// blocks and longer cycles found by pruning the support matrix to its 2-core.
// Requires the allocation to satisfy the rate equalities.
std::optional<ShiftCycle> find_improving_shift(const Instance& inst, const Allocation& alloc,
                                               const Tolerances& tol = {});

// Apply `cycle` at step `t` (default: its recorded magnitude). Throws when the
// step would drive a cell negative or break a power budget.
Allocation apply_shift(const Allocation& alloc, const ShiftCycle& cycle, double t = -1.0);

// Repeated improvement until no shift remains. Returns the number of shifts.
std::size_t iterate_shifts(const Instance& inst, Allocation& alloc, std::size_t max_steps = 1024);

struct BruteForceResult {
    Allocation alloc;
    BoundaryVector boundaries;  // winning candidate
    bool found = false;
    std::uint64_t candidates_solved = 0;
};

// Exhaustive reference optimizer: enumerate every candidate boundary vector,
// solve each fixed association, keep the best. Guarded to M <= 4, N <= 6.
// For M*N <= 8 the winner is cross-checked against a direct multi-start
// projected-descent solve over the full support.
BruteForceResult brute_force(const Instance& inst);

// Objective of the full-support problem at fixed bandwidth shares: power is
// assigned by an exact small LP. +inf when the budgets cannot be met.
double full_support_value(const Instance& inst, const std::vector<double>& y);

// Multi-start projected gradient descent on the bandwidth simplex with the
// power subproblem solved exactly per step. Test oracle; independent of the
// association/dual machinery.
double projected_descent_value(const Instance& inst, std::size_t starts = 8,
                               std::uint64_t seed = 12345);

struct CertifyReport {
    bool feasible = false;
    bool sparsity_ok = false;        // <= M-1 jointly powered UEs, enough zero cells
    bool cluster_order_ok = false;   // a consistent boundary vector exists
    bool no_improving_shift = false;
    bool kkt_ok = false;             // re-solving the induced association matches z
};

CertifyReport certify(const Instance& inst, const Allocation& alloc, const Tolerances& tol = {});

}  // namespace coopalloc
