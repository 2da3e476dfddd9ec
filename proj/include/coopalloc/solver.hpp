#pragma once
#include "coopalloc/association.hpp"
#include "coopalloc/types.hpp"

namespace coopalloc {

struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lagrangian state: mu prices the spectrum constraint, w_i = 1 + lambda_i
// weights BS i's power (lambda_i the budget multiplier, 0 for relaxed BSs).
struct DualState {
    double mu = 0.0;
    std::vector<double> w;
};

// A fixed-association power/bandwidth problem. `serving[j]` lists the BSs
// allowed to power UE j. `relaxed` BSs have no budget; `capped` BSs are
// expected to end with a binding budget (checked, not forced).
struct FixedAssocProblem {
    const Instance* inst = nullptr;
    std::vector<std::vector<std::size_t>> serving;
    std::vector<std::size_t> capped;
    std::vector<std::size_t> relaxed;
    double budget = 1.0;

    static FixedAssocProblem from_association(const Instance& inst, const Association& assoc);
    void validate() const;
};

struct BandwidthShare {
    double y = 0.0;
    bool saturated = false;  // stationarity point fell below the y floor
};

// Unique y > 0 with w_eff * d/dy required_power(r, y, gamma_eff) + mu = 0.
BandwidthShare per_ue_bandwidth(double r_prime, double gamma_eff, double w_eff, double mu,
                                const Tolerances& tol = {});

struct SolveDetail {
    DualState dual;
    std::vector<char> binding;      // per BS: budget within tolerance of the level
    double kkt_stationarity = 0.0;  // max stationarity residual, relative to mu
    double kkt_compslack = 0.0;     // max |lambda_i * budget slack|
    bool used_minmax_fallback = false;
    bool capped_unbound = false;    // a BS listed in `capped` ended with slack
};

Allocation solve_fixed(const FixedAssocProblem& fp);
Allocation solve_fixed(const FixedAssocProblem& fp, SolveDetail& detail);

// Objective of fp with every budget dropped: a cheap lower bound on the
// constrained optimum, used to skip dominated candidates.
double budget_free_bound(const FixedAssocProblem& fp);

// Weaker but cheaper lower bound: the Lagrangian of the budget-free problem
// at a coarsely bisected spectrum price. Valid for any price by weak duality.
double coarse_free_bound(const FixedAssocProblem& fp, int iterations = 10);

struct RelaxedResult {
    Allocation alloc;
    std::vector<double> bs_power;  // per-BS power totals at the relaxed optimum
    bool enforced_ok = false;      // every non-relaxed budget held
};
// fp.relaxed must name exactly the focus BS whose budget is dropped.
RelaxedResult solve_relaxed(const FixedAssocProblem& fp);
RelaxedResult solve_relaxed(const FixedAssocProblem& fp, SolveDetail& detail);

struct ProbeResult {
    bool feasible = false;
    double min_max_power = 0.0;
};
// Min-max power level of an association: bisects the common budget level for
// the smallest level with a valid allocation. Feasible iff <= 1 + tol.eq.
ProbeResult feasibility_probe(const Instance& inst, const Association& assoc);

}  // namespace coopalloc
