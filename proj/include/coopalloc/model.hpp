#pragma once
#include "coopalloc/types.hpp"

namespace coopalloc {

// Required received power (2^(r/y) - 1) * y for demand r over bandwidth
// share y, and its first two derivatives in y. Strictly decreasing and
// strictly convex on y > 0, with limit r*ln(2) as y -> inf.
double received_power_needed(double r, double y);
double received_power_needed_d1(double r, double y);
double received_power_needed_d2(double r, double y);

// Transmit power a single BS with SNR gamma must spend to deliver demand r
// over bandwidth share y. Throws std::domain_error on y <= 0 or gamma <= 0.
double required_power(double r, double y, double gamma);
// d/dy of required_power.
double required_power_d1(double r, double y, double gamma);

// Normalize a physical problem: gamma = p0*|H|^2/(n0*b0), rate = demand/b0.
// Throws std::invalid_argument on invariant violations, including any UE
// with all-zero gains (uncoverable).
Instance normalize(const PhysicalProblem& p);

// Constraint residuals of an allocation against an instance. Pure.
EvalReport evaluate(const Instance& inst, const Allocation& alloc);

// Recompute the feasible flag of an allocation from the residuals.
bool allocation_feasible(const Instance& inst, const Allocation& alloc,
                         const Tolerances& tol = {});

}  // namespace coopalloc
