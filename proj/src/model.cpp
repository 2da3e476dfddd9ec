#include "coopalloc/model.hpp"

#include <cmath>
#include <limits>

namespace coopalloc {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
// Exponent clamp: beyond this, 2^(r/y) overflows. Clamped values keep the
// ordering (still strictly monotone in y), which is all the root finders need.
constexpr double kExpClamp = 600.0;
}  // namespace

double received_power_needed(double r, double y) {
    const double a = kLn2 * r / y;
    if (a > kExpClamp) {
        // Quadratic surrogate beyond the overflow clamp: matches value and
        // slope at the seam and stays strictly decreasing and convex in y.
        const double t = a - kExpClamp;
        return std::exp(kExpClamp) * y * (1.0 + t + 0.5 * t * t);
    }
    return std::expm1(a) * y;
}

double received_power_needed_d1(double r, double y) {
    // d/dy[(2^(r/y)-1)y] = 2^(r/y)(1 - r ln2 / y) - 1 = expm1(a) - a*exp(a)
    const double a = kLn2 * r / y;
    if (a > kExpClamp) {
        const double t = a - kExpClamp;
        return std::exp(kExpClamp) * (1.0 - kExpClamp - kExpClamp * t - 0.5 * t * t);
    }
    return std::expm1(a) - a * std::exp(a);
}

double received_power_needed_d2(double r, double y) {
    const double a = kLn2 * r / y;
    const double c = kLn2 * r;
    if (a > kExpClamp) {
        const double t = a - kExpClamp;
        return std::exp(kExpClamp) * a * (kExpClamp + t) / (y * y);
    }
    return std::exp(a) * c * c / (y * y * y);
}

double required_power(double r, double y, double gamma) {
    if (y <= 0.0) throw std::domain_error("required_power: bandwidth share must be positive");
    if (gamma <= 0.0) throw std::domain_error("required_power: SNR must be positive");
    if (r <= 0.0) throw std::domain_error("required_power: rate demand must be positive");
    return received_power_needed(r, y) / gamma;
}

double required_power_d1(double r, double y, double gamma) {
    if (y <= 0.0) throw std::domain_error("required_power_d1: bandwidth share must be positive");
    if (gamma <= 0.0) throw std::domain_error("required_power_d1: SNR must be positive");
    return received_power_needed_d1(r, y) / gamma;
}

void PhysicalProblem::validate() const {
    if (num_bs < 1 || num_ue < 1) throw std::invalid_argument("problem: need at least one BS and one UE");
    if (p0 <= 0.0 || b0 <= 0.0 || n0 <= 0.0)
        throw std::invalid_argument("problem: p0, b0, n0 must be positive");
    if (channel_gain.rows() != num_bs || channel_gain.cols() != num_ue)
        throw std::invalid_argument("problem: channel gain dimension mismatch");
    if (rate_demand.size() != num_ue)
        throw std::invalid_argument("problem: rate demand dimension mismatch");
    for (double g : channel_gain.data())
        if (g < 0.0 || !std::isfinite(g)) throw std::invalid_argument("problem: channel gains must be finite and >= 0");
    for (double r : rate_demand)
        if (r <= 0.0 || !std::isfinite(r)) throw std::invalid_argument("problem: rate demands must be positive");
}

void Instance::validate() const {
    if (gamma.rows() < 1 || gamma.cols() < 1) throw std::invalid_argument("instance: empty");
    if (rate.size() != gamma.cols()) throw std::invalid_argument("instance: rate dimension mismatch");
    for (double g : gamma.data())
        if (g < 0.0 || !std::isfinite(g)) throw std::invalid_argument("instance: gamma must be finite and >= 0");
    for (std::size_t j = 0; j < gamma.cols(); ++j) {
        double best = 0.0;
        for (std::size_t i = 0; i < gamma.rows(); ++i) best = std::max(best, gamma(i, j));
        if (best <= 0.0) throw std::invalid_argument("instance: uncoverable UE " + std::to_string(j));
    }
    for (double r : rate)
        if (r <= 0.0 || !std::isfinite(r)) throw std::invalid_argument("instance: rates must be positive");
}

Instance normalize(const PhysicalProblem& p) {
    p.validate();
    Instance inst;
    inst.gamma = Matrix(p.num_bs, p.num_ue);
    const double denom = p.n0 * p.b0;
    for (std::size_t i = 0; i < p.num_bs; ++i)
        for (std::size_t j = 0; j < p.num_ue; ++j)
            inst.gamma(i, j) = p.p0 * p.channel_gain(i, j) / denom;
    inst.rate.resize(p.num_ue);
    for (std::size_t j = 0; j < p.num_ue; ++j) inst.rate[j] = p.rate_demand[j] / p.b0;
    inst.validate();  // surfaces the uncoverable-UE case
    return inst;
}

EvalReport evaluate(const Instance& inst, const Allocation& alloc) {
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    if (alloc.x.rows() != m || alloc.x.cols() != n || alloc.y.size() != n)
        throw std::invalid_argument("evaluate: dimension mismatch");

    EvalReport rep;
    rep.rate_residuals.resize(n);
    rep.power_slacks.resize(m);
    for (std::size_t j = 0; j < n; ++j) {
        double delivered = 0.0;
        for (std::size_t i = 0; i < m; ++i) delivered += inst.gamma(i, j) * alloc.x(i, j);
        double required = alloc.y[j] > 0.0
                              ? received_power_needed(inst.rate[j], alloc.y[j])
                              : std::numeric_limits<double>::infinity();
        rep.rate_residuals[j] = delivered - required;
    }
    for (std::size_t i = 0; i < m; ++i) {
        double used = 0.0;
        for (std::size_t j = 0; j < n; ++j) used += alloc.x(i, j);
        rep.power_slacks[i] = 1.0 - used;
    }
    double ysum = 0.0;
    for (double v : alloc.y) ysum += v;
    rep.spectrum_residual = ysum - 1.0;
    rep.z = 0.0;
    for (double v : alloc.x.data()) rep.z += v;
    return rep;
}

bool allocation_feasible(const Instance& inst, const Allocation& alloc, const Tolerances& tol) {
    for (double v : alloc.x.data())
        if (v < -tol.eq || !std::isfinite(v)) return false;
    for (double v : alloc.y)
        if (v < tol.y_min || !std::isfinite(v)) return false;

    EvalReport rep = evaluate(inst, alloc);
    if (std::abs(rep.spectrum_residual) > tol.eq) return false;
    for (double s : rep.power_slacks)
        if (s < -tol.eq) return false;
    for (std::size_t j = 0; j < inst.num_ue(); ++j) {
        const double required = received_power_needed(inst.rate[j], alloc.y[j]);
        if (std::abs(rep.rate_residuals[j]) > tol.rate_rel * std::max(1.0, required)) return false;
    }
    return true;
}

}  // namespace coopalloc
