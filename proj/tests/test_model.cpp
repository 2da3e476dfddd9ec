#include <doctest.h>

#include <cmath>

#include "coopalloc/model.hpp"
#include "test_util.hpp"

using namespace coopalloc;

TEST_CASE("normalize: identity scaling") {
    PhysicalProblem p;
    p.num_bs = 1;
    p.num_ue = 1;
    p.p0 = 1.0;
    p.b0 = 1.0;
    p.n0 = 1.0;
    p.channel_gain = Matrix(1, 1, 1.0);
    p.rate_demand = {1.0};
    Instance inst = normalize(p);
    CHECK(inst.gamma(0, 0) == doctest::Approx(1.0));
    CHECK(inst.rate[0] == doctest::Approx(1.0));
}

TEST_CASE("normalize: arithmetic from the definition") {
    PhysicalProblem p;
    p.num_bs = 1;
    p.num_ue = 1;
    p.p0 = 2.0;
    p.b0 = 4.0;
    p.n0 = 0.5;
    p.channel_gain = Matrix(1, 1, 1.0);
    p.rate_demand = {4.0};
    Instance inst = normalize(p);
    CHECK(inst.gamma(0, 0) == doctest::Approx(1.0));  // 2*1/(0.5*4)
    CHECK(inst.rate[0] == doctest::Approx(1.0));
}

TEST_CASE("normalize: uncoverable UE is an error") {
    PhysicalProblem p;
    p.num_bs = 2;
    p.num_ue = 2;
    p.p0 = 1.0;
    p.b0 = 1.0;
    p.n0 = 1.0;
    p.channel_gain = Matrix::from_rows({{1.0, 0.0}, {1.0, 0.0}});
    p.rate_demand = {1.0, 1.0};
    CHECK_THROWS_AS(normalize(p), std::invalid_argument);
}

TEST_CASE("normalize is linear in the channel gains") {
    PhysicalProblem p;
    p.num_bs = 2;
    p.num_ue = 3;
    p.p0 = 1.7;
    p.b0 = 2.3;
    p.n0 = 0.9;
    p.channel_gain = Matrix::from_rows({{0.4, 1.2, 2.0}, {0.7, 0.3, 1.1}});
    p.rate_demand = {1.0, 0.5, 0.25};
    Instance a = normalize(p);
    const double c = 3.25;
    for (auto& v : p.channel_gain.data()) v *= c;
    Instance b = normalize(p);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(b.gamma(i, j) == doctest::Approx(c * a.gamma(i, j)).epsilon(1e-14));
}

TEST_CASE("required_power: pinned values") {
    CHECK(required_power(1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(required_power(1.0, 0.5, 1.0) == doctest::Approx(1.5));
    // analytic wide-band limit r*ln(2)/gamma
    CHECK(required_power(1.0, 1e6, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK_THROWS_AS(required_power(1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(required_power(1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("required_power: strictly decreasing and convex in y") {
    const double rates[] = {0.2, 1.0, 3.7};
    const double gammas[] = {0.5, 2.0};
    for (double r : rates) {
        for (double g : gammas) {
            std::vector<double> ys;
            for (double e = -4.0; e <= 4.0; e += 0.25) ys.push_back(std::pow(10.0, e));
            for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
                CHECK(required_power(r, ys[k], g) > required_power(r, ys[k + 1], g));
            }
            for (std::size_t a = 0; a < ys.size(); ++a) {
                for (std::size_t b = a + 1; b < ys.size(); ++b) {
                    const double mid = 0.5 * (ys[a] + ys[b]);
                    const double lhs = required_power(r, mid, g);
                    const double rhs =
                        0.5 * (required_power(r, ys[a], g) + required_power(r, ys[b], g));
                    CHECK(lhs <= rhs * (1.0 + 1e-12));
                }
            }
        }
    }
}

TEST_CASE("required_power derivative matches central differences") {
    const double rates[] = {0.3, 1.0, 2.5};
    const double ys[] = {0.05, 0.3, 1.0, 4.0, 50.0};
    const double g = 1.7;
    for (double r : rates) {
        for (double y : ys) {
            const double h = y * 1e-6;
            const double num =
                (required_power(r, y + h, g) - required_power(r, y - h, g)) / (2.0 * h);
            const double ana = required_power_d1(r, y, g);
            CHECK(ana == doctest::Approx(num).epsilon(1e-5));
        }
    }
}

TEST_CASE("evaluate: single-cell identities") {
    Instance inst = testutil::make_instance({{1.0}}, {1.0});
    Allocation alloc;
    alloc.x = Matrix(1, 1, 1.0);
    alloc.y = {1.0};
    alloc.recompute_z();
    EvalReport rep = evaluate(inst, alloc);
    CHECK(rep.rate_residuals[0] == doctest::Approx(0.0));
    CHECK(rep.power_slacks[0] == doctest::Approx(0.0));
    CHECK(rep.spectrum_residual == doctest::Approx(0.0));
    CHECK(rep.z == doctest::Approx(1.0));

    alloc.x(0, 0) = 0.5;
    rep = evaluate(inst, alloc);
    CHECK(rep.rate_residuals[0] == doctest::Approx(-0.5));
}

TEST_CASE("evaluate: grid-search allocation satisfies the constraints") {
    Instance inst = testutil::make_instance({{2.0, 0.8}, {0.7, 2.4}}, {0.5, 0.4});
    auto grid = testutil::grid_solve(inst);
    REQUIRE(grid.feasible);
    Allocation alloc;
    alloc.y = grid.y;
    alloc.x = Matrix(2, 2, 0.0);
    // mild instance: each UE from its best BS fits the budgets
    for (std::size_t j = 0; j < 2; ++j) {
        const std::size_t i = inst.gamma(0, j) >= inst.gamma(1, j) ? 0 : 1;
        alloc.x(i, j) = received_power_needed(inst.rate[j], alloc.y[j]) / inst.gamma(i, j);
    }
    alloc.recompute_z();
    EvalReport rep = evaluate(inst, alloc);
    for (std::size_t j = 0; j < 2; ++j) {
        const double need = received_power_needed(inst.rate[j], alloc.y[j]);
        CHECK(std::abs(rep.rate_residuals[j]) <= 1e-7 * std::max(1.0, need));
    }
    CHECK(rep.z == doctest::Approx(grid.z).epsilon(1e-3));
}

TEST_CASE("evaluate: dimension mismatch is an error") {
    Instance inst = testutil::make_instance({{1.0, 1.0}}, {0.5, 0.5});
    Allocation alloc;
    alloc.x = Matrix(1, 1, 1.0);
    alloc.y = {1.0};
    CHECK_THROWS_AS(evaluate(inst, alloc), std::invalid_argument);
}
