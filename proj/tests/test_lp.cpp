#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "structboost/lp.hpp"

using namespace structboost;
using Catch::Matchers::WithinAbs;

namespace {

lp::LinearProgram random_feasible_lp(std::mt19937& rng, bool with_bounds) {
    std::uniform_int_distribution<int> nvars(1, 6), nrows(1, 8);
    std::uniform_real_distribution<double> coef(-2.0, 2.0), pos(0.05, 2.0);
    const int n = nvars(rng);
    const int r = nrows(rng);
    lp::LinearProgram out;
    out.objective.resize(n);
    for (double& c : out.objective) c = pos(rng);  // c > 0 keeps the LP bounded
    std::vector<double> x0(n);
    for (double& v : x0) v = pos(rng);  // interior point certifying feasibility
    for (int row = 0; row < r; ++row) {
        std::vector<double> a(n);
        for (double& v : a) v = coef(rng);
        double ax = 0.0;
        for (int j = 0; j < n; ++j) ax += a[j] * x0[j];
        out.add_row(a, ax - pos(rng));
    }
    if (with_bounds) {
        out.upper.assign(n, std::numeric_limits<double>::infinity());
        for (int j = 0; j < n; ++j)
            if (coef(rng) > 0.0) out.upper[j] = x0[j] + pos(rng);  // keeps x0 feasible
    }
    return out;
}

}  // namespace

TEST_CASE("single variable bound constraint", "[lp]") {
    lp::LinearProgram p;
    p.objective = {1.0};
    p.add_row({1.0}, 3.0);
    auto sol = lp::solve(p);
    REQUIRE(sol.status == lp::LpStatus::optimal);
    REQUIRE_THAT(sol.primal[0], WithinAbs(3.0, 1e-9));
    REQUIRE_THAT(sol.duals[0], WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(sol.objective_value, WithinAbs(3.0, 1e-9));
}

TEST_CASE("degenerate face resolved deterministically", "[lp]") {
    lp::LinearProgram p;
    p.objective = {1.0, 1.0};
    p.add_row({1.0, 1.0}, 1.0);
    auto sol = lp::solve(p);
    REQUIRE(sol.status == lp::LpStatus::optimal);
    REQUIRE_THAT(sol.objective_value, WithinAbs(1.0, 1e-9));
    // fixed pivot rule lands on the first-variable vertex
    REQUIRE_THAT(sol.primal[0], WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(sol.primal[1], WithinAbs(0.0, 1e-9));
}

TEST_CASE("infeasible and unbounded statuses", "[lp]") {
    lp::LinearProgram infeas;
    infeas.objective = {1.0};
    infeas.add_row({1.0}, 2.0);
    infeas.add_row({-1.0}, -1.0);  // x <= 1 contradicts x >= 2
    REQUIRE(lp::solve(infeas).status == lp::LpStatus::infeasible);

    lp::LinearProgram unbd;
    unbd.objective = {-1.0};
    REQUIRE(lp::solve(unbd).status == lp::LpStatus::unbounded);
}

TEST_CASE("upper bounds honored", "[lp]") {
    lp::LinearProgram p;
    p.objective = {-1.0, -2.0};
    p.upper = {5.0, 1.5};
    auto sol = lp::solve(p);
    REQUIRE(sol.status == lp::LpStatus::optimal);
    REQUIRE_THAT(sol.primal[0], WithinAbs(5.0, 1e-9));
    REQUIRE_THAT(sol.primal[1], WithinAbs(1.5, 1e-9));
    REQUIRE_THAT(sol.objective_value, WithinAbs(-8.0, 1e-9));
    // bound multipliers surface as reduced costs
    REQUIRE_THAT(sol.reduced_costs[0], WithinAbs(-1.0, 1e-9));
    REQUIRE_THAT(sol.reduced_costs[1], WithinAbs(-2.0, 1e-9));
}

TEST_CASE("random LPs match vertex enumeration", "[lp][oracle]") {
    std::mt19937 rng(20240917);
    int solved = 0;
    while (solved < 50) {
        auto p = random_feasible_lp(rng, solved % 3 == 0);
        auto sol = lp::solve(p);
        REQUIRE(sol.status == lp::LpStatus::optimal);
        auto oracle = oracles::vertex_enumeration_min(p);
        REQUIRE(oracle.has_value());
        REQUIRE_THAT(sol.objective_value, WithinAbs(*oracle, 1e-8 * (1.0 + std::abs(*oracle))));

        // strong duality including bound contributions
        double dual_obj = 0.0;
        for (int r = 0; r < p.num_rows(); ++r) dual_obj += sol.duals[r] * p.row_rhs[r];
        for (int j = 0; j < p.num_vars(); ++j) {
            if (!p.upper.empty() && std::isfinite(p.upper[j]) && sol.reduced_costs[j] < 0.0 &&
                std::abs(sol.primal[j] - p.upper[j]) < 1e-7)
                dual_obj += sol.reduced_costs[j] * p.upper[j];
        }
        REQUIRE_THAT(dual_obj, WithinAbs(sol.objective_value,
                                         1e-8 * (1.0 + std::abs(sol.objective_value))));

        // complementary slackness on every row
        for (int r = 0; r < p.num_rows(); ++r) {
            double ax = 0.0;
            for (int j = 0; j < p.num_vars(); ++j) ax += p.row_coeffs[r][j] * sol.primal[j];
            REQUIRE(sol.duals[r] * (ax - p.row_rhs[r]) <= 1e-7 * (1.0 + std::abs(sol.duals[r])));
        }
        ++solved;
    }
}

TEST_CASE("resolving identical LP is bitwise stable", "[lp]") {
    std::mt19937 rng(7);
    auto p = random_feasible_lp(rng, true);
    auto a = lp::solve(p);
    auto b = lp::solve(p);
    REQUIRE(a.primal == b.primal);
    REQUIRE(a.duals == b.duals);
    REQUIRE(a.objective_value == b.objective_value);
}

TEST_CASE("input validation", "[lp]") {
    lp::LinearProgram empty;
    REQUIRE_THROWS_AS(lp::solve(empty), InvalidInputError);

    lp::LinearProgram bad;
    bad.objective = {1.0};
    bad.add_row({1.0, 2.0}, 0.0);
    REQUIRE_THROWS_AS(lp::solve(bad), InvalidInputError);
}
