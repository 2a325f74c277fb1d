#include <doctest.h>

#include <cmath>
#include <random>

#include "aquacal/so3.hpp"
#include "aquacal/solver.hpp"
#include "oracles.hpp"

using namespace aquacal;

TEST_SUITE_BEGIN("solver");

TEST_CASE("solve_lm: scalar quadratic converges in a couple of iterations") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {0.0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 1, [](const double* const* b, double* r) {
        r[0] = b[0][0] - 3.0;
        return true;
    });
    const SolveResult result = solve_lm(problem);
    CHECK(result.parameters[id][0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(result.iterations <= 3);
    CHECK(result.final_cost <= result.initial_cost);
}

TEST_CASE("solve_lm: Rosenbrock residuals reach the global minimum") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {-1.2, 1.0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 2, [](const double* const* b, double* r) {
        r[0] = 10.0 * (b[0][1] - b[0][0] * b[0][0]);
        r[1] = 1.0 - b[0][0];
        return true;
    });
    const SolveResult result = solve_lm(problem);
    CHECK(std::abs(result.parameters[id][0] - 1.0) < 1e-8);
    CHECK(std::abs(result.parameters[id][1] - 1.0) < 1e-8);
}

TEST_CASE("solve_lm: frozen coordinate stays bit-identical") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {-1.2, 1.0};
    block.constant_mask = {1, 0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 2, [](const double* const* b, double* r) {
        r[0] = 10.0 * (b[0][1] - b[0][0] * b[0][0]);
        r[1] = 1.0 - b[0][0];
        return true;
    });
    const SolveResult result = solve_lm(problem);
    CHECK(result.parameters[id][0] == -1.2);  // untouched
    // The constant residual 1 - v1 dominates the cost, so the relative
    // function tolerance stops within ~1e-6 of the conditional minimum.
    CHECK(result.parameters[id][1] == doctest::Approx(1.44).epsilon(1e-5));
}

TEST_CASE("solve_lm: fully constant block is never modified") {
    LeastSquaresProblem problem;
    ParameterBlock frozen = ParameterBlock::constant({0.25, -0.75});
    const int frozen_id = problem.add_block(frozen);
    ParameterBlock free_block;
    free_block.values = {5.0};
    const int free_id = problem.add_block(free_block);
    problem.add_residual({frozen_id, free_id}, 2, [](const double* const* b, double* r) {
        r[0] = b[1][0] - b[0][0];
        r[1] = b[1][0] - b[0][1];
        return true;
    });
    const SolveResult result = solve_lm(problem);
    CHECK(result.parameters[frozen_id][0] == 0.25);
    CHECK(result.parameters[frozen_id][1] == -0.75);
    CHECK(result.parameters[free_id][0] == doctest::Approx(-0.25).epsilon(1e-10));
    CHECK(result.std_devs[frozen_id][0] == 0.0);
}

TEST_CASE("solve_lm: unit-vector manifold stays normalized") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.manifold = Manifold::kUnitVector;
    block.values = {0.0, 0.0, 1.0};
    const int id = problem.add_block(block);
    const Vec3 target = Vec3(0.3, -0.4, 0.8).normalized();
    problem.add_residual({id}, 3, [target](const double* const* b, double* r) {
        r[0] = b[0][0] - target.x();
        r[1] = b[0][1] - target.y();
        r[2] = b[0][2] - target.z();
        return true;
    });
    const SolveResult result = solve_lm(problem);
    const Vec3 v(result.parameters[id][0], result.parameters[id][1], result.parameters[id][2]);
    CHECK(std::abs(v.norm() - 1.0) < 1e-15);
    CHECK((v - target).norm() < 1e-9);
}

TEST_CASE("solve_lm: rotation manifold aligns a frame") {
    std::mt19937_64 rng(31);
    const Mat3 target = aquacal::testing::random_rotation(rng, 0.8);
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.manifold = Manifold::kRotationAxisAngle;
    block.values = {0.0, 0.0, 0.0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 9, [target](const double* const* b, double* r) {
        const Mat3 R = so3_exp(Vec3(b[0][0], b[0][1], b[0][2]));
        const Mat3 diff = R - target;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r[3 * i + j] = diff(i, j);
        return true;
    });
    const SolveResult result = solve_lm(problem);
    const Mat3 R = so3_exp(
        Vec3(result.parameters[id][0], result.parameters[id][1], result.parameters[id][2]));
    CHECK((R - target).norm() < 1e-9);
}

TEST_CASE("solve_lm: standard deviation of a two-measurement mean") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {0.0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 1, [](const double* const* b, double* r) {
        r[0] = b[0][0] - 2.9;
        return true;
    });
    problem.add_residual({id}, 1, [](const double* const* b, double* r) {
        r[0] = b[0][0] - 3.1;
        return true;
    });
    const SolveResult result = solve_lm(problem);
    CHECK(result.parameters[id][0] == doctest::Approx(3.0).epsilon(1e-10));
    // sigma^2 = 2 * cost / (m - n) = 0.02; var = sigma^2 / (J^T J) = 0.01.
    CHECK(result.std_devs[id][0] == doctest::Approx(0.1).epsilon(1e-8));
}

TEST_CASE("solve_lm: lower-bounded parameter is projected into the feasible set") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {0.5};
    block.lower_bounds = {0.0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 1, [](const double* const* b, double* r) {
        r[0] = b[0][0] + 2.0;  // unconstrained minimum at -2
        return true;
    });
    const SolveResult result = solve_lm(problem);
    CHECK(result.parameters[id][0] == 0.0);
}

TEST_CASE("solve_lm: unsolvable normal equations raise RankDeficient") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {1.0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 1, [](const double* const*, double* r) {
        r[0] = std::numeric_limits<double>::quiet_NaN();
        return true;
    });
    CHECK_THROWS_AS((void)solve_lm(problem), CalibrationError);
    try {
        (void)solve_lm(problem);
    } catch (const CalibrationError& e) {
        CHECK(e.code() == CalibrationError::Code::kRankDeficient);
    }
}

TEST_CASE("solve_lm: problem validation rejects underdetermined systems") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {1.0, 2.0, 3.0};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 1, [](const double* const* b, double* r) {
        r[0] = b[0][0];
        return true;
    });
    CHECK_THROWS_AS((void)solve_lm(problem), CalibrationError);
}

TEST_CASE("max_jacobian_deviation: smooth residuals agree between steps") {
    LeastSquaresProblem problem;
    ParameterBlock block;
    block.values = {0.7, -0.3};
    const int id = problem.add_block(block);
    problem.add_residual({id}, 2, [](const double* const* b, double* r) {
        r[0] = std::sin(b[0][0]) * std::exp(b[0][1]);
        r[1] = b[0][0] * b[0][0] - b[0][1];
        return true;
    });
    CHECK(max_jacobian_deviation(problem) < 1e-5);
}

TEST_SUITE_END();
