#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aquacal/types.hpp"

namespace aquacal {

// Local parameterization of a block.
//   kEuclidean          plain addition, per-coordinate constant mask allowed
//   kUnitVector         3 values, 2-dof tangent, renormalized after update
//   kRotationAxisAngle  3 values (axis*angle), update R' = exp(delta) * R
enum class Manifold {
    kEuclidean,
    kUnitVector,
    kRotationAxisAngle,
};

struct ParameterBlock {
    std::vector<double> values;
    std::vector<uint8_t> constant_mask;  // empty = all free; else one flag per value
    Manifold manifold = Manifold::kEuclidean;
    std::vector<double> lower_bounds;  // empty or one bound per value (Euclidean only)

    bool is_constant() const;
    int tangent_size() const;
    void validate() const;

    static ParameterBlock constant(std::vector<double> v);
};

// Evaluates the residual given pointers to the referenced blocks' values.
// Returning false marks the residual invalid for this evaluation; it then
// contributes zero to the cost and to the normal equations.
using ResidualFn = std::function<bool(const double* const* blocks, double* residual)>;

class LeastSquaresProblem {
  public:
    int add_block(ParameterBlock block);
    void add_residual(std::vector<int> block_ids, int dimension, ResidualFn fn);

    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    int num_residuals() const { return static_cast<int>(residuals_.size()); }
    int total_residual_dimension() const;
    int total_tangent_dimension() const;

    const ParameterBlock& block(int id) const { return blocks_[id]; }
    ParameterBlock& mutable_block(int id) { return blocks_[id]; }

    struct Residual {
        std::vector<int> block_ids;
        int dimension;
        ResidualFn fn;
    };
    const std::vector<Residual>& residuals() const { return residuals_; }

    // Sum of squared residual norms at the current block values, times 1/2.
    // Invalid residuals are skipped; their count is reported when requested.
    double evaluate_cost(int* invalid_count = nullptr) const;

    void validate() const;

  private:
    std::vector<ParameterBlock> blocks_;
    std::vector<Residual> residuals_;
};

struct SolverConfig {
    int max_iterations = 200;
    double function_tolerance = 1e-12;
    double gradient_tolerance = 1e-12;
    double initial_lambda = 1e-4;
};

enum class TerminationReason {
    kCostTolerance,
    kGradientTolerance,
    kMaxIterations,
    kNoProgress,
};

std::string to_string(TerminationReason reason);

struct SolveResult {
    std::vector<std::vector<double>> parameters;  // final values per block
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int iterations = 0;
    TerminationReason reason = TerminationReason::kMaxIterations;
    // Standard deviation per ambient coordinate of each block, from the
    // pseudo-inverse of the Gauss-Newton Hessian scaled by the residual
    // variance. Zero for constant or unobservable coordinates.
    std::vector<std::vector<double>> std_devs;
    // Gauss-Newton Hessian (J^T J) at the final state, in tangent space,
    // blocks laid out in add_block order. Useful for observability checks.
    Eigen::MatrixXd hessian;
};

// Levenberg-Marquardt with multiplicative damping (x10 on reject, /10 on
// accept). Jacobians by central finite differences in tangent space with
// step max(1e-8, 1e-8 * |value|). Throws CalibrationError(kRankDeficient)
// if the damped normal equations stay unsolvable up to lambda = 1e10.
// On return the problem's blocks hold the final values.
SolveResult solve_lm(LeastSquaresProblem& problem, const SolverConfig& config = {});

// Applies a tangent-space step to a block's values.
std::vector<double> block_plus(const ParameterBlock& block, const double* delta);

// Largest relative disagreement between the finite-difference Jacobian at
// the default step and at half that step, across all residuals and
// coordinates. Guards residual implementations.
double max_jacobian_deviation(const LeastSquaresProblem& problem);

}  // namespace aquacal
