#include "aquacal/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "aquacal/so3.hpp"

namespace aquacal {

namespace {

void fail(CalibrationError::Code code, const std::string& msg) {
    throw CalibrationError(code, msg);
}

// Orthonormal basis of the plane perpendicular to a unit vector.
Eigen::Matrix<double, 3, 2> tangent_basis(const Vec3& v) {
    const Vec3 e = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Eigen::Matrix<double, 3, 2> basis;
    basis.col(0) = v.cross(e).normalized();
    basis.col(1) = v.cross(basis.col(0));
    return basis;
}

}  // namespace

bool ParameterBlock::is_constant() const {
    if (constant_mask.empty()) return false;
    return std::all_of(constant_mask.begin(), constant_mask.end(),
                       [](uint8_t m) { return m != 0; });
}

int ParameterBlock::tangent_size() const {
    if (is_constant()) return 0;
    switch (manifold) {
        case Manifold::kEuclidean: {
            if (constant_mask.empty()) return static_cast<int>(values.size());
            int n = 0;
            for (uint8_t m : constant_mask) n += (m == 0);
            return n;
        }
        case Manifold::kUnitVector: return 2;
        case Manifold::kRotationAxisAngle: return 3;
    }
    return 0;
}

void ParameterBlock::validate() const {
    if (values.empty()) fail(CalibrationError::Code::kValidationError, "empty parameter block");
    if (!constant_mask.empty() && constant_mask.size() != values.size()) {
        fail(CalibrationError::Code::kValidationError, "constant mask size mismatch");
    }
    if (manifold != Manifold::kEuclidean) {
        if (values.size() != 3) {
            fail(CalibrationError::Code::kValidationError, "manifold blocks must have 3 values");
        }
        if (!constant_mask.empty() && !is_constant() &&
            std::any_of(constant_mask.begin(), constant_mask.end(),
                        [](uint8_t m) { return m != 0; })) {
            fail(CalibrationError::Code::kValidationError,
                 "manifold blocks support only all-or-nothing masking");
        }
        if (!lower_bounds.empty()) {
            fail(CalibrationError::Code::kValidationError,
                 "lower bounds are supported on Euclidean blocks only");
        }
    }
    if (!lower_bounds.empty() && lower_bounds.size() != values.size()) {
        fail(CalibrationError::Code::kValidationError, "lower bounds size mismatch");
    }
}

ParameterBlock ParameterBlock::constant(std::vector<double> v) {
    ParameterBlock block;
    block.constant_mask.assign(v.size(), 1);
    block.values = std::move(v);
    return block;
}

std::vector<double> block_plus(const ParameterBlock& block, const double* delta) {
    std::vector<double> out = block.values;
    if (block.is_constant()) return out;
    switch (block.manifold) {
        case Manifold::kEuclidean: {
            int k = 0;
            for (size_t i = 0; i < out.size(); ++i) {
                if (!block.constant_mask.empty() && block.constant_mask[i]) continue;
                out[i] += delta[k++];
                if (!block.lower_bounds.empty()) {
                    out[i] = std::max(out[i], block.lower_bounds[i]);
                }
            }
            break;
        }
        case Manifold::kUnitVector: {
            const Vec3 v(out[0], out[1], out[2]);
            const auto basis = tangent_basis(v);
            const Vec3 updated = (v + delta[0] * basis.col(0) + delta[1] * basis.col(1)).normalized();
            out = {updated.x(), updated.y(), updated.z()};
            break;
        }
        case Manifold::kRotationAxisAngle: {
            const Vec3 w(out[0], out[1], out[2]);
            const Vec3 d(delta[0], delta[1], delta[2]);
            const Vec3 updated = so3_log(so3_exp(d) * so3_exp(w));
            out = {updated.x(), updated.y(), updated.z()};
            break;
        }
    }
    return out;
}

int LeastSquaresProblem::add_block(ParameterBlock block) {
    block.validate();
    blocks_.push_back(std::move(block));
    return static_cast<int>(blocks_.size()) - 1;
}

void LeastSquaresProblem::add_residual(std::vector<int> block_ids, int dimension, ResidualFn fn) {
    for (int id : block_ids) {
        if (id < 0 || id >= num_blocks()) {
            fail(CalibrationError::Code::kValidationError, "residual references unknown block");
        }
    }
    if (dimension <= 0) {
        fail(CalibrationError::Code::kValidationError, "residual dimension must be positive");
    }
    residuals_.push_back({std::move(block_ids), dimension, std::move(fn)});
}

int LeastSquaresProblem::total_residual_dimension() const {
    int n = 0;
    for (const auto& r : residuals_) n += r.dimension;
    return n;
}

int LeastSquaresProblem::total_tangent_dimension() const {
    int n = 0;
    for (const auto& b : blocks_) n += b.tangent_size();
    return n;
}

void LeastSquaresProblem::validate() const {
    if (residuals_.empty()) {
        fail(CalibrationError::Code::kValidationError, "problem has no residuals");
    }
    if (total_residual_dimension() < total_tangent_dimension()) {
        fail(CalibrationError::Code::kValidationError,
             "fewer residuals than free parameters");
    }
}

namespace {

// Working state shared by the solve loop: current values per block plus the
// pointer table handed to residual functions.
class Evaluator {
  public:
    explicit Evaluator(const LeastSquaresProblem& problem) : problem_(problem) {
        const int n = problem.num_blocks();
        state_.resize(n);
        tangent_offset_.resize(n);
        int offset = 0;
        for (int i = 0; i < n; ++i) {
            state_[i] = problem.block(i).values;
            tangent_offset_[i] = offset;
            offset += problem.block(i).tangent_size();
        }
        tangent_dim_ = offset;
        max_dim_ = 0;
        for (const auto& r : problem.residuals()) {
            max_dim_ = std::max(max_dim_, r.dimension);
        }
    }

    int tangent_dim() const { return tangent_dim_; }
    int tangent_offset(int block) const { return tangent_offset_[block]; }
    const std::vector<std::vector<double>>& state() const { return state_; }
    void set_state(std::vector<std::vector<double>> s) { state_ = std::move(s); }

    double cost(const std::vector<std::vector<double>>& state, int* invalid = nullptr) const {
        double total = 0.0;
        int bad = 0;
        std::vector<const double*> ptrs;
        std::vector<double> res(max_dim_);
        for (const auto& r : problem_.residuals()) {
            ptrs.clear();
            for (int id : r.block_ids) ptrs.push_back(state[id].data());
            if (!r.fn(ptrs.data(), res.data())) {
                ++bad;
                continue;
            }
            for (int k = 0; k < r.dimension; ++k) total += res[k] * res[k];
        }
        if (invalid) *invalid = bad;
        return 0.5 * total;
    }

    // Cost of a candidate state, restricted to the residuals that were valid
    // at the reference state. A step that breaks a previously valid residual
    // is rejected outright (infinite cost); residuals already invalid stay
    // zero-weighted on both sides so the comparison is over the same set.
    double candidate_cost(const std::vector<std::vector<double>>& state,
                          const std::vector<uint8_t>& reference_valid) const {
        double total = 0.0;
        std::vector<const double*> ptrs;
        std::vector<double> res(max_dim_);
        const auto& residuals = problem_.residuals();
        for (size_t i = 0; i < residuals.size(); ++i) {
            if (!reference_valid[i]) continue;
            const auto& r = residuals[i];
            ptrs.clear();
            for (int id : r.block_ids) ptrs.push_back(state[id].data());
            if (!r.fn(ptrs.data(), res.data())) {
                return std::numeric_limits<double>::infinity();
            }
            for (int k = 0; k < r.dimension; ++k) total += res[k] * res[k];
        }
        return 0.5 * total;
    }

    // Candidate state after a full tangent step.
    std::vector<std::vector<double>> plus(const Eigen::VectorXd& delta) const {
        std::vector<std::vector<double>> out(state_.size());
        for (size_t i = 0; i < state_.size(); ++i) {
            const ParameterBlock& b = problem_.block(static_cast<int>(i));
            if (b.tangent_size() == 0) {
                out[i] = state_[i];
            } else {
                ParameterBlock tmp = b;
                tmp.values = state_[i];
                out[i] = block_plus(tmp, delta.data() + tangent_offset_[i]);
            }
        }
        return out;
    }

    // Accumulates the Gauss-Newton normal equations at the current state.
    // Returns the cost. Residuals that fail to evaluate at the center are
    // zero-weighted for this iteration. A failing finite-difference probe
    // (e.g. at a bound) falls back to a one-sided difference; if both sides
    // fail the column is zeroed, but the residual keeps its weight.
    double assemble(Eigen::MatrixXd* H, Eigen::VectorXd* g,
                    std::vector<uint8_t>* valid) const {
        H->setZero(tangent_dim_, tangent_dim_);
        g->setZero(tangent_dim_);
        double total = 0.0;
        if (valid) valid->assign(problem_.residuals().size(), 0);

        std::vector<const double*> ptrs;
        std::vector<double> res(max_dim_), res_plus(max_dim_), res_minus(max_dim_);
        Eigen::MatrixXd J;
        std::vector<double> probe_plus, probe_minus;

        for (size_t ri = 0; ri < problem_.residuals().size(); ++ri) {
            const auto& r = problem_.residuals()[ri];
            ptrs.clear();
            for (int id : r.block_ids) ptrs.push_back(state_[id].data());
            if (!r.fn(ptrs.data(), res.data())) {
                continue;
            }
            if (valid) (*valid)[ri] = 1;

            int local_dim = 0;
            for (int id : r.block_ids) local_dim += problem_.block(id).tangent_size();
            J.setZero(r.dimension, local_dim);

            int col = 0;
            for (size_t bi = 0; bi < r.block_ids.size(); ++bi) {
                const int id = r.block_ids[bi];
                const ParameterBlock& b = problem_.block(id);
                const int ts = b.tangent_size();
                if (ts == 0) continue;

                ParameterBlock tmp = b;
                tmp.values = state_[id];
                std::vector<double> delta(ts, 0.0);
                for (int k = 0; k < ts; ++k) {
                    const double step = fd_step(b, state_[id], k);
                    delta[k] = step;
                    probe_plus = block_plus(tmp, delta.data());
                    ptrs[bi] = probe_plus.data();
                    const bool plus_ok = r.fn(ptrs.data(), res_plus.data());
                    delta[k] = -step;
                    probe_minus = block_plus(tmp, delta.data());
                    ptrs[bi] = probe_minus.data();
                    const bool minus_ok = r.fn(ptrs.data(), res_minus.data());
                    delta[k] = 0.0;
                    if (plus_ok && minus_ok) {
                        for (int d = 0; d < r.dimension; ++d) {
                            J(d, col + k) = (res_plus[d] - res_minus[d]) / (2.0 * step);
                        }
                    } else if (plus_ok) {
                        for (int d = 0; d < r.dimension; ++d) {
                            J(d, col + k) = (res_plus[d] - res[d]) / step;
                        }
                    } else if (minus_ok) {
                        for (int d = 0; d < r.dimension; ++d) {
                            J(d, col + k) = (res[d] - res_minus[d]) / step;
                        }
                    }
                }
                ptrs[bi] = state_[id].data();
                col += ts;
            }

            for (int k = 0; k < r.dimension; ++k) total += res[k] * res[k];

            // Scatter J^T J and J^T r into the global system.
            const Eigen::Map<const Eigen::VectorXd> rv(res.data(), r.dimension);
            int row_off = 0;
            for (size_t bi = 0; bi < r.block_ids.size(); ++bi) {
                const int tsi = problem_.block(r.block_ids[bi]).tangent_size();
                if (tsi == 0) continue;
                const int gi = tangent_offset_[r.block_ids[bi]];
                g->segment(gi, tsi).noalias() +=
                    J.middleCols(row_off, tsi).transpose() * rv;
                int col_off = 0;
                for (size_t bj = 0; bj < r.block_ids.size(); ++bj) {
                    const int tsj = problem_.block(r.block_ids[bj]).tangent_size();
                    if (tsj == 0) continue;
                    const int gj = tangent_offset_[r.block_ids[bj]];
                    H->block(gi, gj, tsi, tsj).noalias() +=
                        J.middleCols(row_off, tsi).transpose() * J.middleCols(col_off, tsj);
                    col_off += tsj;
                }
                row_off += tsi;
            }
        }
        return 0.5 * total;
    }

    static double fd_step(const ParameterBlock& b, const std::vector<double>& values,
                          int tangent_coord) {
        if (b.manifold == Manifold::kEuclidean) {
            int k = 0;
            for (size_t i = 0; i < values.size(); ++i) {
                if (!b.constant_mask.empty() && b.constant_mask[i]) continue;
                if (k == tangent_coord) {
                    return std::max(1e-8, 1e-8 * std::abs(values[i]));
                }
                ++k;
            }
        }
        return 1e-8;
    }

  private:
    const LeastSquaresProblem& problem_;
    std::vector<std::vector<double>> state_;
    std::vector<int> tangent_offset_;
    int tangent_dim_ = 0;
    int max_dim_ = 0;
};

constexpr double kMaxLambda = 1e10;

}  // namespace

double LeastSquaresProblem::evaluate_cost(int* invalid_count) const {
    Evaluator eval(*this);
    return eval.cost(eval.state(), invalid_count);
}

std::string to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::kCostTolerance: return "cost_tolerance";
        case TerminationReason::kGradientTolerance: return "gradient_tolerance";
        case TerminationReason::kMaxIterations: return "max_iterations";
        case TerminationReason::kNoProgress: return "no_progress";
    }
    return "unknown";
}

SolveResult solve_lm(LeastSquaresProblem& problem, const SolverConfig& config) {
    problem.validate();
    Evaluator eval(problem);
    const int n = eval.tangent_dim();

    SolveResult result;
    result.initial_cost = eval.cost(eval.state());
    double cost = result.initial_cost;
    result.reason = TerminationReason::kMaxIterations;

    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd g(n);
    std::vector<uint8_t> valid_mask;
    double lambda = config.initial_lambda;

    int iter = 0;
    for (; iter < config.max_iterations && n > 0; ++iter) {
        const double assembled_cost = eval.assemble(&H, &g, &valid_mask);
        cost = assembled_cost;

        if (g.cwiseAbs().maxCoeff() < config.gradient_tolerance) {
            result.reason = TerminationReason::kGradientTolerance;
            break;
        }

        Eigen::VectorXd damping = H.diagonal().cwiseMax(1e-12);
        bool accepted = false;
        bool ever_solved = false;
        while (lambda <= kMaxLambda) {
            Eigen::MatrixXd A = H;
            A.diagonal() += lambda * damping;
            const Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() != Eigen::Success) {
                lambda *= 10.0;
                continue;
            }
            const Eigen::VectorXd delta = llt.solve(-g);
            if (!delta.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            ever_solved = true;
            auto candidate = eval.plus(delta);
            const double new_cost = eval.candidate_cost(candidate, valid_mask);
            if (std::isfinite(new_cost) && new_cost < cost) {
                eval.set_state(std::move(candidate));
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                const double decrease = cost - new_cost;
                cost = new_cost;
                if (decrease <= config.function_tolerance * std::max(cost, 1e-300)) {
                    result.reason = TerminationReason::kCostTolerance;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            if (!ever_solved) {
                throw CalibrationError(CalibrationError::Code::kRankDeficient,
                                       "normal equations unsolvable with damping up to 1e10");
            }
            result.reason = TerminationReason::kNoProgress;
            break;
        }
        if (result.reason == TerminationReason::kCostTolerance) {
            ++iter;
            break;
        }
    }

    result.iterations = iter;
    result.final_cost = cost;

    // Write the final state back into the problem and the result.
    result.parameters.resize(problem.num_blocks());
    for (int i = 0; i < problem.num_blocks(); ++i) {
        problem.mutable_block(i).values = eval.state()[i];
        result.parameters[i] = eval.state()[i];
    }

    // Standard deviations from the pseudo-inverse of the final Hessian.
    result.std_devs.resize(problem.num_blocks());
    if (n > 0) {
        eval.assemble(&H, &g, nullptr);
        result.hessian = H;
        const int m = problem.total_residual_dimension();
        const double dof = std::max(1, m - n);
        const double sigma2 = 2.0 * result.final_cost / dof;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        const Eigen::VectorXd& evals = es.eigenvalues();
        const double cutoff = std::max(evals.maxCoeff(), 0.0) * 1e-12;
        Eigen::VectorXd inv_evals =
            (evals.array() > cutoff).select(evals.array().inverse(), 0.0);
        const Eigen::MatrixXd cov =
            sigma2 * es.eigenvectors() * inv_evals.asDiagonal() *
            es.eigenvectors().transpose();

        for (int i = 0; i < problem.num_blocks(); ++i) {
            const ParameterBlock& b = problem.block(i);
            std::vector<double>& out = result.std_devs[i];
            out.assign(b.values.size(), 0.0);
            const int ts = b.tangent_size();
            if (ts == 0) continue;
            const int off = eval.tangent_offset(i);
            const Eigen::MatrixXd local = cov.block(off, off, ts, ts);
            switch (b.manifold) {
                case Manifold::kEuclidean: {
                    int k = 0;
                    for (size_t c = 0; c < b.values.size(); ++c) {
                        if (!b.constant_mask.empty() && b.constant_mask[c]) continue;
                        out[c] = std::sqrt(std::max(local(k, k), 0.0));
                        ++k;
                    }
                    break;
                }
                case Manifold::kUnitVector: {
                    const Vec3 v(b.values[0], b.values[1], b.values[2]);
                    const auto basis = tangent_basis(v);
                    const Eigen::Matrix3d ambient = basis * local * basis.transpose();
                    for (int c = 0; c < 3; ++c) {
                        out[c] = std::sqrt(std::max(ambient(c, c), 0.0));
                    }
                    break;
                }
                case Manifold::kRotationAxisAngle: {
                    for (int c = 0; c < 3; ++c) {
                        out[c] = std::sqrt(std::max(local(c, c), 0.0));
                    }
                    break;
                }
            }
        }
    }
    return result;
}

double max_jacobian_deviation(const LeastSquaresProblem& problem) {
    // Compare central differences at step h and h/2 for every residual.
    double worst = 0.0;
    std::vector<const double*> ptrs;
    for (const auto& r : problem.residuals()) {
        std::vector<double> res_p(r.dimension), res_m(r.dimension);
        ptrs.clear();
        for (int id : r.block_ids) ptrs.push_back(problem.block(id).values.data());

        for (size_t bi = 0; bi < r.block_ids.size(); ++bi) {
            const ParameterBlock& b = problem.block(r.block_ids[bi]);
            const int ts = b.tangent_size();
            if (ts == 0) continue;
            std::vector<double> delta(ts, 0.0);
            Eigen::MatrixXd Jh(r.dimension, ts), Jh2(r.dimension, ts);
            bool ok = true;
            for (int scale = 0; scale < 2 && ok; ++scale) {
                Eigen::MatrixXd& J = scale == 0 ? Jh : Jh2;
                for (int k = 0; k < ts && ok; ++k) {
                    const double step =
                        Evaluator::fd_step(b, b.values, k) / (scale == 0 ? 1.0 : 2.0);
                    delta[k] = step;
                    auto vp = block_plus(b, delta.data());
                    ptrs[bi] = vp.data();
                    ok = ok && r.fn(ptrs.data(), res_p.data());
                    delta[k] = -step;
                    auto vm = block_plus(b, delta.data());
                    ptrs[bi] = vm.data();
                    ok = ok && r.fn(ptrs.data(), res_m.data());
                    delta[k] = 0.0;
                    if (ok) {
                        for (int d = 0; d < r.dimension; ++d) {
                            J(d, k) = (res_p[d] - res_m[d]) / (2.0 * step);
                        }
                    }
                }
            }
            ptrs[bi] = b.values.data();
            if (!ok) continue;
            const double scale = std::max(Jh.cwiseAbs().maxCoeff(), 1e-6);
            worst = std::max(worst, (Jh - Jh2).cwiseAbs().maxCoeff() / scale);
        }
    }
    return worst;
}

}  // namespace aquacal
