#pragma once

#include "fsvm/kernel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace fsvm {

struct SolverOptions {
    /// Stop when the maximal violating pair gap m(alpha) - M(alpha) falls below this.
    double tolerance = 1e-3;
    std::int64_t max_iterations = 10'000'000;
    /// Accept Gram matrices with minimum eigenvalue >= -psd_slack * trace.
    double psd_slack = 1e-8;
    bool check_psd = true;
};

/// Solution of max sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
/// subject to 0 <= alpha_i <= C and sum alpha_i y_i = 0.
struct DualSolution {
    std::vector<double> alphas;
    double bias = 0.0;
    double objective = 0.0;
    std::int64_t iterations = 0;
    double kkt_violation = 0.0;
    double C = 0.0;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, DualSolution best)
        : Error(ErrorKind::convergence, message), best_(std::move(best)) {}

    const DualSolution& best_iterate() const noexcept { return best_; }

private:
    DualSolution best_;
};

/// SMO with maximal-violating-pair working-set selection (ties to the lowest index).
DualSolution solve_dual(const Eigen::MatrixXd& gram, std::span<const int> labels, double C,
                        const SolverOptions& options = {});

/// Dual objective at alpha.
double dual_objective(const Eigen::MatrixXd& gram, std::span<const int> labels, std::span<const double> alphas);

/// Primal objective 1/2 ||w||^2 + C sum_i hinge_i of the classifier defined by (alpha, b).
double primal_objective(const Eigen::MatrixXd& gram, std::span<const int> labels,
                        std::span<const double> alphas, double bias, double C);

struct ModelMetadata {
    double C = 0.0;
    std::uint64_t seed = 0;
    std::size_t training_size = 0;
};

/// A trained classifier; only support vectors (alpha > 0) are kept, as embedded vectors.
class SvmModel {
public:
    SvmModel(FunctionalKernel kernel, GridPtr grid, std::vector<Eigen::VectorXd> support,
             std::vector<double> alphas, std::vector<int> labels, double bias, ModelMetadata metadata);

    /// Keeps the entries of `solution` with alpha > 0.
    static SvmModel from_solution(const Embedder& embedder, std::vector<Eigen::VectorXd> embedded,
                                  std::span<const int> labels, const DualSolution& solution,
                                  ModelMetadata metadata);

    double decision_value(const SampledFunction& x) const;
    double decision_value_embedded(const Eigen::VectorXd& x) const;
    int predict(const SampledFunction& x) const { return sign_label(decision_value(x)); }

    std::vector<double> decision_values(std::span<const SampledFunction> xs) const;
    std::vector<int> predict_all(std::span<const SampledFunction> xs) const;

    const FunctionalKernel& kernel() const noexcept { return embedder_->kernel(); }
    const GridPtr& grid() const noexcept { return embedder_->grid(); }
    const Embedder& embedder() const noexcept { return *embedder_; }
    const std::vector<Eigen::VectorXd>& support() const noexcept { return support_; }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    double bias() const noexcept { return bias_; }
    const ModelMetadata& metadata() const noexcept { return metadata_; }

    /// Zero maps to +1.
    static int sign_label(double value) noexcept { return value >= 0.0 ? 1 : -1; }

private:
    std::shared_ptr<const Embedder> embedder_;
    std::vector<Eigen::VectorXd> support_;
    std::vector<double> alphas_;
    std::vector<int> labels_;
    double bias_;
    ModelMetadata metadata_;
};

struct TrainResult {
    SvmModel model;
    DualSolution solution;
};

/// Embeds the curves, builds the Gram matrix and solves the dual.
TrainResult train(const FunctionalKernel& kernel, const LabeledDataset& data, double C,
                  const SolverOptions& options = {}, std::uint64_t seed = 0);

} // namespace fsvm
