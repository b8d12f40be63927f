#include "fsvm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fsvm {

namespace {

constexpr double tau = 1e-12;

void check_problem(const Eigen::MatrixXd& gram, std::span<const int> labels, double C,
                   const SolverOptions& options)
{
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (gram.rows() != n || gram.cols() != n)
        throw Error(ErrorKind::structural, "Gram matrix size does not match the number of labels");
    if (!(C > 0.0) || !std::isfinite(C))
        throw Error(ErrorKind::configuration, "C must be a positive finite number");
    if (n < 2)
        throw Error(ErrorKind::degenerate_training, "training needs at least two examples");
    bool positive = false, negative = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1)
            positive = true;
        else if (labels[i] == -1)
            negative = true;
        else
            throw Error(ErrorKind::data, "label must be -1 or +1", i);
    }
    if (!positive || !negative)
        throw Error(ErrorKind::degenerate_training, "training set contains a single class");

    const double trace = gram.trace();
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) {
            if (!std::isfinite(gram(i, j)))
                throw Error(ErrorKind::data, "Gram matrix has a non-finite entry");
            if (std::abs(gram(i, j) - gram(j, i)) > 1e-12 * scale)
                throw Error(ErrorKind::structural, "Gram matrix is not symmetric");
        }
    if (options.check_psd) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        const double smallest = eig.eigenvalues().minCoeff();
        if (smallest < -options.psd_slack * std::abs(trace))
            throw Error(ErrorKind::data,
                        "Gram matrix is not positive semidefinite (min eigenvalue "
                            + std::to_string(smallest) + ")");
    }
}

double compute_bias(std::span<const int> y, std::span<const double> alpha,
                    const std::vector<double>& grad, double C)
{
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double candidate = -y[i] * grad[i];
        if (alpha[i] > 0.0 && alpha[i] < C) {
            free_sum += candidate;
            ++free_count;
        } else if (alpha[i] <= 0.0) {
            if (y[i] == 1)
                lower = std::max(lower, candidate);
            else
                upper = std::min(upper, candidate);
        } else {
            if (y[i] == 1)
                upper = std::min(upper, candidate);
            else
                lower = std::max(lower, candidate);
        }
    }
    if (free_count > 0)
        return free_sum / static_cast<double>(free_count);
    if (std::isinf(lower))
        return upper;
    if (std::isinf(upper))
        return lower;
    return 0.5 * (lower + upper);
}

} // namespace

double dual_objective(const Eigen::MatrixXd& gram, std::span<const int> labels, std::span<const double> alphas)
{
    double linear = 0.0, quadratic = 0.0;
    const std::size_t n = labels.size();
    for (std::size_t i = 0; i < n; ++i) {
        linear += alphas[i];
        for (std::size_t j = 0; j < n; ++j)
            quadratic += alphas[i] * alphas[j] * labels[i] * labels[j]
                         * gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return linear - 0.5 * quadratic;
}

double primal_objective(const Eigen::MatrixXd& gram, std::span<const int> labels,
                        std::span<const double> alphas, double bias, double C)
{
    const std::size_t n = labels.size();
    double w2 = 0.0, hinge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = bias;
        for (std::size_t j = 0; j < n; ++j) {
            const double k = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            f += alphas[j] * labels[j] * k;
            w2 += alphas[i] * alphas[j] * labels[i] * labels[j] * k;
        }
        hinge += std::max(0.0, 1.0 - labels[i] * f);
    }
    return 0.5 * w2 + C * hinge;
}

DualSolution solve_dual(const Eigen::MatrixXd& gram, std::span<const int> labels, double C,
                        const SolverOptions& options)
{
    check_problem(gram, labels, C, options);
    const std::size_t n = labels.size();
    const auto q = [&](std::size_t i, std::size_t j) {
        return labels[i] * labels[j] * gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // gradient of 1/2 a'Qa - sum(a)
    std::int64_t iteration = 0;
    double gap = std::numeric_limits<double>::infinity();

    const auto in_up = [&](std::size_t t) {
        return (labels[t] == 1 && alpha[t] < C) || (labels[t] == -1 && alpha[t] > 0.0);
    };
    const auto in_low = [&](std::size_t t) {
        return (labels[t] == 1 && alpha[t] > 0.0) || (labels[t] == -1 && alpha[t] < C);
    };

    while (true) {
        std::size_t i = n, j = n;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -labels[t] * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        gap = (i == n || j == n) ? 0.0 : g_max - g_min;
        if (gap < options.tolerance)
            break;
        if (iteration >= options.max_iterations) {
            DualSolution best{alpha, compute_bias(labels, alpha, grad, C), dual_objective(gram, labels, alpha),
                              iteration, gap, C};
            throw ConvergenceError("SMO did not converge within " + std::to_string(options.max_iterations)
                                       + " pair updates (KKT gap " + std::to_string(gap) + ")",
                                   std::move(best));
        }
        ++iteration;

        const double old_i = alpha[i], old_j = alpha[j];
        if (labels[i] != labels[j]) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0)
                quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0)
                quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double d_i = alpha[i] - old_i;
        const double d_j = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += q(t, i) * d_i + q(t, j) * d_j;
    }

    DualSolution out;
    out.alphas = std::move(alpha);
    out.bias = compute_bias(labels, out.alphas, grad, C);
    out.objective = dual_objective(gram, labels, out.alphas);
    out.iterations = iteration;
    out.kkt_violation = gap;
    out.C = C;
    return out;
}

SvmModel::SvmModel(FunctionalKernel kernel, GridPtr grid, std::vector<Eigen::VectorXd> support,
                   std::vector<double> alphas, std::vector<int> labels, double bias, ModelMetadata metadata)
    : embedder_(std::make_shared<const Embedder>(std::move(kernel), std::move(grid))),
      support_(std::move(support)), alphas_(std::move(alphas)), labels_(std::move(labels)), bias_(bias),
      metadata_(metadata)
{
    if (support_.size() != alphas_.size() || support_.size() != labels_.size())
        throw Error(ErrorKind::structural, "support vectors, alphas and labels differ in count");
    for (std::size_t i = 0; i < alphas_.size(); ++i) {
        if (!(alphas_[i] > 0.0))
            throw Error(ErrorKind::data, "stored alphas must be positive", i);
        if (labels_[i] != 1 && labels_[i] != -1)
            throw Error(ErrorKind::data, "label must be -1 or +1", i);
    }
    if (!std::isfinite(bias_))
        throw Error(ErrorKind::data, "model bias is not finite");
}

SvmModel SvmModel::from_solution(const Embedder& embedder, std::vector<Eigen::VectorXd> embedded,
                                 std::span<const int> labels, const DualSolution& solution, ModelMetadata metadata)
{
    std::vector<Eigen::VectorXd> support;
    std::vector<double> alphas;
    std::vector<int> y;
    for (std::size_t i = 0; i < solution.alphas.size(); ++i) {
        if (solution.alphas[i] > 0.0) {
            support.push_back(std::move(embedded[i]));
            alphas.push_back(solution.alphas[i]);
            y.push_back(labels[i]);
        }
    }
    metadata.C = solution.C;
    return SvmModel(embedder.kernel(), embedder.grid(), std::move(support), std::move(alphas), std::move(y),
                    solution.bias, metadata);
}

double SvmModel::decision_value_embedded(const Eigen::VectorXd& x) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i)
        sum += alphas_[i] * labels_[i] * base_kernel(kernel().base, support_[i], x);
    return sum + bias_;
}

double SvmModel::decision_value(const SampledFunction& x) const
{
    return decision_value_embedded(embedder_->embed(x));
}

std::vector<double> SvmModel::decision_values(std::span<const SampledFunction> xs) const
{
    std::vector<double> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        try {
            out.push_back(decision_value(xs[i]));
        } catch (const Error& e) {
            rethrow_with_index(e, i);
        }
    }
    return out;
}

std::vector<int> SvmModel::predict_all(std::span<const SampledFunction> xs) const
{
    std::vector<int> out;
    for (double v : decision_values(xs))
        out.push_back(sign_label(v));
    return out;
}

TrainResult train(const FunctionalKernel& kernel, const LabeledDataset& data, double C,
                  const SolverOptions& options, std::uint64_t seed)
{
    if (data.empty())
        throw Error(ErrorKind::degenerate_training, "empty training set");
    const Embedder embedder(kernel, data.grid());
    auto embedded = embedder.embed_all(data.functions());
    const Eigen::MatrixXd gram = gram_from_embeddings(kernel.base, embedded);
    DualSolution solution = solve_dual(gram, data.labels(), C, options);
    SvmModel model = SvmModel::from_solution(embedder, std::move(embedded), data.labels(), solution,
                                             ModelMetadata{C, seed, data.size()});
    return {std::move(model), std::move(solution)};
}

} // namespace fsvm
