#pragma once

#include "fsvm/basis.hpp"
#include "fsvm/function.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fsvm {

struct BaseKernelSpec {
    enum class Kind { linear, gaussian, polynomial };

    Kind kind = Kind::linear;
    double sigma = 1.0; // gaussian: exp(-sigma * ||u - v||^2)
    int degree = 1;     // polynomial: (1 + <u, v>)^degree

    static BaseKernelSpec linear() { return {Kind::linear, 1.0, 1}; }
    static BaseKernelSpec gaussian(double sigma) { return {Kind::gaussian, sigma, 1}; }
    static BaseKernelSpec polynomial(int degree) { return {Kind::polynomial, 1.0, degree}; }

    void validate() const;
    bool operator==(const BaseKernelSpec&) const = default;
};

struct Transform {
    enum class Kind { center, normalize, derivative };

    Kind kind = Kind::center;
    int order = 0;           // derivative only: 1 or 2
    int spline_dimension = 0; // derivative only

    static Transform centering() { return {Kind::center, 0, 0}; }
    static Transform normalization() { return {Kind::normalize, 0, 0}; }
    static Transform derivative(int order, int spline_dimension) { return {Kind::derivative, order, spline_dimension}; }

    bool operator==(const Transform&) const = default;
};

/// Q(u, v) = K(P(T(u)), P(T(v))): transforms applied left to right, then an
/// optional projection, then the base kernel.
struct FunctionalKernel {
    std::vector<Transform> transforms;
    std::optional<BasisSpec> projection;
    BaseKernelSpec base;

    void validate() const;
    std::string describe() const;
    bool operator==(const FunctionalKernel&) const = default;
};

/// Maps curves to Euclidean vectors whose dot product is the L2 inner product
/// of the transformed (and projected) curves.
///
/// Raw curves map to sqrt(w) * u; orthonormal bases to their coefficients;
/// B-spline coefficients c to L^T c with L the Cholesky factor of the basis Gram.
/// Operators depending only on the grid are built once at construction.
class Embedder {
public:
    Embedder(FunctionalKernel kernel, GridPtr grid, TransformTolerances tolerances = {});

    Eigen::VectorXd embed(const SampledFunction& u) const;

    /// Embeds a batch; failures carry the offending index.
    std::vector<Eigen::VectorXd> embed_all(std::span<const SampledFunction> functions) const;

    const FunctionalKernel& kernel() const noexcept { return kernel_; }
    const GridPtr& grid() const noexcept { return grid_; }

private:
    FunctionalKernel kernel_;
    GridPtr grid_;
    TransformTolerances tolerances_;
    std::vector<Eigen::MatrixXd> derivative_ops_; // one per derivative transform, in order
    std::vector<double> sqrt_weights_;
    Eigen::MatrixXd spline_fitter_; // maps values to L^T c (bspline projection only)
};

/// Base kernel between two embedded vectors. Gaussian exponents are clamped at -700.
double base_kernel(const BaseKernelSpec& base, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double kernel_eval(const FunctionalKernel& kernel, const SampledFunction& u, const SampledFunction& v);

/// Symmetric Gram matrix; each input is transformed once.
Eigen::MatrixXd gram_matrix(const FunctionalKernel& kernel, std::span<const SampledFunction> functions);

Eigen::MatrixXd gram_from_embeddings(const BaseKernelSpec& base, std::span<const Eigen::VectorXd> embedded);

/// rows x cols kernel values between two embedded sets.
Eigen::MatrixXd cross_kernel(const BaseKernelSpec& base, std::span<const Eigen::VectorXd> rows,
                             std::span<const Eigen::VectorXd> cols);

} // namespace fsvm
