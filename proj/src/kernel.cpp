#include "fsvm/kernel.hpp"
#include "fsvm/io.hpp"

#include "fsvm/spline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsvm {

void BaseKernelSpec::validate() const
{
    switch (kind) {
    case Kind::linear: return;
    case Kind::gaussian:
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw Error(ErrorKind::configuration, "gaussian kernel needs sigma > 0");
        return;
    case Kind::polynomial:
        if (degree < 1)
            throw Error(ErrorKind::configuration, "polynomial kernel needs degree >= 1");
        return;
    }
}

void FunctionalKernel::validate() const
{
    base.validate();
    for (const auto& t : transforms) {
        if (t.kind != Transform::Kind::derivative)
            continue;
        if (t.order != 1 && t.order != 2)
            throw Error(ErrorKind::configuration, "derivative transform order must be 1 or 2");
        if (t.spline_dimension < t.order + 4)
            throw Error(ErrorKind::configuration,
                        "derivative transform needs spline dimension >= order + 4");
    }
    if (projection && projection->dimension < 1)
        throw Error(ErrorKind::configuration, "projection dimension must be positive");
}

std::string FunctionalKernel::describe() const
{
    std::ostringstream out;
    for (const auto& t : transforms) {
        switch (t.kind) {
        case Transform::Kind::center: out << "center|"; break;
        case Transform::Kind::normalize: out << "normalize|"; break;
        case Transform::Kind::derivative: out << "d" << t.order << "[" << t.spline_dimension << "]|"; break;
        }
    }
    if (projection)
        out << to_string(projection->family) << ":" << projection->dimension << "|";
    switch (base.kind) {
    case BaseKernelSpec::Kind::linear: out << "linear"; break;
    case BaseKernelSpec::Kind::gaussian: out << "gaussian(" << format_double(base.sigma) << ")"; break;
    case BaseKernelSpec::Kind::polynomial: out << "polynomial(" << base.degree << ")"; break;
    }
    return out.str();
}

Embedder::Embedder(FunctionalKernel kernel, GridPtr grid, TransformTolerances tolerances)
    : kernel_(std::move(kernel)), grid_(std::move(grid)), tolerances_(tolerances)
{
    if (!grid_)
        throw Error(ErrorKind::structural, "embedder without a grid");
    kernel_.validate();
    for (const auto& t : kernel_.transforms)
        if (t.kind == Transform::Kind::derivative)
            derivative_ops_.push_back(SplineSpace(grid_, t.spline_dimension).derivative_operator(t.order));

    sqrt_weights_.resize(grid_->size());
    for (std::size_t k = 0; k < sqrt_weights_.size(); ++k)
        sqrt_weights_[k] = std::sqrt(grid_->weights()[k]);

    if (kernel_.projection) {
        check_compatible(*kernel_.projection, *grid_);
        if (kernel_.projection->family == BasisFamily::bspline) {
            const SplineSpace space(grid_, kernel_.projection->dimension, kernel_.projection->spline_degree);
            const Eigen::LLT<Eigen::MatrixXd> llt(space.gram());
            if (llt.info() != Eigen::Success)
                throw Error(ErrorKind::configuration, "B-spline Gram matrix is not positive definite");
            spline_fitter_ = llt.matrixU() * space.fitter();
        }
    }
}

Eigen::VectorXd Embedder::embed(const SampledFunction& u) const
{
    if (!same_grid(u.grid(), grid_))
        throw Error(ErrorKind::structural, "function grid does not match the kernel grid");
    SampledFunction current = u;
    std::size_t derivative_index = 0;
    for (const auto& t : kernel_.transforms) {
        switch (t.kind) {
        case Transform::Kind::center:
            current = center(current);
            break;
        case Transform::Kind::normalize:
            current = normalize(current, tolerances_);
            break;
        case Transform::Kind::derivative: {
            const auto values = current.values();
            const Eigen::Map<const Eigen::VectorXd> x(values.data(), static_cast<Eigen::Index>(values.size()));
            const Eigen::VectorXd d = derivative_ops_[derivative_index++] * x;
            current = SampledFunction(grid_, std::vector<double>(d.data(), d.data() + d.size()));
            break;
        }
        }
    }

    const auto values = current.values();
    if (!kernel_.projection) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
        for (std::size_t k = 0; k < values.size(); ++k)
            out[static_cast<Eigen::Index>(k)] = sqrt_weights_[k] * values[k];
        return out;
    }
    if (kernel_.projection->family == BasisFamily::bspline) {
        const Eigen::Map<const Eigen::VectorXd> x(values.data(), static_cast<Eigen::Index>(values.size()));
        return spline_fitter_ * x;
    }
    return project(current, *kernel_.projection).coefficients;
}

std::vector<Eigen::VectorXd> Embedder::embed_all(std::span<const SampledFunction> functions) const
{
    std::vector<Eigen::VectorXd> out;
    out.reserve(functions.size());
    for (std::size_t i = 0; i < functions.size(); ++i) {
        try {
            out.push_back(embed(functions[i]));
        } catch (const Error& e) {
            rethrow_with_index(e, i);
        }
    }
    return out;
}

double base_kernel(const BaseKernelSpec& base, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    if (a.size() != b.size())
        throw Error(ErrorKind::structural, "embedded vectors differ in length");
    switch (base.kind) {
    case BaseKernelSpec::Kind::linear: {
        double s = 0.0;
        for (Eigen::Index k = 0; k < a.size(); ++k)
            s += a[k] * b[k];
        return s;
    }
    case BaseKernelSpec::Kind::gaussian: {
        double s = 0.0;
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            const double diff = a[k] - b[k];
            s += diff * diff;
        }
        return std::exp(std::max(-700.0, -base.sigma * s));
    }
    case BaseKernelSpec::Kind::polynomial: {
        double s = 0.0;
        for (Eigen::Index k = 0; k < a.size(); ++k)
            s += a[k] * b[k];
        return std::pow(1.0 + s, base.degree);
    }
    }
    return 0.0;
}

double kernel_eval(const FunctionalKernel& kernel, const SampledFunction& u, const SampledFunction& v)
{
    if (!same_grid(u.grid(), v.grid()))
        throw Error(ErrorKind::structural, "functions are sampled on different grids");
    const Embedder embedder(kernel, u.grid());
    Eigen::VectorXd eu, ev;
    try {
        eu = embedder.embed(u);
    } catch (const Error& e) {
        rethrow_with_index(e, 0);
    }
    try {
        ev = embedder.embed(v);
    } catch (const Error& e) {
        rethrow_with_index(e, 1);
    }
    return base_kernel(kernel.base, eu, ev);
}

Eigen::MatrixXd gram_from_embeddings(const BaseKernelSpec& base, std::span<const Eigen::VectorXd> embedded)
{
    const auto n = static_cast<Eigen::Index>(embedded.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = base_kernel(base, embedded[static_cast<std::size_t>(i)],
                                         embedded[static_cast<std::size_t>(j)]);
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

Eigen::MatrixXd gram_matrix(const FunctionalKernel& kernel, std::span<const SampledFunction> functions)
{
    if (functions.empty())
        return {};
    for (std::size_t i = 1; i < functions.size(); ++i)
        if (!same_grid(functions[i].grid(), functions[0].grid()))
            throw Error(ErrorKind::structural, "functions do not share one grid", i);
    const Embedder embedder(kernel, functions[0].grid());
    const auto embedded = embedder.embed_all(functions);
    return gram_from_embeddings(kernel.base, embedded);
}

Eigen::MatrixXd cross_kernel(const BaseKernelSpec& base, std::span<const Eigen::VectorXd> rows,
                             std::span<const Eigen::VectorXd> cols)
{
    Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = base_kernel(base, rows[i], cols[j]);
    return k;
}

} // namespace fsvm
