#include "fsvm/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fsvm {

SplineSpace::SplineSpace(GridPtr grid, int dimension, int degree)
    : grid_(std::move(grid)), dimension_(dimension), degree_(degree)
{
    if (!grid_)
        throw Error(ErrorKind::structural, "spline space without a grid");
    if (degree_ < 1)
        throw Error(ErrorKind::configuration, "spline degree must be at least 1");
    if (dimension_ < degree_ + 1)
        throw Error(ErrorKind::configuration,
                    "spline dimension " + std::to_string(dimension_) + " is below degree + 1");
    const auto n = static_cast<int>(grid_->size());
    if (dimension_ > n)
        throw Error(ErrorKind::configuration,
                    "spline dimension " + std::to_string(dimension_) + " exceeds the "
                        + std::to_string(n) + " grid points (under-determined fit)");

    // Clamped knot vector: degree+1 copies of each end, uniform interior knots.
    const double a = grid_->start();
    const double b = grid_->end();
    const int interior = dimension_ - degree_ - 1;
    knots_.assign(static_cast<std::size_t>(degree_ + 1), a);
    for (int i = 1; i <= interior; ++i)
        knots_.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(interior + 1));
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree_ + 1), b);

    design_.assign(static_cast<std::size_t>(degree_ + 1), Eigen::MatrixXd::Zero(n, dimension_));
    Eigen::MatrixXd ders(degree_ + 1, degree_ + 1);
    const auto& t = grid_->abscissae();
    for (int k = 0; k < n; ++k) {
        const int span = find_span(t[k]);
        basis_derivatives(t[k], span, degree_, ders);
        for (int d = 0; d <= degree_; ++d)
            for (int j = 0; j <= degree_; ++j)
                design_[d](k, span - degree_ + j) = ders(d, j);
    }

    const auto& w = grid_->weights();
    Eigen::VectorXd sqrt_w(n);
    for (int k = 0; k < n; ++k)
        sqrt_w[k] = std::sqrt(w[k]);
    const Eigen::MatrixXd weighted = sqrt_w.asDiagonal() * design_[0];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted);
    qr.setThreshold(1e-12);
    if (qr.rank() < dimension_)
        throw Error(ErrorKind::configuration,
                    "spline dimension " + std::to_string(dimension_)
                        + " is not identifiable from the grid (rank-deficient design)");
    const Eigen::MatrixXd g = weighted.transpose() * weighted;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::configuration, "spline Gram matrix is not positive definite");
    Eigen::MatrixXd rhs = design_[0].transpose();
    for (int k = 0; k < n; ++k)
        rhs.col(k) *= w[k];
    fitter_ = llt.solve(rhs);

    leverage_.resize(n);
    for (int k = 0; k < n; ++k)
        leverage_[k] = design_[0].row(k).dot(fitter_.col(k));
}

int SplineSpace::find_span(double t) const
{
    const int last = dimension_ - 1;
    if (t >= knots_[static_cast<std::size_t>(last + 1)])
        return last;
    if (t <= knots_[static_cast<std::size_t>(degree_)])
        return degree_;
    // Largest span with knots[span] <= t < knots[span + 1].
    const auto first = knots_.begin() + degree_;
    const auto stop = knots_.begin() + last + 1;
    const auto it = std::upper_bound(first, stop, t);
    return static_cast<int>(it - knots_.begin()) - 1;
}

// Non-zero basis functions and their derivatives at t (de Boor / Piegl-Tiller).
void SplineSpace::basis_derivatives(double t, int span, int count, Eigen::MatrixXd& ders) const
{
    const int p = degree_;
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - knots_[static_cast<std::size_t>(span + 1 - j)];
        right[j] = knots_[static_cast<std::size_t>(span + j)] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }

    ders.setZero(count + 1, p + 1);
    for (int j = 0; j <= p; ++j)
        ders(0, j) = ndu(j, p);

    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a.setZero();
        a(0, 0) = 1.0;
        for (int k = 1; k <= count; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= count; ++k) {
        ders.row(k) *= factor;
        factor *= (p - k);
    }
}

const Eigen::MatrixXd& SplineSpace::design(int derivative) const
{
    if (derivative < 0 || derivative > degree_)
        throw Error(ErrorKind::configuration, "derivative order out of range for the spline degree");
    return design_[static_cast<std::size_t>(derivative)];
}

Eigen::VectorXd SplineSpace::fit(std::span<const double> values) const
{
    if (values.size() != grid_->size())
        throw Error(ErrorKind::structural, "values do not match the spline grid");
    const Eigen::Map<const Eigen::VectorXd> u(values.data(), static_cast<Eigen::Index>(values.size()));
    return fitter_ * u;
}

std::vector<double> SplineSpace::evaluate(const Eigen::VectorXd& coefficients, int derivative) const
{
    const Eigen::VectorXd s = design(derivative) * coefficients;
    return {s.data(), s.data() + s.size()};
}

double SplineSpace::evaluate_at(const Eigen::VectorXd& coefficients, double t, int derivative) const
{
    if (derivative < 0 || derivative > degree_)
        throw Error(ErrorKind::configuration, "derivative order out of range for the spline degree");
    t = std::clamp(t, grid_->start(), grid_->end());
    const int span = find_span(t);
    Eigen::MatrixXd ders;
    basis_derivatives(t, span, derivative, ders);
    double sum = 0.0;
    for (int j = 0; j <= degree_; ++j)
        sum += ders(derivative, j) * coefficients[span - degree_ + j];
    return sum;
}

Eigen::MatrixXd SplineSpace::gram() const
{
    const auto& w = grid_->weights();
    const Eigen::Map<const Eigen::VectorXd> weights(w.data(), static_cast<Eigen::Index>(w.size()));
    return design_[0].transpose() * weights.asDiagonal() * design_[0];
}

Eigen::VectorXd SplineSpace::loo_residuals(std::span<const double> values) const
{
    const Eigen::VectorXd c = fit(values);
    const Eigen::VectorXd fitted = design_[0] * c;
    Eigen::VectorXd out(fitted.size());
    for (Eigen::Index k = 0; k < fitted.size(); ++k) {
        const double slack = 1.0 - leverage_[k];
        if (!(slack > 1e-10))
            throw Error(ErrorKind::configuration,
                        "spline dimension " + std::to_string(dimension_)
                            + " interpolates a grid point; leave-one-out is undefined");
        out[k] = (values[static_cast<std::size_t>(k)] - fitted[k]) / slack;
    }
    return out;
}

Eigen::MatrixXd SplineSpace::derivative_operator(int derivative) const
{
    return design(derivative) * fitter_;
}

SampledFunction spline_derivative(const SampledFunction& u, int order, int dimension)
{
    if (order != 1 && order != 2)
        throw Error(ErrorKind::configuration, "derivative order must be 1 or 2");
    const SplineSpace space(u.grid(), dimension);
    return SampledFunction(u.grid(), space.evaluate(space.fit(u.values()), order));
}

int select_spline_dimension(const LabeledDataset& dataset, std::span<const int> candidates, int degree)
{
    if (candidates.empty())
        throw Error(ErrorKind::configuration, "no candidate spline dimensions");
    if (dataset.empty())
        throw Error(ErrorKind::configuration, "spline dimension selection needs at least one curve");

    double scale = 0.0;
    for (const auto& f : dataset.functions())
        for (double x : f.values())
            scale += x * x;
    scale /= static_cast<double>(dataset.size() * dataset.grid()->size());
    const double tie = 1e-10 * scale + std::numeric_limits<double>::min();

    std::vector<int> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    int best = -1;
    double best_error = std::numeric_limits<double>::infinity();
    std::string last_failure;
    for (int dim : sorted) {
        double total = 0.0;
        try {
            if (dim < degree + 1)
                throw Error(ErrorKind::configuration, "dimension below spline order");
            if (static_cast<std::size_t>(dim) >= dataset.grid()->size())
                throw Error(ErrorKind::configuration, "dimension leaves no point to hold out");
            const SplineSpace space(dataset.grid(), dim, degree);
            for (const auto& f : dataset.functions())
                total += space.loo_residuals(f.values()).squaredNorm()
                         / static_cast<double>(f.size());
        } catch (const Error& e) {
            last_failure = e.what();
            continue;
        }
        const double error = total / static_cast<double>(dataset.size());
        if (best < 0 || error < best_error - tie) {
            best = dim;
            best_error = error;
        }
    }
    if (best < 0)
        throw Error(ErrorKind::configuration, "every candidate spline dimension is infeasible: " + last_failure);
    return best;
}

} // namespace fsvm
