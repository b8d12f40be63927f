#pragma once

#include "fsvm/function.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fsvm {

/// Clamped B-spline space on a grid's interval with uniform interior knots.
///
/// Curves are fitted by quadrature-weighted least squares, so the fitted spline
/// is the L2 orthogonal projection (under the grid's quadrature) onto the space.
class SplineSpace {
public:
    static constexpr int cubic = 3;

    SplineSpace(GridPtr grid, int dimension, int degree = cubic);

    int dimension() const noexcept { return dimension_; }
    int degree() const noexcept { return degree_; }
    const GridPtr& grid() const noexcept { return grid_; }
    const std::vector<double>& knots() const noexcept { return knots_; }

    /// Basis functions (or their derivatives) sampled on the grid: rows = points, cols = basis.
    const Eigen::MatrixXd& design(int derivative = 0) const;

    /// Least-squares coefficients of the curve in the B-spline basis.
    Eigen::VectorXd fit(std::span<const double> values) const;

    /// Derivative of the spline with the given coefficients, sampled on the grid.
    std::vector<double> evaluate(const Eigen::VectorXd& coefficients, int derivative = 0) const;

    double evaluate_at(const Eigen::VectorXd& coefficients, double t, int derivative = 0) const;

    /// Quadrature Gram matrix of the basis, B^T W B.
    Eigen::MatrixXd gram() const;

    /// Leave-one-point-out residuals of the fit, computed from the hat-matrix diagonal.
    Eigen::VectorXd loo_residuals(std::span<const double> values) const;

    /// Linear map from sampled values to fit coefficients (dimension x points).
    const Eigen::MatrixXd& fitter() const noexcept { return fitter_; }

    /// Linear map from sampled values to the sampled derivative of the fitted spline.
    Eigen::MatrixXd derivative_operator(int derivative) const;

private:
    int find_span(double t) const;
    void basis_derivatives(double t, int span, int count, Eigen::MatrixXd& ders) const;

    GridPtr grid_;
    int dimension_;
    int degree_;
    std::vector<double> knots_;
    std::vector<Eigen::MatrixXd> design_; // index = derivative order, 0..degree
    Eigen::MatrixXd fitter_;              // dimension x points, coefficients = fitter * values
    Eigen::VectorXd leverage_;            // hat-matrix diagonal
};

/// Fits a cubic spline of the given dimension and returns its derivative of
/// order 1 or 2 on the original grid.
SampledFunction spline_derivative(const SampledFunction& u, int order, int dimension);

/// Spline dimension minimising the mean leave-one-point-out squared
/// reconstruction error over every curve; ties go to the smaller dimension.
int select_spline_dimension(const LabeledDataset& dataset, std::span<const int> candidates,
                            int degree = SplineSpace::cubic);

} // namespace fsvm
