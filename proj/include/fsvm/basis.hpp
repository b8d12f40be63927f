#pragma once

#include "fsvm/function.hpp"
#include "fsvm/spline.hpp"

#include <Eigen/Dense>

#include <string>

namespace fsvm {

enum class BasisFamily { fourier, haar_wavelet, bspline };

const char* to_string(BasisFamily family) noexcept;
BasisFamily basis_family_from_string(const std::string& name);

/// A d-dimensional projection subspace.
///
/// Fourier: constant first, then (cos 2 pi k s, sin 2 pi k s) pairs with s the
/// abscissa rescaled to [0, 1]; every element has unit quadrature norm.
///
/// Haar: scaling function first, then details coarsest to finest. Orthonormal in
/// the quadrature inner product on dyadic grids. Other grid lengths are padded
/// symmetrically with zeros (after removing the mean) to the next power of two;
/// the mean goes into the scaling coefficient, so analysis stays an isometry.
///
/// B-spline: clamped cubic spline space of the given dimension; coefficients are
/// least-squares fit coefficients (not orthonormal).
struct BasisSpec {
    BasisFamily family = BasisFamily::fourier;
    int dimension = 1;
    int spline_degree = SplineSpace::cubic;

    bool operator==(const BasisSpec&) const = default;
};

/// Largest admissible dimension of the family on a grid.
std::size_t max_dimension(BasisFamily family, const SamplingGrid& grid, int spline_degree = SplineSpace::cubic);

/// Throws a configuration error when `basis` cannot be used on `grid`.
void check_compatible(const BasisSpec& basis, const SamplingGrid& grid);

struct CoefficientVector {
    Eigen::VectorXd coefficients;
    BasisSpec basis;
};

enum class FourierPath { automatic, direct, fft };

/// Coordinates of u in the basis (quadrature inner products, or spline fit
/// coefficients for the B-spline family). The automatic Fourier path uses an
/// FFT on uniform grids.
CoefficientVector project(const SampledFunction& u, const BasisSpec& basis,
                          FourierPath path = FourierPath::automatic);

/// Evaluates sum_j c_j Psi_j on the grid.
SampledFunction reconstruct(const CoefficientVector& c, const GridPtr& grid);

/// Basis elements sampled on the grid, one column per element.
Eigen::MatrixXd sample_basis(const BasisSpec& basis, const GridPtr& grid);

/// Orthonormal Haar transform in place (length must be a power of two).
void haar_forward(std::span<double> data);
void haar_inverse(std::span<double> data);

} // namespace fsvm
