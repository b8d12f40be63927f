#include "fsvm/basis.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>

namespace fsvm {

const char* to_string(BasisFamily family) noexcept
{
    switch (family) {
    case BasisFamily::fourier: return "fourier";
    case BasisFamily::haar_wavelet: return "haar_wavelet";
    case BasisFamily::bspline: return "bspline";
    }
    return "unknown";
}

BasisFamily basis_family_from_string(const std::string& name)
{
    if (name == "fourier")
        return BasisFamily::fourier;
    if (name == "haar_wavelet" || name == "haar")
        return BasisFamily::haar_wavelet;
    if (name == "bspline")
        return BasisFamily::bspline;
    throw Error(ErrorKind::configuration, "unknown basis family '" + name + "'");
}

std::size_t max_dimension(BasisFamily family, const SamplingGrid& grid, int)
{
    switch (family) {
    case BasisFamily::fourier: return grid.size() - 1;
    case BasisFamily::haar_wavelet: return grid.size();
    case BasisFamily::bspline: return grid.size();
    }
    return 0;
}

void check_compatible(const BasisSpec& basis, const SamplingGrid& grid)
{
    if (basis.dimension < 1)
        throw Error(ErrorKind::configuration, "basis dimension must be positive");
    const std::size_t cap = max_dimension(basis.family, grid, basis.spline_degree);
    if (static_cast<std::size_t>(basis.dimension) > cap)
        throw Error(ErrorKind::configuration,
                    std::string(to_string(basis.family)) + " basis of dimension "
                        + std::to_string(basis.dimension) + " exceeds the maximum "
                        + std::to_string(cap) + " for a grid of " + std::to_string(grid.size())
                        + " points");
    if (basis.family == BasisFamily::bspline && basis.dimension < basis.spline_degree + 1)
        throw Error(ErrorKind::configuration, "B-spline dimension is below the spline order");
}

void haar_forward(std::span<double> data)
{
    std::vector<double> tmp(data.size());
    for (std::size_t len = data.size(); len > 1; len /= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            tmp[i] = (data[2 * i] + data[2 * i + 1]) * std::numbers::sqrt2 / 2.0;
            tmp[half + i] = (data[2 * i] - data[2 * i + 1]) * std::numbers::sqrt2 / 2.0;
        }
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(len), data.begin());
    }
}

void haar_inverse(std::span<double> data)
{
    std::vector<double> tmp(data.size());
    for (std::size_t len = 2; len <= data.size(); len *= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            tmp[2 * i] = (data[i] + data[half + i]) * std::numbers::sqrt2 / 2.0;
            tmp[2 * i + 1] = (data[i] - data[half + i]) * std::numbers::sqrt2 / 2.0;
        }
        std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(len), data.begin());
    }
}

namespace {

double fourier_element(int j, double s, double length)
{
    if (j == 0)
        return 1.0 / std::sqrt(length);
    const int k = (j + 1) / 2;
    const double scale = std::sqrt(2.0 / length);
    const double angle = 2.0 * std::numbers::pi * k * s;
    return (j % 2 == 1) ? scale * std::cos(angle) : scale * std::sin(angle);
}

Eigen::VectorXd fourier_direct(const SampledFunction& u, int d)
{
    const auto& grid = *u.grid();
    const auto& t = grid.abscissae();
    const auto& w = grid.weights();
    const double length = grid.length();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double s = (t[k] - grid.start()) / length;
        const double wu = w[k] * u[k];
        for (int j = 0; j < d; ++j)
            c[j] += wu * fourier_element(j, s, length);
    }
    return c;
}

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

// On a uniform grid the trapezoid rule over one period folds the last sample
// onto the first, leaving an (n-1)-point DFT.
Eigen::VectorXd fourier_fft(const SampledFunction& u, int d)
{
    const auto& grid = *u.grid();
    const auto& w = grid.weights();
    const std::size_t n = grid.size();
    const int m = static_cast<int>(n - 1);
    auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(m)));
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(m / 2 + 1)));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(m, in, out, FFTW_ESTIMATE);
    }
    for (int k = 0; k < m; ++k)
        in[k] = w[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)];
    in[0] += w[n - 1] * u[n - 1];
    fftw_execute(plan);

    const double length = grid.length();
    const double scale = std::sqrt(2.0 / length);
    Eigen::VectorXd c(d);
    c[0] = out[0][0] / std::sqrt(length);
    for (int j = 1; j < d; ++j) {
        const int k = (j + 1) / 2;
        c[j] = (j % 2 == 1) ? scale * out[k][0] : -scale * out[k][1];
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return c;
}

std::size_t next_power_of_two(std::size_t n) { return std::bit_ceil(n); }

Eigen::VectorXd haar_project(const SampledFunction& u, int d)
{
    const auto& w = u.grid()->weights();
    const std::size_t n = u.size();
    const std::size_t m = next_power_of_two(n);
    const std::size_t pad = (m - n) / 2;

    std::vector<double> v(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = std::sqrt(w[k]) * u[k];
        sum += v[k];
    }
    const double mean_v = sum / static_cast<double>(n);
    std::vector<double> padded(m, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        padded[pad + k] = v[k] - mean_v;
    haar_forward(padded);
    padded[0] = sum / std::sqrt(static_cast<double>(n));
    return Eigen::Map<const Eigen::VectorXd>(padded.data(), d);
}

SampledFunction haar_reconstruct(const Eigen::VectorXd& c, const GridPtr& grid)
{
    const auto& w = grid->weights();
    const std::size_t n = grid->size();
    const std::size_t m = next_power_of_two(n);
    const std::size_t pad = (m - n) / 2;
    std::vector<double> full(m, 0.0);
    for (Eigen::Index j = 1; j < c.size(); ++j)
        full[static_cast<std::size_t>(j)] = c[j];
    haar_inverse(full);
    const double mean_v = c.size() > 0 ? c[0] / std::sqrt(static_cast<double>(n)) : 0.0;
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k)
        u[k] = (full[pad + k] + mean_v) / std::sqrt(w[k]);
    return SampledFunction(grid, std::move(u));
}

} // namespace

CoefficientVector project(const SampledFunction& u, const BasisSpec& basis, FourierPath path)
{
    check_compatible(basis, *u.grid());
    CoefficientVector out{{}, basis};
    switch (basis.family) {
    case BasisFamily::fourier: {
        const bool use_fft = path == FourierPath::fft
                             || (path == FourierPath::automatic && u.grid()->is_uniform());
        if (path == FourierPath::fft && !u.grid()->is_uniform())
            throw Error(ErrorKind::configuration, "the FFT path requires a uniform grid");
        out.coefficients = use_fft ? fourier_fft(u, basis.dimension) : fourier_direct(u, basis.dimension);
        break;
    }
    case BasisFamily::haar_wavelet:
        out.coefficients = haar_project(u, basis.dimension);
        break;
    case BasisFamily::bspline:
        out.coefficients = SplineSpace(u.grid(), basis.dimension, basis.spline_degree).fit(u.values());
        break;
    }
    return out;
}

SampledFunction reconstruct(const CoefficientVector& c, const GridPtr& grid)
{
    if (!grid)
        throw Error(ErrorKind::structural, "reconstruction without a grid");
    if (c.coefficients.size() != c.basis.dimension)
        throw Error(ErrorKind::structural, "coefficient count does not match the basis dimension");
    check_compatible(c.basis, *grid);
    switch (c.basis.family) {
    case BasisFamily::fourier: {
        const auto& t = grid->abscissae();
        std::vector<double> u(grid->size(), 0.0);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double s = (t[k] - grid->start()) / grid->length();
            for (int j = 0; j < c.basis.dimension; ++j)
                u[k] += c.coefficients[j] * fourier_element(j, s, grid->length());
        }
        return SampledFunction(grid, std::move(u));
    }
    case BasisFamily::haar_wavelet:
        return haar_reconstruct(c.coefficients, grid);
    case BasisFamily::bspline: {
        const SplineSpace space(grid, c.basis.dimension, c.basis.spline_degree);
        return SampledFunction(grid, space.evaluate(c.coefficients));
    }
    }
    throw Error(ErrorKind::configuration, "unknown basis family");
}

Eigen::MatrixXd sample_basis(const BasisSpec& basis, const GridPtr& grid)
{
    check_compatible(basis, *grid);
    if (basis.family == BasisFamily::bspline)
        return SplineSpace(grid, basis.dimension, basis.spline_degree).design(0);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(grid->size()), basis.dimension);
    for (int j = 0; j < basis.dimension; ++j) {
        CoefficientVector e{Eigen::VectorXd::Unit(basis.dimension, j), basis};
        const SampledFunction f = reconstruct(e, grid);
        out.col(j) = Eigen::Map<const Eigen::VectorXd>(f.values().data(), static_cast<Eigen::Index>(f.size()));
    }
    return out;
}

} // namespace fsvm
