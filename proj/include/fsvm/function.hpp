#pragma once

#include "fsvm/error.hpp"

#include <memory>
#include <span>
#include <vector>

namespace fsvm {

/// Ordered sampling points of a curve together with trapezoid quadrature weights.
class SamplingGrid {
public:
    /// Trapezoid weights derived from the abscissae.
    explicit SamplingGrid(std::vector<double> abscissae);

    /// Explicit positive weights (must match the abscissae in length).
    SamplingGrid(std::vector<double> abscissae, std::vector<double> weights);

    static std::shared_ptr<const SamplingGrid> uniform(double start, double end, std::size_t points);

    std::size_t size() const noexcept { return abscissae_.size(); }
    const std::vector<double>& abscissae() const noexcept { return abscissae_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double start() const noexcept { return abscissae_.front(); }
    double end() const noexcept { return abscissae_.back(); }
    double length() const noexcept { return end() - start(); }

    /// Sum of the quadrature weights (the measure of the sampled interval).
    double total_mass() const noexcept { return total_mass_; }

    /// True when spacing is constant to a relative tolerance and the weights are trapezoidal.
    bool is_uniform(double tolerance = 1e-9) const noexcept;

    bool operator==(const SamplingGrid& other) const noexcept
    {
        return abscissae_ == other.abscissae_ && weights_ == other.weights_;
    }

private:
    void validate();

    std::vector<double> abscissae_;
    std::vector<double> weights_;
    double total_mass_ = 0.0;
};

using GridPtr = std::shared_ptr<const SamplingGrid>;

bool same_grid(const GridPtr& a, const GridPtr& b) noexcept;

/// One observed curve: values on a shared sampling grid.
class SampledFunction {
public:
    SampledFunction(GridPtr grid, std::vector<double> values);

    const GridPtr& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Curves sharing one grid, each with a label in {-1, +1}.
class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(std::vector<SampledFunction> functions, std::vector<int> labels);

    std::size_t size() const noexcept { return functions_.size(); }
    bool empty() const noexcept { return functions_.empty(); }
    const std::vector<SampledFunction>& functions() const noexcept { return functions_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const SampledFunction& function(std::size_t i) const { return functions_[i]; }
    int label(std::size_t i) const { return labels_[i]; }
    const GridPtr& grid() const;

    /// Rows `indices` in the given order.
    LabeledDataset subset(std::span<const std::size_t> indices) const;

    std::size_t count(int label) const noexcept;

private:
    std::vector<SampledFunction> functions_;
    std::vector<int> labels_;
};

struct TransformTolerances {
    /// normalize() rejects inputs with ||C(u)|| <= degenerate_relative * ||u||.
    double degenerate_relative = 1e-12;
};

double inner_product(const SampledFunction& u, const SampledFunction& v);
double norm(const SampledFunction& u);

/// Quadrature mean (1/mu) * integral of u.
double mean(const SampledFunction& u);

SampledFunction center(const SampledFunction& u);
SampledFunction normalize(const SampledFunction& u, const TransformTolerances& tolerances = {});

/// normalize() over a batch; a degenerate input is reported with its index.
std::vector<SampledFunction> normalize_all(std::span<const SampledFunction> functions,
                                           const TransformTolerances& tolerances = {});

/// Pointwise a*u + b*v on a shared grid.
SampledFunction combine(double a, const SampledFunction& u, double b, const SampledFunction& v);

} // namespace fsvm
