#include "fsvm/function.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fsvm {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::structural: return "structural";
    case ErrorKind::data: return "data";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::degenerate_training: return "degenerate_training";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::parse: return "parse";
    case ErrorKind::integrity: return "integrity";
    }
    return "unknown";
}

void rethrow_with_index(const Error& e, std::size_t index)
{
    throw Error(e.kind(), "input " + std::to_string(index) + ": " + e.what(), index);
}

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& t)
{
    const std::size_t n = t.size();
    std::vector<double> w(n);
    if (n < 2)
        return w;
    w[0] = 0.5 * (t[1] - t[0]);
    w[n - 1] = 0.5 * (t[n - 1] - t[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k)
        w[k] = 0.5 * (t[k + 1] - t[k - 1]);
    return w;
}

void require_same_grid(const SampledFunction& u, const SampledFunction& v)
{
    if (!same_grid(u.grid(), v.grid()))
        throw Error(ErrorKind::structural, "functions are sampled on different grids");
}

} // namespace

SamplingGrid::SamplingGrid(std::vector<double> abscissae)
    : abscissae_(std::move(abscissae))
{
    weights_ = trapezoid_weights(abscissae_);
    validate();
}

SamplingGrid::SamplingGrid(std::vector<double> abscissae, std::vector<double> weights)
    : abscissae_(std::move(abscissae)), weights_(std::move(weights))
{
    validate();
}

void SamplingGrid::validate()
{
    if (abscissae_.size() < 2)
        throw Error(ErrorKind::structural, "a sampling grid needs at least two points");
    if (weights_.size() != abscissae_.size())
        throw Error(ErrorKind::structural, "grid weights and abscissae differ in length");
    for (std::size_t k = 0; k < abscissae_.size(); ++k) {
        if (!std::isfinite(abscissae_[k]))
            throw Error(ErrorKind::data, "non-finite abscissa at position " + std::to_string(k));
        if (k > 0 && !(abscissae_[k] > abscissae_[k - 1]))
            throw Error(ErrorKind::structural,
                        "abscissae must be strictly increasing (position " + std::to_string(k) + ")");
        if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k]))
            throw Error(ErrorKind::structural,
                        "quadrature weight at position " + std::to_string(k) + " is not positive");
    }
    total_mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

std::shared_ptr<const SamplingGrid> SamplingGrid::uniform(double start, double end, std::size_t points)
{
    if (points < 2 || !(end > start))
        throw Error(ErrorKind::configuration, "uniform grid needs start < end and at least two points");
    std::vector<double> t(points);
    const double h = (end - start) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k)
        t[k] = start + h * static_cast<double>(k);
    t.back() = end;
    return std::make_shared<const SamplingGrid>(std::move(t));
}

bool SamplingGrid::is_uniform(double tolerance) const noexcept
{
    const std::size_t n = size();
    const double h = length() / static_cast<double>(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
        const double step = abscissae_[k] - abscissae_[k - 1];
        if (std::abs(step - h) > tolerance * h)
            return false;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double expected = (k == 0 || k + 1 == n) ? 0.5 * h : h;
        if (std::abs(weights_[k] - expected) > tolerance * h)
            return false;
    }
    return true;
}

bool same_grid(const GridPtr& a, const GridPtr& b) noexcept
{
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    return *a == *b;
}

SampledFunction::SampledFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    if (!grid_)
        throw Error(ErrorKind::structural, "sampled function without a grid");
    if (values_.size() != grid_->size())
        throw Error(ErrorKind::structural,
                    "function has " + std::to_string(values_.size()) + " values but the grid has "
                        + std::to_string(grid_->size()) + " points");
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (!std::isfinite(values_[k]))
            throw Error(ErrorKind::data, "non-finite value at position " + std::to_string(k));
}

LabeledDataset::LabeledDataset(std::vector<SampledFunction> functions, std::vector<int> labels)
    : functions_(std::move(functions)), labels_(std::move(labels))
{
    if (functions_.size() != labels_.size())
        throw Error(ErrorKind::structural, "dataset has different numbers of functions and labels");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != 1 && labels_[i] != -1)
            throw Error(ErrorKind::data, "label must be -1 or +1", i);
        if (!same_grid(functions_[i].grid(), functions_.front().grid()))
            throw Error(ErrorKind::structural, "dataset functions do not share one grid", i);
    }
}

const GridPtr& LabeledDataset::grid() const
{
    if (functions_.empty())
        throw Error(ErrorKind::structural, "empty dataset has no grid");
    return functions_.front().grid();
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const
{
    std::vector<SampledFunction> f;
    std::vector<int> y;
    f.reserve(indices.size());
    y.reserve(indices.size());
    for (std::size_t i : indices) {
        f.push_back(functions_.at(i));
        y.push_back(labels_.at(i));
    }
    LabeledDataset out;
    out.functions_ = std::move(f);
    out.labels_ = std::move(y);
    return out;
}

std::size_t LabeledDataset::count(int label) const noexcept
{
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

double inner_product(const SampledFunction& u, const SampledFunction& v)
{
    require_same_grid(u, v);
    const auto& w = u.grid()->weights();
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        sum += w[k] * (u[k] * v[k]);
    return sum;
}

double norm(const SampledFunction& u)
{
    return std::sqrt(std::max(0.0, inner_product(u, u)));
}

double mean(const SampledFunction& u)
{
    const auto& w = u.grid()->weights();
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        sum += w[k] * u[k];
    const double mass = u.grid()->total_mass();
    if (!(mass > 0.0))
        throw Error(ErrorKind::configuration, "grid has zero total quadrature mass");
    return sum / mass;
}

SampledFunction center(const SampledFunction& u)
{
    const double m = mean(u);
    std::vector<double> out(u.values().begin(), u.values().end());
    for (double& x : out)
        x -= m;
    return SampledFunction(u.grid(), std::move(out));
}

SampledFunction normalize(const SampledFunction& u, const TransformTolerances& tolerances)
{
    SampledFunction c = center(u);
    const double scale = norm(c);
    const double reference = norm(u);
    if (!(scale > tolerances.degenerate_relative * reference) || scale == 0.0)
        throw Error(ErrorKind::data, "cannot normalize a constant function");
    std::vector<double> out(c.values().begin(), c.values().end());
    for (double& x : out)
        x /= scale;
    return SampledFunction(u.grid(), std::move(out));
}

std::vector<SampledFunction> normalize_all(std::span<const SampledFunction> functions,
                                           const TransformTolerances& tolerances)
{
    std::vector<SampledFunction> out;
    out.reserve(functions.size());
    for (std::size_t i = 0; i < functions.size(); ++i) {
        try {
            out.push_back(normalize(functions[i], tolerances));
        } catch (const Error& e) {
            rethrow_with_index(e, i);
        }
    }
    return out;
}

SampledFunction combine(double a, const SampledFunction& u, double b, const SampledFunction& v)
{
    require_same_grid(u, v);
    std::vector<double> out(u.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = a * u[k] + b * v[k];
    return SampledFunction(u.grid(), std::move(out));
}

} // namespace fsvm
