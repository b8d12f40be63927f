#include "fsvm/eval.hpp"

#include "fsvm/detail/parallel.hpp"
#include "fsvm/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace fsvm {

const char* to_string(ProtocolKind kind) noexcept
{
    switch (kind) {
    case ProtocolKind::leave_one_out: return "leave_one_out";
    case ProtocolKind::k_fold: return "k_fold";
    case ProtocolKind::fixed_split: return "fixed_split";
    case ProtocolKind::repeated_splits: return "repeated_splits";
    }
    return "unknown";
}

ProtocolKind protocol_kind_from_string(const std::string& name)
{
    for (auto k : {ProtocolKind::leave_one_out, ProtocolKind::k_fold, ProtocolKind::fixed_split,
                   ProtocolKind::repeated_splits})
        if (name == to_string(k))
            return k;
    throw Error(ErrorKind::configuration, "unknown protocol '" + name + "'");
}

void ProtocolSpec::validate(std::size_t n) const
{
    switch (kind) {
    case ProtocolKind::leave_one_out:
        if (n < 3)
            throw Error(ErrorKind::configuration, "leave-one-out needs at least 3 examples");
        break;
    case ProtocolKind::k_fold:
        if (folds < 2 || folds > n)
            throw Error(ErrorKind::configuration, "k-fold needs 2 <= k <= N");
        break;
    case ProtocolKind::fixed_split:
    case ProtocolKind::repeated_splits:
        if (train_size < 2 || train_size >= n)
            throw Error(ErrorKind::configuration, "learning-set size must satisfy 2 <= size < N");
        if (kind == ProtocolKind::repeated_splits && count < 1)
            throw Error(ErrorKind::configuration, "repeated splits need count >= 1");
        break;
    }
}

std::vector<double> EvaluationReport::errors() const
{
    std::vector<double> out;
    for (const auto& r : runs)
        if (!r.excluded)
            out.push_back(r.error);
    return out;
}

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed, std::size_t run)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 2 * run));
    rng.shuffle(order);
    return order;
}

std::uint64_t inner_split_seed(std::uint64_t seed, std::size_t run)
{
    return derive_seed(seed, 2 * run + 1);
}

namespace {

struct Fold {
    std::vector<std::size_t> learn;
    std::vector<std::size_t> test;
};

EvaluationReport evaluate_folds(const LabeledDataset& data, const CandidateGrid& grid, const std::vector<Fold>& folds,
                                const SplitParams& inner, const EvalOptions& options)
{
    const auto started = std::chrono::steady_clock::now();
    EvaluationReport report;
    report.runs.resize(folds.size());

    detail::parallel_for(folds.size(), options.threads, [&](std::size_t r) {
        RunRecord& rec = report.runs[r];
        rec.index = r;
        const Fold& fold = folds[r];
        rec.tested = fold.test.size();
        try {
            const LabeledDataset learn = data.subset(fold.learn);
            const LabeledDataset test = data.subset(fold.test);
            std::vector<int> predicted;
            if (grid.size() == 1) {
                // Nothing to choose: the single candidate learns from the whole learning set.
                const Candidate only = grid.enumerate().front();
                predicted = train(only.kernel, learn, only.C, options.select.solver).model.predict_all(test.functions());
                rec.selected = only;
            } else {
                SplitParams split = inner;
                if (split.policy == SplitPolicy::seeded_shuffle)
                    split.seed = inner_split_seed(inner.seed, r);
                const SelectionResult sel = select(grid, learn, split, options.select);
                predicted = sel.model.predict_all(test.functions());
                rec.selected = sel.chosen;
                rec.validation_score = sel.table[sel.chosen_index].score;
            }
            for (std::size_t i = 0; i < predicted.size(); ++i)
                if (predicted[i] != test.label(i))
                    ++rec.misclassified;
            rec.error = static_cast<double>(rec.misclassified) / static_cast<double>(rec.tested);
        } catch (const Error& e) {
            rec.excluded = true;
            rec.cause = std::string(to_string(e.kind())) + ": " + e.what();
        }
    });

    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& rec : report.runs) {
        if (rec.excluded) {
            ++report.excluded;
            continue;
        }
        sum += rec.error;
        ++used;
    }
    report.mean_error = used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
    report.protocol.inner = inner;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

} // namespace

EvaluationReport run_k_fold(const LabeledDataset& data, const CandidateGrid& grid, std::size_t folds,
                            const SplitParams& inner, const EvalOptions& options)
{
    ProtocolSpec spec;
    spec.kind = ProtocolKind::k_fold;
    spec.folds = folds;
    spec.validate(data.size());
    std::vector<Fold> parts(folds);
    for (std::size_t f = 0; f < folds; ++f)
        for (std::size_t i = 0; i < data.size(); ++i)
            (i % folds == f ? parts[f].test : parts[f].learn).push_back(i);
    EvaluationReport report = evaluate_folds(data, grid, parts, inner, options);
    spec.inner = inner;
    report.protocol = spec;
    return report;
}

EvaluationReport run_leave_one_out(const LabeledDataset& data, const CandidateGrid& grid,
                                   const SplitParams& inner, const EvalOptions& options)
{
    ProtocolSpec spec;
    spec.kind = ProtocolKind::leave_one_out;
    spec.validate(data.size());
    EvaluationReport report = run_k_fold(data, grid, data.size(), inner, options);
    spec.folds = data.size();
    spec.inner = inner;
    report.protocol = spec;
    return report;
}

EvaluationReport run_fixed_split(const LabeledDataset& data, const CandidateGrid& grid, std::size_t train_size,
                                 const SplitParams& inner, const EvalOptions& options)
{
    ProtocolSpec spec;
    spec.kind = ProtocolKind::fixed_split;
    spec.train_size = train_size;
    spec.validate(data.size());
    Fold fold;
    for (std::size_t i = 0; i < data.size(); ++i)
        (i < train_size ? fold.learn : fold.test).push_back(i);
    EvaluationReport report = evaluate_folds(data, grid, {fold}, inner, options);
    spec.inner = inner;
    report.protocol = spec;
    return report;
}

EvaluationReport run_repeated_splits(const LabeledDataset& data, const CandidateGrid& grid, std::size_t count,
                                     std::size_t train_size, std::uint64_t seed, const SplitParams& inner,
                                     const EvalOptions& options)
{
    ProtocolSpec spec;
    spec.kind = ProtocolKind::repeated_splits;
    spec.count = count;
    spec.train_size = train_size;
    spec.seed = seed;
    spec.validate(data.size());
    std::vector<Fold> parts(count);
    for (std::size_t r = 0; r < count; ++r) {
        const auto order = split_permutation(data.size(), seed, r);
        parts[r].learn.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
        parts[r].test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
    }
    SplitParams seeded = inner;
    if (seeded.policy == SplitPolicy::seeded_shuffle)
        seeded.seed = seed;
    EvaluationReport report = evaluate_folds(data, grid, parts, seeded, options);
    spec.inner = seeded;
    report.protocol = spec;
    return report;
}

EvaluationReport run_protocol(const LabeledDataset& data, const CandidateGrid& grid, const ProtocolSpec& protocol,
                              const EvalOptions& options)
{
    switch (protocol.kind) {
    case ProtocolKind::leave_one_out: return run_leave_one_out(data, grid, protocol.inner, options);
    case ProtocolKind::k_fold: return run_k_fold(data, grid, protocol.folds, protocol.inner, options);
    case ProtocolKind::fixed_split: return run_fixed_split(data, grid, protocol.train_size, protocol.inner, options);
    case ProtocolKind::repeated_splits:
        return run_repeated_splits(data, grid, protocol.count, protocol.train_size, protocol.seed, protocol.inner,
                                   options);
    }
    throw Error(ErrorKind::configuration, "unknown protocol");
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double variance_floor)
{
    if (a.size() != b.size() || a.size() < 2)
        throw Error(ErrorKind::configuration, "paired t-test needs two equal-length samples of size >= 2");
    const std::size_t n = a.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);

    TTestResult out;
    out.mean_difference = mean;
    out.variance = var;
    if (mean == 0.0 && var == 0.0)
        return out;
    const double floored = std::max(var, variance_floor);
    out.statistic = mean / std::sqrt(floored / static_cast<double>(n));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.statistic))));
    return out;
}

void SyntheticSpec::validate() const
{
    if (size < 1 || grid_length < 2)
        throw Error(ErrorKind::configuration, "synthetic data needs N >= 1 and at least two grid points");
    if (!(noise_sigma >= 0.0) || !(label_noise >= 0.0 && label_noise <= 1.0))
        throw Error(ErrorKind::configuration, "noise must be >= 0 and label noise within [0, 1]");
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed)
{
    spec.validate();
    const GridPtr grid = SamplingGrid::uniform(0.0, 1.0, spec.grid_length);
    const auto& t = grid->abscissae();
    Rng rng(seed);
    std::vector<SampledFunction> functions;
    std::vector<int> labels;
    functions.reserve(spec.size);
    labels.reserve(spec.size);
    for (std::size_t i = 0; i < spec.size; ++i) {
        const int cls = rng.uniform() < 0.5 ? 1 : -1;
        const double f = cls == 1 ? spec.frequency_positive : spec.frequency_negative;
        std::vector<double> values(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) {
            values[k] = spec.amplitude * std::sin(2.0 * std::numbers::pi * f * t[k]);
            if (spec.noise_sigma > 0.0)
                values[k] += spec.noise_sigma * rng.normal();
        }
        const bool flip = rng.uniform() < spec.label_noise;
        functions.emplace_back(grid, std::move(values));
        labels.push_back(flip ? -cls : cls);
    }
    return LabeledDataset(std::move(functions), std::move(labels));
}

} // namespace fsvm
