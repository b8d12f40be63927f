#include "fsvm/select.hpp"

#include "fsvm/detail/parallel.hpp"
#include "fsvm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <limits>

namespace fsvm {

Penalty Penalty::step(int threshold, double high)
{
    return Penalty{{{threshold, 0.0}}, high};
}

double Penalty::operator()(int dimension) const
{
    for (const auto& [upper, lambda] : steps)
        if (dimension <= upper)
            return lambda;
    return tail;
}

void Penalty::validate() const
{
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i].second >= 0.0))
            throw Error(ErrorKind::configuration, "penalties must be nonnegative");
        if (i > 0 && steps[i].first <= steps[i - 1].first)
            throw Error(ErrorKind::configuration, "penalty breakpoints must increase");
    }
    if (!(tail >= 0.0))
        throw Error(ErrorKind::configuration, "penalties must be nonnegative");
}

const char* to_string(SplitPolicy policy) noexcept
{
    return policy == SplitPolicy::first_l ? "first_l" : "seeded_shuffle";
}

SplitPolicy split_policy_from_string(const std::string& name)
{
    if (name == "first_l")
        return SplitPolicy::first_l;
    if (name == "seeded_shuffle")
        return SplitPolicy::seeded_shuffle;
    throw Error(ErrorKind::configuration, "unknown split policy '" + name + "'");
}

std::size_t SplitParams::resolve(std::size_t n) const
{
    if (train_size > 0)
        return train_size;
    const auto l = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(l, 1, n > 1 ? n - 1 : 1);
}

SplitResult split_sample(const LabeledDataset& data, std::size_t train_size, SplitPolicy policy, std::uint64_t seed)
{
    const std::size_t n = data.size();
    if (train_size < 1 || train_size >= n)
        throw Error(ErrorKind::configuration,
                    "split size " + std::to_string(train_size) + " must satisfy 1 <= l < N = " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (policy == SplitPolicy::seeded_shuffle) {
        Rng rng(seed);
        rng.shuffle(order);
    }
    SplitResult out;
    out.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
    out.validation_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
    out.train = data.subset(out.train_indices);
    out.validation = data.subset(out.validation_indices);
    if (out.train.count(1) == 0 || out.train.count(-1) == 0)
        out.warnings.push_back("training side of the split contains a single class");
    if (out.validation.count(1) == 0 || out.validation.count(-1) == 0)
        out.warnings.push_back("validation side of the split contains a single class");
    return out;
}

double SplitSchedule::train_size(double n) const
{
    return std::ceil(coefficient * std::pow(n, exponent));
}

FunctionalKernel CandidateGrid::kernel_for(int dimension, const FunctionalKernel& declared) const
{
    FunctionalKernel k = declared;
    if (dimension > 0) {
        if (!projection)
            throw Error(ErrorKind::configuration,
                        "dimension " + std::to_string(dimension) + " requested without a projection family");
        BasisSpec spec = *projection;
        spec.dimension = dimension;
        k.projection = spec;
    } else {
        k.projection.reset();
    }
    return k;
}

std::vector<Candidate> CandidateGrid::enumerate() const
{
    std::vector<Candidate> out;
    for (const auto& entry : entries)
        for (std::size_t k = 0; k < entry.kernels.size(); ++k)
            for (double c : entry.c_values)
                out.push_back(Candidate{entry.dimension, kernel_for(entry.dimension, entry.kernels[k]), c, k});
    return out;
}

std::size_t CandidateGrid::size() const
{
    std::size_t n = 0;
    for (const auto& entry : entries)
        n += entry.kernels.size() * entry.c_values.size();
    return n;
}

double empirical_error(const SvmModel& model, const LabeledDataset& data)
{
    if (data.empty())
        throw Error(ErrorKind::configuration, "empirical error of an empty dataset");
    const auto predicted = model.predict_all(data.functions());
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] != data.label(i))
            ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

namespace {

void check_grid_structure(const CandidateGrid& grid)
{
    if (grid.entries.empty() || grid.size() == 0)
        throw Error(ErrorKind::configuration, "candidate grid is empty");
    grid.penalty.validate();
    for (const auto& entry : grid.entries) {
        if (entry.dimension < 0)
            throw Error(ErrorKind::configuration, "projection dimension must be >= 0");
        if (entry.kernels.empty())
            throw Error(ErrorKind::configuration,
                        "kernel set for dimension " + std::to_string(entry.dimension) + " is empty");
        if (entry.c_values.empty())
            throw Error(ErrorKind::configuration,
                        "C grid for dimension " + std::to_string(entry.dimension) + " is empty");
        for (double c : entry.c_values)
            if (!(c > 0.0) || !std::isfinite(c))
                throw Error(ErrorKind::configuration, "C values must be positive");
        for (const auto& k : entry.kernels)
            k.validate();
        if (entry.dimension > 0 && !grid.projection)
            throw Error(ErrorKind::configuration, "positive dimensions need a projection family");
    }
}

struct UnitResult {
    std::vector<CandidateOutcome> outcomes;
    std::vector<DualSolution> solutions;
};

// Trains every C for one (dimension, kernel) pair on shared embeddings.
UnitResult run_unit(const CandidateGrid& grid, const DimensionEntry& entry, std::size_t kernel_index,
                    const LabeledDataset& train, const LabeledDataset& validation, const SelectOptions& options)
{
    UnitResult out;
    const double lambda = grid.penalty(entry.dimension);
    const double penalty_term = lambda / std::sqrt(static_cast<double>(validation.size()));
    const FunctionalKernel kernel = grid.kernel_for(entry.dimension, entry.kernels[kernel_index]);
    for (double c : entry.c_values) {
        CandidateOutcome o;
        o.candidate = Candidate{entry.dimension, kernel, c, kernel_index};
        o.penalty = lambda;
        out.outcomes.push_back(std::move(o));
    }
    out.solutions.resize(entry.c_values.size());

    const auto fail_all = [&](const std::string& why) {
        for (auto& o : out.outcomes)
            o.failure = why;
    };

    std::vector<Eigen::VectorXd> train_emb, val_emb;
    try {
        const Embedder embedder(kernel, train.grid(), options.tolerances);
        try {
            train_emb = embedder.embed_all(train.functions());
        } catch (const Error& e) {
            throw Error(e.kind(), std::string("training ") + e.what(), e.index());
        }
        try {
            val_emb = embedder.embed_all(validation.functions());
        } catch (const Error& e) {
            throw Error(e.kind(), std::string("validation ") + e.what(), e.index());
        }
    } catch (const Error& e) {
        fail_all(std::string(to_string(e.kind())) + ": " + e.what());
        return out;
    }

    const Eigen::MatrixXd gram = gram_from_embeddings(kernel.base, train_emb);
    const Eigen::MatrixXd cross = cross_kernel(kernel.base, val_emb, train_emb);
    const auto& y = train.labels();
    for (std::size_t ci = 0; ci < entry.c_values.size(); ++ci) {
        auto& o = out.outcomes[ci];
        try {
            DualSolution s = solve_dual(gram, y, entry.c_values[ci], options.solver);
            std::size_t wrong = 0;
            for (std::size_t v = 0; v < validation.size(); ++v) {
                double sum = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i)
                    if (s.alphas[i] > 0.0)
                        sum += s.alphas[i] * y[i]
                               * cross(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(i));
                if (SvmModel::sign_label(sum + s.bias) != validation.label(v))
                    ++wrong;
            }
            o.trained = true;
            o.validation_error = static_cast<double>(wrong) / static_cast<double>(validation.size());
            o.score = o.validation_error + penalty_term;
            o.iterations = s.iterations;
            out.solutions[ci] = std::move(s);
        } catch (const Error& e) {
            o.failure = std::string(to_string(e.kind())) + ": " + e.what();
        }
    }
    return out;
}

bool preferred(const CandidateOutcome& a, std::size_t ia, const CandidateOutcome& b, std::size_t ib)
{
    if (a.score != b.score)
        return a.score < b.score;
    if (a.candidate.dimension != b.candidate.dimension)
        return a.candidate.dimension < b.candidate.dimension;
    if (a.candidate.C != b.candidate.C)
        return a.candidate.C < b.candidate.C;
    if (a.candidate.kernel_index != b.candidate.kernel_index)
        return a.candidate.kernel_index < b.candidate.kernel_index;
    return ia < ib;
}

} // namespace

SelectionResult select_on_split(const CandidateGrid& grid, const LabeledDataset& train,
                                const LabeledDataset& validation, const SelectOptions& options)
{
    check_grid_structure(grid);
    if (train.empty() || validation.empty())
        throw Error(ErrorKind::configuration, "both sides of the split must be non-empty");

    struct UnitRef {
        std::size_t entry;
        std::size_t kernel;
    };
    std::vector<UnitRef> units;
    for (std::size_t e = 0; e < grid.entries.size(); ++e)
        for (std::size_t k = 0; k < grid.entries[e].kernels.size(); ++k)
            units.push_back({e, k});

    std::vector<UnitResult> results(units.size());
    const auto work = [&](std::size_t u) {
        results[u] = run_unit(grid, grid.entries[units[u].entry], units[u].kernel, train, validation, options);
    };
    detail::parallel_for(units.size(), options.threads, work);

    std::vector<CandidateOutcome> table;
    std::vector<const DualSolution*> solutions;
    for (auto& r : results)
        for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
            table.push_back(std::move(r.outcomes[i]));
            solutions.push_back(&r.solutions[i]);
        }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i].trained && (!best || preferred(table[i], i, table[*best], *best)))
            best = i;

    if (!best) {
        std::ostringstream msg;
        msg << "every candidate failed to train:";
        for (std::size_t i = 0; i < table.size(); ++i)
            msg << "\n  [" << i << "] " << table[i].candidate.kernel.describe() << " C=" << table[i].candidate.C
                << ": " << table[i].failure;
        ErrorKind kind = ErrorKind::configuration;
        const std::string& first = table.front().failure;
        for (ErrorKind k : {ErrorKind::degenerate_training, ErrorKind::data, ErrorKind::convergence,
                            ErrorKind::structural, ErrorKind::configuration})
            if (first.rfind(to_string(k), 0) == 0) {
                kind = k;
                break;
            }
        throw Error(kind, msg.str());
    }

    const CandidateOutcome& chosen = table[*best];
    const Embedder embedder(chosen.candidate.kernel, train.grid(), options.tolerances);
    SvmModel model = SvmModel::from_solution(embedder, embedder.embed_all(train.functions()), train.labels(),
                                             *solutions[*best], ModelMetadata{chosen.candidate.C, 0, train.size()});

    SelectionResult out{chosen.candidate, *best, std::move(model), std::move(table), train.size(), validation.size(), {}};
    return out;
}

SelectionResult select(const CandidateGrid& grid, const LabeledDataset& data, const SplitParams& split,
                       const SelectOptions& options)
{
    check_grid_structure(grid);
    SplitResult parts = split_sample(data, split.resolve(data.size()), split.policy, split.seed);
    SelectionResult result = select_on_split(grid, parts.train, parts.validation, options);
    result.warnings = std::move(parts.warnings);
    return result;
}

std::vector<std::string> validate_grid(const CandidateGrid& grid, std::span<const double> n_schedule)
{
    std::vector<std::string> warnings;
    if (grid.entries.empty()) {
        warnings.push_back("candidate grid is empty");
        return warnings;
    }
    for (const auto& entry : grid.entries) {
        const bool has_gaussian = std::any_of(entry.kernels.begin(), entry.kernels.end(), [](const auto& k) {
            return k.base.kind == BaseKernelSpec::Kind::gaussian;
        });
        if (!has_gaussian)
            warnings.push_back("no universal kernel: the kernel set for d=" + std::to_string(entry.dimension)
                               + " has no gaussian kernel");
        const double c_max = entry.c_values.empty()
                                 ? 0.0
                                 : *std::max_element(entry.c_values.begin(), entry.c_values.end());
        if (!(c_max > 1.0))
            warnings.push_back("C grid for d=" + std::to_string(entry.dimension) + " does not exceed 1");
    }

    // The configured dimensions are a truncation of d >= 1; beyond the cap the
    // penalty takes its tail value and the last kernel set is assumed repeated.
    const auto& last = *std::max_element(grid.entries.begin(), grid.entries.end(),
                                         [](const auto& a, const auto& b) { return a.dimension < b.dimension; });
    const double tail_term = static_cast<double>(last.kernels.size()) * std::exp(-2.0 * grid.penalty.tail * grid.penalty.tail);
    if (tail_term > 1e-6) {
        std::ostringstream msg;
        msg << "penalty summability: tail term |J_d| exp(-2 lambda^2) = " << tail_term
            << " beyond d=" << last.dimension << " exceeds 1e-6";
        warnings.push_back(msg.str());
    }

    if (grid.schedule) {
        std::vector<double> sizes(n_schedule.begin(), n_schedule.end());
        if (sizes.empty())
            sizes = {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
        std::sort(sizes.begin(), sizes.end());
        double prev_ratio = std::numeric_limits<double>::infinity();
        double prev_l = -1.0, prev_v = -1.0;
        bool ok = true;
        for (double n : sizes) {
            const double l = grid.schedule->train_size(n);
            const double v = n - l;
            if (l < 1.0 || v < 2.0) {
                ok = false;
                break;
            }
            const double ratio = l * std::log(v) / v;
            if (!(l > prev_l) || !(v > prev_v) || !(ratio < prev_ratio))
                ok = false;
            prev_ratio = ratio;
            prev_l = l;
            prev_v = v;
        }
        if (ok && prev_ratio > 0.1)
            ok = false;
        if (!ok)
            warnings.push_back("split schedule violates the growth conditions: l_N and N - l_N must grow and "
                               "l_N log(N - l_N) / (N - l_N) must vanish");
    }
    return warnings;
}

} // namespace fsvm
