#pragma once

#include "fsvm/select.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fsvm {

enum class ProtocolKind { leave_one_out, k_fold, fixed_split, repeated_splits };

const char* to_string(ProtocolKind kind) noexcept;
ProtocolKind protocol_kind_from_string(const std::string& name);

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::leave_one_out;
    std::size_t folds = 10;     // k_fold
    std::size_t count = 1;      // repeated_splits
    std::size_t train_size = 0; // fixed_split / repeated_splits: outer learning-set size
    std::uint64_t seed = 0;     // repeated_splits
    SplitParams inner;          // split applied inside each learning set

    void validate(std::size_t n) const;
};

struct RunRecord {
    std::size_t index = 0;
    double error = 0.0;
    std::size_t tested = 0;
    std::size_t misclassified = 0;
    bool excluded = false;
    std::string cause;
    std::optional<Candidate> selected;
    double validation_score = 0.0;
};

struct EvaluationReport {
    ProtocolSpec protocol;
    double mean_error = 0.0;
    std::vector<RunRecord> runs;
    std::size_t excluded = 0;
    double wall_seconds = 0.0; // not part of the deterministic payload
    std::optional<double> p_value;

    std::vector<double> errors() const;
};

struct EvalOptions {
    SelectOptions select;
    /// Runs (folds or splits) evaluated concurrently; selection inside a run stays sequential.
    unsigned threads = 1;
};

/// Each point is held out in turn; selection runs on the remaining N-1 in stored order.
EvaluationReport run_leave_one_out(const LabeledDataset& data, const CandidateGrid& grid,
                                   const SplitParams& inner, const EvalOptions& options = {});

/// Fold f holds the points with index % k == f; the rest keep their stored order.
EvaluationReport run_k_fold(const LabeledDataset& data, const CandidateGrid& grid, std::size_t folds,
                            const SplitParams& inner, const EvalOptions& options = {});

/// The first `train_size` points learn, the rest test.
EvaluationReport run_fixed_split(const LabeledDataset& data, const CandidateGrid& grid, std::size_t train_size,
                                 const SplitParams& inner, const EvalOptions& options = {});

/// `count` seeded random learning/test splits; run r shuffles with split_permutation(N, seed, r).
EvaluationReport run_repeated_splits(const LabeledDataset& data, const CandidateGrid& grid, std::size_t count,
                                     std::size_t train_size, std::uint64_t seed, const SplitParams& inner,
                                     const EvalOptions& options = {});

EvaluationReport run_protocol(const LabeledDataset& data, const CandidateGrid& grid, const ProtocolSpec& protocol,
                              const EvalOptions& options = {});

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed, std::size_t run);

/// Seed of the inner split of run r when the inner policy is seeded_shuffle.
std::uint64_t inner_split_seed(std::uint64_t seed, std::size_t run);

struct TTestResult {
    double p_value = 1.0;
    double statistic = 0.0;
    double mean_difference = 0.0;
    double variance = 0.0; // raw sample variance of the differences
};

/// Two-sided paired t-test. Identical inputs give p = 1; a zero variance with
/// a nonzero mean is floored at `variance_floor`.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double variance_floor = 1e-12);

struct SyntheticSpec {
    double frequency_positive = 2.0;
    double frequency_negative = 3.0;
    double amplitude = 1.0;
    double noise_sigma = 0.2;
    double label_noise = 0.0;
    std::size_t size = 100;
    std::size_t grid_length = 128;

    void validate() const;
};

/// Curves amplitude * sin(2 pi f t) + white noise on a uniform grid over [0, 1],
/// f chosen by a fair coin per curve; labels flipped with probability label_noise.
/// When the prototypes are distinguishable the Bayes error equals label_noise.
LabeledDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace fsvm
