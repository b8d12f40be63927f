#pragma once

#include "fsvm/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fsvm {

/// Penalty lambda_d as a step table: lambda(d) is the value of the first
/// breakpoint with d <= upper, or `tail` beyond the last breakpoint.
struct Penalty {
    std::vector<std::pair<int, double>> steps; // (upper dimension, lambda), increasing upper
    double tail = 0.0;

    /// 0 for d <= threshold, `high` above.
    static Penalty step(int threshold = 100, double high = 1000.0);
    static Penalty constant(double value) { return Penalty{{}, value}; }

    double operator()(int dimension) const;
    void validate() const;
};

/// How the training side is taken from a sample.
enum class SplitPolicy { first_l, seeded_shuffle };

const char* to_string(SplitPolicy policy) noexcept;
SplitPolicy split_policy_from_string(const std::string& name);

struct SplitParams {
    std::size_t train_size = 0;  // used when > 0
    double train_fraction = 0.5; // otherwise round(fraction * N)
    SplitPolicy policy = SplitPolicy::first_l;
    std::uint64_t seed = 0;

    std::size_t resolve(std::size_t n) const;
};

struct SplitResult {
    LabeledDataset train;
    LabeledDataset validation;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> validation_indices;
    std::vector<std::string> warnings;
};

SplitResult split_sample(const LabeledDataset& data, std::size_t train_size, SplitPolicy policy,
                         std::uint64_t seed = 0);

/// l_N = ceil(coefficient * N^exponent), used only to check the growth conditions.
struct SplitSchedule {
    double coefficient = 0.5;
    double exponent = 1.0;

    double train_size(double n) const;
};

/// Kernels and C values offered at one projection dimension (0 = no projection).
struct DimensionEntry {
    int dimension = 0;
    std::vector<FunctionalKernel> kernels; // projection left empty; filled from the grid family
    std::vector<double> c_values;
};

struct Candidate {
    int dimension = 0;
    FunctionalKernel kernel; // projection filled in
    double C = 1.0;
    std::size_t kernel_index = 0; // declaration order within the dimension
};

struct CandidateGrid {
    std::optional<BasisSpec> projection; // family and spline order; dimension taken per entry
    std::vector<DimensionEntry> entries;
    Penalty penalty = Penalty::step();
    std::optional<SplitSchedule> schedule;

    /// Candidates in declaration order: entry, kernel, C.
    std::vector<Candidate> enumerate() const;
    FunctionalKernel kernel_for(int dimension, const FunctionalKernel& declared) const;
    std::size_t size() const;
};

/// Misclassification fraction of the model on `data`.
double empirical_error(const SvmModel& model, const LabeledDataset& data);

struct CandidateOutcome {
    Candidate candidate;
    bool trained = false;
    double validation_error = 0.0;
    double penalty = 0.0;
    double score = 0.0;
    std::string failure;
    std::int64_t iterations = 0;
};

struct SelectionResult {
    Candidate chosen;
    std::size_t chosen_index = 0;
    SvmModel model;
    std::vector<CandidateOutcome> table;
    std::size_t train_size = 0;
    std::size_t validation_size = 0;
    std::vector<std::string> warnings;
};

struct SelectOptions {
    SolverOptions solver;
    unsigned threads = 1;
    TransformTolerances tolerances;
};

/// Trains every candidate on the training side and returns the one minimising
/// validation error + lambda_d / sqrt(validation size). Ties go to the smaller
/// dimension, then the smaller C, then kernel declaration order. The returned
/// model is the one trained on the training side.
SelectionResult select(const CandidateGrid& grid, const LabeledDataset& data, const SplitParams& split,
                       const SelectOptions& options = {});

/// Same as select() on an existing split.
SelectionResult select_on_split(const CandidateGrid& grid, const LabeledDataset& train,
                                const LabeledDataset& validation, const SelectOptions& options = {});

/// Warnings for violated consistency hypotheses. `n_schedule` lists sample
/// sizes at which the split schedule (if any) is checked.
std::vector<std::string> validate_grid(const CandidateGrid& grid,
                                       std::span<const double> n_schedule = {});

} // namespace fsvm
