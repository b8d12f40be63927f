#pragma once

#include "fsvm/eval.hpp"
#include "fsvm/io.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fsvm {

using Json = nlohmann::ordered_json;

Json to_json(const BaseKernelSpec& base);
Json to_json(const Transform& transform);
Json to_json(const BasisSpec& basis);
Json to_json(const FunctionalKernel& kernel);
Json to_json(const Penalty& penalty);
Json to_json(const SplitParams& split);
Json to_json(const ProtocolSpec& protocol);
Json to_json(const Candidate& candidate);

BaseKernelSpec base_kernel_from_json(const Json& j);
Transform transform_from_json(const Json& j);
BasisSpec basis_from_json(const Json& j);
FunctionalKernel kernel_from_json(const Json& j);
Penalty penalty_from_json(const Json& j);

/// Everything a CLI run needs. Derivative transforms may declare
/// "spline_dimension": "auto"; those are resolved against the loaded data with
/// select_spline_dimension over `spline_candidates`.
struct RunConfig {
    std::optional<DatasetDescriptor> dataset;
    CandidateGrid grid;
    SplitParams split;
    ProtocolSpec protocol;
    SolverOptions solver;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::vector<int> spline_candidates{6, 8, 10, 12, 15, 20, 25, 30, 40};
    bool has_auto_spline = false;
};

/// Parses a run configuration; relative dataset paths resolve against `base_dir`.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Replaces "auto" spline dimensions (stored as 0) using the whole input set.
void resolve_auto_spline(RunConfig& config, const LabeledDataset& data);

/// Overrides applied uniformly to every dimension entry.
void override_c_grid(CandidateGrid& grid, const std::vector<double>& values);
void override_sigma_grid(CandidateGrid& grid, const std::vector<double>& values);
void override_dimensions(CandidateGrid& grid, const std::vector<int>& dimensions);

/// Parses "0.1,1,10" or "1:10" (inclusive integer range).
std::vector<double> parse_number_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

} // namespace fsvm
