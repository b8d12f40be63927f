#pragma once

#include "fsvm/solver.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fsvm {

enum class DatasetFormat { csv_rows, tecator, phoneme };

const char* to_string(DatasetFormat format) noexcept;
DatasetFormat dataset_format_from_string(const std::string& name);

/// Where a dataset lives and how its rows map to curves and labels.
///
/// csv_rows: one curve per row, values then a label column. An optional header
///   row carries the abscissae (its last cell, the label column name, is ignored).
///   Labels are mapped through `label_map`, or read as -1/+1 when it is empty.
/// tecator: records of 100 absorbances (850-1050 nm), optionally 22 principal
///   components, then moisture, fat and protein. Either one record per line
///   (103 or 125 numbers) or the statlib layout where a record spans several
///   lines (tokens are pooled and cut into records of 125). Label +1 when
///   fat > fat_threshold.
/// phoneme: comma-separated with a header; columns x.1..x.256 are the curve,
///   column "g" the class. Only the classes in `label_map` are kept (default
///   aa -> +1, ao -> -1); the grid is 256 points on [0, 1].
struct DatasetDescriptor {
    std::filesystem::path path;
    DatasetFormat format = DatasetFormat::csv_rows;
    std::map<std::string, int> label_map;
    double fat_threshold = 20.0;
    std::optional<std::pair<double, double>> interval; // uniform grid over [a, b]
    std::vector<double> abscissae;                     // explicit grid
    bool unlabeled = false;                            // csv_rows without a label column
    GridPtr fallback_grid;                             // used when the file declares no grid
};

LabeledDataset load_dataset(const DatasetDescriptor& descriptor);

/// Curves only; for csv_rows with `unlabeled` every column is a value.
std::vector<SampledFunction> load_curves(const DatasetDescriptor& descriptor);

/// Writes the generic csv layout with an abscissa header; load_dataset reads it back exactly.
void write_csv(const LabeledDataset& data, const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Locale-independent strict parse; throws a parse error mentioning `context`.
double parse_double(std::string_view text, const std::string& context);

inline constexpr unsigned char model_format_version = 1;

/// Model file: "FSVM", a version byte, 8-byte little-endian payload length,
/// 8-byte FNV-1a hash of the payload, then a JSON payload.
std::string serialize_model(const SvmModel& model);
SvmModel deserialize_model(const std::string& bytes);

void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

} // namespace fsvm
