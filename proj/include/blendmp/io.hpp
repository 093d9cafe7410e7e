#pragma once

#include "blendmp/bench.hpp"
#include "blendmp/solver_state.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace blendmp {

namespace fs = std::filesystem;

inline constexpr const char* kTraceHeader = "iter,wall_seconds,f_value,dual_gap,n_atoms,step_kind,nmse";

/// Trace CSV: the fixed header, then one row per TraceRow. Floats use %.17g;
/// an absent NMSE is an empty field.
void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const fs::path& path);
std::string format_trace_row(const TraceRow& row);

/// Matrix CSV: a `# rows,cols` comment line, then comma-separated rows.
void write_matrix_csv(const fs::path& path, const Matrix& m);
Matrix read_matrix_csv(const fs::path& path);

/// Binary matrix: little-endian uint64 rows and cols, then column-major
/// little-endian float64 entries.
void write_matrix_bin(const fs::path& path, const Matrix& m);
Matrix read_matrix_bin(const fs::path& path);

/// Dispatches on extension: `.bin` is binary, anything else CSV.
void write_matrix(const fs::path& path, const Matrix& m);
Matrix read_matrix(const fs::path& path);

/// Writes A/y for each split plus x_star into `dir` with the given extension
/// ("csv" or "bin").
void save_split(const fs::path& dir, const SplitData& split, const std::string& format);
SplitData load_split(const fs::path& dir);

void write_snapshots_json(const fs::path& path, const std::vector<Snapshot>& snapshots);
std::vector<Snapshot> read_snapshots_json(const fs::path& path);

enum class DatasetFormat { whitespace, libsvm };

struct LabeledData {
    Matrix a;
    Vector labels;  ///< ±1
};

/// Reads features and labels ("label f1 f2 ..." per line, or libsvm
/// "label idx:val ..." with 1-based indices). Labels {0,1} map to {−1,+1}.
/// Optionally keeps a seeded uniform subset of `subsample_m` rows (in file
/// order), then scales each column by its max absolute value.
LabeledData load_labeled_dataset(const fs::path& path, DatasetFormat format,
                                 std::optional<std::size_t> subsample_m = std::nullopt, std::uint64_t seed = 0);

DatasetFormat dataset_format_from_string(const std::string& text);

}  // namespace blendmp
