#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qrenn/bench.hpp"

namespace qrenn {

enum class Command { kGradstats, kTrain, kSpt, kDlaAnalyze, kOverlapScan, kDatasetGen };

std::string to_string(Command command);
Command parse_command(std::string_view name);

struct SptParams {
  TrainConfig train = spt_defaults();
  std::vector<int> sweep_sizes;  // empty: no training-size sweep
  int sweep_repeats = 20;

  bool operator==(const SptParams&) const = default;
};

struct DlaAnalyzeParams {
  int m = 1;
  int n = 1;
  std::vector<std::string> data{"Z"};  // Pauli words on the embedding register
  int random_levels = 0;               // > 0: one random H with that many distinct eigenvalues instead
  std::string control;
  int max_dim = 0;                     // 0: r 4^m + 4^m

  bool operator==(const DlaAnalyzeParams&) const = default;
};

struct OverlapScanParams {
  std::vector<int> n_list{4, 6, 8};
  double lambda_min = 0.0;
  double lambda_max = 2.0;
  int lambda_steps = 21;
  std::vector<ProbeSpec> probes{{ProbeSpec::Kind::kZero}, {ProbeSpec::Kind::kPlus}, {ProbeSpec::Kind::kMinus}};

  bool operator==(const OverlapScanParams&) const = default;
};

struct DatasetGenParams {
  FeatureTag feature = FeatureTag::kPauli;
  int n = 3;
  int total = 600;
  int train_size = 100;

  bool operator==(const DatasetGenParams&) const = default;
};

using CommandParams =
    std::variant<GradStatConfig, TrainConfig, SptParams, DlaAnalyzeParams, OverlapScanParams, DatasetGenParams>;

struct RunConfig {
  Command command = Command::kGradstats;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "qrenn_out";
  int threads = 1;  // 0: hardware concurrency
  CommandParams parameters;

  bool operator==(const RunConfig&) const = default;
};

/// Defaults for a command with no parameters given.
RunConfig default_config(Command command);

/// Whether the command consumes random draws (and so needs a seed).
bool is_stochastic(const RunConfig& cfg);

/// Strict parse of a JSON document: unknown keys, type mismatches and a
/// missing seed for stochastic commands are errors naming the key path.
/// Absent keys take their defaults.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& file);

/// JSON text with every key present, defaults included.
std::string serialize_config(const RunConfig& cfg);

/// Copies the top-level seed and thread count into the command parameters
/// and validates them.
void finalize(RunConfig& cfg);

inline constexpr std::string_view kCodeVersion = "0.1.0";

/// Runs the experiment, writes CSV files and manifest.json into output_dir and
/// prints a one-line summary. On failure prints a JSON error record to stderr
/// and returns nonzero.
int run(RunConfig cfg);

}  // namespace qrenn
