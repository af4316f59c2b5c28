#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrenn/data.hpp"
#include "qrenn/grad.hpp"
#include "qrenn/model.hpp"
#include "qrenn/qstate.hpp"
#include "qrenn/dla.hpp"

namespace qrenn {

/// State of the embedding register; the processing register starts in |0...0>.
struct ProbeSpec {
  enum class Kind { kZero, kPlus, kMinus, kMixed };
  Kind kind = Kind::kPlus;
  double p_mix = 0.5;  // weight of |+...+> for kMixed

  bool operator==(const ProbeSpec&) const = default;
};

/// "zero", "plus", "minus", "mixed" or "mixed:<p>".
ProbeSpec parse_probe(std::string_view text);
std::string to_string(const ProbeSpec& probe);
/// |+>^n for Pauli, involutory and cluster-Ising data, 0.5|+><+|^n + 0.5 I/2^n
/// for diagonal data, |0>^n otherwise.
ProbeSpec default_probe(FeatureTag tag);
QuantumState probe_state(int n, const ProbeSpec& probe);
QuantumState initial_state(int m, int n, const ProbeSpec& probe);

std::string to_string(ParamIndex index);
/// "theta:<i>" or "phi:<t>".
ParamIndex parse_param_index(std::string_view text);

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;     // unbiased
  double stderr_mean = 0.0;  // sqrt(variance / count)
  double variance_se = 0.0;  // delta-method standard error of the variance
  double ci_low = 0.0;       // percentile bootstrap interval for the variance
  double ci_high = 0.0;
};

inline constexpr int kDefaultBootstrap = 1000;
inline constexpr double kDefaultCiLevel = 0.99;

SampleStats summarize(std::span<const double> xs, std::uint64_t seed, int bootstrap = kDefaultBootstrap,
                      double level = kDefaultCiLevel);

/// Per-sample data source for gradient sampling.
using DataFactory = std::function<EmbeddedData(Rng&)>;

/// Derivatives of <O_m (x) I> at `target` over `samples` random networks:
/// theta ~ U[0, 2pi), phi ~ U[0, 2pi) when the target is a phi entry (phi = 1
/// otherwise), data from `factory`. Sample k uses substream (seed, k).
std::vector<double> sample_gradients(const QrennArchitecture& arch, const QuantumState& rho0,
                                     const HermitianOperator& o_m, const DataFactory& factory, ParamIndex target,
                                     int samples, std::uint64_t seed, int threads = 1);

enum class DataMode { kAuto, kFixed, kPerSlot };

std::string to_string(DataMode mode);
DataMode parse_data_mode(std::string_view text);

struct GradStatConfig {
  FeatureTag feature = FeatureTag::kDiagonal;
  std::vector<int> n_list{2};
  std::vector<int> slots_list{16};
  int m = 2;
  int layers = 3;
  int samples = 500;
  ParamIndex target = ParamIndex::theta(0);
  std::optional<ProbeSpec> probe;
  DataMode data_mode = DataMode::kAuto;  // auto: fresh draw per slot for diagonal data, fixed otherwise
  MultiplicityWeight weight = MultiplicityWeight::kSquared;
  double embed_scale = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;
  int bootstrap = kDefaultBootstrap;

  void validate() const;
  bool operator==(const GradStatConfig&) const = default;
};

struct GradStatRow {
  int n = 0;
  int slots = 0;
  SampleStats stats;
  std::optional<double> predicted_variance;
};

struct GradStatResult {
  std::vector<GradStatRow> rows;
  double wall_seconds = 0.0;
};

/// Sample statistics for every (n, T) in n_list x slots_list. The predicted
/// variance is the mean over samples of the dla-module prediction for that
/// sample's data; it is omitted when the data generators do not commute or a
/// phi target meets per-slot data.
GradStatResult gradient_statistics(const GradStatConfig& cfg);

/// Header n,T,samples,mean,variance,stderr,predicted_variance.
std::string gradstats_csv(const GradStatResult& result);

enum class Optimizer { kAdam, kGradientDescent };

std::string to_string(Optimizer opt);
Optimizer parse_optimizer(std::string_view text);

struct NoiseSpec {
  enum class Kind { kNone, kLabelFlip, kCrosstalk };
  Kind kind = Kind::kNone;
  double rate = 0.05;   // label flip probability
  double delta = 0.01;  // crosstalk amplitude
  std::optional<std::uint64_t> h0_seed;

  bool operator==(const NoiseSpec&) const = default;
};

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamSettings&) const = default;
};

struct TrainConfig {
  FeatureTag feature = FeatureTag::kPauli;
  int n = 3;
  int m = 2;
  int slots = 4;
  int layers = 3;
  int total = 600;
  int train_size = 100;
  Optimizer optimizer = Optimizer::kAdam;
  double learning_rate = 0.1;
  int epochs = 200;
  AdamSettings adam;
  NoiseSpec noise;
  std::optional<ProbeSpec> probe;
  double embed_scale = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  std::vector<double> loss_curve;  // loss before each update, then the final loss
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<int> test_labels;
  std::vector<int> test_predictions;
  std::vector<double> test_decisions;
  std::vector<std::optional<double>> test_meta;
  ParameterVector params;
  int flipped_labels = 0;
  double wall_seconds = 0.0;
};

/// Each training label flipped independently with probability `rate`.
DatasetSplit label_flip(const DatasetSplit& dataset, double rate, Rng& rng, int* flipped = nullptr);

/// exp(i (h_embedded + delta h0)) on the full register; ||h0||_inf <= 1.
UnitaryOperator crosstalk_embed(const HermitianOperator& h_embedded, double delta, const HermitianOperator& h0);

/// Random Hermitian with Haar eigenbasis rescaled to unit spectral norm.
HermitianOperator crosstalk_h0(int qubits, Rng& rng);

/// Builds the dataset for cfg and trains on it.
TrainResult train_classifier(const TrainConfig& cfg);
/// Trains on an explicit dataset (cfg.feature only selects the embedding rule).
TrainResult train_on(const TrainConfig& cfg, const DatasetSplit& dataset);

/// Minimises loss(params) by the configured optimizer over theta only.
/// The callback returns the loss and fills the gradient.
using LossAndGradient = std::function<double(const ParameterVector&, std::vector<double>&)>;
std::vector<double> optimize(const TrainConfig& cfg, ParameterVector& params, const LossAndGradient& fn);

/// Cluster-Ising defaults: n = 8, m = 1, T = 10, 40 train of 600.
TrainConfig spt_defaults();
TrainResult spt_experiment(const TrainConfig& cfg);

struct SweepRow {
  int train_size = 0;
  int repeats = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

/// For each size, `repeats` independent training subsets drawn from one pool
/// of cfg.total samples; accuracy is measured on the remaining samples.
std::vector<SweepRow> spt_training_sweep(const TrainConfig& cfg, std::span<const int> sizes, int repeats);

struct OverlapRow {
  int n = 0;
  double lambda = 0.0;
  std::string probe;
  double value = 0.0;
};

/// R^2 of each probe against the eigenspaces of H(lambda).
std::vector<OverlapRow> overlap_scan(std::span<const int> n_list, std::span<const double> lambda_grid,
                                     std::span<const ProbeSpec> probes);

/// Per-sample test predictions: index,label,prediction,decision,meta.
std::string predictions_csv(const TrainResult& result);
/// epoch,loss.
std::string loss_curve_csv(const TrainResult& result);
/// train_size,repeats,mean_accuracy,std_accuracy.
std::string sweep_csv(std::span<const SweepRow> rows);
/// n,lambda,probe,overlap.
std::string overlap_csv(std::span<const OverlapRow> rows);

}  // namespace qrenn
