#include "qrenn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qrenn/error.hpp"
#include "qrenn/overlap.hpp"
#include "qrenn/parallel.hpp"

namespace qrenn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCommuteTol = 1e-9;

// Substream indices reserved for run-level draws.
constexpr std::uint64_t kInitStream = 0x1a17;
constexpr std::uint64_t kFlipStream = 0xf11f;
constexpr std::uint64_t kCrosstalkStream = 0xc7;
constexpr std::uint64_t kBootstrapStream = 0xb007;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double unbiased_variance(std::span<const double> xs, double mean) {
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size() - 1);
}

DataFactory feature_factory(FeatureTag tag, int n, int slots, bool per_slot, double scale) {
  return [=](Rng& rng) {
    if (!per_slot) return EmbeddedData::repeated(embedding_generator(tag, generate(tag, n, rng), scale), slots);
    std::vector<HermitianOperator> gens;
    gens.reserve(static_cast<std::size_t>(slots));
    for (int t = 0; t < slots; ++t) gens.push_back(embedding_generator(tag, generate(tag, n, rng), scale));
    return EmbeddedData(std::move(gens));
  };
}

ParameterVector random_parameters(const QrennArchitecture& arch, bool random_phi, Rng& rng) {
  ParameterVector p = ParameterVector::zeros(arch);
  for (auto& v : p.theta) v = uniform(rng, 0.0, kTwoPi);
  if (random_phi) {
    p.phi = std::vector<double>(static_cast<std::size_t>(arch.slots));
    for (auto& v : *p.phi) v = uniform(rng, 0.0, kTwoPi);
  }
  return p;
}

double sample_gradient(const QrennArchitecture& arch, const QuantumState& rho0, const HermitianOperator& o_m,
                       const EmbeddedData& data, ParamIndex target, const ParameterVector& params) {
  const std::vector<LabeledSample> batch{{data, 0, o_m}};
  const LossContext loss(arch, rho0, batch, LossKind::kMeanExpectation, params.phi);
  if (target.kind == ParamIndex::Kind::kTheta) return param_shift(loss, params, target);
  return central_diff(loss, params, target, kPhiDiffStep);
}

void check_target(const QrennArchitecture& arch, ParamIndex target) {
  const int limit = target.kind == ParamIndex::Kind::kTheta ? arch.theta_count() : arch.slots;
  if (target.index < 0 || target.index >= limit) {
    throw Error("bench", "target " + to_string(target) + " out of range for T=" + std::to_string(arch.slots));
  }
}

std::optional<double> sample_prediction(const QrennArchitecture& arch, const EmbeddedData& data,
                                        const QuantumState& rho_n, const HermitianOperator& o_m, ParamIndex target,
                                        MultiplicityWeight weight) {
  const auto gens = data.distinct_generators();
  if (data.crosstalk() || data.max_relative_commutator() > kCommuteTol) return std::nullopt;
  if (target.kind == ParamIndex::Kind::kPhi) {
    if (gens.size() != 1) return std::nullopt;
    return predicted_variance_phi(arch.m, joint_eigenspaces(gens), rho_n, o_m, weight);
  }
  return predicted_variance_theta(arch.m, joint_eigenspaces(gens), rho_n, o_m,
                                  rotation_generator(arch, target.index), weight);
}

std::vector<LabeledSample> to_samples(const std::vector<LabeledHamiltonian>& part, const TrainConfig& cfg,
                                      const std::pair<HermitianOperator, HermitianOperator>& povm,
                                      const std::optional<HermitianOperator>& crosstalk) {
  std::vector<LabeledSample> out;
  out.reserve(part.size());
  for (const auto& s : part) {
    auto data = EmbeddedData::repeated(embedding_generator(cfg.feature, s.op, cfg.embed_scale), cfg.slots);
    if (crosstalk) data = data.with_crosstalk(*crosstalk);
    out.push_back({std::move(data), s.label, s.label == 1 ? povm.second : povm.first});
  }
  return out;
}

std::vector<double> decisions(const QrennArchitecture& arch, const ParameterVector& params,
                              const std::vector<LabeledSample>& samples, const QuantumState& rho0, int threads) {
  std::vector<double> out(samples.size());
  parallel_for(samples.size(), threads,
               [&](std::size_t k) { out[k] = decision_value(arch, params, samples[k].data, rho0); });
  return out;
}

double accuracy_of(const std::vector<double>& values, const std::vector<LabeledSample>& samples,
                   std::vector<int>* predictions = nullptr) {
  std::vector<int> pred, truth;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    pred.push_back(predict_from_value(values[k]));
    truth.push_back(samples[k].label);
  }
  if (predictions) *predictions = pred;
  return accuracy(pred, truth);
}

}  // namespace

ProbeSpec parse_probe(std::string_view text) {
  if (text == "zero") return {ProbeSpec::Kind::kZero};
  if (text == "plus") return {ProbeSpec::Kind::kPlus};
  if (text == "minus") return {ProbeSpec::Kind::kMinus};
  if (text == "mixed") return {ProbeSpec::Kind::kMixed, 0.5};
  if (text.starts_with("mixed:")) {
    const std::string rest(text.substr(6));
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != rest.size() || !(p >= 0.0 && p <= 1.0)) {
      throw Error("bench", "mixed probe weight must be a number in [0, 1]: '" + std::string(text) + "'");
    }
    return {ProbeSpec::Kind::kMixed, p};
  }
  throw Error("bench", "unknown probe '" + std::string(text) + "'");
}

std::string to_string(const ProbeSpec& probe) {
  switch (probe.kind) {
    case ProbeSpec::Kind::kZero: return "zero";
    case ProbeSpec::Kind::kPlus: return "plus";
    case ProbeSpec::Kind::kMinus: return "minus";
    case ProbeSpec::Kind::kMixed: return "mixed:" + fmt(probe.p_mix);
  }
  throw Error("bench", "unknown probe kind");
}

ProbeSpec default_probe(FeatureTag tag) {
  switch (tag) {
    case FeatureTag::kPauli:
    case FeatureTag::kInvolutory:
    case FeatureTag::kClusterIsing: return {ProbeSpec::Kind::kPlus};
    case FeatureTag::kDiagonal: return {ProbeSpec::Kind::kMixed, 0.5};
    default: return {ProbeSpec::Kind::kZero};
  }
}

QuantumState probe_state(int n, const ProbeSpec& probe) {
  switch (probe.kind) {
    case ProbeSpec::Kind::kZero: return basis_state(n, std::string(static_cast<std::size_t>(n), '0'));
    case ProbeSpec::Kind::kPlus: return plus_state(n);
    case ProbeSpec::Kind::kMinus: return minus_state(n);
    case ProbeSpec::Kind::kMixed: return mixed_probe(probe.p_mix, n);
  }
  throw Error("bench", "unknown probe kind");
}

QuantumState initial_state(int m, int n, const ProbeSpec& probe) {
  return tensor(basis_state(m, std::string(static_cast<std::size_t>(m), '0')), probe_state(n, probe));
}

std::string to_string(ParamIndex index) {
  return (index.kind == ParamIndex::Kind::kTheta ? "theta:" : "phi:") + std::to_string(index.index);
}

ParamIndex parse_param_index(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  if (colon == std::string_view::npos || (kind != "theta" && kind != "phi")) {
    throw Error("bench", "parameter index must look like theta:<i> or phi:<t>, got '" + std::string(text) + "'");
  }
  const std::string digits(text.substr(colon + 1));
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error("bench", "bad parameter index '" + std::string(text) + "'");
  }
  const int i = std::stoi(digits);
  return kind == "theta" ? ParamIndex::theta(i) : ParamIndex::phi(i);
}

SampleStats summarize(std::span<const double> xs, std::uint64_t seed, int bootstrap, double level) {
  if (xs.size() < 2) throw Error("bench", "summarize needs at least two samples");
  if (!(level > 0.0 && level < 1.0)) throw Error("bench", "confidence level must lie in (0, 1)");
  SampleStats s;
  s.count = xs.size();
  const double n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  s.variance = unbiased_variance(xs, s.mean);
  s.stderr_mean = std::sqrt(s.variance / n);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = (x - s.mean) * (x - s.mean);
    m2 += d / n;
    m4 += d * d / n;
  }
  s.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);

  if (bootstrap <= 0) {
    s.ci_low = s.ci_high = s.variance;
    return s;
  }
  Rng rng = substream(seed, kBootstrapStream);
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  std::vector<double> resampled(xs.size()), variances(static_cast<std::size_t>(bootstrap));
  for (auto& v : variances) {
    for (auto& r : resampled) r = xs[pick(rng)];
    v = unbiased_variance(resampled, std::accumulate(resampled.begin(), resampled.end(), 0.0) / n);
  }
  std::sort(variances.begin(), variances.end());
  const double tail = (1.0 - level) / 2.0;
  const auto at = [&](double q) {
    const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(variances.size() - 1)));
    return variances[std::min(i, variances.size() - 1)];
  };
  s.ci_low = at(tail);
  s.ci_high = at(1.0 - tail);
  return s;
}

std::vector<double> sample_gradients(const QrennArchitecture& arch, const QuantumState& rho0,
                                     const HermitianOperator& o_m, const DataFactory& factory, ParamIndex target,
                                     int samples, std::uint64_t seed, int threads) {
  arch.validate();
  check_target(arch, target);
  if (samples < 1) throw Error("bench", "samples must be positive");
  std::vector<double> out(static_cast<std::size_t>(samples));
  parallel_for(out.size(), threads, [&](std::size_t k) {
    Rng rng = substream(seed, k);
    const EmbeddedData data = factory(rng);
    const auto params = random_parameters(arch, target.kind == ParamIndex::Kind::kPhi, rng);
    out[k] = sample_gradient(arch, rho0, o_m, data, target, params);
  });
  return out;
}

std::string to_string(DataMode mode) {
  switch (mode) {
    case DataMode::kAuto: return "auto";
    case DataMode::kFixed: return "fixed";
    case DataMode::kPerSlot: return "per_slot";
  }
  throw Error("bench", "unknown data mode");
}

DataMode parse_data_mode(std::string_view text) {
  if (text == "auto") return DataMode::kAuto;
  if (text == "fixed") return DataMode::kFixed;
  if (text == "per_slot") return DataMode::kPerSlot;
  throw Error("bench", "unknown data mode '" + std::string(text) + "'");
}

void GradStatConfig::validate() const {
  if (samples < 2) throw Error("bench", "samples must be at least 2");
  if (n_list.empty() || slots_list.empty()) throw Error("bench", "n_list and slots_list must be non-empty");
  if (m < 1 || layers < 1) throw Error("bench", "m and L must be positive");
  if (!(embed_scale > 0.0)) throw Error("bench", "embed_scale must be positive");
  for (int n : n_list) {
    if (n < 1) throw Error("bench", "n must be positive");
  }
  for (int t : slots_list) {
    check_target(QrennArchitecture{m, 1, t, layers, ""}, target);
  }
}

GradStatResult gradient_statistics(const GradStatConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const bool per_slot = cfg.data_mode == DataMode::kPerSlot ||
                        (cfg.data_mode == DataMode::kAuto && cfg.feature == FeatureTag::kDiagonal);
  const ProbeSpec probe = cfg.probe.value_or(default_probe(cfg.feature));
  const HermitianOperator o_m(parity_observable(cfg.m));

  GradStatResult result;
  for (int n : cfg.n_list) {
    const QuantumState rho_n = probe_state(n, probe);
    const QuantumState rho0 = initial_state(cfg.m, n, probe);
    for (int slots : cfg.slots_list) {
      const QrennArchitecture arch{cfg.m, n, slots, cfg.layers, ""};
      arch.validate();
      const auto factory = feature_factory(cfg.feature, n, slots, per_slot, cfg.embed_scale);
      const std::uint64_t row_seed = substream_seed(substream_seed(cfg.seed, static_cast<std::uint64_t>(n)),
                                                    static_cast<std::uint64_t>(slots));
      const auto count = static_cast<std::size_t>(cfg.samples);
      std::vector<double> grads(count);
      std::vector<std::optional<double>> predicted(count);
      parallel_for(count, cfg.threads, [&](std::size_t k) {
        Rng rng = substream(row_seed, k);
        const EmbeddedData data = factory(rng);
        const auto params = random_parameters(arch, cfg.target.kind == ParamIndex::Kind::kPhi, rng);
        grads[k] = sample_gradient(arch, rho0, o_m, data, cfg.target, params);
        predicted[k] = sample_prediction(arch, data, rho_n, o_m, cfg.target, cfg.weight);
      });
      GradStatRow row{n, slots, summarize(grads, row_seed, cfg.bootstrap), std::nullopt};
      if (std::all_of(predicted.begin(), predicted.end(), [](const auto& p) { return p.has_value(); })) {
        double acc = 0.0;
        for (const auto& p : predicted) acc += *p;
        row.predicted_variance = acc / static_cast<double>(count);
      }
      result.rows.push_back(row);
    }
  }
  result.wall_seconds = seconds_since(start);
  return result;
}

std::string gradstats_csv(const GradStatResult& result) {
  std::ostringstream out;
  out << "n,T,samples,mean,variance,stderr,predicted_variance\n";
  for (const auto& r : result.rows) {
    out << r.n << ',' << r.slots << ',' << r.stats.count << ',' << fmt(r.stats.mean) << ','
        << fmt(r.stats.variance) << ',' << fmt(r.stats.stderr_mean) << ','
        << (r.predicted_variance ? fmt(*r.predicted_variance) : "") << '\n';
  }
  return out.str();
}

std::string to_string(Optimizer opt) { return opt == Optimizer::kAdam ? "adam" : "gradient-descent"; }

Optimizer parse_optimizer(std::string_view text) {
  if (text == "adam") return Optimizer::kAdam;
  if (text == "gradient-descent") return Optimizer::kGradientDescent;
  throw Error("bench", "unknown optimizer '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("bench", "learning_rate must be positive");
  if (epochs < 0) throw Error("bench", "epochs must be non-negative");
  if (!(embed_scale > 0.0)) throw Error("bench", "embed_scale must be positive");
  if (feature == FeatureTag::kHaar) throw Error("bench", "haar is the contrast class, not a feature set");
  QrennArchitecture{m, n, slots, layers, ""}.validate();
  if (noise.kind == NoiseSpec::Kind::kLabelFlip && !(noise.rate >= 0.0 && noise.rate <= 1.0)) {
    throw Error("bench", "label flip rate must lie in [0, 1]");
  }
  if (noise.kind == NoiseSpec::Kind::kCrosstalk && !(noise.delta >= 0.0)) {
    throw Error("bench", "crosstalk delta must be non-negative");
  }
}

DatasetSplit label_flip(const DatasetSplit& dataset, double rate, Rng& rng, int* flipped) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("bench", "label flip rate must lie in [0, 1]");
  DatasetSplit out = dataset;
  std::bernoulli_distribution flip(rate);
  int count = 0;
  for (auto& s : out.train) {
    if (flip(rng)) {
      s.label = 1 - s.label;
      ++count;
    }
  }
  if (flipped) *flipped = count;
  return out;
}

UnitaryOperator crosstalk_embed(const HermitianOperator& h_embedded, double delta, const HermitianOperator& h0) {
  if (h_embedded.dim() != h0.dim()) throw Error("bench", "crosstalk operator dimension mismatch");
  if (spectral_norm(h0.matrix()) > 1.0 + 1e-9) throw Error("bench", "crosstalk H0 must have spectral norm <= 1");
  return expm_i(HermitianOperator(h_embedded.matrix() + delta * h0.matrix()));
}

HermitianOperator crosstalk_h0(int qubits, Rng& rng) {
  const auto h = random_hermitian(Eigen::Index{1} << qubits, rng);
  return HermitianOperator(h.matrix() / spectral_norm(h.matrix()));
}

std::vector<double> optimize(const TrainConfig& cfg, ParameterVector& params, const LossAndGradient& fn) {
  const std::size_t dim = params.theta.size();
  std::vector<double> grad(dim), m1(dim, 0.0), m2(dim, 0.0);
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
  const auto record = [&](double loss, int epoch) {
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << "; theta =";
      for (double v : params.theta) msg << ' ' << fmt(v);
      throw Error("bench", msg.str());
    }
    curve.push_back(loss);
  };
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    record(fn(params, grad), epoch);
    if (cfg.optimizer == Optimizer::kGradientDescent) {
      for (std::size_t i = 0; i < dim; ++i) params.theta[i] -= cfg.learning_rate * grad[i];
      continue;
    }
    const auto& a = cfg.adam;
    const double c1 = 1.0 - std::pow(a.beta1, epoch + 1);
    const double c2 = 1.0 - std::pow(a.beta2, epoch + 1);
    for (std::size_t i = 0; i < dim; ++i) {
      m1[i] = a.beta1 * m1[i] + (1.0 - a.beta1) * grad[i];
      m2[i] = a.beta2 * m2[i] + (1.0 - a.beta2) * grad[i] * grad[i];
      params.theta[i] -= cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + a.epsilon);
    }
  }
  record(fn(params, grad), cfg.epochs);
  return curve;
}

TrainResult train_on(const TrainConfig& cfg, const DatasetSplit& dataset) {
  cfg.validate();
  if (dataset.n != cfg.n) throw Error("bench", "dataset n does not match the configuration");
  if (dataset.train.empty() || dataset.test.empty()) throw Error("bench", "train and test sets must be non-empty");
  const auto start = std::chrono::steady_clock::now();
  const QrennArchitecture arch{cfg.m, cfg.n, cfg.slots, cfg.layers, ""};
  const QuantumState rho0 = initial_state(cfg.m, cfg.n, cfg.probe.value_or(default_probe(cfg.feature)));
  const auto povm = povm_binary(cfg.m);

  TrainResult result;
  DatasetSplit data = dataset;
  std::optional<HermitianOperator> crosstalk;
  if (cfg.noise.kind == NoiseSpec::Kind::kLabelFlip) {
    Rng rng = substream(cfg.seed, kFlipStream);
    data = label_flip(dataset, cfg.noise.rate, rng, &result.flipped_labels);
  } else if (cfg.noise.kind == NoiseSpec::Kind::kCrosstalk) {
    Rng rng = cfg.noise.h0_seed ? Rng(*cfg.noise.h0_seed) : substream(cfg.seed, kCrosstalkStream);
    const auto h0 = crosstalk_h0(arch.qubits(), rng);
    crosstalk = HermitianOperator(cfg.noise.delta * h0.matrix());
  }

  const auto train = to_samples(data.train, cfg, povm, crosstalk);
  const auto test = to_samples(data.test, cfg, povm, crosstalk);

  Rng init = substream(cfg.seed, kInitStream);
  ParameterVector params = random_parameters(arch, false, init);
  const LossContext loss(arch, rho0, train, LossKind::kTotalLoss, std::nullopt, cfg.threads);
  result.loss_curve = optimize(cfg, params, [&](const ParameterVector& p, std::vector<double>& grad) {
    grad = loss.theta_gradient(p);
    return loss(p);
  });

  result.train_accuracy = accuracy_of(decisions(arch, params, train, rho0, cfg.threads), train);
  result.test_decisions = decisions(arch, params, test, rho0, cfg.threads);
  result.test_accuracy = accuracy_of(result.test_decisions, test, &result.test_predictions);
  for (const auto& s : data.test) {
    result.test_labels.push_back(s.label);
    result.test_meta.push_back(s.meta);
  }
  result.params = std::move(params);
  result.wall_seconds = seconds_since(start);
  return result;
}

TrainResult train_classifier(const TrainConfig& cfg) {
  cfg.validate();
  return train_on(cfg, build_dataset(cfg.feature, cfg.n, cfg.total, cfg.train_size, cfg.seed));
}

TrainConfig spt_defaults() {
  TrainConfig cfg;
  cfg.feature = FeatureTag::kClusterIsing;
  cfg.n = 8;
  cfg.m = 1;
  cfg.slots = 10;
  cfg.total = 600;
  cfg.train_size = 40;
  cfg.probe = ProbeSpec{ProbeSpec::Kind::kPlus};
  return cfg;
}

TrainResult spt_experiment(const TrainConfig& cfg) {
  if (cfg.feature != FeatureTag::kClusterIsing) throw Error("bench", "spt_experiment needs cluster_ising data");
  return train_classifier(cfg);
}

std::vector<SweepRow> spt_training_sweep(const TrainConfig& cfg, std::span<const int> sizes, int repeats) {
  if (cfg.feature != FeatureTag::kClusterIsing) throw Error("bench", "spt sweep needs cluster_ising data");
  if (repeats < 1) throw Error("bench", "repeats must be positive");
  const DatasetSplit pool = build_dataset(cfg.feature, cfg.n, cfg.total, 0, cfg.seed);
  std::vector<SweepRow> rows;
  for (int size : sizes) {
    if (size < 1 || size >= cfg.total) throw Error("bench", "sweep sizes must lie in [1, total)");
    std::vector<double> accs;
    for (int rep = 0; rep < repeats; ++rep) {
      const std::uint64_t run_seed = substream_seed(substream_seed(cfg.seed, static_cast<std::uint64_t>(size)),
                                                    static_cast<std::uint64_t>(rep));
      std::vector<std::size_t> order(pool.test.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(run_seed);
      std::shuffle(order.begin(), order.end(), rng);
      DatasetSplit split{pool.tag, pool.n, run_seed, {}, {}};
      for (std::size_t i = 0; i < order.size(); ++i) {
        (i < static_cast<std::size_t>(size) ? split.train : split.test).push_back(pool.test[order[i]]);
      }
      TrainConfig run = cfg;
      run.seed = run_seed;
      accs.push_back(train_on(run, split).test_accuracy);
    }
    SweepRow row{size, repeats, 0.0, 0.0};
    row.mean_accuracy = std::accumulate(accs.begin(), accs.end(), 0.0) / repeats;
    if (repeats > 1) row.std_accuracy = std::sqrt(unbiased_variance(accs, row.mean_accuracy));
    rows.push_back(row);
  }
  return rows;
}

std::vector<OverlapRow> overlap_scan(std::span<const int> n_list, std::span<const double> lambda_grid,
                                     std::span<const ProbeSpec> probes) {
  std::vector<OverlapRow> rows;
  for (int n : n_list) {
    std::vector<QuantumState> states;
    for (const auto& p : probes) states.push_back(probe_state(n, p));
    for (double lambda : lambda_grid) {
      const std::vector<HermitianOperator> set{gen_cluster_ising(n, lambda)};
      const auto eig = joint_eigenspaces(set);
      for (std::size_t k = 0; k < probes.size(); ++k) {
        rows.push_back({n, lambda, to_string(probes[k]), joint_overlap(eig, states[k]).value});
      }
    }
  }
  return rows;
}

std::string predictions_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "index,label,prediction,decision,meta\n";
  for (std::size_t k = 0; k < result.test_labels.size(); ++k) {
    out << k << ',' << result.test_labels[k] << ',' << result.test_predictions[k] << ','
        << fmt(result.test_decisions[k]) << ',' << (result.test_meta[k] ? fmt(*result.test_meta[k]) : "") << '\n';
  }
  return out.str();
}

std::string loss_curve_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t k = 0; k < result.loss_curve.size(); ++k) out << k << ',' << fmt(result.loss_curve[k]) << '\n';
  return out.str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "train_size,repeats,mean_accuracy,std_accuracy\n";
  for (const auto& r : rows) {
    out << r.train_size << ',' << r.repeats << ',' << fmt(r.mean_accuracy) << ',' << fmt(r.std_accuracy) << '\n';
  }
  return out.str();
}

std::string overlap_csv(std::span<const OverlapRow> rows) {
  std::ostringstream out;
  out << "n,lambda,probe,overlap\n";
  for (const auto& r : rows) out << r.n << ',' << fmt(r.lambda) << ',' << r.probe << ',' << fmt(r.value) << '\n';
  return out.str();
}

}  // namespace qrenn
