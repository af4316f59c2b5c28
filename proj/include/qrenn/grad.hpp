#pragma once

#include <optional>
#include <vector>

#include "qrenn/model.hpp"

namespace qrenn {

/// Addresses one trainable parameter: a rotation angle theta[index] or a
/// data weight phi[index].
struct ParamIndex {
  enum class Kind { kTheta, kPhi };
  Kind kind = Kind::kTheta;
  int index = 0;

  static ParamIndex theta(int i) { return {Kind::kTheta, i}; }
  static ParamIndex phi(int t) { return {Kind::kPhi, t}; }

  bool operator==(const ParamIndex&) const = default;
};

enum class LossKind {
  kTotalLoss,        // 1 - (1/Q) sum_q <M_{y_q} (x) I>
  kMeanExpectation,  // (1/Q) sum_q <O_q (x) I>, the bare trace-form loss
};

/// A loss evaluation context: circuit shape, initial state and a batch of
/// samples. Embedding gates are prepared once for the phi given at
/// construction and rebuilt on the fly for any other phi.
class LossContext {
 public:
  LossContext(QrennArchitecture arch, QuantumState rho0, std::vector<LabeledSample> batch,
              LossKind kind = LossKind::kTotalLoss, std::optional<std::vector<double>> phi = std::nullopt,
              int threads = 1);

  double operator()(const ParameterVector& params) const;

  /// Per-sample <O_q (x) I> values.
  std::vector<double> sample_values(const ParameterVector& params) const;

  /// d loss / d theta for every theta, from exact evaluations at
  /// theta +- pi/2 (two-term shift rule). Shifted losses are evaluated in a
  /// batched form: the suffix after each block is propagated once for the
  /// 4^m (or 16^m, mixed) basis directions, so every shift inside the block
  /// is an exact quadratic form.
  std::vector<double> theta_gradient(const ParameterVector& params) const;

  /// Same quantity for one sample's <O (x) I>.
  std::vector<double> sample_theta_gradient(std::size_t sample, const ParameterVector& params) const;

  const QrennArchitecture& arch() const { return arch_; }
  const QuantumState& initial_state() const { return rho0_; }
  std::size_t size() const { return batch_.size(); }
  LossKind kind() const { return kind_; }

 private:
  const std::vector<CompiledCircuit>& circuits(const ParameterVector& params,
                                               std::vector<CompiledCircuit>& scratch) const;
  double combine(const std::vector<double>& values) const;

  QrennArchitecture arch_;
  QuantumState rho0_;
  std::vector<LabeledSample> batch_;
  LossKind kind_;
  std::optional<std::vector<double>> compiled_phi_;
  std::vector<CompiledCircuit> compiled_;
  int threads_;
};

/// [L(theta + pi/2 e_i) - L(theta - pi/2 e_i)] / 2. Only valid for rotation
/// angles; phi indices are rejected.
double param_shift(const LossContext& loss, const ParameterVector& params, ParamIndex index);

/// [L(+step) - L(-step)] / (2 step).
double central_diff(const LossContext& loss, const ParameterVector& params, ParamIndex index, double step);

inline constexpr double kPhiDiffStep = 1e-5;

/// Gradient over all theta (shift rule) followed, if params.phi is present,
/// by all phi (central differences with step 1e-5).
std::vector<double> full_gradient(const LossContext& loss, const ParameterVector& params);

}  // namespace qrenn
