#include "qrenn/grad.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qrenn/error.hpp"
#include "qrenn/parallel.hpp"

namespace qrenn {

namespace {

using Index = Eigen::Index;
using StridedMap = Eigen::Map<const ComplexMatrix, 0, Eigen::OuterStride<>>;

constexpr double kHalfPi = std::numbers::pi / 2.0;

std::vector<ComplexMatrix> block_matrices(const QrennArchitecture& arch, const std::vector<double>& theta) {
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(arch.slots + 1));
  const auto bsize = static_cast<std::size_t>(arch.block_size());
  for (int b = 0; b <= arch.slots; ++b) {
    out.push_back(processing_block_matrix(
        arch.m, arch.layers, std::span<const double>(theta).subspan(static_cast<std::size_t>(b) * bsize, bsize)));
  }
  return out;
}

/// Shifted block matrices W(theta_block +- pi/2 e_mu), flattened row-major
/// as w_j with j = a * pdim + c.
std::pair<ComplexVector, ComplexVector> shifted_block_vectors(const QrennArchitecture& arch,
                                                              std::span<const double> block, int mu) {
  std::vector<double> shifted(block.begin(), block.end());
  const auto idx = static_cast<std::size_t>(mu);
  shifted[idx] = block[idx] + kHalfPi;
  const ComplexMatrix plus = processing_block_matrix(arch.m, arch.layers, shifted);
  shifted[idx] = block[idx] - kHalfPi;
  const ComplexMatrix minus = processing_block_matrix(arch.m, arch.layers, shifted);
  const Index pdim = arch.processing_dim();
  ComplexVector wp(pdim * pdim), wm(pdim * pdim);
  for (Index a = 0; a < pdim; ++a) {
    for (Index c = 0; c < pdim; ++c) {
      wp(a * pdim + c) = plus(a, c);
      wm(a * pdim + c) = minus(a, c);
    }
  }
  return {wp, wm};
}

/// Gradient of <P (x) I> for a pure initial state.
std::vector<double> pure_gradient(const CompiledCircuit& circuit, const std::vector<double>& theta,
                                  const ComplexVector& psi0, const ComplexMatrix& p) {
  const auto& arch = circuit.arch();
  const Index pdim = arch.processing_dim();
  const Index ndim = arch.embedding_dim();
  const Index control = arch.control_index();
  const int blocks = arch.slots + 1;
  const auto ws = block_matrices(arch, theta);

  std::vector<ComplexMatrix> before(static_cast<std::size_t>(blocks));
  ComplexMatrix state = sim::to_batch(psi0, pdim);
  for (int b = 0; b < blocks; ++b) {
    before[static_cast<std::size_t>(b)] = state;
    sim::apply_processing(state, ws[static_cast<std::size_t>(b)]);
    if (b < arch.slots) sim::apply_embedding(state, circuit.gate(b), pdim, control);
  }

  const Index directions = pdim * pdim;
  std::vector<double> grad(theta.size(), 0.0);
  const std::span<const double> theta_span(theta);
  for (int b = 0; b < blocks; ++b) {
    // Direction j = (a, c) is |a> (x) (column c of the state before block b).
    const ComplexMatrix& psi = before[static_cast<std::size_t>(b)];
    ComplexMatrix stack = ComplexMatrix::Zero(ndim, pdim * directions);
    for (Index a = 0; a < pdim; ++a) {
      for (Index c = 0; c < pdim; ++c) {
        const Index j = a * pdim + c;
        stack.col(j * pdim + a) = psi.col(c);
      }
    }
    if (b < arch.slots) sim::apply_embedding(stack, circuit.gate(b), pdim, control);
    for (int s = b + 1; s < blocks; ++s) {
      sim::apply_processing(stack, ws[static_cast<std::size_t>(s)]);
      if (s < arch.slots) sim::apply_embedding(stack, circuit.gate(s), pdim, control);
    }
    // gram(j, j') = <v_j| P (x) I |v_j'>
    ComplexMatrix gram = ComplexMatrix::Zero(directions, directions);
    for (Index c = 0; c < pdim; ++c) {
      const StridedMap sc(stack.data() + c * ndim, ndim, directions, Eigen::OuterStride<>(ndim * pdim));
      for (Index c2 = 0; c2 < pdim; ++c2) {
        if (p(c, c2) == Complex(0.0, 0.0)) continue;
        const StridedMap sc2(stack.data() + c2 * ndim, ndim, directions, Eigen::OuterStride<>(ndim * pdim));
        gram.noalias() += p(c, c2) * (sc.adjoint() * sc2);
      }
    }
    const auto block = theta_span.subspan(static_cast<std::size_t>(b * arch.block_size()),
                                          static_cast<std::size_t>(arch.block_size()));
    for (int mu = 0; mu < arch.block_size(); ++mu) {
      const auto [wp, wm] = shifted_block_vectors(arch, block, mu);
      const double fp = wp.dot(gram * wp).real();
      const double fm = wm.dot(gram * wm).real();
      grad[static_cast<std::size_t>(b * arch.block_size() + mu)] = 0.5 * (fp - fm);
    }
  }
  return grad;
}

/// Gradient of tr(rho (P (x) I)) for a density-matrix initial state, using
/// forward states and Heisenberg-propagated observables.
std::vector<double> mixed_gradient(const CompiledCircuit& circuit, const std::vector<double>& theta,
                                   const ComplexMatrix& rho0, const ComplexMatrix& p) {
  const auto& arch = circuit.arch();
  const Index pdim = arch.processing_dim();
  const Index ndim = arch.embedding_dim();
  const Index control = arch.control_index();
  const int blocks = arch.slots + 1;
  const auto ws = block_matrices(arch, theta);

  std::vector<ComplexMatrix> before(static_cast<std::size_t>(blocks));
  ComplexMatrix rho = rho0;
  for (int b = 0; b < blocks; ++b) {
    before[static_cast<std::size_t>(b)] = rho;
    sim::conjugate_processing(rho, ws[static_cast<std::size_t>(b)], pdim);
    if (b < arch.slots) sim::conjugate_embedding(rho, circuit.gate(b), pdim, control);
  }

  const Index directions = pdim * pdim;
  std::vector<double> grad(theta.size(), 0.0);
  const std::span<const double> theta_span(theta);
  ComplexMatrix obs = kron(p, identity(ndim));  // observable right after the last block
  for (int b = blocks - 1; b >= 0; --b) {
    if (b < blocks - 1) {
      // Pull the observable back through W_{b+1} and then embedding b.
      sim::conjugate_processing(obs, ws[static_cast<std::size_t>(b + 1)].adjoint(), pdim);
      sim::conjugate_embedding(obs, circuit.gate(b), pdim, control, /*adjoint=*/true);
    }
    const ComplexMatrix& r = before[static_cast<std::size_t>(b)];
    // kernel(j, j') with j = (a, c), j' = (a', c'): tr(rho_{c c'} O_{a' a});
    // f(W) = sum_{j,j'} W_j conj(W_j') kernel(j, j').
    ComplexMatrix kernel(directions, directions);
    for (Index a = 0; a < pdim; ++a) {
      for (Index c = 0; c < pdim; ++c) {
        for (Index a2 = 0; a2 < pdim; ++a2) {
          for (Index c2 = 0; c2 < pdim; ++c2) {
            const auto rb = r.block(c * ndim, c2 * ndim, ndim, ndim);
            const auto ob = obs.block(a2 * ndim, a * ndim, ndim, ndim);
            kernel(a * pdim + c, a2 * pdim + c2) = (rb.cwiseProduct(ob.transpose())).sum();
          }
        }
      }
    }
    const auto block = theta_span.subspan(static_cast<std::size_t>(b * arch.block_size()),
                                          static_cast<std::size_t>(arch.block_size()));
    for (int mu = 0; mu < arch.block_size(); ++mu) {
      const auto [wp, wm] = shifted_block_vectors(arch, block, mu);
      const double fp = (wp.transpose() * kernel * wp.conjugate())(0, 0).real();
      const double fm = (wm.transpose() * kernel * wm.conjugate())(0, 0).real();
      grad[static_cast<std::size_t>(b * arch.block_size() + mu)] = 0.5 * (fp - fm);
    }
  }
  return grad;
}

ParameterVector shifted(const ParameterVector& params, ParamIndex index, double delta, int slots) {
  ParameterVector out = params;
  if (index.kind == ParamIndex::Kind::kTheta) {
    out.theta[static_cast<std::size_t>(index.index)] += delta;
  } else {
    if (!out.phi) out.phi = std::vector<double>(static_cast<std::size_t>(slots), 1.0);
    (*out.phi)[static_cast<std::size_t>(index.index)] += delta;
  }
  return out;
}

void check_index(const LossContext& loss, const ParameterVector& params, ParamIndex index) {
  const auto& arch = loss.arch();
  params.validate(arch);
  const int bound = index.kind == ParamIndex::Kind::kTheta ? arch.theta_count() : arch.slots;
  if (index.index < 0 || index.index >= bound) {
    throw Error("grad", "parameter index " + std::to_string(index.index) + " out of range [0, " +
                            std::to_string(bound) + ")");
  }
}

}  // namespace

LossContext::LossContext(QrennArchitecture arch, QuantumState rho0, std::vector<LabeledSample> batch, LossKind kind,
                         std::optional<std::vector<double>> phi, int threads)
    : arch_(std::move(arch)),
      rho0_(std::move(rho0)),
      batch_(std::move(batch)),
      kind_(kind),
      compiled_phi_(std::move(phi)),
      threads_(threads) {
  arch_.validate();
  if (batch_.empty()) throw Error("grad", "loss context needs a non-empty batch");
  if (rho0_.qubits() != arch_.qubits()) throw Error("grad", "initial state does not match the architecture");
  ParameterVector probe = ParameterVector::zeros(arch_);
  probe.phi = compiled_phi_;
  compiled_.reserve(batch_.size());
  for (const auto& sample : batch_) {
    if (sample.povm.dim() != arch_.processing_dim()) {
      throw Error("grad", "sample observable must act on the 2^m processing register");
    }
    compiled_.emplace_back(arch_, sample.data, probe);
  }
}

const std::vector<CompiledCircuit>& LossContext::circuits(const ParameterVector& params,
                                                          std::vector<CompiledCircuit>& scratch) const {
  bool same = true;
  for (int t = 0; t < arch_.slots && same; ++t) {
    const double compiled = compiled_phi_ ? (*compiled_phi_)[static_cast<std::size_t>(t)] : 1.0;
    same = params.phi_at(t) == compiled;
  }
  if (same) return compiled_;
  scratch.clear();
  scratch.reserve(batch_.size());
  for (const auto& sample : batch_) scratch.emplace_back(arch_, sample.data, params);
  return scratch;
}

std::vector<double> LossContext::sample_values(const ParameterVector& params) const {
  params.validate(arch_);
  std::vector<CompiledCircuit> scratch;
  const auto& circs = circuits(params, scratch);
  std::vector<double> values(batch_.size());
  parallel_for(batch_.size(), threads_, [&](std::size_t q) {
    values[q] = processing_expectation(circs[q], params.theta, rho0_, batch_[q].povm.matrix());
  });
  return values;
}

double LossContext::combine(const std::vector<double>& values) const {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  return kind_ == LossKind::kTotalLoss ? 1.0 - mean : mean;
}

double LossContext::operator()(const ParameterVector& params) const { return combine(sample_values(params)); }

std::vector<double> LossContext::sample_theta_gradient(std::size_t sample, const ParameterVector& params) const {
  params.validate(arch_);
  std::vector<CompiledCircuit> scratch;
  const auto& circs = circuits(params, scratch);
  const auto& circuit = circs.at(sample);
  const ComplexMatrix& p = batch_[sample].povm.matrix();
  if (rho0_.is_pure()) return pure_gradient(circuit, params.theta, rho0_.amplitudes(), p);
  return mixed_gradient(circuit, params.theta, rho0_.density(), p);
}

std::vector<double> LossContext::theta_gradient(const ParameterVector& params) const {
  params.validate(arch_);
  std::vector<CompiledCircuit> scratch;
  const auto& circs = circuits(params, scratch);
  std::vector<std::vector<double>> per_sample(batch_.size());
  parallel_for(batch_.size(), threads_, [&](std::size_t q) {
    const ComplexMatrix& p = batch_[q].povm.matrix();
    per_sample[q] = rho0_.is_pure() ? pure_gradient(circs[q], params.theta, rho0_.amplitudes(), p)
                                    : mixed_gradient(circs[q], params.theta, rho0_.density(), p);
  });
  const double scale = (kind_ == LossKind::kTotalLoss ? -1.0 : 1.0) / static_cast<double>(batch_.size());
  std::vector<double> grad(params.theta.size(), 0.0);
  for (const auto& g : per_sample) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  for (double& g : grad) g *= scale;
  return grad;
}

double param_shift(const LossContext& loss, const ParameterVector& params, ParamIndex index) {
  if (index.kind != ParamIndex::Kind::kTheta) {
    throw Error("grad", "the shift rule applies to rotation angles only; use central_diff for phi");
  }
  check_index(loss, params, index);
  const int slots = loss.arch().slots;
  return 0.5 * (loss(shifted(params, index, kHalfPi, slots)) - loss(shifted(params, index, -kHalfPi, slots)));
}

double central_diff(const LossContext& loss, const ParameterVector& params, ParamIndex index, double step) {
  if (!(step > 0.0)) throw Error("grad", "finite-difference step must be positive");
  check_index(loss, params, index);
  const int slots = loss.arch().slots;
  return (loss(shifted(params, index, step, slots)) - loss(shifted(params, index, -step, slots))) / (2.0 * step);
}

std::vector<double> full_gradient(const LossContext& loss, const ParameterVector& params) {
  std::vector<double> grad = loss.theta_gradient(params);
  if (params.phi) {
    for (int t = 0; t < loss.arch().slots; ++t) {
      grad.push_back(central_diff(loss, params, ParamIndex::phi(t), kPhiDiffStep));
    }
  }
  return grad;
}

}  // namespace qrenn
