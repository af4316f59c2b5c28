#include "qrenn/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qrenn/error.hpp"

namespace qrenn {

namespace {

using Index = Eigen::Index;
using Map = Eigen::Map<ComplexMatrix>;
using StridedMap = Eigen::Map<ComplexMatrix, 0, Eigen::OuterStride<>>;

constexpr double kCommuteTol = 1e-9;
constexpr double kLossRangeTol = 1e-10;

void left_processing(Complex* data, Index ndim, Index pdim, Index count, const ComplexMatrix& wt) {
  for (Index k = 0; k < count; ++k) {
    Map blk(data + k * ndim * pdim, ndim, pdim);
    blk = blk * wt;
  }
}

void left_embedding(Complex* data, Index ndim, Index pdim, Index count, const EmbeddingGate& gate,
                    Index control, bool adjoint) {
  if (gate.is_full()) {
    Map all(data, ndim * pdim, count);
    if (adjoint) {
      all = gate.full.adjoint() * all;
    } else {
      all = gate.full * all;
    }
    return;
  }
  StridedMap cols(data + control * ndim, ndim, count, Eigen::OuterStride<>(ndim * pdim));
  if (adjoint) {
    cols = gate.block.adjoint() * cols;
  } else {
    cols = gate.block * cols;
  }
}

void check_state_dims(const QrennArchitecture& arch, const QuantumState& rho0) {
  if (rho0.qubits() != arch.qubits()) {
    throw Error("model", "initial state has " + std::to_string(rho0.qubits()) + " qubits, circuit needs " +
                             std::to_string(arch.qubits()));
  }
}

void check_theta(const QrennArchitecture& arch, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != arch.theta_count()) {
    throw Error("model", "theta has " + std::to_string(theta.size()) + " entries, expected " +
                             std::to_string(arch.theta_count()));
  }
}

}  // namespace

void QrennArchitecture::validate() const {
  if (m < 1 || n < 1 || slots < 1 || layers < 1) {
    throw Error("model", "architecture requires m, n, slots, layers >= 1");
  }
  if (m + n > 14) throw Error("model", "registers above 14 qubits are not supported");
  if (!control.empty()) {
    if (static_cast<int>(control.size()) != m) {
      throw Error("model", "control string length " + std::to_string(control.size()) + " != m = " +
                               std::to_string(m));
    }
    for (char c : control) {
      if (c != '0' && c != '1') throw Error("model", "control string must contain only 0/1");
    }
  }
}

std::string QrennArchitecture::control_bits() const {
  return control.empty() ? std::string(static_cast<std::size_t>(m), '1') : control;
}

Eigen::Index QrennArchitecture::control_index() const {
  Index idx = 0;
  for (char c : control_bits()) idx = (idx << 1) | (c == '1' ? 1 : 0);
  return idx;
}

ParameterVector ParameterVector::zeros(const QrennArchitecture& arch) {
  ParameterVector p;
  p.theta.assign(static_cast<std::size_t>(arch.theta_count()), 0.0);
  return p;
}

void ParameterVector::validate(const QrennArchitecture& arch) const {
  check_theta(arch, theta);
  if (phi && static_cast<int>(phi->size()) != arch.slots) {
    throw Error("model", "phi has " + std::to_string(phi->size()) + " entries, expected " +
                             std::to_string(arch.slots));
  }
}

std::span<const double> ParameterVector::block(const QrennArchitecture& arch, int b) const {
  const auto size = static_cast<std::size_t>(arch.block_size());
  return std::span<const double>(theta).subspan(static_cast<std::size_t>(b) * size, size);
}

GeneratorSpectrum::GeneratorSpectrum(HermitianOperator generator) : h(std::move(generator)) {
  auto eig = eigh(h);
  values = std::move(eig.values);
  vectors = eig.vectors.matrix();
}

EmbeddedData::EmbeddedData(std::vector<HermitianOperator> generators) {
  if (generators.empty()) throw Error("model", "embedded data needs at least one slot generator");
  const Index d = generators.front().dim();
  if (d < 2 || !std::has_single_bit(static_cast<unsigned long>(d))) {
    throw Error("model", "generator dimension must be a power of two");
  }
  slots_.reserve(generators.size());
  for (auto& g : generators) {
    if (g.dim() != d) throw Error("model", "all slot generators must share one dimension");
    slots_.push_back(std::make_shared<const GeneratorSpectrum>(std::move(g)));
  }
}

EmbeddedData EmbeddedData::repeated(const HermitianOperator& h, int slots) {
  if (slots < 1) throw Error("model", "slot count must be >= 1");
  EmbeddedData out({h});
  out.slots_.resize(static_cast<std::size_t>(slots), out.slots_.front());
  return out;
}

const GeneratorSpectrum& EmbeddedData::slot(int t) const { return *spectrum_ptr(t); }

const std::shared_ptr<const GeneratorSpectrum>& EmbeddedData::spectrum_ptr(int t) const {
  if (t < 0 || t >= slots()) throw Error("model", "slot index out of range");
  return slots_[static_cast<std::size_t>(t)];
}

std::vector<HermitianOperator> EmbeddedData::distinct_generators() const {
  std::vector<HermitianOperator> out;
  std::vector<const GeneratorSpectrum*> seen;
  for (const auto& s : slots_) {
    if (std::find(seen.begin(), seen.end(), s.get()) != seen.end()) continue;
    seen.push_back(s.get());
    out.push_back(s->h);
  }
  return out;
}

double EmbeddedData::max_relative_commutator() const {
  const auto gens = distinct_generators();
  double worst = 0.0;
  for (std::size_t s = 0; s < gens.size(); ++s) {
    for (std::size_t t = s + 1; t < gens.size(); ++t) {
      const double scale = frobenius_norm(gens[s].matrix()) * frobenius_norm(gens[t].matrix());
      if (scale == 0.0) continue;
      worst = std::max(worst, frobenius_norm(commutator(gens[s].matrix(), gens[t].matrix())) / scale);
    }
  }
  return worst;
}

void EmbeddedData::require_commuting() const {
  const double c = max_relative_commutator();
  if (c > kCommuteTol) {
    throw Error("model", "slot generators do not commute (relative defect " + std::to_string(c) + ")");
  }
}

EmbeddedData EmbeddedData::with_crosstalk(const HermitianOperator& delta_h0) const {
  EmbeddedData out = *this;
  out.crosstalk_ = std::make_shared<const HermitianOperator>(delta_h0);
  return out;
}

HermitianOperator control_embed_generator(const HermitianOperator& h, int m, std::string_view control) {
  if (m < 1) throw Error("model", "m must be >= 1");
  if (static_cast<int>(control.size()) != m) {
    throw Error("model", "control length " + std::to_string(control.size()) + " != m = " + std::to_string(m));
  }
  const QuantumState c = basis_state(m, control);
  const ComplexMatrix projector = c.to_density();
  return HermitianOperator(kron(projector, h.matrix()));
}

ComplexMatrix rotation(char p, double theta) {
  return std::cos(theta / 2.0) * pauli::i2() - Complex(0.0, std::sin(theta / 2.0)) * pauli::from_char(p);
}

ComplexMatrix processing_block_matrix(int m, int layers, std::span<const double> theta_block) {
  const Index d = Index{1} << m;
  // CZ chain on neighbouring pairs is diagonal: (-1)^{sum_k b_k b_{k+1}}.
  ComplexVector cz(d);
  for (Index idx = 0; idx < d; ++idx) {
    int parity = 0;
    for (int k = 0; k + 1 < m; ++k) {
      const int bk = static_cast<int>((idx >> (m - 1 - k)) & 1);
      const int bk1 = static_cast<int>((idx >> (m - 2 - k)) & 1);
      parity ^= bk & bk1;
    }
    cz(idx) = parity ? -1.0 : 1.0;
  }
  ComplexMatrix w = identity(d);
  std::size_t pos = 0;
  for (int l = 0; l < layers; ++l) {
    ComplexMatrix ry = ComplexMatrix::Ones(1, 1);
    for (int q = 0; q < m; ++q) ry = kron(ry, rotation('Y', theta_block[pos + static_cast<std::size_t>(q)]));
    pos += static_cast<std::size_t>(m);
    ComplexMatrix rz = ComplexMatrix::Ones(1, 1);
    for (int q = 0; q < m; ++q) rz = kron(rz, rotation('Z', theta_block[pos + static_cast<std::size_t>(q)]));
    pos += static_cast<std::size_t>(m);
    w = cz.asDiagonal() * (rz * (ry * w));
  }
  return w;
}

UnitaryOperator processing_block(int m, int layers, std::span<const double> theta_block) {
  if (m < 1 || layers < 1) throw Error("model", "processing block needs m, L >= 1");
  if (static_cast<int>(theta_block.size()) != 2 * m * layers) {
    throw Error("model", "processing block expects " + std::to_string(2 * m * layers) + " angles, got " +
                             std::to_string(theta_block.size()));
  }
  return UnitaryOperator(processing_block_matrix(m, layers, theta_block));
}

CompiledCircuit::CompiledCircuit(const QrennArchitecture& arch, const EmbeddedData& data,
                                 const ParameterVector& params)
    : arch_(arch) {
  arch_.validate();
  params.validate(arch_);
  if (data.slots() != arch_.slots) {
    throw Error("model", "data has " + std::to_string(data.slots()) + " slot generators, circuit has " +
                             std::to_string(arch_.slots) + " slots");
  }
  if (data.dim() != arch_.embedding_dim()) {
    throw Error("model", "data generator dimension " + std::to_string(data.dim()) + " != 2^n = " +
                             std::to_string(arch_.embedding_dim()));
  }
  const HermitianOperator* crosstalk = data.crosstalk();
  if (crosstalk && crosstalk->dim() != arch_.processing_dim() * arch_.embedding_dim()) {
    throw Error("model", "crosstalk perturbation must act on the full register");
  }
  ComplexMatrix projector;
  if (crosstalk) projector = basis_state(arch_.m, arch_.control_bits()).to_density();

  struct Cached {
    const GeneratorSpectrum* spectrum;
    double phi;
    std::shared_ptr<const EmbeddingGate> gate;
  };
  std::vector<Cached> cache;
  gates_.reserve(static_cast<std::size_t>(arch_.slots));
  for (int t = 0; t < arch_.slots; ++t) {
    const GeneratorSpectrum* spec = data.spectrum_ptr(t).get();
    const double phi = params.phi_at(t);
    auto hit = std::find_if(cache.begin(), cache.end(),
                            [&](const Cached& c) { return c.spectrum == spec && c.phi == phi; });
    if (hit != cache.end()) {
      gates_.push_back(hit->gate);
      continue;
    }
    auto gate = std::make_shared<EmbeddingGate>();
    const ComplexVector phases = (Complex(0.0, phi) * spec->values.cast<Complex>()).array().exp().matrix();
    gate->block = spec->vectors * phases.asDiagonal() * spec->vectors.adjoint();
    if (crosstalk) {
      const ComplexMatrix generator = phi * kron(projector, spec->h.matrix()) + crosstalk->matrix();
      gate->full = expm_i(HermitianOperator(generator), 1.0).matrix();
    }
    cache.push_back({spec, phi, gate});
    gates_.push_back(std::move(gate));
  }
}

namespace sim {

void apply_processing(ComplexMatrix& batch, const ComplexMatrix& w) {
  const Index pdim = w.rows();
  const ComplexMatrix wt = w.transpose();
  left_processing(batch.data(), batch.rows(), pdim, batch.cols() / pdim, wt);
}

void apply_embedding(ComplexMatrix& batch, const EmbeddingGate& gate, Index pdim, Index control,
                     bool adjoint) {
  left_embedding(batch.data(), batch.rows(), pdim, batch.cols() / pdim, gate, control, adjoint);
}

void conjugate_processing(ComplexMatrix& rho, const ComplexMatrix& w, Index pdim) {
  const Index d = rho.rows();
  const ComplexMatrix wt = w.transpose();
  left_processing(rho.data(), d / pdim, pdim, d, wt);
  rho = rho.adjoint().eval();
  left_processing(rho.data(), d / pdim, pdim, d, wt);
  rho = rho.adjoint().eval();
}

void conjugate_embedding(ComplexMatrix& rho, const EmbeddingGate& gate, Index pdim, Index control,
                         bool adjoint) {
  const Index d = rho.rows();
  left_embedding(rho.data(), d / pdim, pdim, d, gate, control, adjoint);
  rho = rho.adjoint().eval();
  left_embedding(rho.data(), d / pdim, pdim, d, gate, control, adjoint);
  rho = rho.adjoint().eval();
}

double processing_expectation_pure(const ComplexMatrix& batch, Index k, const ComplexMatrix& p) {
  const Index pdim = p.rows();
  const auto blk = batch.middleCols(k * pdim, pdim);
  const ComplexMatrix gram = blk.adjoint() * blk;
  return (p.cwiseProduct(gram)).sum().real();
}

double processing_expectation_mixed(const ComplexMatrix& rho, const ComplexMatrix& p) {
  const Index pdim = p.rows();
  const Index ndim = rho.rows() / pdim;
  ComplexMatrix reduced(pdim, pdim);
  for (Index a = 0; a < pdim; ++a) {
    for (Index b = 0; b < pdim; ++b) {
      reduced(a, b) = rho.block(a * ndim, b * ndim, ndim, ndim).trace();
    }
  }
  return (reduced.cwiseProduct(p.transpose())).sum().real();
}

ComplexMatrix to_batch(const ComplexVector& psi, Index pdim) {
  return Eigen::Map<const ComplexMatrix>(psi.data(), psi.size() / pdim, pdim);
}

ComplexVector from_batch(const ComplexMatrix& batch) {
  return Eigen::Map<const ComplexVector>(batch.data(), batch.size());
}

}  // namespace sim

QuantumState run_circuit(const CompiledCircuit& circuit, std::span<const double> theta,
                         const QuantumState& rho0) {
  const auto& arch = circuit.arch();
  check_theta(arch, theta);
  check_state_dims(arch, rho0);
  const Index pdim = arch.processing_dim();
  const Index control = arch.control_index();
  const auto bsize = static_cast<std::size_t>(arch.block_size());
  auto block = [&](int b) {
    return processing_block_matrix(arch.m, arch.layers, theta.subspan(static_cast<std::size_t>(b) * bsize, bsize));
  };
  if (rho0.is_pure()) {
    ComplexMatrix batch = sim::to_batch(rho0.amplitudes(), pdim);
    for (int t = 0; t < arch.slots; ++t) {
      sim::apply_processing(batch, block(t));
      sim::apply_embedding(batch, circuit.gate(t), pdim, control);
    }
    sim::apply_processing(batch, block(arch.slots));
    return StateBuilder::evolved_pure(sim::from_batch(batch));
  }
  ComplexMatrix rho = rho0.density();
  for (int t = 0; t < arch.slots; ++t) {
    sim::conjugate_processing(rho, block(t), pdim);
    sim::conjugate_embedding(rho, circuit.gate(t), pdim, control);
  }
  sim::conjugate_processing(rho, block(arch.slots), pdim);
  return StateBuilder::evolved_mixed(std::move(rho));
}

double processing_expectation(const CompiledCircuit& circuit, std::span<const double> theta,
                              const QuantumState& rho0, const ComplexMatrix& p) {
  if (p.rows() != circuit.arch().processing_dim() || p.cols() != p.rows()) {
    throw Error("model", "processing observable must be 2^m x 2^m");
  }
  const QuantumState out = run_circuit(circuit, theta, rho0);
  if (out.is_pure()) {
    return sim::processing_expectation_pure(sim::to_batch(out.amplitudes(), p.rows()), 0, p);
  }
  return sim::processing_expectation_mixed(out.density(), p);
}

QuantumState forward(const QrennArchitecture& arch, const ParameterVector& params, const EmbeddedData& data,
                     const QuantumState& rho0) {
  const CompiledCircuit circuit(arch, data, params);
  return run_circuit(circuit, params.theta, rho0);
}

double trace_loss(const QuantumState& state, const HermitianOperator& povm_element) {
  const double v = expectation(state, povm_element);
  if (v < -kLossRangeTol || v > 1.0 + kLossRangeTol) {
    throw Error("model", "trace loss " + std::to_string(v) + " outside [0, 1]; operator is not a POVM element");
  }
  return std::clamp(v, 0.0, 1.0);
}

double total_loss(const QrennArchitecture& arch, const ParameterVector& params,
                  std::span<const LabeledSample> batch, const QuantumState& rho0) {
  if (batch.empty()) throw Error("model", "total loss needs a non-empty batch");
  double sum = 0.0;
  for (const auto& sample : batch) {
    const CompiledCircuit circuit(arch, sample.data, params);
    const double v = processing_expectation(circuit, params.theta, rho0, sample.povm.matrix());
    if (v < -kLossRangeTol || v > 1.0 + kLossRangeTol) {
      throw Error("model", "labelling operator expectation outside [0, 1]");
    }
    sum += std::clamp(v, 0.0, 1.0);
  }
  return 1.0 - sum / static_cast<double>(batch.size());
}

ComplexMatrix parity_observable(int m) {
  const Index d = Index{1} << m;
  ComplexMatrix z = ComplexMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) z(k, k) = (std::popcount(static_cast<unsigned long>(k)) % 2 == 0) ? 1.0 : -1.0;
  return z;
}

double decision_value(const QrennArchitecture& arch, const ParameterVector& params, const EmbeddedData& data,
                      const QuantumState& rho0) {
  const CompiledCircuit circuit(arch, data, params);
  return processing_expectation(circuit, params.theta, rho0, parity_observable(arch.m));
}

int predict_from_value(double decision) { return decision < 0.0 ? 0 : 1; }

int predict(const QrennArchitecture& arch, const ParameterVector& params, const EmbeddedData& data,
            const QuantumState& rho0) {
  return predict_from_value(decision_value(arch, params, data, rho0));
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty()) throw Error("model", "accuracy of an empty label sequence");
  if (predicted.size() != truth.size()) throw Error("model", "predicted and true label counts differ");
  double mismatches = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    mismatches += std::abs(predicted[k] - truth[k]);
  }
  return 1.0 - mismatches / static_cast<double>(predicted.size());
}

}  // namespace qrenn
