#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrenn/numerics.hpp"
#include "qrenn/qstate.hpp"

namespace qrenn {

/// Circuit shape: m processing qubits, n embedding qubits, `slots` data
/// embeddings, `layers` R_Y/R_Z/CZ layers per processing block. The
/// embedding fires when the processing register is in |control>.
struct QrennArchitecture {
  int m = 1;
  int n = 1;
  int slots = 1;
  int layers = 1;
  std::string control;  // empty means all ones

  void validate() const;
  std::string control_bits() const;
  Eigen::Index control_index() const;
  Eigen::Index processing_dim() const { return Eigen::Index{1} << m; }
  Eigen::Index embedding_dim() const { return Eigen::Index{1} << n; }
  int qubits() const { return m + n; }
  /// 2 m L angles per block.
  int block_size() const { return 2 * m * layers; }
  /// (slots + 1) blocks; the trailing block is kept explicit.
  int theta_count() const { return (slots + 1) * block_size(); }
};

/// theta has (slots+1)*2*m*L angles laid out block by block; within a block,
/// layer by layer, each layer holding m R_Y angles followed by m R_Z angles.
/// phi holds one data weight per slot and defaults to 1 when absent.
struct ParameterVector {
  std::vector<double> theta;
  std::optional<std::vector<double>> phi;

  static ParameterVector zeros(const QrennArchitecture& arch);
  void validate(const QrennArchitecture& arch) const;
  double phi_at(int slot) const { return phi ? (*phi)[static_cast<std::size_t>(slot)] : 1.0; }
  std::span<const double> block(const QrennArchitecture& arch, int b) const;
};

/// Eigendecomposition of one embedding generator, shared by every slot that
/// embeds the same operator.
struct GeneratorSpectrum {
  explicit GeneratorSpectrum(HermitianOperator generator);

  HermitianOperator h;
  RealVector values;
  ComplexMatrix vectors;
};

/// Per-slot data generators H_1(x) ... H_T(x) on the embedding register.
class EmbeddedData {
 public:
  explicit EmbeddedData(std::vector<HermitianOperator> generators);
  /// The same generator at every slot (one eigendecomposition).
  static EmbeddedData repeated(const HermitianOperator& h, int slots);

  int slots() const { return static_cast<int>(slots_.size()); }
  Eigen::Index dim() const { return slots_.front()->h.dim(); }
  const HermitianOperator& generator(int t) const { return slot(t).h; }
  const GeneratorSpectrum& spectrum(int t) const { return slot(t); }
  const std::shared_ptr<const GeneratorSpectrum>& spectrum_ptr(int t) const;
  std::vector<HermitianOperator> distinct_generators() const;

  /// max_{s,t} ||[H_s, H_t]||_F / (||H_s||_F ||H_t||_F).
  double max_relative_commutator() const;
  /// Throws unless every pair commutes within 1e-9 (relative).
  void require_commuting() const;

  /// Adds a global perturbation (delta * H_0 on the full m+n register) to
  /// every embedding gate.
  EmbeddedData with_crosstalk(const HermitianOperator& delta_h0) const;
  const HermitianOperator* crosstalk() const { return crosstalk_.get(); }

 private:
  const GeneratorSpectrum& slot(int t) const;

  std::vector<std::shared_ptr<const GeneratorSpectrum>> slots_;
  std::shared_ptr<const HermitianOperator> crosstalk_;
};

/// |c><c| (x) h on 2^(m+n) dimensions.
HermitianOperator control_embed_generator(const HermitianOperator& h, int m, std::string_view control);

/// R_P(theta) = exp(-i theta P / 2).
ComplexMatrix rotation(char pauli, double theta);

/// Product of L layers: R_Y on every qubit, R_Z on every qubit, then CZ on
/// (1,2), ..., (m-1,m).
UnitaryOperator processing_block(int m, int layers, std::span<const double> theta_block);
/// Unchecked variant used on the simulation hot path.
ComplexMatrix processing_block_matrix(int m, int layers, std::span<const double> theta_block);

/// The unitary applied at one slot. Either a block acting on the embedding
/// register when the control fires, or (with crosstalk) a full-register
/// unitary.
struct EmbeddingGate {
  ComplexMatrix block;
  ComplexMatrix full;  // empty unless crosstalk is present
  bool is_full() const { return full.size() > 0; }
};

/// Embedding gates for one sample, prepared for a fixed phi.
class CompiledCircuit {
 public:
  CompiledCircuit(const QrennArchitecture& arch, const EmbeddedData& data, const ParameterVector& params);

  const QrennArchitecture& arch() const { return arch_; }
  const EmbeddingGate& gate(int t) const { return *gates_[static_cast<std::size_t>(t)]; }

 private:
  QrennArchitecture arch_;
  std::vector<std::shared_ptr<const EmbeddingGate>> gates_;
};

namespace sim {

// A batch of K pure states is stored as an (2^n) x (2^m K) matrix: state k
// occupies columns [k 2^m, (k+1) 2^m) and amplitude (a, x) sits at row x of
// column k 2^m + a. A density matrix rho (D x D) is the batch of its D
// columns, so left multiplication uses the same kernels.

void apply_processing(ComplexMatrix& batch, const ComplexMatrix& w);
void apply_embedding(ComplexMatrix& batch, const EmbeddingGate& gate, Eigen::Index pdim,
                     Eigen::Index control, bool adjoint = false);

/// rho -> (W (x) I) rho (W (x) I)^dagger.
void conjugate_processing(ComplexMatrix& rho, const ComplexMatrix& w, Eigen::Index pdim);
/// rho -> G rho G^dagger for an embedding gate (or G^dagger rho G if adjoint).
void conjugate_embedding(ComplexMatrix& rho, const EmbeddingGate& gate, Eigen::Index pdim,
                         Eigen::Index control, bool adjoint = false);

/// <psi_k| P (x) I |psi_k> for state k of a pure batch.
double processing_expectation_pure(const ComplexMatrix& batch, Eigen::Index k, const ComplexMatrix& p);
/// tr(rho (P (x) I)).
double processing_expectation_mixed(const ComplexMatrix& rho, const ComplexMatrix& p);

/// Reshapes a statevector into a one-state batch and back.
ComplexMatrix to_batch(const ComplexVector& psi, Eigen::Index pdim);
ComplexVector from_batch(const ComplexMatrix& batch);

}  // namespace sim

/// Runs the circuit: for t = 1..T apply W(theta_t) (x) I then the slot
/// embedding; finally W(theta_{T+1}) (x) I.
QuantumState run_circuit(const CompiledCircuit& circuit, std::span<const double> theta,
                         const QuantumState& rho0);
/// <P (x) I> on the output, P acting on the processing register.
double processing_expectation(const CompiledCircuit& circuit, std::span<const double> theta,
                              const QuantumState& rho0, const ComplexMatrix& p);

QuantumState forward(const QrennArchitecture& arch, const ParameterVector& params,
                     const EmbeddedData& data, const QuantumState& rho0);

/// tr(rho M) clamped to [0, 1]; values outside [-1e-10, 1 + 1e-10] are an
/// error (M is not a POVM element or the state is invalid).
double trace_loss(const QuantumState& state, const HermitianOperator& povm_element);

/// One training sample. `povm` acts on the processing register only; the
/// full-register labelling operator is povm (x) I.
struct LabeledSample {
  EmbeddedData data;
  int label = 0;
  HermitianOperator povm;
};

/// 1 - (1/Q) sum_q tr(U rho0 U^dagger (M_{y_q} (x) I)).
double total_loss(const QrennArchitecture& arch, const ParameterVector& params,
                  std::span<const LabeledSample> batch, const QuantumState& rho0);

/// Z^{(x) m} (x) I expectation of the output.
double decision_value(const QrennArchitecture& arch, const ParameterVector& params,
                      const EmbeddedData& data, const QuantumState& rho0);
/// 0 if the decision value is negative, 1 otherwise.
int predict_from_value(double decision);
int predict(const QrennArchitecture& arch, const ParameterVector& params, const EmbeddedData& data,
            const QuantumState& rho0);

/// 1 - (1/Q) sum |y - y~|.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Z^{(x) m} on the processing register.
ComplexMatrix parity_observable(int m);

}  // namespace qrenn
