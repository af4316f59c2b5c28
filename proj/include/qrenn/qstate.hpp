#pragma once

#include <string_view>
#include <variant>

#include "qrenn/numerics.hpp"

namespace qrenn {

/// Pure statevector or density matrix on `qubits` qubits. Qubit ordering is
/// big-endian: the leftmost bit of a bitstring is the most significant index,
/// so in a joint (m+n)-qubit register the processing qubits come first.
class QuantumState {
 public:
  /// Validates sum |amplitude|^2 = 1 within 1e-10.
  static QuantumState pure(ComplexVector amplitudes);
  /// Validates Hermiticity (1e-12), unit trace (1e-10) and min eigenvalue
  /// >= -1e-10.
  static QuantumState mixed(const ComplexMatrix& rho);

  int qubits() const { return qubits_; }
  Eigen::Index dim() const { return Eigen::Index{1} << qubits_; }
  bool is_pure() const { return std::holds_alternative<ComplexVector>(rep_); }

  /// Only valid for pure states.
  const ComplexVector& amplitudes() const;
  /// Only valid for mixed states.
  const ComplexMatrix& density() const;
  /// Density matrix for either representation.
  ComplexMatrix to_density() const;

  double trace() const;

 private:
  friend class StateBuilder;
  QuantumState(int qubits, std::variant<ComplexVector, ComplexMatrix> rep)
      : qubits_(qubits), rep_(std::move(rep)) {}

  int qubits_;
  std::variant<ComplexVector, ComplexMatrix> rep_;
};

/// Wraps the output of a unitary evolution. Only the cheap norm/trace checks
/// are repeated; positivity is preserved by unitary conjugation.
class StateBuilder {
 public:
  static QuantumState evolved_pure(ComplexVector amplitudes);
  static QuantumState evolved_mixed(ComplexMatrix rho);
};

QuantumState basis_state(int qubits, std::string_view bits);
QuantumState plus_state(int qubits);
QuantumState minus_state(int qubits);
/// p |+...+><+...+| + (1 - p) I / 2^qubits.
QuantumState mixed_probe(double p, int qubits);

QuantumState tensor(const QuantumState& a, const QuantumState& b);
QuantumState apply_unitary(const QuantumState& state, const UnitaryOperator& u);
/// tr(rho o); the imaginary residue must be <= 1e-10 and is discarded.
double expectation(const QuantumState& state, const HermitianOperator& o);

}  // namespace qrenn
