#include "qrenn/qstate.hpp"

#include <bit>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qrenn/error.hpp"

namespace qrenn {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kPositivityTol = 1e-10;
constexpr double kImagTol = 1e-10;

int qubits_for_dim(Eigen::Index dim) {
  if (dim < 2 || !std::has_single_bit(static_cast<unsigned long>(dim))) {
    throw Error("qstate", "state dimension must be a power of two >= 2, got " + std::to_string(dim));
  }
  return std::countr_zero(static_cast<unsigned long>(dim));
}

void check_norm(const ComplexVector& amplitudes) {
  const double norm2 = amplitudes.squaredNorm();
  if (!(std::abs(norm2 - 1.0) <= kNormTol)) {
    throw Error("qstate", "statevector is not normalised (|psi|^2 = " + std::to_string(norm2) + ")");
  }
}

void check_trace(const ComplexMatrix& rho) {
  const Complex tr = rho.trace();
  if (!(std::abs(tr - Complex(1.0, 0.0)) <= kNormTol)) {
    throw Error("qstate", "density matrix trace is not 1 (tr = " + std::to_string(tr.real()) + ")");
  }
}

}  // namespace

QuantumState QuantumState::pure(ComplexVector amplitudes) {
  const int q = qubits_for_dim(amplitudes.size());
  check_norm(amplitudes);
  return QuantumState(q, std::move(amplitudes));
}

QuantumState QuantumState::mixed(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) throw Error("qstate", "density matrix must be square");
  const int q = qubits_for_dim(rho.rows());
  const HermitianOperator h(rho);
  check_trace(h.matrix());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("qstate", "eigensolver failed on density matrix");
  if (solver.eigenvalues().minCoeff() < -kPositivityTol) {
    throw Error("qstate", "density matrix is not positive semidefinite");
  }
  return QuantumState(q, h.matrix());
}

const ComplexVector& QuantumState::amplitudes() const {
  if (!is_pure()) throw Error("qstate", "amplitudes() called on a mixed state");
  return std::get<ComplexVector>(rep_);
}

const ComplexMatrix& QuantumState::density() const {
  if (is_pure()) throw Error("qstate", "density() called on a pure state");
  return std::get<ComplexMatrix>(rep_);
}

ComplexMatrix QuantumState::to_density() const {
  if (is_pure()) {
    const auto& psi = std::get<ComplexVector>(rep_);
    return psi * psi.adjoint();
  }
  return std::get<ComplexMatrix>(rep_);
}

double QuantumState::trace() const {
  if (is_pure()) return std::get<ComplexVector>(rep_).squaredNorm();
  return std::get<ComplexMatrix>(rep_).trace().real();
}

QuantumState StateBuilder::evolved_pure(ComplexVector amplitudes) {
  const int q = qubits_for_dim(amplitudes.size());
  check_norm(amplitudes);
  return QuantumState(q, std::move(amplitudes));
}

QuantumState StateBuilder::evolved_mixed(ComplexMatrix rho) {
  if (rho.rows() != rho.cols()) throw Error("qstate", "density matrix must be square");
  const int q = qubits_for_dim(rho.rows());
  check_trace(rho);
  if (!(hermiticity_error(rho) <= 1e-9)) throw Error("qstate", "evolved density matrix lost Hermiticity");
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return QuantumState(q, std::move(rho));
}

QuantumState basis_state(int qubits, std::string_view bits) {
  if (qubits < 1) throw Error("qstate", "qubit count must be >= 1");
  if (static_cast<int>(bits.size()) != qubits) {
    throw Error("qstate", "bitstring length " + std::to_string(bits.size()) + " does not match " +
                              std::to_string(qubits) + " qubits");
  }
  Eigen::Index index = 0;
  for (char b : bits) {
    if (b != '0' && b != '1') throw Error("qstate", "bitstring must contain only 0/1");
    index = (index << 1) | (b == '1' ? 1 : 0);
  }
  ComplexVector psi = ComplexVector::Zero(Eigen::Index{1} << qubits);
  psi(index) = 1.0;
  return QuantumState::pure(std::move(psi));
}

QuantumState plus_state(int qubits) {
  if (qubits < 1) throw Error("qstate", "qubit count must be >= 1");
  const Eigen::Index d = Eigen::Index{1} << qubits;
  return QuantumState::pure(ComplexVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d))));
}

QuantumState minus_state(int qubits) {
  if (qubits < 1) throw Error("qstate", "qubit count must be >= 1");
  const Eigen::Index d = Eigen::Index{1} << qubits;
  ComplexVector psi(d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    psi(k) = (std::popcount(static_cast<unsigned long>(k)) % 2 == 0) ? amp : -amp;
  }
  return QuantumState::pure(std::move(psi));
}

QuantumState mixed_probe(double p, int qubits) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("qstate", "mixing weight p must lie in [0, 1]");
  const auto plus = plus_state(qubits);
  const Eigen::Index d = plus.dim();
  const ComplexMatrix rho =
      p * plus.to_density() + ((1.0 - p) / static_cast<double>(d)) * identity(d);
  return QuantumState::mixed(rho);
}

QuantumState tensor(const QuantumState& a, const QuantumState& b) {
  if (a.is_pure() && b.is_pure()) {
    const ComplexMatrix k = kron(a.amplitudes(), b.amplitudes());
    return StateBuilder::evolved_pure(k.col(0));
  }
  return StateBuilder::evolved_mixed(kron(a.to_density(), b.to_density()));
}

QuantumState apply_unitary(const QuantumState& state, const UnitaryOperator& u) {
  if (u.dim() != state.dim()) {
    throw Error("qstate", "unitary dimension " + std::to_string(u.dim()) +
                              " does not match state dimension " + std::to_string(state.dim()));
  }
  if (state.is_pure()) return StateBuilder::evolved_pure(u.matrix() * state.amplitudes());
  return StateBuilder::evolved_mixed(u.matrix() * state.density() * u.matrix().adjoint());
}

double expectation(const QuantumState& state, const HermitianOperator& o) {
  if (o.dim() != state.dim()) {
    throw Error("qstate", "observable dimension " + std::to_string(o.dim()) +
                              " does not match state dimension " + std::to_string(state.dim()));
  }
  Complex value;
  if (state.is_pure()) {
    const auto& psi = state.amplitudes();
    value = psi.dot(o.matrix() * psi);
  } else {
    // tr(rho o) = sum_ij rho_ij o_ji
    value = (state.density().cwiseProduct(o.matrix().transpose())).sum();
  }
  if (std::abs(value.imag()) > kImagTol * std::max(1.0, std::abs(value.real()))) {
    throw Error("qstate", "expectation has non-negligible imaginary part");
  }
  return value.real();
}

}  // namespace qrenn
