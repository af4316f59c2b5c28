#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qrenn {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;

/// Dense complex Hermitian matrix. Construction checks max|A - A^dagger| <=
/// 1e-12 and stores the exactly symmetrised matrix.
class HermitianOperator {
 public:
  explicit HermitianOperator(const ComplexMatrix& matrix);

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

/// Dense unitary; construction checks max|U^dagger U - I| <= 1e-10.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(ComplexMatrix matrix);

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

struct EigenDecomposition {
  RealVector values;  // ascending
  UnitaryOperator vectors;
};

ComplexMatrix identity(Eigen::Index dim);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors);

/// ab - ba.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Hilbert-Schmidt inner product tr(a^dagger b).
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);
double frobenius_norm(const ComplexMatrix& a);

/// Largest singular value.
double spectral_norm(const ComplexMatrix& a);

/// Max entrywise |a - a^dagger|.
double hermiticity_error(const ComplexMatrix& a);

EigenDecomposition eigh(const HermitianOperator& h);

/// e^{i * scale * h}, computed from the eigendecomposition of h.
UnitaryOperator expm_i(const HermitianOperator& h, double scale = 1.0);

/// Principal logarithm: returns H with u = e^{iH}, eigenphases in (-pi, pi].
HermitianOperator logm_unitary(const UnitaryOperator& u);

/// Returns the HS-normalised residual of `candidate` after removing its
/// components along `basis` (assumed orthonormal), or nothing if that
/// residual has HS norm <= tol.
std::optional<ComplexMatrix> gram_schmidt_extend(std::span<const ComplexMatrix> basis,
                                                 const ComplexMatrix& candidate, double tol);

namespace pauli {

ComplexMatrix i2();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();

/// Single-qubit Pauli by letter (I, X, Y, Z).
ComplexMatrix from_char(char c);

/// Tensor product of a Pauli word such as "XZI"; leftmost letter acts on the
/// most significant qubit.
ComplexMatrix word(std::string_view letters);

/// Operator acting as `op` on qubit `target` of an `qubits`-qubit register.
ComplexMatrix on_qubit(const ComplexMatrix& op, int target, int qubits);

/// All 4^m - 1 non-identity Pauli words on m qubits, in base-4 order.
std::vector<std::string> nontrivial_words(int m);

}  // namespace pauli

}  // namespace qrenn
