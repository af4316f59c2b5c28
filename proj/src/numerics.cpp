#include "qrenn/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "qrenn/error.hpp"

namespace qrenn {

namespace {

void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw Error("numerics", std::string(what) + ": matrix must be square and non-empty");
  }
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  require_square(a, what);
  require_square(b, what);
  if (a.rows() != b.rows()) {
    throw Error("numerics", std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
  }
}

}  // namespace

HermitianOperator::HermitianOperator(const ComplexMatrix& matrix) {
  require_square(matrix, "HermitianOperator");
  const double err = hermiticity_error(matrix);
  if (!(err <= kHermitianTol)) {
    throw Error("numerics", "matrix is not Hermitian (max |A - A^dagger| = " + std::to_string(err) + ")");
  }
  matrix_ = 0.5 * (matrix + matrix.adjoint());
}

UnitaryOperator::UnitaryOperator(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  require_square(matrix_, "UnitaryOperator");
  const ComplexMatrix defect = matrix_.adjoint() * matrix_ - identity(matrix_.rows());
  const double err = defect.cwiseAbs().maxCoeff();
  if (!(err <= kUnitaryTol)) {
    throw Error("numerics", "matrix is not unitary (max |U^dagger U - I| = " + std::to_string(err) + ")");
  }
}

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "hs_inner");
  // tr(a^dagger b) = sum_ij conj(a_ij) b_ij
  return (a.conjugate().cwiseProduct(b)).sum();
}

double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

double spectral_norm(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

double hermiticity_error(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition eigh(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error("numerics", "Hermitian eigensolver did not converge");
  }
  if (!solver.eigenvalues().allFinite() || !solver.eigenvectors().allFinite()) {
    throw Error("numerics", "Hermitian eigensolver produced non-finite output");
  }
  return EigenDecomposition{solver.eigenvalues(), UnitaryOperator(solver.eigenvectors())};
}

UnitaryOperator expm_i(const HermitianOperator& h, double scale) {
  const auto eig = eigh(h);
  const ComplexVector phases =
      (Complex(0.0, scale) * eig.values.cast<Complex>()).array().exp().matrix();
  const ComplexMatrix& v = eig.vectors.matrix();
  return UnitaryOperator(v * phases.asDiagonal() * v.adjoint());
}

HermitianOperator logm_unitary(const UnitaryOperator& u) {
  // A unitary is normal, so its complex Schur form is diagonal.
  Eigen::ComplexSchur<ComplexMatrix> schur(u.matrix());
  if (schur.info() != Eigen::Success) {
    throw Error("numerics", "Schur decomposition did not converge");
  }
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& q = schur.matrixU();
  const Eigen::Index d = t.rows();
  RealVector angles(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double a = std::arg(t(k, k));
    if (a <= -std::numbers::pi) a = std::numbers::pi;
    angles(k) = a;
  }
  ComplexMatrix h = q * angles.cast<Complex>().asDiagonal() * q.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();
  return HermitianOperator(h);
}

std::optional<ComplexMatrix> gram_schmidt_extend(std::span<const ComplexMatrix> basis,
                                                 const ComplexMatrix& candidate, double tol) {
  ComplexMatrix residual = candidate;
  // Two passes: classical Gram-Schmidt loses orthogonality in one.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) residual -= hs_inner(b, residual) * b;
  }
  const double norm = frobenius_norm(residual);
  if (norm <= tol) return std::nullopt;
  return ComplexMatrix(residual / norm);
}

namespace pauli {

ComplexMatrix i2() { return identity(2); }

ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix from_char(char c) {
  switch (c) {
    case 'I': case 'i': return i2();
    case 'X': case 'x': return x();
    case 'Y': case 'y': return y();
    case 'Z': case 'z': return z();
    default: throw Error("numerics", std::string("unknown Pauli letter '") + c + "'");
  }
}

ComplexMatrix word(std::string_view letters) {
  if (letters.empty()) throw Error("numerics", "empty Pauli word");
  ComplexMatrix out = from_char(letters.front());
  for (std::size_t k = 1; k < letters.size(); ++k) out = kron(out, from_char(letters[k]));
  return out;
}

ComplexMatrix on_qubit(const ComplexMatrix& op, int target, int qubits) {
  if (target < 0 || target >= qubits) throw Error("numerics", "qubit index out of range");
  const Eigen::Index left = Eigen::Index{1} << target;
  const Eigen::Index right = Eigen::Index{1} << (qubits - target - 1);
  return kron(kron(identity(left), op), identity(right));
}

std::vector<std::string> nontrivial_words(int m) {
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  std::vector<std::string> out;
  const long total = 1L << (2 * m);
  out.reserve(static_cast<std::size_t>(total - 1));
  for (long code = 1; code < total; ++code) {
    std::string w(static_cast<std::size_t>(m), 'I');
    long c = code;
    for (int q = m - 1; q >= 0; --q) {
      w[static_cast<std::size_t>(q)] = kLetters[c & 3];
      c >>= 2;
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace pauli

}  // namespace qrenn
