#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qrenn/model.hpp"
#include "qrenn/numerics.hpp"
#include "qrenn/qstate.hpp"

namespace qrenn {

inline constexpr double kClosureTol = 1e-7;
inline constexpr double kJointEigTol = 1e-8;
inline constexpr double kSpanTol = 1e-8;

/// HS-orthonormal skew-Hermitian basis of a real Lie algebra.
struct LieBasis {
  Eigen::Index dim_ambient = 0;
  std::vector<ComplexMatrix> elements;

  std::size_t size() const { return elements.size(); }
};

/// Real span of nested commutators of `generators`. Each commutator with a
/// generator is normalised and added if its residual exceeds tol; throws if
/// the dimension would exceed max_dim.
LieBasis lie_closure(std::span<const ComplexMatrix> generators, double tol = kClosureTol,
                     std::size_t max_dim = 4096);

/// Dimension of [g, g], the span of all pairwise commutators.
std::size_t commutator_ideal_dim(const LieBasis& basis, double tol = kClosureTol);

/// Skew-Hermitian generators of the circuit: iY_k (x) I, iZ_k (x) I,
/// iZ_k Z_{k+1} (x) I (from CZ) and i |c><c| (x) H for each distinct H.
std::vector<ComplexMatrix> qrenn_generators(int m, std::span<const HermitianOperator> data,
                                            std::string_view control = "");

/// Default closure cap r 4^m + 4^m.
std::size_t default_max_dim(int m, std::size_t r);

/// Common eigenspaces of a commuting Hermitian set, ordered by eigenvalue
/// tuple (lexicographically descending).
struct JointEigenstructure {
  std::vector<std::vector<double>> tuples;
  std::vector<HermitianOperator> projections;
  std::vector<int> multiplicities;

  std::size_t size() const { return tuples.size(); }
  Eigen::Index dim() const { return projections.front().dim(); }
  int max_multiplicity() const;
};

/// Simultaneous diagonalisation through a random N(0,1) combination of the
/// set, validated per operator and redrawn up to 5 times.
JointEigenstructure joint_eigenspaces(std::span<const HermitianOperator> set, double tol = kJointEigTol,
                                      std::uint64_t seed = 0x5eed);

/// Eigenstructure from explicit projectors (used for involutory operators).
JointEigenstructure joint_eigenstructure_from(std::vector<std::vector<double>> tuples,
                                              std::vector<HermitianOperator> projections);

struct DlaDecomposition {
  LieBasis center;
  std::vector<LieBasis> ideals;

  std::size_t r() const { return ideals.size(); }
};

/// Ideals spanned by i P_q (x) Pi_lambda / sqrt(2^m chi_lambda) and the
/// center as their orthogonal complement inside the closure.
DlaDecomposition decompose(const LieBasis& closure, int m, const JointEigenstructure& eig);

struct IdealProjection {
  ComplexMatrix projection;
  double frob_norm_sq = 0.0;
};

/// Orthogonal projection of i op onto the span of `ideal`.
IdealProjection project_onto_ideal(const HermitianOperator& op, const LieBasis& ideal);

/// Traceless part of an operator.
ComplexMatrix traceless(const ComplexMatrix& a);

/// 2^{m+1} ||Omega||_F^2 on the traceless part of omega.
double killing_norm_sq(const HermitianOperator& omega);

/// The generator -P/2 of the rotation R_P carrying theta[index], acting on
/// the m-qubit processing register.
HermitianOperator rotation_generator(const QrennArchitecture& arch, int theta_index);

/// How eigenspace multiplicities enter the variance sums. kSquared weights
/// each eigenspace by chi^2 in the closed form; kNone drops the
/// weight, which is what the projection norms give when they are evaluated
/// exactly (the two agree when every chi = 1).
enum class MultiplicityWeight { kSquared, kNone };

/// Var[d theta] = 2^{m+1} (1 - 2^-m) ||Omega||^2 ||O_m||^2 / (4^m - 1)^2
///                * sum chi^2 tr(Pi rho_n)^2
/// with traceless Omega and O_m.
double predicted_variance_theta(int m, const JointEigenstructure& eig, const QuantumState& rho_n,
                                const HermitianOperator& o_m, const HermitianOperator& omega,
                                MultiplicityWeight weight = MultiplicityWeight::kSquared);

/// Var[d phi] = 2 (2^m - 1)(1 - 2^-m) ||O_m||^2 / (4^m - 1)^2
///              * sum lambda^2 chi^2 tr(Pi rho_n)^2, single generator only.
double predicted_variance_phi(int m, const JointEigenstructure& eig, const QuantumState& rho_n,
                              const HermitianOperator& o_m,
                              MultiplicityWeight weight = MultiplicityWeight::kSquared);

/// One sample's contribution to the total-loss bound.
struct BoundTerm {
  double povm_norm_sq = 0.0;  // ||M_y||_F^2 on the processing register
  double overlap = 0.0;       // R^2 of the sample's data against rho_n
};

/// (1/Q^2) 2^{m+1} ||Omega||^2 / (4^m - 1)^2 sum_q ||M_q||^2 R_q^2.
double total_loss_variance_lower_bound(int m, std::span<const BoundTerm> terms, const HermitianOperator& omega);

/// sum_lambda tr(Pi rho_n)^2.
double eigenspace_overlap(const JointEigenstructure& eig, const ComplexMatrix& rho_n);

/// 2^{m+1}(1 - 2^-m) ||Omega||^2 ||O_m||^2 chi_max^2 R^2 / (4^m - 1)^2 with
/// Pauli-scale norms ||Omega||^2 = ||O_m||^2 = 2^m unless given. chi_max <= 0
/// uses the largest multiplicity of eig.
double bp_upper_bound_check(int m, const JointEigenstructure& eig, const QuantumState& rho_n, int chi_max = 0,
                            double omega_norm_sq = -1.0, double o_norm_sq = -1.0);

}  // namespace qrenn
