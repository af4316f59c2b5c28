#pragma once

#include <vector>

#include "qrenn/dla.hpp"

namespace qrenn {

struct TupleOverlap {
  std::vector<double> tuple;
  double value = 0.0;  // tr(Pi_lambda O)^2
};

struct OverlapReport {
  double value = 0.0;
  std::vector<TupleOverlap> per_tuple;
  bool included_zero_tuple = true;
};

/// R^2_S(O) = sum_lambda tr(Pi_lambda O)^2. With include_zero_tuple off the
/// all-zero eigenvalue tuple is skipped.
OverlapReport joint_overlap(const JointEigenstructure& eig, const HermitianOperator& o,
                            bool include_zero_tuple = true);
OverlapReport joint_overlap(const JointEigenstructure& eig, const QuantumState& rho,
                            bool include_zero_tuple = true);

/// Throws unless ||P^2 - I||_F <= 1e-8.
void require_involutory(const HermitianOperator& p);

/// Eigenstructure of an involution from Pi_+- = (I +- P)/2.
JointEigenstructure involutory_eigenstructure(const HermitianOperator& p);

/// (1 + tr(P rho)^2) / 2.
double involutory_overlap_analytic(const HermitianOperator& p, const QuantumState& rho);

/// R^2 of mixed_probe(p_mix, n) against eig.
double diagonal_probe_overlap_bound(const JointEigenstructure& eig, double p_mix);

}  // namespace qrenn
