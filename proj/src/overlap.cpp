#include "qrenn/overlap.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qrenn/error.hpp"

namespace qrenn {

namespace {

constexpr double kInvolutionTol = 1e-8;
constexpr double kZeroTupleTol = 1e-12;

bool is_zero_tuple(const std::vector<double>& tuple) {
  for (double v : tuple) {
    if (std::abs(v) > kZeroTupleTol) return false;
  }
  return true;
}

}  // namespace

OverlapReport joint_overlap(const JointEigenstructure& eig, const HermitianOperator& o, bool include_zero_tuple) {
  if (o.dim() != eig.dim()) {
    throw Error("overlap", "operator dimension " + std::to_string(o.dim()) + " != eigenstructure dimension " +
                               std::to_string(eig.dim()));
  }
  OverlapReport report;
  report.included_zero_tuple = include_zero_tuple;
  for (std::size_t j = 0; j < eig.size(); ++j) {
    if (!include_zero_tuple && is_zero_tuple(eig.tuples[j])) continue;
    const double tr = (eig.projections[j].matrix().cwiseProduct(o.matrix().transpose())).sum().real();
    report.per_tuple.push_back({eig.tuples[j], tr * tr});
    report.value += tr * tr;
  }
  return report;
}

OverlapReport joint_overlap(const JointEigenstructure& eig, const QuantumState& rho, bool include_zero_tuple) {
  return joint_overlap(eig, HermitianOperator(rho.to_density()), include_zero_tuple);
}

void require_involutory(const HermitianOperator& p) {
  const double defect = frobenius_norm(p.matrix() * p.matrix() - identity(p.dim()));
  if (defect > kInvolutionTol) {
    throw Error("overlap", "operator is not involutory (||P^2 - I||_F = " + std::to_string(defect) + ")");
  }
}

JointEigenstructure involutory_eigenstructure(const HermitianOperator& p) {
  require_involutory(p);
  const ComplexMatrix id = identity(p.dim());
  return joint_eigenstructure_from({{1.0}, {-1.0}}, {HermitianOperator(0.5 * (id + p.matrix())),
                                                     HermitianOperator(0.5 * (id - p.matrix()))});
}

double involutory_overlap_analytic(const HermitianOperator& p, const QuantumState& rho) {
  require_involutory(p);
  const double t = expectation(rho, p);
  return 0.5 * (1.0 + t * t);
}

double diagonal_probe_overlap_bound(const JointEigenstructure& eig, double p_mix) {
  const auto dim = static_cast<unsigned long>(eig.dim());
  if (!std::has_single_bit(dim) || dim < 2) throw Error("overlap", "eigenstructure must live on whole qubits");
  const int n = std::countr_zero(dim);
  return joint_overlap(eig, mixed_probe(p_mix, n)).value;
}

}  // namespace qrenn
