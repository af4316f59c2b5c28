#include "qrenn/dla.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qrenn/error.hpp"
#include "qrenn/random.hpp"

namespace qrenn {

namespace {

constexpr double kSkewTol = 1e-10;
constexpr double kCommuteTol = 1e-9;
constexpr double kValidateTol = 1e-7;
constexpr int kMaxDraws = 5;

void add_if_new(std::vector<ComplexMatrix>& basis, const ComplexMatrix& candidate, double tol) {
  const double norm = frobenius_norm(candidate);
  if (norm <= tol) return;
  auto next = gram_schmidt_extend(basis, candidate / norm, tol);
  if (next) basis.push_back(std::move(*next));
}

double residual_norm(std::span<const ComplexMatrix> basis, const ComplexMatrix& a) {
  ComplexMatrix r = a;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) r -= hs_inner(b, r) * b;
  }
  return frobenius_norm(r);
}

double weighted_sum(const JointEigenstructure& eig, const ComplexMatrix& rho_n, MultiplicityWeight weight,
                    const std::vector<double>* lambdas) {
  double sum = 0.0;
  for (std::size_t j = 0; j < eig.size(); ++j) {
    const double tr = (eig.projections[j].matrix().cwiseProduct(rho_n.transpose())).sum().real();
    const double chi = eig.multiplicities[j];
    double term = tr * tr;
    if (weight == MultiplicityWeight::kSquared) term *= chi * chi;
    if (lambdas) term *= (*lambdas)[j] * (*lambdas)[j];
    sum += term;
  }
  return sum;
}

const ComplexMatrix& embedding_density(const JointEigenstructure& eig, const QuantumState& rho_n,
                                       ComplexMatrix& storage) {
  if (rho_n.dim() != eig.dim()) {
    throw Error("dla", "probe state dimension " + std::to_string(rho_n.dim()) + " != eigenstructure dimension " +
                           std::to_string(eig.dim()));
  }
  storage = rho_n.to_density();
  return storage;
}

void check_processing_operator(int m, const HermitianOperator& op, const char* what) {
  if (op.dim() != (Eigen::Index{1} << m)) {
    throw Error("dla", std::string(what) + " must act on the 2^m processing register");
  }
}

double variance_denominator(int m) {
  const double d2 = std::ldexp(1.0, 2 * m) - 1.0;
  return d2 * d2;
}

}  // namespace

LieBasis lie_closure(std::span<const ComplexMatrix> generators, double tol, std::size_t max_dim) {
  if (generators.empty()) throw Error("dla", "closure needs at least one generator");
  const Eigen::Index dim = generators.front().rows();
  for (const auto& g : generators) {
    if (g.rows() != dim || g.cols() != dim) throw Error("dla", "generators must share one square dimension");
    if ((g + g.adjoint()).cwiseAbs().maxCoeff() > kSkewTol) {
      throw Error("dla", "generators must be skew-Hermitian");
    }
  }
  std::vector<ComplexMatrix> basis;
  for (const auto& g : generators) add_if_new(basis, g, tol);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (const auto& g : generators) {
      const ComplexMatrix c = commutator(basis[i], g);
      add_if_new(basis, c, tol);
      if (basis.size() > max_dim) {
        throw Error("dla", "Lie closure exceeded max_dim = " + std::to_string(max_dim));
      }
    }
  }
  return {dim, std::move(basis)};
}

std::size_t commutator_ideal_dim(const LieBasis& basis, double tol) {
  std::vector<ComplexMatrix> derived;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      add_if_new(derived, commutator(basis.elements[i], basis.elements[j]), tol);
    }
  }
  return derived.size();
}

std::vector<ComplexMatrix> qrenn_generators(int m, std::span<const HermitianOperator> data,
                                            std::string_view control) {
  if (m < 1) throw Error("dla", "m must be >= 1");
  if (data.empty()) throw Error("dla", "need at least one data generator");
  const Eigen::Index ndim = data.front().dim();
  const ComplexMatrix id_n = identity(ndim);
  const Complex i(0.0, 1.0);
  std::vector<ComplexMatrix> out;
  for (int k = 0; k < m; ++k) {
    out.push_back(i * kron(pauli::on_qubit(pauli::y(), k, m), id_n));
    out.push_back(i * kron(pauli::on_qubit(pauli::z(), k, m), id_n));
  }
  for (int k = 0; k + 1 < m; ++k) {
    out.push_back(i * kron(pauli::on_qubit(pauli::z(), k, m) * pauli::on_qubit(pauli::z(), k + 1, m), id_n));
  }
  const std::string bits = control.empty() ? std::string(static_cast<std::size_t>(m), '1') : std::string(control);
  for (const auto& h : data) {
    if (h.dim() != ndim) throw Error("dla", "data generators must share one dimension");
    out.push_back(i * control_embed_generator(h, m, bits).matrix());
  }
  return out;
}

std::size_t default_max_dim(int m, std::size_t r) {
  const std::size_t four_m = std::size_t{1} << (2 * m);
  return r * four_m + four_m;
}

int JointEigenstructure::max_multiplicity() const {
  return multiplicities.empty() ? 0 : *std::max_element(multiplicities.begin(), multiplicities.end());
}

JointEigenstructure joint_eigenspaces(std::span<const HermitianOperator> set, double tol, std::uint64_t seed) {
  if (set.empty()) throw Error("dla", "joint eigenspaces of an empty set");
  const Eigen::Index dim = set.front().dim();
  for (const auto& h : set) {
    if (h.dim() != dim) throw Error("dla", "operators must share one dimension");
  }
  for (std::size_t s = 0; s < set.size(); ++s) {
    for (std::size_t t = s + 1; t < set.size(); ++t) {
      const double scale = std::max(1e-300, frobenius_norm(set[s].matrix()) * frobenius_norm(set[t].matrix()));
      if (frobenius_norm(commutator(set[s].matrix(), set[t].matrix())) > kCommuteTol * scale) {
        throw Error("dla", "operators do not commute; no joint eigenbasis");
      }
    }
  }

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    ComplexMatrix combo = ComplexMatrix::Zero(dim, dim);
    for (const auto& h : set) combo += normal(rng) * h.matrix();
    const auto e = eigh(HermitianOperator(0.5 * (combo + combo.adjoint())));
    const ComplexMatrix& v = e.vectors.matrix();

    // Group eigenvectors whose per-operator Rayleigh quotients agree.
    std::vector<std::vector<double>> tuples;
    std::vector<std::vector<Eigen::Index>> members;
    for (Eigen::Index k = 0; k < dim; ++k) {
      std::vector<double> tuple(set.size());
      for (std::size_t t = 0; t < set.size(); ++t) {
        tuple[t] = v.col(k).dot(set[t].matrix() * v.col(k)).real();
      }
      auto match = std::find_if(tuples.begin(), tuples.end(), [&](const std::vector<double>& other) {
        for (std::size_t t = 0; t < tuple.size(); ++t) {
          if (std::abs(other[t] - tuple[t]) > tol) return false;
        }
        return true;
      });
      if (match == tuples.end()) {
        tuples.push_back(tuple);
        members.push_back({k});
      } else {
        members[static_cast<std::size_t>(match - tuples.begin())].push_back(k);
      }
    }

    bool valid = true;
    std::vector<ComplexMatrix> projections;
    for (std::size_t g = 0; g < tuples.size() && valid; ++g) {
      ComplexMatrix basis(dim, static_cast<Eigen::Index>(members[g].size()));
      for (std::size_t c = 0; c < members[g].size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = v.col(members[g][c]);
      ComplexMatrix proj = basis * basis.adjoint();
      const double chi = static_cast<double>(members[g].size());
      for (std::size_t t = 0; t < set.size(); ++t) {
        // Polish: the block average is the exact eigenvalue if validation passes.
        const double lambda = (proj.cwiseProduct(set[t].matrix().transpose())).sum().real() / chi;
        tuples[g][t] = lambda;
        const double defect = frobenius_norm(set[t].matrix() * proj - lambda * proj);
        if (defect > kValidateTol * std::max(1.0, frobenius_norm(set[t].matrix()))) valid = false;
      }
      projections.push_back(std::move(proj));
    }
    if (!valid) continue;

    std::vector<std::size_t> order(tuples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tuples[a] > tuples[b]; });
    JointEigenstructure out;
    for (std::size_t idx : order) {
      out.tuples.push_back(tuples[idx]);
      out.projections.emplace_back(0.5 * (projections[idx] + projections[idx].adjoint()));
      out.multiplicities.push_back(static_cast<int>(members[idx].size()));
    }
    return out;
  }
  throw Error("dla", "joint eigenspace validation failed after " + std::to_string(kMaxDraws) + " random draws");
}

JointEigenstructure joint_eigenstructure_from(std::vector<std::vector<double>> tuples,
                                              std::vector<HermitianOperator> projections) {
  if (tuples.size() != projections.size() || tuples.empty()) {
    throw Error("dla", "need one projector per eigenvalue tuple");
  }
  JointEigenstructure out;
  for (std::size_t j = 0; j < tuples.size(); ++j) {
    const double chi = projections[j].matrix().trace().real();
    const int rank = static_cast<int>(std::lround(chi));
    if (rank == 0) continue;
    out.tuples.push_back(std::move(tuples[j]));
    out.projections.push_back(std::move(projections[j]));
    out.multiplicities.push_back(rank);
  }
  return out;
}

DlaDecomposition decompose(const LieBasis& closure, int m, const JointEigenstructure& eig) {
  const Eigen::Index pdim = Eigen::Index{1} << m;
  if (closure.dim_ambient != pdim * eig.dim()) {
    throw Error("dla", "closure dimension does not match 2^m times the eigenstructure dimension");
  }
  const Complex i(0.0, 1.0);
  const auto words = pauli::nontrivial_words(m);
  DlaDecomposition out;
  for (std::size_t j = 0; j < eig.size(); ++j) {
    LieBasis ideal{closure.dim_ambient, {}};
    const double norm = std::sqrt(static_cast<double>(pdim) * eig.multiplicities[j]);
    for (const auto& w : words) {
      ComplexMatrix e = (i / norm) * kron(pauli::word(w), eig.projections[j].matrix());
      const double off = residual_norm(closure.elements, e);
      if (off > kSpanTol) {
        throw Error("dla", "ideal element " + w + " (x) Pi_" + std::to_string(j) +
                               " is not in the closure (residual " + std::to_string(off) + ")");
      }
      ideal.elements.push_back(std::move(e));
    }
    out.ideals.push_back(std::move(ideal));
  }
  std::vector<ComplexMatrix> all_ideal;
  for (const auto& ideal : out.ideals) {
    all_ideal.insert(all_ideal.end(), ideal.elements.begin(), ideal.elements.end());
  }
  out.center.dim_ambient = closure.dim_ambient;
  for (const auto& b : closure.elements) {
    ComplexMatrix r = b;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : all_ideal) r -= hs_inner(e, r) * e;
    }
    add_if_new(out.center.elements, r, kClosureTol);
  }
  for (const auto& c : out.center.elements) {
    for (const auto& b : closure.elements) {
      if (frobenius_norm(commutator(c, b)) > kSpanTol) {
        throw Error("dla", "complement of the ideals is not central; decomposition hypothesis violated");
      }
    }
  }
  return out;
}

IdealProjection project_onto_ideal(const HermitianOperator& op, const LieBasis& ideal) {
  if (op.dim() != ideal.dim_ambient) {
    throw Error("dla", "operator dimension " + std::to_string(op.dim()) + " != ideal ambient dimension " +
                           std::to_string(ideal.dim_ambient));
  }
  const ComplexMatrix skew = Complex(0.0, 1.0) * op.matrix();
  ComplexMatrix proj = ComplexMatrix::Zero(op.dim(), op.dim());
  for (const auto& e : ideal.elements) proj += hs_inner(e, skew) * e;
  return {proj, proj.squaredNorm()};
}

ComplexMatrix traceless(const ComplexMatrix& a) {
  return a - (a.trace() / static_cast<double>(a.rows())) * identity(a.rows());
}

double killing_norm_sq(const HermitianOperator& omega) {
  const double d = static_cast<double>(omega.dim());
  return 2.0 * d * traceless(omega.matrix()).squaredNorm();
}

HermitianOperator rotation_generator(const QrennArchitecture& arch, int theta_index) {
  arch.validate();
  if (theta_index < 0 || theta_index >= arch.theta_count()) throw Error("dla", "theta index out of range");
  const int mu = theta_index % arch.block_size();
  const int within = mu % (2 * arch.m);
  const char letter = within < arch.m ? 'Y' : 'Z';
  const int qubit = within < arch.m ? within : within - arch.m;
  return HermitianOperator(-0.5 * pauli::on_qubit(pauli::from_char(letter), qubit, arch.m));
}

double predicted_variance_theta(int m, const JointEigenstructure& eig, const QuantumState& rho_n,
                                const HermitianOperator& o_m, const HermitianOperator& omega,
                                MultiplicityWeight weight) {
  check_processing_operator(m, o_m, "O_m");
  check_processing_operator(m, omega, "Omega");
  ComplexMatrix storage;
  const ComplexMatrix& rho = embedding_density(eig, rho_n, storage);
  const double pre = std::ldexp(1.0, m + 1) * (1.0 - std::ldexp(1.0, -m)) * traceless(omega.matrix()).squaredNorm() *
                     traceless(o_m.matrix()).squaredNorm() / variance_denominator(m);
  return pre * weighted_sum(eig, rho, weight, nullptr);
}

double predicted_variance_phi(int m, const JointEigenstructure& eig, const QuantumState& rho_n,
                              const HermitianOperator& o_m, MultiplicityWeight weight) {
  check_processing_operator(m, o_m, "O_m");
  std::vector<double> lambdas;
  for (const auto& t : eig.tuples) {
    if (t.size() != 1) throw Error("dla", "phi variance needs the eigenstructure of a single generator");
    lambdas.push_back(t.front());
  }
  ComplexMatrix storage;
  const ComplexMatrix& rho = embedding_density(eig, rho_n, storage);
  const double pre = 2.0 * (std::ldexp(1.0, m) - 1.0) * (1.0 - std::ldexp(1.0, -m)) *
                     traceless(o_m.matrix()).squaredNorm() / variance_denominator(m);
  return pre * weighted_sum(eig, rho, weight, &lambdas);
}

double total_loss_variance_lower_bound(int m, std::span<const BoundTerm> terms, const HermitianOperator& omega) {
  check_processing_operator(m, omega, "Omega");
  if (terms.empty()) throw Error("dla", "bound needs at least one sample");
  double sum = 0.0;
  for (const auto& t : terms) sum += t.povm_norm_sq * t.overlap;
  const double q = static_cast<double>(terms.size());
  return sum * std::ldexp(1.0, m + 1) * traceless(omega.matrix()).squaredNorm() / variance_denominator(m) / (q * q);
}

double eigenspace_overlap(const JointEigenstructure& eig, const ComplexMatrix& rho_n) {
  if (rho_n.rows() != eig.dim()) throw Error("dla", "state dimension does not match the eigenstructure");
  return weighted_sum(eig, rho_n, MultiplicityWeight::kNone, nullptr);
}

double bp_upper_bound_check(int m, const JointEigenstructure& eig, const QuantumState& rho_n, int chi_max,
                            double omega_norm_sq, double o_norm_sq) {
  ComplexMatrix storage;
  const ComplexMatrix& rho = embedding_density(eig, rho_n, storage);
  const double pauli_scale = std::ldexp(1.0, m);
  if (omega_norm_sq < 0.0) omega_norm_sq = pauli_scale;
  if (o_norm_sq < 0.0) o_norm_sq = pauli_scale;
  const double chi = chi_max > 0 ? chi_max : eig.max_multiplicity();
  const double pre = std::ldexp(1.0, m + 1) * (1.0 - std::ldexp(1.0, -m)) * omega_norm_sq * o_norm_sq /
                     variance_denominator(m);
  return pre * chi * chi * eigenspace_overlap(eig, rho);
}

}  // namespace qrenn
