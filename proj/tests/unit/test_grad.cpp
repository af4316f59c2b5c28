#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qrenn/error.hpp"
#include "qrenn/grad.hpp"
#include "qrenn/random.hpp"

using namespace qrenn;

namespace {

constexpr double kPi = std::numbers::pi;

struct Instance {
  QrennArchitecture arch;
  std::vector<LabeledSample> batch;
  QuantumState rho0;
  ParameterVector params;
};

HermitianOperator random_povm(int m, Rng& rng) {
  const Eigen::Index d = Eigen::Index{1} << m;
  const auto u = haar_unitary(d, rng);
  RealVector w(d);
  for (Eigen::Index k = 0; k < d; ++k) w(k) = uniform(rng, 0, 1);
  return HermitianOperator(u.matrix() * w.cast<Complex>().asDiagonal() * u.matrix().adjoint());
}

Instance random_instance(Rng& rng, bool mixed, bool with_phi) {
  const int m = 1 + static_cast<int>(rng() % 2);
  const int n = 1 + static_cast<int>(rng() % 3);
  QrennArchitecture arch{m, n, 1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 2), ""};
  std::vector<LabeledSample> batch;
  const int q = 1 + static_cast<int>(rng() % 3);
  for (int s = 0; s < q; ++s) {
    std::vector<HermitianOperator> gens;
    for (int t = 0; t < arch.slots; ++t) gens.push_back(random_hermitian(arch.embedding_dim(), rng));
    batch.push_back({EmbeddedData(std::move(gens)), s % 2, random_povm(m, rng)});
  }
  const auto rho0 = mixed ? mixed_probe(0.6, m + n)
                          : QuantumState::pure(haar_unitary(Eigen::Index{1} << (m + n), rng).matrix().col(0));
  ParameterVector params = ParameterVector::zeros(arch);
  for (auto& v : params.theta) v = uniform(rng, 0, 2 * kPi);
  if (with_phi) {
    params.phi = std::vector<double>(static_cast<std::size_t>(arch.slots));
    for (auto& v : *params.phi) v = uniform(rng, -1, 1);
  }
  return {arch, std::move(batch), rho0, params};
}

}  // namespace

TEST_CASE("param_shift on a single rotation") {
  // R_Y(theta)|0> with <Z> = cos(theta): block (theta, 0), trailing block zero, H = 0.
  QrennArchitecture arch{1, 1, 1, 1, ""};
  const auto data = EmbeddedData::repeated(HermitianOperator(ComplexMatrix::Zero(2, 2)), 1);
  const std::vector<LabeledSample> batch{{data, 0, HermitianOperator(pauli::z())}};
  const LossContext loss(arch, basis_state(2, "00"), batch, LossKind::kMeanExpectation);
  ParameterVector p = ParameterVector::zeros(arch);
  p.theta[0] = kPi / 2;
  CHECK(param_shift(loss, p, ParamIndex::theta(0)) == doctest::Approx(-1.0));
  p.theta[0] = 0.0;
  CHECK(std::abs(param_shift(loss, p, ParamIndex::theta(0))) <= 1e-14);
  CHECK_THROWS_AS(param_shift(loss, p, ParamIndex::phi(0)), Error);
  CHECK_THROWS_AS(param_shift(loss, p, ParamIndex::theta(99)), Error);
}

TEST_CASE("central_diff basics") {
  QrennArchitecture arch{1, 1, 1, 1, ""};
  const auto data = EmbeddedData::repeated(HermitianOperator(pauli::z()), 1);
  const std::vector<LabeledSample> batch{{data, 0, HermitianOperator(identity(2))}};
  const LossContext constant(arch, plus_state(2), batch, LossKind::kMeanExpectation);
  ParameterVector p = ParameterVector::zeros(arch);
  CHECK(std::abs(central_diff(constant, p, ParamIndex::theta(1), 1e-5)) <= 1e-10);
  CHECK(std::abs(central_diff(constant, p, ParamIndex::phi(0), 1e-5)) <= 1e-10);
  CHECK_THROWS_AS(central_diff(constant, p, ParamIndex::theta(0), 0.0), Error);

  // <Z> after R_Y(theta) is cos(theta); near theta = pi/2 the slope is -1.
  const std::vector<LabeledSample> zb{{data, 0, HermitianOperator(pauli::z())}};
  const LossContext cosine(arch, basis_state(2, "00"), zb, LossKind::kMeanExpectation);
  p.theta[0] = kPi / 2;
  CHECK(central_diff(cosine, p, ParamIndex::theta(0), 1e-5) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("batched shift gradient matches naive shift rule and central differences") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng, trial % 3 == 2, trial % 2 == 1);
    const LossContext loss(inst.arch, inst.rho0, inst.batch, trial % 4 == 0 ? LossKind::kMeanExpectation
                                                                            : LossKind::kTotalLoss);
    const auto grad = loss.theta_gradient(inst.params);
    REQUIRE(grad.size() == inst.params.theta.size());
    for (int i = 0; i < inst.arch.theta_count(); ++i) {
      const double naive = param_shift(loss, inst.params, ParamIndex::theta(i));
      const double fd = central_diff(loss, inst.params, ParamIndex::theta(i), 1e-5);
      CHECK(std::abs(grad[static_cast<std::size_t>(i)] - naive) <= 1e-10);
      CHECK(std::abs(naive - fd) <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("full_gradient covers theta and phi") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = random_instance(rng, trial % 2 == 0, true);
    const LossContext loss(inst.arch, inst.rho0, inst.batch);
    const auto grad = full_gradient(loss, inst.params);
    REQUIRE(grad.size() == inst.params.theta.size() + static_cast<std::size_t>(inst.arch.slots));
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const auto idx = i < inst.params.theta.size()
                           ? ParamIndex::theta(static_cast<int>(i))
                           : ParamIndex::phi(static_cast<int>(i - inst.params.theta.size()));
      CHECK(std::abs(grad[i] - central_diff(loss, inst.params, idx, kPhiDiffStep)) <= 1e-6);
    }
  }
}

TEST_CASE("zero-depth trivial loss has zero gradient") {
  QrennArchitecture arch{1, 1, 1, 1, ""};
  const auto data = EmbeddedData::repeated(HermitianOperator(pauli::z()), 1);
  const std::vector<LabeledSample> batch{{data, 0, HermitianOperator(identity(2))}};
  const LossContext loss(arch, plus_state(2), batch);
  for (double g : full_gradient(loss, ParameterVector::zeros(arch))) CHECK(std::abs(g) <= 1e-12);
}

TEST_CASE("total-loss gradient is the batch average of per-sample gradients") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = random_instance(rng, trial % 2 == 0, false);
    const LossContext loss(inst.arch, inst.rho0, inst.batch);
    const auto grad = loss.theta_gradient(inst.params);
    std::vector<double> avg(grad.size(), 0.0);
    for (std::size_t q = 0; q < loss.size(); ++q) {
      const auto g = loss.sample_theta_gradient(q, inst.params);
      for (std::size_t i = 0; i < g.size(); ++i) avg[i] -= g[i] / static_cast<double>(loss.size());
    }
    for (std::size_t i = 0; i < grad.size(); ++i) CHECK(std::abs(grad[i] - avg[i]) <= 1e-12);
  }
}

TEST_CASE("threaded evaluation is deterministic") {
  Rng rng(5);
  auto inst = random_instance(rng, false, false);
  const LossContext serial(inst.arch, inst.rho0, inst.batch, LossKind::kTotalLoss, std::nullopt, 1);
  const LossContext threaded(inst.arch, inst.rho0, inst.batch, LossKind::kTotalLoss, std::nullopt, 3);
  CHECK(serial(inst.params) == threaded(inst.params));
  CHECK(serial.theta_gradient(inst.params) == threaded.theta_gradient(inst.params));
}
