#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qrenn/error.hpp"
#include "qrenn/model.hpp"
#include "qrenn/random.hpp"

using namespace qrenn;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexMatrix cz_chain(int m) {
  const Eigen::Index d = Eigen::Index{1} << m;
  ComplexMatrix out = identity(d);
  for (int k = 0; k + 1 < m; ++k) {
    ComplexMatrix cz = identity(4);
    cz(3, 3) = -1.0;
    out = kron(kron(identity(Eigen::Index{1} << k), cz), identity(Eigen::Index{1} << (m - k - 2))) * out;
  }
  return out;
}

// Dense reference for one processing block, built gate by gate.
ComplexMatrix reference_block(int m, int layers, std::span<const double> th) {
  ComplexMatrix u = identity(Eigen::Index{1} << m);
  std::size_t idx = 0;
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < m; ++q) u = pauli::on_qubit(rotation('Y', th[idx++]), q, m) * u;
    for (int q = 0; q < m; ++q) u = pauli::on_qubit(rotation('Z', th[idx++]), q, m) * u;
    u = cz_chain(m) * u;
  }
  return u;
}

// Full-matrix reference for the whole circuit.
ComplexMatrix reference_unitary(const QrennArchitecture& arch, const ParameterVector& params,
                                const EmbeddedData& data) {
  const Eigen::Index ndim = arch.embedding_dim();
  ComplexMatrix u = identity(arch.processing_dim() * ndim);
  for (int t = 0; t < arch.slots; ++t) {
    u = kron(reference_block(arch.m, arch.layers, params.block(arch, t)), identity(ndim)) * u;
    ComplexMatrix g = params.phi_at(t) * control_embed_generator(data.generator(t), arch.m, arch.control_bits()).matrix();
    if (data.crosstalk()) g += data.crosstalk()->matrix();
    u = expm_i(HermitianOperator(g)).matrix() * u;
  }
  return kron(reference_block(arch.m, arch.layers, params.block(arch, arch.slots)), identity(ndim)) * u;
}

ParameterVector random_params(const QrennArchitecture& arch, Rng& rng, bool with_phi) {
  ParameterVector p = ParameterVector::zeros(arch);
  for (auto& v : p.theta) v = uniform(rng, 0, 2 * kPi);
  if (with_phi) {
    p.phi = std::vector<double>(static_cast<std::size_t>(arch.slots));
    for (auto& v : *p.phi) v = uniform(rng, -1.5, 1.5);
  }
  return p;
}

EmbeddedData sample_data(int n, int slots, Rng& rng) {
  std::vector<HermitianOperator> gens;
  for (int t = 0; t < slots; ++t) gens.push_back(random_hermitian(Eigen::Index{1} << n, rng));
  return EmbeddedData(std::move(gens));
}

}  // namespace

TEST_CASE("architecture validation") {
  QrennArchitecture a{2, 3, 4, 2, ""};
  CHECK_NOTHROW(a.validate());
  CHECK(a.control_bits() == "11");
  CHECK(a.control_index() == 3);
  CHECK(a.theta_count() == 5 * 8);
  a.control = "1";
  CHECK_THROWS_AS(a.validate(), Error);
  a.control = "01";
  CHECK(a.control_index() == 1);
  CHECK_THROWS_AS((QrennArchitecture{0, 1, 1, 1, ""}).validate(), Error);
  CHECK_THROWS_AS((QrennArchitecture{8, 8, 1, 1, ""}).validate(), Error);
  ParameterVector p = ParameterVector::zeros(a);
  p.theta.pop_back();
  CHECK_THROWS_AS(p.validate(a), Error);
}

TEST_CASE("control_embed_generator") {
  const HermitianOperator z(pauli::z());
  const auto g = control_embed_generator(z, 1, "1");
  CHECK((g.matrix() - kron(basis_state(1, "1").to_density(), pauli::z())).cwiseAbs().maxCoeff() == 0.0);
  Rng rng(2);
  const auto h = random_hermitian(4, rng);
  const auto g2 = control_embed_generator(h, 2, "11");
  CHECK(g2.matrix().topLeftCorner(12, 12).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g2.matrix().bottomRightCorner(4, 4) - h.matrix()).cwiseAbs().maxCoeff() == 0.0);
  const auto psi = tensor(basis_state(1, "0"), plus_state(1));
  const auto out = apply_unitary(psi, expm_i(g));
  CHECK((out.amplitudes() - psi.amplitudes()).norm() <= 1e-15);
  CHECK_THROWS_AS(control_embed_generator(z, 2, "1"), Error);
}

TEST_CASE("processing_block examples") {
  const std::vector<double> zero2{0, 0};
  CHECK((processing_block(1, 1, zero2).matrix() - identity(2)).cwiseAbs().maxCoeff() <= 1e-15);
  const std::vector<double> flip{kPi, 0};
  const ComplexVector out = processing_block(1, 1, flip).matrix() * basis_state(1, "0").amplitudes();
  CHECK(std::abs(out(1)) == doctest::Approx(1.0));
  const std::vector<double> zero4(4, 0.0);
  ComplexMatrix cz = identity(4);
  cz(3, 3) = -1.0;
  CHECK((processing_block(2, 1, zero4).matrix() - cz).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(processing_block(2, 1, zero2), Error);
}

TEST_CASE("processing_block matches gate-by-gate reference") {
  Rng rng(17);
  for (int m = 1; m <= 3; ++m) {
    for (int layers = 1; layers <= 3; ++layers) {
      std::vector<double> th(static_cast<std::size_t>(2 * m * layers));
      for (auto& v : th) v = uniform(rng, 0, 2 * kPi);
      CHECK((processing_block(m, layers, th).matrix() - reference_block(m, layers, th)).cwiseAbs().maxCoeff() <=
            1e-12);
    }
  }
}

TEST_CASE("forward examples") {
  QrennArchitecture arch{1, 1, 2, 1, ""};
  Rng rng(6);
  const auto data = sample_data(1, 2, rng);
  ParameterVector p = ParameterVector::zeros(arch);
  p.phi = std::vector<double>{0.0, 0.0};
  const auto rho0 = tensor(plus_state(1), plus_state(1));
  CHECK((forward(arch, p, data, rho0).amplitudes() - rho0.amplitudes()).norm() <= 1e-14);

  const auto zero_m = tensor(basis_state(1, "0"), plus_state(1));
  CHECK((forward(arch, ParameterVector::zeros(arch), data, zero_m).amplitudes() - zero_m.amplitudes()).norm() <=
        1e-14);

  QrennArchitecture one{1, 1, 1, 1, ""};
  const HermitianOperator h((kPi / 2) * (identity(2) - pauli::x()));
  const auto out = forward(one, ParameterVector::zeros(one), EmbeddedData::repeated(h, 1), basis_state(2, "10"));
  CHECK(std::abs(out.amplitudes()(3)) == doctest::Approx(1.0));
}

TEST_CASE("forward matches dense reference") {
  Rng rng(31);
  for (int trial = 0; trial < 24; ++trial) {
    const int m = 1 + trial % 2;
    const int n = 1 + (trial / 2) % 3;
    QrennArchitecture arch{m, n, 1 + trial % 3, 1 + trial % 2, trial % 4 == 3 ? std::string(m, '0') : ""};
    EmbeddedData data = sample_data(n, arch.slots, rng);
    if (trial % 5 == 4) {
      const auto h0 = random_hermitian(arch.processing_dim() * arch.embedding_dim(), rng);
      data = data.with_crosstalk(HermitianOperator(0.01 * h0.matrix()));
    }
    const auto params = random_params(arch, rng, trial % 2 == 0);
    const ComplexMatrix u = reference_unitary(arch, params, data);
    const auto psi = QuantumState::pure(haar_unitary(u.rows(), rng).matrix().col(0));
    const auto out = forward(arch, params, data, psi);
    CHECK((out.amplitudes() - u * psi.amplitudes()).norm() <= 1e-10);
    const auto rho = mixed_probe(0.4, m + n);
    const auto out_rho = forward(arch, params, data, rho);
    CHECK((out_rho.density() - u * rho.density() * u.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out_rho.trace() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("slot composability") {
  Rng rng(40);
  QrennArchitecture two{1, 2, 2, 2, ""};
  QrennArchitecture one{1, 2, 1, 2, ""};
  const auto h1 = random_hermitian(4, rng), h2 = random_hermitian(4, rng);
  const auto params = random_params(two, rng, false);
  const int b = two.block_size();
  ParameterVector first = ParameterVector::zeros(one), second = ParameterVector::zeros(one);
  std::copy_n(params.theta.begin(), b, first.theta.begin());
  std::copy_n(params.theta.begin() + b, b, second.theta.begin());
  std::copy_n(params.theta.begin() + 2 * b, b, second.theta.begin() + b);
  const auto psi = tensor(basis_state(1, "0"), plus_state(2));
  const auto full = forward(two, params, EmbeddedData({h1, h2}), psi);
  const auto mid = forward(one, first, EmbeddedData({h1}), psi);
  const auto chained = forward(one, second, EmbeddedData({h2}), mid);
  CHECK((full.amplitudes() - chained.amplitudes()).norm() <= 1e-10);
}

TEST_CASE("trace_loss") {
  const auto psi = basis_state(1, "1");
  const HermitianOperator proj1(psi.to_density());
  CHECK(trace_loss(psi, proj1) == doctest::Approx(1.0));
  CHECK(trace_loss(basis_state(1, "0"), proj1) == doctest::Approx(0.0));
  CHECK(trace_loss(plus_state(2), HermitianOperator(identity(4))) == doctest::Approx(1.0));
  CHECK_THROWS_AS(trace_loss(basis_state(1, "0"), HermitianOperator(2.0 * identity(2))), Error);
  const auto phased = QuantumState::pure(std::polar(1.0, 0.7) * plus_state(1).amplitudes());
  const HermitianOperator p0(basis_state(1, "0").to_density());
  CHECK(std::abs(trace_loss(phased, p0) - trace_loss(plus_state(1), p0)) <= 1e-12);
}

TEST_CASE("total_loss averages sample scores") {
  QrennArchitecture arch{1, 1, 1, 1, ""};
  const auto params = ParameterVector::zeros(arch);
  const auto rho0 = tensor(basis_state(1, "0"), plus_state(1));
  const auto data = EmbeddedData::repeated(HermitianOperator(pauli::z()), 1);
  const HermitianOperator m0(basis_state(1, "0").to_density());
  const HermitianOperator m1(basis_state(1, "1").to_density());
  const std::vector<LabeledSample> good{{data, 1, m0}, {data, 1, m0}};
  CHECK(total_loss(arch, params, good, rho0) == doctest::Approx(0.0));
  const std::vector<LabeledSample> bad{{data, 0, m1}};
  CHECK(total_loss(arch, params, bad, rho0) == doctest::Approx(1.0));
  const std::vector<LabeledSample> half{{data, 1, m0}, {data, 0, m1}};
  CHECK(total_loss(arch, params, half, rho0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(total_loss(arch, params, std::span<const LabeledSample>{}, rho0), Error);
}

TEST_CASE("binary POVM elements sum to one") {
  Rng rng(50);
  QrennArchitecture arch{2, 2, 2, 2, ""};
  const ComplexMatrix z = parity_observable(2);
  const HermitianOperator m0(kron(0.5 * (identity(4) - z), identity(4)));
  const HermitianOperator m1(kron(0.5 * (identity(4) + z), identity(4)));
  for (int trial = 0; trial < 10; ++trial) {
    const auto out = forward(arch, random_params(arch, rng, false), sample_data(2, 2, rng), plus_state(4));
    CHECK(std::abs(trace_loss(out, m0) + trace_loss(out, m1) - 1.0) <= 1e-10);
  }
}

TEST_CASE("prediction rule and accuracy") {
  CHECK(predict_from_value(-0.3) == 0);
  CHECK(predict_from_value(0.2) == 1);
  CHECK(predict_from_value(0.0) == 1);
  const std::vector<int> truth{0, 1, 1};
  CHECK(accuracy(std::vector<int>{0, 1, 1}, truth) == doctest::Approx(1.0));
  CHECK(accuracy(std::vector<int>{1, 0, 0}, truth) == doctest::Approx(0.0));
  CHECK(accuracy(std::vector<int>{0, 1, 0}, truth) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(accuracy(std::vector<int>{0}, truth), Error);
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), Error);

  QrennArchitecture arch{1, 1, 1, 1, ""};
  const auto data = EmbeddedData::repeated(HermitianOperator(pauli::z()), 1);
  CHECK(predict(arch, ParameterVector::zeros(arch), data, basis_state(2, "00")) == 1);
  CHECK(predict(arch, ParameterVector::zeros(arch), data, basis_state(2, "10")) == 0);
}

TEST_CASE("embedded data commutativity") {
  const EmbeddedData commuting({HermitianOperator(pauli::z()), HermitianOperator(2.0 * pauli::z())});
  CHECK_NOTHROW(commuting.require_commuting());
  CHECK(commuting.distinct_generators().size() == 2);
  const EmbeddedData clash({HermitianOperator(pauli::z()), HermitianOperator(pauli::x())});
  CHECK_THROWS_AS(clash.require_commuting(), Error);
  CHECK(EmbeddedData::repeated(HermitianOperator(pauli::x()), 5).distinct_generators().size() == 1);
}
