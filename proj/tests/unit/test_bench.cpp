#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qrenn/bench.hpp"
#include "qrenn/error.hpp"
#include "qrenn/overlap.hpp"

using namespace qrenn;

namespace {

double max_abs(const ComplexMatrix& a) { return a.cwiseAbs().maxCoeff(); }

TrainConfig tiny_train(FeatureTag tag) {
  TrainConfig cfg;
  cfg.feature = tag;
  cfg.n = tag == FeatureTag::kClusterIsing ? 3 : 1;
  cfg.m = 1;
  cfg.slots = 2;
  cfg.layers = 1;
  cfg.total = 20;
  cfg.train_size = 10;
  cfg.epochs = 10;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("probe and parameter index parsing") {
  for (const char* text : {"zero", "plus", "minus", "mixed:0.25"}) CHECK(to_string(parse_probe(text)) == text);
  CHECK(parse_probe("mixed") == ProbeSpec{ProbeSpec::Kind::kMixed, 0.5});
  CHECK_THROWS_AS(parse_probe("mixed:1.5"), Error);
  CHECK_THROWS_AS(parse_probe("mixed:abc"), Error);
  CHECK_THROWS_AS(parse_probe("ghz"), Error);
  CHECK(to_string(parse_param_index("theta:12")) == "theta:12");
  CHECK(parse_param_index("phi:3").kind == ParamIndex::Kind::kPhi);
  CHECK_THROWS_AS(parse_param_index("theta"), Error);
  CHECK_THROWS_AS(parse_param_index("psi:1"), Error);
  CHECK_THROWS_AS(parse_param_index("theta:-1"), Error);
  CHECK(parse_optimizer(to_string(Optimizer::kGradientDescent)) == Optimizer::kGradientDescent);
  CHECK(parse_data_mode(to_string(DataMode::kPerSlot)) == DataMode::kPerSlot);
}

TEST_CASE("initial states") {
  const auto s = initial_state(2, 1, {ProbeSpec::Kind::kPlus});
  REQUIRE(s.is_pure());
  CHECK(std::abs(s.amplitudes()(0) - 1.0 / std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(s.amplitudes()(1) - 1.0 / std::sqrt(2.0)) <= 1e-15);
  const auto mixed = initial_state(1, 2, {ProbeSpec::Kind::kMixed, 0.5});
  CHECK_FALSE(mixed.is_pure());
  CHECK(std::abs(mixed.trace() - 1.0) <= 1e-12);
  CHECK(default_probe(FeatureTag::kDiagonal).kind == ProbeSpec::Kind::kMixed);
  CHECK(default_probe(FeatureTag::kPauli).kind == ProbeSpec::Kind::kPlus);
}

TEST_CASE("summarize on the sanity circuit") {
  // l = cos(theta), dl/dtheta = -sin(theta) with theta ~ U[0, 2 pi).
  Rng rng(1);
  std::vector<double> xs;
  for (int k = 0; k < 500; ++k) xs.push_back(-std::sin(uniform(rng, 0.0, 2 * std::numbers::pi)));
  const auto s = summarize(xs, 9);
  CHECK(s.count == 500);
  CHECK(std::abs(s.mean) <= 3 * s.stderr_mean);
  CHECK(std::abs(s.variance - 0.5) <= 3 * s.variance_se);
  CHECK(s.ci_low <= s.variance);
  CHECK(s.ci_high >= s.variance);
  CHECK(s.ci_low < 0.5);
  CHECK(s.ci_high > 0.5);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(summarize(one, 0), Error);
}

TEST_CASE("gradient statistics have zero mean and match the prediction mid-circuit") {
  GradStatConfig cfg;
  cfg.feature = FeatureTag::kPauli;
  cfg.m = 1;
  cfg.n_list = {1};
  cfg.slots_list = {16};
  cfg.layers = 4;
  cfg.samples = 3000;
  cfg.target = ParamIndex::theta(8 * 8);
  cfg.seed = 5;
  const auto result = gradient_statistics(cfg);
  REQUIRE(result.rows.size() == 1);
  const auto& row = result.rows[0];
  CHECK(std::abs(row.stats.mean) <= 3 * row.stats.stderr_mean);
  REQUIRE(row.predicted_variance.has_value());
  // Pauli words on one qubit: R^2 = 1 for X and 1/2 for Y, Z against |+>.
  CHECK(std::abs(*row.predicted_variance - 4.0 / 27.0) <= 0.01);
  CHECK(std::abs(row.stats.variance - *row.predicted_variance) <= 3.5 * row.stats.variance_se);
}

TEST_CASE("gradient statistics are reproducible and thread independent") {
  GradStatConfig cfg;
  cfg.feature = FeatureTag::kDiagonal;
  cfg.m = 1;
  cfg.n_list = {1, 2};
  cfg.slots_list = {2, 3};
  cfg.layers = 1;
  cfg.samples = 40;
  cfg.seed = 17;
  const auto a = gradstats_csv(gradient_statistics(cfg));
  cfg.threads = 3;
  const auto b = gradstats_csv(gradient_statistics(cfg));
  CHECK(a == b);
  CHECK(a.substr(0, a.find('\n')) == "n,T,samples,mean,variance,stderr,predicted_variance");
  CHECK(std::count(a.begin(), a.end(), '\n') == 5);
  cfg.seed = 18;
  CHECK(gradstats_csv(gradient_statistics(cfg)) != a);
}

TEST_CASE("phi targets and prediction availability") {
  GradStatConfig cfg;
  cfg.feature = FeatureTag::kDiagonal;
  cfg.m = 1;
  cfg.n_list = {1};
  cfg.slots_list = {3};
  cfg.layers = 1;
  cfg.samples = 20;
  cfg.target = ParamIndex::phi(1);
  cfg.seed = 2;
  CHECK_FALSE(gradient_statistics(cfg).rows[0].predicted_variance.has_value());
  cfg.data_mode = DataMode::kFixed;
  CHECK(gradient_statistics(cfg).rows[0].predicted_variance.has_value());
  cfg.target = ParamIndex::phi(3);
  CHECK_THROWS_AS(gradient_statistics(cfg), Error);
  cfg.target = ParamIndex::theta(0);
  cfg.samples = 1;
  CHECK_THROWS_AS(gradient_statistics(cfg), Error);
}

TEST_CASE("label_flip") {
  const auto ds = build_dataset(FeatureTag::kPauli, 1, 200, 100, 4);
  Rng rng(8);
  int flipped = -1;
  const auto same = label_flip(ds, 0.0, rng, &flipped);
  CHECK(flipped == 0);
  for (std::size_t k = 0; k < ds.train.size(); ++k) CHECK(same.train[k].label == ds.train[k].label);
  const auto all = label_flip(ds, 1.0, rng, &flipped);
  CHECK(flipped == 100);
  for (std::size_t k = 0; k < ds.train.size(); ++k) CHECK(all.train[k].label == 1 - ds.train[k].label);
  for (std::size_t k = 0; k < ds.test.size(); ++k) CHECK(all.test[k].label == ds.test[k].label);
  const auto some = label_flip(ds, 0.05, rng, &flipped);
  CHECK(std::abs(flipped - 5.0) <= 3 * std::sqrt(100 * 0.05 * 0.95));
  CHECK_THROWS_AS(label_flip(ds, 1.5, rng), Error);

  std::vector<int> pred, truth, inverted;
  for (std::size_t k = 0; k < ds.test.size(); ++k) {
    const int y = ds.test[k].label;
    pred.push_back(k < 10 ? 1 - y : y);
    truth.push_back(y);
    inverted.push_back(1 - y);
  }
  CHECK(accuracy(pred, inverted) == doctest::Approx(1.0 - accuracy(pred, truth)));
}

TEST_CASE("crosstalk_embed") {
  Rng rng(12);
  const auto h0 = crosstalk_h0(3, rng);
  CHECK(spectral_norm(h0.matrix()) == doctest::Approx(1.0));
  const auto h = control_embed_generator(HermitianOperator(pauli::word("XY")), 1, "1");
  const auto ideal = expm_i(h);
  CHECK(max_abs(crosstalk_embed(h, 0.0, h0).matrix() - ideal.matrix()) <= 1e-12);
  const auto noisy = crosstalk_embed(h, 0.01, h0);
  CHECK(max_abs(noisy.matrix().adjoint() * noisy.matrix() - identity(8)) <= 1e-9);
  CHECK(frobenius_norm(noisy.matrix() - ideal.matrix()) <= 2 * 0.01 * std::sqrt(8.0));
  CHECK_THROWS_AS(crosstalk_embed(h, 0.01, HermitianOperator(1.5 * h0.matrix())), Error);
}

TEST_CASE("optimizers reach the minimum of a convex slice") {
  // loss = sin^2(theta/2) = (1 - cos theta)/2 for a single rotation.
  for (auto opt : {Optimizer::kGradientDescent, Optimizer::kAdam}) {
    TrainConfig cfg;
    cfg.optimizer = opt;
    cfg.learning_rate = opt == Optimizer::kAdam ? 0.05 : 0.5;
    cfg.epochs = 200;
    ParameterVector p;
    p.theta = {1.2};
    const auto curve = optimize(cfg, p, [](const ParameterVector& q, std::vector<double>& g) {
      g = {0.5 * std::sin(q.theta[0])};
      return 0.5 * (1.0 - std::cos(q.theta[0]));
    });
    CHECK(curve.size() == 201);
    CHECK(curve.back() <= 1e-6);
  }
  TrainConfig cfg;
  cfg.epochs = 3;
  ParameterVector p;
  p.theta = {0.0};
  CHECK_THROWS_AS(optimize(cfg, p, [](const ParameterVector&, std::vector<double>& g) {
                    g = {0.0};
                    return std::nan("");
                  }),
                  Error);
}

TEST_CASE("train_classifier") {
  auto cfg = tiny_train(FeatureTag::kPauli);
  cfg.epochs = 0;
  const auto zero = train_classifier(cfg);
  CHECK(zero.loss_curve.size() == 1);
  CHECK(zero.test_accuracy >= 0.0);
  CHECK(zero.test_accuracy <= 1.0);

  cfg.epochs = 15;
  const auto a = train_classifier(cfg);
  const auto b = train_classifier(cfg);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.test_predictions == b.test_predictions);
  CHECK(a.test_labels.size() == 10);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
  CHECK(predictions_csv(a).starts_with("index,label,prediction,decision,meta\n"));
  CHECK(loss_curve_csv(a).starts_with("epoch,loss\n"));

  auto flip = cfg;
  flip.noise.kind = NoiseSpec::Kind::kLabelFlip;
  flip.noise.rate = 1.0;
  CHECK(train_classifier(flip).flipped_labels == 10);

  auto xt = cfg;
  xt.noise.kind = NoiseSpec::Kind::kCrosstalk;
  xt.noise.delta = 0.0;
  const auto clean = train_classifier(xt);
  CHECK(clean.test_predictions == a.test_predictions);
  xt.noise.delta = 0.01;
  const auto noisy = train_classifier(xt);
  CHECK(noisy.loss_curve.front() != a.loss_curve.front());
  CHECK(std::abs(noisy.loss_curve.front() - a.loss_curve.front()) <= 0.05);

  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train_classifier(cfg), Error);
}

TEST_CASE("spt experiment and sweep") {
  auto cfg = tiny_train(FeatureTag::kClusterIsing);
  cfg.epochs = 3;
  const auto r = spt_experiment(cfg);
  REQUIRE(r.test_meta.size() == 10);
  for (std::size_t k = 0; k < r.test_meta.size(); ++k) {
    REQUIRE(r.test_meta[k].has_value());
    CHECK(r.test_labels[k] == (*r.test_meta[k] < 1.0 ? 0 : 1));
  }
  const std::vector<int> sizes{4, 8};
  const auto rows = spt_training_sweep(cfg, sizes, 2);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.mean_accuracy >= 0.0);
    CHECK(row.mean_accuracy <= 1.0);
  }
  CHECK(sweep_csv(rows).starts_with("train_size,repeats,mean_accuracy,std_accuracy\n"));
  CHECK_THROWS_AS(spt_experiment(tiny_train(FeatureTag::kPauli)), Error);
}

TEST_CASE("overlap_scan") {
  const std::vector<int> ns{3, 4};
  const std::vector<double> lambdas{0.0, 0.5, 1.5};
  const std::vector<ProbeSpec> probes{{ProbeSpec::Kind::kZero}, {ProbeSpec::Kind::kPlus}, {ProbeSpec::Kind::kMinus}};
  const auto rows = overlap_scan(ns, lambdas, probes);
  CHECK(rows.size() == 18);
  for (const auto& r : rows) {
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 1.0 + 1e-12);
  }
  CHECK(overlap_csv(rows).starts_with("n,lambda,probe,overlap\n"));

  // An eigenvector of H(lambda) as the probe gives overlap 1.
  const std::vector<HermitianOperator> set{gen_cluster_ising(3, 0.5)};
  const auto eig = joint_eigenspaces(set);
  const auto e = eigh(set[0]);
  const auto v = QuantumState::pure(e.vectors.matrix().col(0));
  CHECK(joint_overlap(eig, v).value == doctest::Approx(1.0));
}
