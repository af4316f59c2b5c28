#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qrenn/config.hpp"
#include "qrenn/error.hpp"

using namespace qrenn;
using Json = nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qrenn_test_config_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal gradstats config fills defaults") {
  const auto cfg = parse_config(R"({"command": "gradstats", "seed": 7})");
  CHECK(cfg.command == Command::kGradstats);
  REQUIRE(cfg.seed.has_value());
  CHECK(*cfg.seed == 7);
  const auto& g = std::get<GradStatConfig>(cfg.parameters);
  CHECK(g.samples == 500);
  CHECK(g.layers == 3);
  CHECK(g.seed == 7);
  CHECK(g.target == ParamIndex::theta(0));
  const auto echoed = Json::parse(serialize_config(cfg));
  CHECK(echoed["parameters"]["samples"] == 500);
  CHECK(echoed["parameters"]["layers"] == 3);
}

TEST_CASE("strict parsing names the offending key") {
  CHECK(error_of(R"({"command": "gradstats", "seed": 1, "parameters": {"sampels": 10}})")
            .find("parameters.sampels: unknown key") != std::string::npos);
  CHECK(error_of(R"({"command": "gradstats", "seed": 1, "sed": 2})").find("sed: unknown key") != std::string::npos);
  CHECK(error_of(R"({"command": "train", "seed": 1, "parameters": {"noise": {"kind": "none", "rte": 0.1}}})")
            .find("parameters.noise.rte: unknown key") != std::string::npos);
  CHECK(error_of(R"({"command": "gradstats", "seed": 1, "parameters": {"samples": "many"}})")
            .find("parameters.samples: expected an integer") != std::string::npos);
  CHECK(error_of(R"({"command": "gradstats", "seed": 1, "parameters": {"n_list": [2, 2.5]}})")
            .find("parameters.n_list[1]") != std::string::npos);
  CHECK(error_of(R"({"command": "gradstats", "seed": -1})").find("seed:") != std::string::npos);
  CHECK(error_of(R"({"command": "gradstats"})").find("seed: required") != std::string::npos);
  CHECK(error_of(R"({"command": "train", "seed": 1, "parameters": {"feature": "qubit"}})")
            .find("parameters.feature") != std::string::npos);
  CHECK(error_of(R"({"command": "fly", "seed": 1})").find("command") != std::string::npos);
  CHECK(error_of(R"({"seed": 1})").find("command: missing") != std::string::npos);
  CHECK(error_of("{not json").find("malformed JSON") != std::string::npos);
  CHECK(error_of(R"({"command": "gradstats", "seed": 1, "parameters": {"samples": 1}})").find("samples") !=
        std::string::npos);
}

TEST_CASE("deterministic commands need no seed") {
  CHECK_NOTHROW(parse_config(R"({"command": "overlap-scan"})"));
  CHECK_NOTHROW(parse_config(R"({"command": "dla-analyze"})"));
  CHECK_THROWS_AS(parse_config(R"({"command": "dla-analyze", "parameters": {"random_levels": 2}})"), Error);
}

TEST_CASE("serialize and parse round trip") {
  for (auto command : {Command::kGradstats, Command::kTrain, Command::kSpt, Command::kDlaAnalyze,
                       Command::kOverlapScan, Command::kDatasetGen}) {
    auto cfg = default_config(command);
    cfg.seed = 0xffffffffffffffffULL;
    cfg.threads = 3;
    cfg.output_dir = "out/x";
    finalize(cfg);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
  auto cfg = parse_config(R"({
    "command": "train", "seed": 11,
    "parameters": {"feature": "involutory", "n": 4, "learning_rate": 0.0123456789012345,
                   "noise": {"kind": "crosstalk", "delta": 0.01, "h0_seed": 5}, "probe": "mixed:0.3",
                   "optimizer": "gradient-descent"}})");
  CHECK(parse_config(serialize_config(cfg)) == cfg);
  const auto& t = std::get<TrainConfig>(cfg.parameters);
  CHECK(t.noise.kind == NoiseSpec::Kind::kCrosstalk);
  CHECK(t.noise.h0_seed == std::optional<std::uint64_t>(5));
  CHECK(t.probe == std::optional<ProbeSpec>(ProbeSpec{ProbeSpec::Kind::kMixed, 0.3}));

  auto g = parse_config(R"({"command": "gradstats", "seed": 3,
    "parameters": {"target": "phi:2", "data_mode": "fixed", "multiplicity_weight": "none", "n_list": [1, 2]}})");
  CHECK(parse_config(serialize_config(g)) == g);
}

TEST_CASE("run dla-analyze reports the closure structure") {
  auto cfg = parse_config(R"({"command": "dla-analyze", "parameters": {"m": 1, "n": 1, "data": ["Z"]}})");
  cfg.output_dir = scratch("dla");
  REQUIRE(run(cfg) == 0);
  const auto manifest = Json::parse(slurp(cfg.output_dir / "manifest.json"));
  CHECK(manifest["metrics"]["closure_dim"] == 7);
  CHECK(manifest["metrics"]["ideal_dims"] == Json::array({3, 3}));
  CHECK(manifest["metrics"]["center_dim"] == 1);
  CHECK(slurp(cfg.output_dir / "dla.csv").starts_with("ideal,eigenvalues,multiplicity,dimension\n"));
  std::filesystem::remove_all(cfg.output_dir);
}

TEST_CASE("run gradstats twice gives identical CSV") {
  auto cfg = parse_config(R"({"command": "gradstats", "seed": 21,
    "parameters": {"m": 1, "n_list": [1, 2], "slots_list": [3], "layers": 1, "samples": 30}})");
  const auto a = scratch("grad_a"), b = scratch("grad_b");
  cfg.output_dir = a;
  REQUIRE(run(cfg) == 0);
  cfg.output_dir = b;
  REQUIRE(run(cfg) == 0);
  const auto csv = slurp(a / "gradstats.csv");
  CHECK(csv == slurp(b / "gradstats.csv"));
  CHECK(csv.starts_with("n,T,samples,mean,variance,stderr,predicted_variance\n"));
  const auto manifest = Json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["seed"] == 21);
  CHECK(manifest["config"]["parameters"]["samples"] == 30);
  CHECK(manifest.contains("wall_seconds"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("run train reports test accuracy and dataset hashes") {
  auto cfg = parse_config(R"({"command": "train", "seed": 4,
    "parameters": {"feature": "pauli", "n": 3, "m": 2, "slots": 2, "layers": 1, "total": 40, "train_size": 10,
                   "epochs": 2}})");
  cfg.output_dir = scratch("train");
  REQUIRE(run(cfg) == 0);
  const auto manifest = Json::parse(slurp(cfg.output_dir / "manifest.json"));
  const double acc = manifest["metrics"]["test_accuracy"];
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(manifest["dataset_hashes"]["dataset.bin"] == git_blob_hash(cfg.output_dir / "dataset.bin"));
  CHECK(slurp(cfg.output_dir / "predictions.csv").starts_with("index,label,prediction,decision,meta\n"));
  std::filesystem::remove_all(cfg.output_dir);
}

TEST_CASE("run dataset-gen and overlap-scan") {
  auto ds = parse_config(R"({"command": "dataset-gen", "seed": 9,
    "parameters": {"feature": "cluster_ising", "n": 3, "total": 12, "train_size": 4}})");
  ds.output_dir = scratch("dataset");
  REQUIRE(run(ds) == 0);
  const auto split = load_dataset(ds.output_dir / "dataset.json");
  CHECK(split.train.size() == 4);
  CHECK(slurp(ds.output_dir / "labels.csv").starts_with("split,index,label,feature_tag,meta\n"));
  std::filesystem::remove_all(ds.output_dir);

  auto ov = parse_config(R"({"command": "overlap-scan",
    "parameters": {"n_list": [3], "lambda_steps": 3, "probes": ["plus", "minus"]}})");
  ov.output_dir = scratch("overlap");
  REQUIRE(run(ov) == 0);
  const auto csv = slurp(ov.output_dir / "overlap.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  std::filesystem::remove_all(ov.output_dir);
}

TEST_CASE("run reports failures with a nonzero exit code") {
  auto cfg = parse_config(R"({"command": "spt", "seed": 1, "parameters": {"feature": "pauli"}})");
  cfg.output_dir = scratch("fail");
  CHECK(run(cfg) != 0);
  std::filesystem::remove_all(cfg.output_dir);
}
