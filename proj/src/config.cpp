#include "qrenn/config.hpp"

#include <array>
#include <chrono>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qrenn/dla.hpp"
#include "qrenn/error.hpp"

namespace qrenn {

namespace {

using Json = nlohmann::json;

constexpr std::array<std::pair<Command, std::string_view>, 6> kCommandNames{{
    {Command::kGradstats, "gradstats"},
    {Command::kTrain, "train"},
    {Command::kSpt, "spt"},
    {Command::kDlaAnalyze, "dla-analyze"},
    {Command::kOverlapScan, "overlap-scan"},
    {Command::kDatasetGen, "dataset-gen"},
}};

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw Error("config", path + ": " + what); }

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

int as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    fail(path, "integer out of range");
  }
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(path, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t as_u64(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) fail(path, "expected a non-negative integer");
  fail(path, "expected an unsigned 64-bit integer");
}

double as_double(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

template <typename T, typename Fn>
std::vector<T> as_list(const Json& v, const std::string& path, Fn&& item) {
  if (!v.is_array()) fail(path, "expected a list");
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(item(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

/// Reads keys of one JSON object and rejects the ones never asked for.
class Fields {
 public:
  Fields(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const Json* get(std::string_view key) {
    used_.insert(std::string(key));
    const auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(std::string_view key) const { return join(path_, key); }

  void read(std::string_view key, int& out) {
    if (const auto* v = get(key)) out = as_int(*v, path(key));
  }
  void read(std::string_view key, std::uint64_t& out) {
    if (const auto* v = get(key)) out = as_u64(*v, path(key));
  }
  void read(std::string_view key, double& out) {
    if (const auto* v = get(key)) out = as_double(*v, path(key));
  }
  void read(std::string_view key, std::string& out) {
    if (const auto* v = get(key)) out = as_string(*v, path(key));
  }
  void read(std::string_view key, std::vector<int>& out) {
    if (const auto* v = get(key)) out = as_list<int>(*v, path(key), as_int);
  }
  void read(std::string_view key, std::vector<std::string>& out) {
    if (const auto* v = get(key)) out = as_list<std::string>(*v, path(key), as_string);
  }
  template <typename T, typename Parse>
  void read_enum(std::string_view key, T& out, Parse&& parse) {
    if (const auto* v = get(key)) {
      const auto text = as_string(*v, path(key));
      out = with_path(path(key), [&] { return parse(text); });
    }
  }
  void read(std::string_view key, std::optional<ProbeSpec>& out) {
    if (const auto* v = get(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      const auto text = as_string(*v, path(key));
      out = with_path(path(key), [&] { return parse_probe(text); });
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.contains(key)) fail(join(path_, key), "unknown key");
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

MultiplicityWeight parse_weight(std::string_view text) {
  if (text == "squared") return MultiplicityWeight::kSquared;
  if (text == "none") return MultiplicityWeight::kNone;
  throw Error("config", "unknown multiplicity weight '" + std::string(text) + "'");
}

std::string weight_name(MultiplicityWeight w) { return w == MultiplicityWeight::kSquared ? "squared" : "none"; }

NoiseSpec::Kind parse_noise_kind(std::string_view text) {
  if (text == "none") return NoiseSpec::Kind::kNone;
  if (text == "label_flip") return NoiseSpec::Kind::kLabelFlip;
  if (text == "crosstalk") return NoiseSpec::Kind::kCrosstalk;
  throw Error("config", "unknown noise kind '" + std::string(text) + "'");
}

std::string noise_name(NoiseSpec::Kind k) {
  switch (k) {
    case NoiseSpec::Kind::kNone: return "none";
    case NoiseSpec::Kind::kLabelFlip: return "label_flip";
    case NoiseSpec::Kind::kCrosstalk: return "crosstalk";
  }
  return "none";
}

Json probe_json(const std::optional<ProbeSpec>& p) { return p ? Json(to_string(*p)) : Json(nullptr); }

void read_gradstats(Fields& f, GradStatConfig& c) {
  f.read_enum("feature", c.feature, parse_feature);
  f.read("n_list", c.n_list);
  f.read("slots_list", c.slots_list);
  f.read("m", c.m);
  f.read("layers", c.layers);
  f.read("samples", c.samples);
  f.read_enum("target", c.target, parse_param_index);
  f.read("probe", c.probe);
  f.read_enum("data_mode", c.data_mode, parse_data_mode);
  f.read_enum("multiplicity_weight", c.weight, parse_weight);
  f.read("embed_scale", c.embed_scale);
  f.read("bootstrap", c.bootstrap);
}

Json write_gradstats(const GradStatConfig& c) {
  return Json{{"feature", to_string(c.feature)},
              {"n_list", c.n_list},
              {"slots_list", c.slots_list},
              {"m", c.m},
              {"layers", c.layers},
              {"samples", c.samples},
              {"target", to_string(c.target)},
              {"probe", probe_json(c.probe)},
              {"data_mode", to_string(c.data_mode)},
              {"multiplicity_weight", weight_name(c.weight)},
              {"embed_scale", c.embed_scale},
              {"bootstrap", c.bootstrap}};
}

void read_train(Fields& f, TrainConfig& c) {
  f.read_enum("feature", c.feature, parse_feature);
  f.read("n", c.n);
  f.read("m", c.m);
  f.read("slots", c.slots);
  f.read("layers", c.layers);
  f.read("total", c.total);
  f.read("train_size", c.train_size);
  f.read_enum("optimizer", c.optimizer, parse_optimizer);
  f.read("learning_rate", c.learning_rate);
  f.read("epochs", c.epochs);
  if (const auto* v = f.get("adam")) {
    Fields a(*v, f.path("adam"));
    a.read("beta1", c.adam.beta1);
    a.read("beta2", c.adam.beta2);
    a.read("epsilon", c.adam.epsilon);
    a.finish();
  }
  if (const auto* v = f.get("noise")) {
    Fields nf(*v, f.path("noise"));
    nf.read_enum("kind", c.noise.kind, parse_noise_kind);
    nf.read("rate", c.noise.rate);
    nf.read("delta", c.noise.delta);
    if (const auto* s = nf.get("h0_seed")) {
      if (s->is_null()) {
        c.noise.h0_seed.reset();
      } else {
        c.noise.h0_seed = as_u64(*s, nf.path("h0_seed"));
      }
    }
    nf.finish();
  }
  f.read("probe", c.probe);
  f.read("embed_scale", c.embed_scale);
}

Json write_train(const TrainConfig& c) {
  return Json{{"feature", to_string(c.feature)},
              {"n", c.n},
              {"m", c.m},
              {"slots", c.slots},
              {"layers", c.layers},
              {"total", c.total},
              {"train_size", c.train_size},
              {"optimizer", to_string(c.optimizer)},
              {"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}},
              {"noise",
               {{"kind", noise_name(c.noise.kind)},
                {"rate", c.noise.rate},
                {"delta", c.noise.delta},
                {"h0_seed", c.noise.h0_seed ? Json(*c.noise.h0_seed) : Json(nullptr)}}},
              {"probe", probe_json(c.probe)},
              {"embed_scale", c.embed_scale}};
}

void read_params(Fields& f, CommandParams& params) {
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GradStatConfig>) {
          read_gradstats(f, p);
        } else if constexpr (std::is_same_v<T, TrainConfig>) {
          read_train(f, p);
        } else if constexpr (std::is_same_v<T, SptParams>) {
          read_train(f, p.train);
          f.read("sweep_sizes", p.sweep_sizes);
          f.read("sweep_repeats", p.sweep_repeats);
        } else if constexpr (std::is_same_v<T, DlaAnalyzeParams>) {
          f.read("m", p.m);
          f.read("n", p.n);
          f.read("data", p.data);
          f.read("random_levels", p.random_levels);
          f.read("control", p.control);
          f.read("max_dim", p.max_dim);
        } else if constexpr (std::is_same_v<T, OverlapScanParams>) {
          f.read("n_list", p.n_list);
          f.read("lambda_min", p.lambda_min);
          f.read("lambda_max", p.lambda_max);
          f.read("lambda_steps", p.lambda_steps);
          if (const auto* v = f.get("probes")) {
            const auto path = f.path("probes");
            p.probes = as_list<ProbeSpec>(*v, path, [](const Json& item, const std::string& at) {
              const auto text = as_string(item, at);
              return with_path(at, [&] { return parse_probe(text); });
            });
          }
        } else {
          f.read_enum("feature", p.feature, parse_feature);
          f.read("n", p.n);
          f.read("total", p.total);
          f.read("train_size", p.train_size);
        }
      },
      params);
}

Json write_params(const CommandParams& params) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GradStatConfig>) {
          return write_gradstats(p);
        } else if constexpr (std::is_same_v<T, TrainConfig>) {
          return write_train(p);
        } else if constexpr (std::is_same_v<T, SptParams>) {
          Json j = write_train(p.train);
          j["sweep_sizes"] = p.sweep_sizes;
          j["sweep_repeats"] = p.sweep_repeats;
          return j;
        } else if constexpr (std::is_same_v<T, DlaAnalyzeParams>) {
          return Json{{"m", p.m},       {"n", p.n},           {"data", p.data}, {"random_levels", p.random_levels},
                      {"control", p.control}, {"max_dim", p.max_dim}};
        } else if constexpr (std::is_same_v<T, OverlapScanParams>) {
          Json probes = Json::array();
          for (const auto& pr : p.probes) probes.push_back(to_string(pr));
          return Json{{"n_list", p.n_list},         {"lambda_min", p.lambda_min}, {"lambda_max", p.lambda_max},
                      {"lambda_steps", p.lambda_steps}, {"probes", probes}};
        } else {
          return Json{{"feature", to_string(p.feature)}, {"n", p.n}, {"total", p.total}, {"train_size", p.train_size}};
        }
      },
      params);
}

Json config_json(const RunConfig& cfg) {
  return Json{{"command", to_string(cfg.command)},
              {"seed", cfg.seed ? Json(*cfg.seed) : Json(nullptr)},
              {"output_dir", cfg.output_dir.string()},
              {"threads", cfg.threads},
              {"parameters", write_params(cfg.parameters)}};
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("config", "cannot write " + file.string());
  out << text;
  if (!out) throw Error("config", "failed writing " + file.string());
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed << v;
  return out.str();
}

Json dataset_hashes(const std::filesystem::path& dir, const std::string& stem) {
  return Json{{stem + ".json", git_blob_hash(dir / (stem + ".json"))},
              {stem + ".bin", git_blob_hash(dir / (stem + ".bin"))}};
}

void record_training(const TrainResult& r, const std::filesystem::path& dir, Json& manifest) {
  write_text(dir / "predictions.csv", predictions_csv(r));
  write_text(dir / "loss_curve.csv", loss_curve_csv(r));
  manifest["metrics"] = Json{{"train_accuracy", r.train_accuracy},
                             {"test_accuracy", r.test_accuracy},
                             {"initial_loss", r.loss_curve.front()},
                             {"final_loss", r.loss_curve.back()},
                             {"flipped_labels", r.flipped_labels},
                             {"test_size", r.test_labels.size()}};
  manifest["files"] = {"predictions.csv", "loss_curve.csv", "dataset.json", "dataset.bin"};
}

std::string run_gradstats(const GradStatConfig& c, const std::filesystem::path& dir, Json& manifest) {
  const auto result = gradient_statistics(c);
  write_text(dir / "gradstats.csv", gradstats_csv(result));
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"n", r.n},
                    {"T", r.slots},
                    {"samples", r.stats.count},
                    {"mean", r.stats.mean},
                    {"variance", r.stats.variance},
                    {"stderr", r.stats.stderr_mean},
                    {"variance_se", r.stats.variance_se},
                    {"variance_ci", {r.stats.ci_low, r.stats.ci_high}},
                    {"predicted_variance", r.predicted_variance ? Json(*r.predicted_variance) : Json(nullptr)}});
  }
  manifest["metrics"] = {{"rows", rows}, {"ci_level", kDefaultCiLevel}};
  manifest["files"] = {"gradstats.csv"};
  return std::to_string(result.rows.size()) + " rows";
}

std::string run_train(const TrainConfig& c, const std::filesystem::path& dir, Json& manifest) {
  const auto split = build_dataset(c.feature, c.n, c.total, c.train_size, c.seed);
  save_dataset(split, dir, "dataset");
  manifest["dataset_hashes"] = dataset_hashes(dir, "dataset");
  const auto result = train_on(c, split);
  record_training(result, dir, manifest);
  return "test_accuracy=" + fmt(result.test_accuracy) + " train_accuracy=" + fmt(result.train_accuracy);
}

std::string run_spt(const SptParams& p, const std::filesystem::path& dir, Json& manifest) {
  if (p.train.feature != FeatureTag::kClusterIsing) throw Error("config", "spt needs feature cluster_ising");
  std::string summary = run_train(p.train, dir, manifest);
  if (!p.sweep_sizes.empty()) {
    const auto rows = spt_training_sweep(p.train, p.sweep_sizes, p.sweep_repeats);
    write_text(dir / "sweep.csv", sweep_csv(rows));
    manifest["files"].push_back("sweep.csv");
    Json sweep = Json::array();
    for (const auto& r : rows) {
      sweep.push_back({{"train_size", r.train_size}, {"mean_accuracy", r.mean_accuracy}, {"std_accuracy", r.std_accuracy}});
    }
    manifest["metrics"]["sweep"] = sweep;
    summary += " sweep_rows=" + std::to_string(rows.size());
  }
  return summary;
}

std::string run_dla(const DlaAnalyzeParams& p, std::optional<std::uint64_t> seed, const std::filesystem::path& dir,
                    Json& manifest) {
  std::vector<HermitianOperator> data;
  if (p.random_levels > 0) {
    Rng rng(*seed);
    data.push_back(gen_with_levels(p.n, p.random_levels, rng));
  } else {
    if (p.data.empty()) throw Error("config", "parameters.data: at least one Pauli word is required");
    for (const auto& w : p.data) {
      if (static_cast<int>(w.size()) != p.n) throw Error("config", "parameters.data: word '" + w + "' is not of length n");
      data.push_back(HermitianOperator(pauli::word(w)));
    }
  }
  const auto eig = joint_eigenspaces(data);
  const auto gens = qrenn_generators(p.m, data, p.control);
  const std::size_t cap = p.max_dim > 0 ? static_cast<std::size_t>(p.max_dim) : default_max_dim(p.m, eig.size());
  const auto closure = lie_closure(gens, kClosureTol, cap);
  const auto dec = decompose(closure, p.m, eig);

  std::ostringstream csv;
  csv << "ideal,eigenvalues,multiplicity,dimension\n";
  csv.precision(17);
  Json ideal_dims = Json::array(), tuples = Json::array();
  for (std::size_t k = 0; k < dec.r(); ++k) {
    csv << k << ',';
    for (std::size_t i = 0; i < eig.tuples[k].size(); ++i) csv << (i ? ";" : "") << eig.tuples[k][i];
    csv << ',' << eig.multiplicities[k] << ',' << dec.ideals[k].size() << '\n';
    ideal_dims.push_back(dec.ideals[k].size());
    tuples.push_back(eig.tuples[k]);
  }
  write_text(dir / "dla.csv", csv.str());
  manifest["metrics"] = {{"closure_dim", closure.size()},
                         {"commutator_ideal_dim", commutator_ideal_dim(closure)},
                         {"ideal_dims", ideal_dims},
                         {"center_dim", dec.center.size()},
                         {"r", dec.r()},
                         {"multiplicities", eig.multiplicities},
                         {"eigenvalue_tuples", tuples}};
  manifest["files"] = {"dla.csv"};
  return "closure_dim=" + std::to_string(closure.size()) + " center_dim=" + std::to_string(dec.center.size());
}

std::string run_overlap(const OverlapScanParams& p, const std::filesystem::path& dir, Json& manifest) {
  if (p.lambda_steps < 1) throw Error("config", "parameters.lambda_steps: must be positive");
  std::vector<double> grid;
  for (int k = 0; k < p.lambda_steps; ++k) {
    grid.push_back(p.lambda_steps == 1 ? p.lambda_min
                                       : p.lambda_min + (p.lambda_max - p.lambda_min) * k / (p.lambda_steps - 1));
  }
  const auto rows = overlap_scan(p.n_list, grid, p.probes);
  write_text(dir / "overlap.csv", overlap_csv(rows));
  Json flatness = Json::array();
  for (int n : p.n_list) {
    for (const auto& probe : p.probes) {
      double lo = 2.0, hi = -1.0;
      for (const auto& r : rows) {
        if (r.n == n && r.probe == to_string(probe)) {
          lo = std::min(lo, r.value);
          hi = std::max(hi, r.value);
        }
      }
      flatness.push_back({{"n", n}, {"probe", to_string(probe)}, {"min", lo}, {"max", hi},
                          {"max_over_min", lo > 0.0 ? Json(hi / lo) : Json(nullptr)}});
    }
  }
  manifest["metrics"] = {{"rows", rows.size()}, {"flatness", flatness}};
  manifest["files"] = {"overlap.csv"};
  return std::to_string(rows.size()) + " rows";
}

std::string run_dataset(const DatasetGenParams& p, std::uint64_t seed, const std::filesystem::path& dir,
                        Json& manifest) {
  const auto split = build_dataset(p.feature, p.n, p.total, p.train_size, seed);
  save_dataset(split, dir, "dataset");
  std::ostringstream csv;
  csv << "split,index,label,feature_tag,meta\n";
  csv.precision(17);
  int ones = 0;
  for (const auto& [name, part] : {std::pair{"train", &split.train}, std::pair{"test", &split.test}}) {
    for (std::size_t k = 0; k < part->size(); ++k) {
      const auto& s = (*part)[k];
      ones += s.label;
      csv << name << ',' << k << ',' << s.label << ',' << to_string(s.tag) << ',';
      if (s.meta) csv << *s.meta;
      csv << '\n';
    }
  }
  write_text(dir / "labels.csv", csv.str());
  manifest["dataset_hashes"] = dataset_hashes(dir, "dataset");
  manifest["metrics"] = {{"train_size", split.train.size()}, {"test_size", split.test.size()}, {"label_ones", ones}};
  manifest["files"] = {"labels.csv", "dataset.json", "dataset.bin"};
  return std::to_string(split.train.size()) + " train / " + std::to_string(split.test.size()) + " test";
}

}  // namespace

std::string to_string(Command command) {
  for (const auto& [c, name] : kCommandNames) {
    if (c == command) return std::string(name);
  }
  throw Error("config", "unknown command");
}

Command parse_command(std::string_view name) {
  for (const auto& [c, n] : kCommandNames) {
    if (n == name) return c;
  }
  throw Error("config", "unknown command '" + std::string(name) + "'");
}

RunConfig default_config(Command command) {
  RunConfig cfg;
  cfg.command = command;
  switch (command) {
    case Command::kGradstats: cfg.parameters = GradStatConfig{}; break;
    case Command::kTrain: cfg.parameters = TrainConfig{}; break;
    case Command::kSpt: cfg.parameters = SptParams{}; break;
    case Command::kDlaAnalyze: cfg.parameters = DlaAnalyzeParams{}; break;
    case Command::kOverlapScan: cfg.parameters = OverlapScanParams{}; break;
    case Command::kDatasetGen: cfg.parameters = DatasetGenParams{}; break;
  }
  return cfg;
}

bool is_stochastic(const RunConfig& cfg) {
  if (cfg.command == Command::kOverlapScan) return false;
  if (const auto* p = std::get_if<DlaAnalyzeParams>(&cfg.parameters)) return p->random_levels > 0;
  return true;
}

void finalize(RunConfig& cfg) {
  if (cfg.threads < 0) throw Error("config", "threads: must be non-negative");
  if (is_stochastic(cfg) && !cfg.seed) {
    throw Error("config", "seed: required for command " + to_string(cfg.command));
  }
  const std::uint64_t seed = cfg.seed.value_or(0);
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        with_path("parameters", [&] {
          if constexpr (std::is_same_v<T, GradStatConfig> || std::is_same_v<T, TrainConfig>) {
            p.seed = seed;
            p.threads = cfg.threads;
            p.validate();
          } else if constexpr (std::is_same_v<T, SptParams>) {
            p.train.seed = seed;
            p.train.threads = cfg.threads;
            p.train.validate();
            if (p.sweep_repeats < 1) throw Error("config", "sweep_repeats must be positive");
          } else if constexpr (std::is_same_v<T, DlaAnalyzeParams>) {
            if (p.m < 1 || p.n < 1) throw Error("config", "m and n must be positive");
          }
          return 0;
        });
      },
      cfg.parameters);
}

RunConfig parse_config(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error("config", std::string("malformed JSON: ") + e.what());
  }
  Fields top(doc, "");
  const Json* command = top.get("command");
  if (!command) fail("command", "missing");
  RunConfig cfg = default_config(with_path("command", [&] { return parse_command(as_string(*command, "command")); }));
  if (const auto* s = top.get("seed"); s && !s->is_null()) cfg.seed = as_u64(*s, "seed");
  std::string out = cfg.output_dir.string();
  top.read("output_dir", out);
  cfg.output_dir = out;
  top.read("threads", cfg.threads);
  if (const auto* p = top.get("parameters")) {
    Fields f(*p, "parameters");
    read_params(f, cfg.parameters);
    f.finish();
  }
  top.finish();
  finalize(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("config", "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

int run(RunConfig cfg) {
  try {
    finalize(cfg);
    const auto start = std::chrono::steady_clock::now();
    const auto& dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    Json manifest{{"command", to_string(cfg.command)},
                  {"seed", cfg.seed ? Json(*cfg.seed) : Json(nullptr)},
                  {"code_version", kCodeVersion},
                  {"config", config_json(cfg)}};
    const std::string summary = std::visit(
        [&](const auto& p) -> std::string {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, GradStatConfig>) {
            return run_gradstats(p, dir, manifest);
          } else if constexpr (std::is_same_v<T, TrainConfig>) {
            return run_train(p, dir, manifest);
          } else if constexpr (std::is_same_v<T, SptParams>) {
            return run_spt(p, dir, manifest);
          } else if constexpr (std::is_same_v<T, DlaAnalyzeParams>) {
            return run_dla(p, cfg.seed, dir, manifest);
          } else if constexpr (std::is_same_v<T, OverlapScanParams>) {
            return run_overlap(p, dir, manifest);
          } else {
            return run_dataset(p, *cfg.seed, dir, manifest);
          }
        },
        cfg.parameters);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["wall_seconds"] = wall;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << to_string(cfg.command) << ": " << summary << " (" << fmt(wall) << " s) -> " << dir.string()
              << std::endl;
    return 0;
  } catch (const Error& e) {
    std::cerr << Json{{"error", {{"module", e.module()}, {"message", e.what()}}}}.dump() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"module", "unknown"}, {"message", e.what()}}}}.dump() << std::endl;
    return 2;
  }
}

}  // namespace qrenn
