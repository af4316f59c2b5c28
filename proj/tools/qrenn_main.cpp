#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrenn/config.hpp"
#include "qrenn/error.hpp"

namespace {

using Json = nlohmann::json;

int error_record(const std::string& module, const std::string& message) {
  std::cerr << Json{{"error", {{"module", module}, {"message", message}}}}.dump() << std::endl;
  return 2;
}

std::optional<int> env_threads() {
  const char* raw = std::getenv("QRENN_THREADS");
  if (!raw || !*raw) return std::nullopt;
  const std::string text(raw);
  std::size_t used = 0;
  int value = -1;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || value < 0) throw qrenn::Error("cli", "QRENN_THREADS must be a non-negative integer");
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent embedding network experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::optional<int> threads;
  const char* commands[] = {"gradstats", "train", "spt", "dla-analyze", "overlap-scan", "dataset-gen"};
  for (const char* name : commands) {
    auto* sub = app.add_subcommand(name, std::string("Run ") + name);
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "64-bit seed (overrides the config)");
    sub->add_option("--output", output, "Output directory (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads, 0 = all cores (overrides QRENN_THREADS)")
        ->check(CLI::NonNegativeNumber);
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Json doc = Json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw qrenn::Error("cli", "cannot read " + config_path);
      try {
        doc = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw qrenn::Error("config", std::string("malformed JSON: ") + e.what());
      }
      if (!doc.is_object()) throw qrenn::Error("config", "<root>: expected an object");
      if (doc.contains("command") && doc["command"] != command) {
        throw qrenn::Error("cli", "config command " + doc["command"].dump() + " does not match subcommand " + command);
      }
    }
    doc["command"] = command;
    if (seed) doc["seed"] = *seed;
    if (!output.empty()) doc["output_dir"] = output;
    if (!threads) threads = env_threads();
    if (threads) doc["threads"] = *threads;
    return qrenn::run(qrenn::parse_config(doc.dump()));
  } catch (const qrenn::Error& e) {
    return error_record(e.module(), e.what());
  } catch (const std::exception& e) {
    return error_record("cli", e.what());
  }
}
