// scramblesim <experiment-kind> --config <path> [--seed N] [--out PREFIX] [--workers N]
//                                [--set key=json ...]

#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scramble/experiments/config.hpp"
#include "scramble/experiments/runner.hpp"

namespace ex = scramble::experiments;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::vector<std::string> overrides;
};

json apply_overrides(json doc, const std::string& kind, const Options& opt) {
  if (doc.contains("kind") && doc["kind"] != kind) {
    throw ex::ConfigError("kind", "config is for '" + doc["kind"].dump() +
                                      "' but the subcommand is '" + kind + "'");
  }
  doc["kind"] = kind;
  for (const auto& item : opt.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ex::ConfigError(item, "--set expects key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    doc[key] = parsed.is_discarded() ? json(value) : parsed;
  }
  if (opt.seed) doc["seed"] = *opt.seed;
  if (opt.out) doc["output"] = *opt.out;
  return doc;
}

std::string describe(ex::ExperimentKind kind) {
  switch (kind) {
    case ex::ExperimentKind::EchoGrid:
      return "Final probability over a (t1, t2) grid with time reversal";
    case ex::ExperimentKind::EchoGridForward:
      return "Final probability over a (t1, t2) grid, forward-forward echo";
    case ex::ExperimentKind::Recover:
      return "Recovered central state and axis probabilities at one (t1, t2)";
    case ex::ExperimentKind::NoHiding:
      return "No-hiding scrambler with Pauli-averaged Bob measurement and tomography";
    case ex::ExperimentKind::OtocSeries:
      return "Spin OTOC time series for the spin-bath scrambler";
    case ex::ExperimentKind::HaarCheck:
      return "Monte Carlo Haar average of the OTOC against the twirl formula";
    case ex::ExperimentKind::FluctuationScaling:
      return "Variance of final probabilities over random circuits versus qubit count";
    case ex::ExperimentKind::ClassicalButterfly:
      return "Classical spin echo with and without an invasive measurement";
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information scrambling and recovery experiments"};
  app.require_subcommand(1);
  Options opt;

  for (ex::ExperimentKind kind : ex::all_kinds()) {
    auto* sub = app.add_subcommand(std::string(ex::to_string(kind)), describe(kind));
    sub->add_option("--config", opt.config_path, "JSON config file")->required();
    sub->add_option("--seed", opt.seed, "Master seed (overrides the config)");
    sub->add_option("--out", opt.out, "Output path prefix (overrides the config)");
    sub->add_option("--workers", opt.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--set", opt.overrides, "Override a config field, key=json")->take_all();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string kind = app.get_subcommands().front()->get_name();
    std::ifstream in(opt.config_path);
    if (!in) throw std::runtime_error("cannot open config file '" + opt.config_path + "'");
    json doc;
    try {
      in >> doc;
    } catch (const json::parse_error& e) {
      throw ex::ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    const ex::ExperimentConfig cfg = ex::parse_config(apply_overrides(std::move(doc), kind, opt));
    const unsigned workers = ex::resolve_workers(opt.workers, cfg);
    const ex::RunResult result = ex::run(cfg, workers);
    for (const auto& p : result.outputs) std::cout << p.string() << '\n';
    std::cout << result.manifest.string() << '\n';
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
