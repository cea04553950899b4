#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "scramble/experiments/config.hpp"
#include "scramble/experiments/output.hpp"
#include "scramble/experiments/runner.hpp"

namespace scramble::experiments {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scramblesim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SCRAMBLESIM_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, MinimalEchoGridParses) {
  const auto cfg = parse_config(json{{"kind", "echo-grid"}, {"seed", 1}});
  EXPECT_EQ(cfg.kind, ExperimentKind::EchoGrid);
  EXPECT_EQ(cfg.integer("n_bath"), 10);
  EXPECT_EQ(cfg.numbers("t1").size(), 20u);
  EXPECT_DOUBLE_EQ(cfg.numbers("t1").back(), 40.0);
}

TEST(Config, MissingSeedIsNamed) {
  try {
    parse_config(json{{"kind", "echo-grid"}});
    FAIL() << "expected a schema error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "seed");
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }
}

TEST(Config, SchemaViolationsCarryFieldPaths) {
  auto path_of = [](const json& doc) -> std::string {
    try {
      parse_config(doc);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return "<accepted>";
  };
  EXPECT_EQ(path_of(json{{"kind", "echo-grid"}, {"seed", 1}, {"bogus", 3}}), "bogus");
  EXPECT_EQ(path_of(json{{"kind", "nope"}, {"seed", 1}}), "kind");
  EXPECT_EQ(path_of(json{{"kind", "echo-grid"}, {"seed", -4}}), "seed");
  EXPECT_EQ(path_of(json{{"kind", "echo-grid"}, {"seed", 1}, {"n_bath", 40}}), "n_bath");
  EXPECT_EQ(path_of(json{{"kind", "echo-grid"}, {"seed", 1}, {"t1", {{"start", 0}, {"stop", 1}}}}),
            "t1.count");
  EXPECT_EQ(path_of(json{{"kind", "echo-grid"}, {"seed", 1}, {"t2", json::array({1.0, -2.0})}}), "t2[1]");
  EXPECT_EQ(path_of(json{{"kind", "recover"}, {"seed", 1}, {"bob", json::array({1, 1, 0})}}), "bob");
  EXPECT_EQ(path_of(json{{"kind", "haar-check"}, {"seed", 1}, {"dim", 12}}), "dim");
  EXPECT_EQ(path_of(json{{"kind", "fluctuation-scaling"}, {"seed", 1}, {"n_q", json::array({4, 5})}}), "n_q");
  EXPECT_EQ(path_of(json{{"kind", "fluctuation-scaling"}, {"seed", 1}, {"pairing", "ring"}}), "pairing");
  EXPECT_EQ(path_of(json{{"kind", "classical-butterfly"}, {"seed", 1}, {"dt", 0}}), "dt");
}

TEST(Config, RoundTripIsIdentity) {
  for (ExperimentKind kind : all_kinds()) {
    json doc{{"kind", std::string(to_string(kind))}, {"seed", 77}, {"workers", 3}};
    const auto cfg = parse_config(doc);
    EXPECT_EQ(parse_config(to_json(cfg)), cfg) << to_string(kind);
    EXPECT_EQ(to_json(parse_config(to_json(cfg))), to_json(cfg));
  }
  const auto explicit_axes = parse_config(json{{"kind", "recover"},
                                               {"seed", 5},
                                               {"bob", json::array({0.6, 0.0, 0.8})},
                                               {"output", "somewhere/run"}});
  EXPECT_EQ(parse_config(to_json(explicit_axes)), explicit_axes);
}

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), std::runtime_error);
}

TEST(Config, ShippedConfigsCoverEveryKind) {
  std::set<std::string> seen;
  for (const auto& entry : fs::directory_iterator(SCRAMBLE_CONFIG_DIR)) {
    const ExperimentConfig cfg = load_config(entry.path());
    EXPECT_EQ(std::string(to_string(cfg.kind)), entry.path().stem().string());
    EXPECT_EQ(cfg, parse_config(to_json(cfg)));
    seen.insert(entry.path().stem().string());
  }
  EXPECT_EQ(seen.size(), all_kinds().size());
}

TEST(Output, ShortestRoundTripDoubles) {
  for (double x : {0.1, 1.0 / 3.0, 2.0, 1e-300, 123456.789, -0.0}) {
    const std::string s = format_double(x);
    EXPECT_EQ(std::stod(s), x) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(-0.0), "0");
}

TEST(Output, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, WorkerPrecedence) {
  auto cfg = parse_config(json{{"kind", "echo-grid"}, {"seed", 1}, {"workers", 3}});
  ::unsetenv("SCRAMBLESIM_WORKERS");
  EXPECT_EQ(resolve_workers(std::nullopt, cfg), 3u);
  ::setenv("SCRAMBLESIM_WORKERS", "5", 1);
  EXPECT_EQ(resolve_workers(std::nullopt, cfg), 5u);
  EXPECT_EQ(resolve_workers(2u, cfg), 2u);
  ::setenv("SCRAMBLESIM_WORKERS", "zero", 1);
  EXPECT_THROW(resolve_workers(std::nullopt, cfg), std::invalid_argument);
  ::unsetenv("SCRAMBLESIM_WORKERS");
}

json small_config(ExperimentKind kind) {
  json doc{{"kind", std::string(to_string(kind))}, {"seed", 42}};
  switch (kind) {
    case ExperimentKind::EchoGrid:
    case ExperimentKind::EchoGridForward:
      doc["n_bath"] = 5;
      doc["t1"] = {{"start", 1}, {"stop", 10}, {"count", 4}};
      doc["t2"] = {{"start", 1}, {"stop", 10}, {"count", 4}};
      break;
    case ExperimentKind::Recover:
      doc["n_bath"] = 5;
      doc["shots"] = 500;
      break;
    case ExperimentKind::OtocSeries:
      doc["n_bath"] = 5;
      doc["times"] = {{"start", 0}, {"stop", 5}, {"count", 6}};
      break;
    case ExperimentKind::HaarCheck:
      doc["samples"] = 300;
      break;
    case ExperimentKind::FluctuationScaling:
      doc["n_q"] = {3, 4, 5};
      doc["layers"] = 20;
      doc["samples"] = 30;
      break;
    case ExperimentKind::ClassicalButterfly:
      doc["n_bath"] = 5;
      doc["t1"] = 1.0;
      doc["dt"] = 1e-2;
      doc["ensemble"] = 6;
      doc["stride"] = 10;
      break;
    default:
      break;
  }
  return doc;
}

std::map<std::string, std::string> csv_bytes(const RunResult& r) {
  std::map<std::string, std::string> out;
  for (const auto& p : r.outputs) out[p.filename().string()] = slurp(p);
  return out;
}

TEST(Runner, EveryKindIsDeterministicAcrossRerunsAndWorkers) {
  const fs::path dir = scratch("determinism");
  for (ExperimentKind kind : all_kinds()) {
    json doc = small_config(kind);
    doc["output"] = (dir / "a" / std::string(to_string(kind))).string();
    const json doc_a = doc;
    const auto a = run(parse_config(doc), 1);
    doc["output"] = (dir / "b" / std::string(to_string(kind))).string();
    const auto b = run(parse_config(doc), 1);
    doc["output"] = (dir / "c" / std::string(to_string(kind))).string();
    const auto c = run(parse_config(doc), 4);
    ASSERT_FALSE(a.outputs.empty()) << to_string(kind);
    EXPECT_EQ(csv_bytes(a), csv_bytes(b)) << to_string(kind);
    EXPECT_EQ(csv_bytes(a), csv_bytes(c)) << to_string(kind);

    const json manifest = json::parse(slurp(a.manifest));
    EXPECT_EQ(manifest["outputs"].size(), a.outputs.size());
    for (const auto& entry : manifest["outputs"]) {
      EXPECT_EQ(entry["sha256"].get<std::string>(), sha256_hex(slurp(entry["path"].get<std::string>())));
    }
    EXPECT_EQ(parse_config(manifest["config"]), parse_config(doc_a));
  }
}

TEST(Runner, DifferentSeedChangesOutputButNotStatistics) {
  const fs::path dir = scratch("seeds");
  json doc = small_config(ExperimentKind::HaarCheck);
  doc["samples"] = 4000;
  doc["output"] = (dir / "s1").string();
  const auto a = run(parse_config(doc), 2);
  doc["seed"] = 43;
  doc["output"] = (dir / "s2").string();
  const auto b = run(parse_config(doc), 2);
  const json ja = json::parse(slurp(a.outputs[0]));
  const json jb = json::parse(slurp(b.outputs[0]));
  EXPECT_NE(ja["mc_mean"], jb["mc_mean"]);
  const double se = std::hypot(ja["mc_std_error"].get<double>(), jb["mc_std_error"].get<double>());
  EXPECT_LT(std::abs(ja["mc_mean"].get<double>() - jb["mc_mean"].get<double>()), 4.0 * se);
}

TEST(Runner, CsvHeaders) {
  const fs::path dir = scratch("headers");
  const std::map<ExperimentKind, std::map<std::string, std::string>> expected{
      {ExperimentKind::EchoGrid, {{"_grid.csv", "t1,t2,prob"}}},
      {ExperimentKind::OtocSeries, {{"_otoc.csv", "t,otoc"}}},
      {ExperimentKind::FluctuationScaling, {{"_scaling.csv", "n_q,variance,samples"}, {"_runs_nq4.csv", "run_index,axis,prob"}}},
      {ExperimentKind::ClassicalButterfly, {{"_measured.csv", "t,central_z"}, {"_unmeasured.csv", "t,central_z"}}},
      {ExperimentKind::Recover, {{"_probabilities.csv", "axis,prob_plus"}}},
      {ExperimentKind::NoHiding, {{"_probabilities.csv", "axis,prob_plus"}}},
  };
  for (const auto& [kind, files] : expected) {
    json doc = small_config(kind);
    const std::string prefix = (dir / std::string(to_string(kind))).string();
    doc["output"] = prefix;
    run(parse_config(doc), 1);
    for (const auto& [suffix, header] : files) {
      const std::string text = slurp(prefix + suffix);
      EXPECT_EQ(text.substr(0, text.find('\n')), header) << prefix + suffix;
    }
  }
  const json state = json::parse(slurp((dir / "recover_state.json").string()));
  EXPECT_TRUE(state.contains("rho_f"));
  EXPECT_TRUE(state.contains("rho_i"));
  EXPECT_TRUE(state.contains("fidelity"));
}

TEST(Cli, EchoGridSmokeAtEightBathSpins) {
  const fs::path dir = scratch("cli_smoke");
  std::ofstream(dir / "cfg.json") << R"({"seed": 9, "n_bath": 8})";
  const int code = run_cli("echo-grid --config " + (dir / "cfg.json").string() + " --out " +
                               (dir / "grid").string() + " --workers 2",
                           dir / "log.txt");
  ASSERT_EQ(code, 0) << slurp(dir / "log.txt");
  const std::string csv = slurp(dir / "grid_grid.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 401);
  EXPECT_TRUE(fs::exists(dir / "grid_manifest.json"));
}

TEST(Cli, SeedFlagOverridesAndRerunsMatch) {
  const fs::path dir = scratch("cli_seed");
  std::ofstream(dir / "cfg.json") << R"({"seed": 1, "samples": 200})";
  const std::string cfg = (dir / "cfg.json").string();
  ASSERT_EQ(run_cli("haar-check --config " + cfg + " --seed 5 --out " + (dir / "a").string(), dir / "l1"), 0);
  ASSERT_EQ(run_cli("haar-check --config " + cfg + " --seed 5 --out " + (dir / "b").string(), dir / "l2"), 0);
  ASSERT_EQ(run_cli("haar-check --config " + cfg + " --seed 6 --out " + (dir / "c").string(), dir / "l3"), 0);
  EXPECT_EQ(slurp(dir / "a_haar.json"), slurp(dir / "b_haar.json"));
  EXPECT_NE(slurp(dir / "a_haar.json"), slurp(dir / "c_haar.json"));
  const json manifest = json::parse(slurp(dir / "a_manifest.json"));
  EXPECT_EQ(manifest["config"]["seed"], 5);
}

TEST(Cli, ErrorsExitNonzeroWithMessage) {
  const fs::path dir = scratch("cli_errors");
  std::ofstream(dir / "noseed.json") << R"({"n_bath": 4})";
  std::ofstream(dir / "broken.json") << R"({"seed": )";
  std::ofstream(dir / "wrongkind.json") << R"({"kind": "recover", "seed": 1})";
  EXPECT_NE(run_cli("echo-grid --config " + (dir / "noseed.json").string(), dir / "e1"), 0);
  EXPECT_NE(slurp(dir / "e1").find("seed"), std::string::npos);
  EXPECT_NE(run_cli("echo-grid --config " + (dir / "broken.json").string(), dir / "e2"), 0);
  EXPECT_NE(run_cli("echo-grid --config " + (dir / "wrongkind.json").string(), dir / "e3"), 0);
  EXPECT_NE(run_cli("echo-grid --config " + (dir / "missing.json").string(), dir / "e4"), 0);
  EXPECT_NE(run_cli("no-such-kind --config x", dir / "e5"), 0);
}

TEST(Cli, SetOverridesConfigFields) {
  const fs::path dir = scratch("cli_set");
  std::ofstream(dir / "cfg.json") << R"({"seed": 3})";
  ASSERT_EQ(run_cli("otoc-series --config " + (dir / "cfg.json").string() +
                        " --set n_bath=4 --set times=[0,1,2] --out " + (dir / "o").string(),
                    dir / "log"),
            0)
      << slurp(dir / "log");
  const std::string csv = slurp(dir / "o_otoc.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

}  // namespace
}  // namespace scramble::experiments
