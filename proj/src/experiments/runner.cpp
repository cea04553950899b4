#include "scramble/experiments/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "scramble/classical_spins.hpp"
#include "scramble/experiments/output.hpp"
#include "scramble/otoc.hpp"
#include "scramble/parallel.hpp"
#include "scramble/protocol.hpp"
#include "scramble/seeding.hpp"

namespace scramble::experiments {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 3> kAxisNames{"x", "y", "z"};

Rng stream(const ExperimentConfig& cfg, std::string_view name) {
  return Rng(derive_seed(cfg.seed, {stream_tag(name)}));
}

SpinBathModel spin_bath_from(const ExperimentConfig& cfg) {
  Rng rng = stream(cfg, "couplings");
  return sample_spin_bath(static_cast<int>(cfg.integer("n_bath")), cfg.number("j_std"), rng);
}

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

void write_recovery(OutputSet& out, const RecoveryResult& result, std::optional<double> reference) {
  CsvTable table({"axis", "prob_plus"});
  for (std::size_t k = 0; k < 3; ++k) {
    table.add_row({std::string(kAxisNames[k]), result.axis_probabilities[k]});
  }
  out.write_csv("_probabilities.csv", table);
  json state{
      {"rho_f", matrix_json(result.final_state.matrix())},
      {"rho_i", matrix_json(result.reconstructed.matrix())},
      {"fidelity", result.fidelity},
  };
  if (reference) state["trace_distance_to_three_quarters"] = *reference;
  out.write_json("_state.json", state);
}

void run_echo_grid(const ExperimentConfig& cfg, unsigned workers, OutputSet& out) {
  ProtocolConfig pc{
      .scrambler = Scrambler::spin_bath(spin_bath_from(cfg), 0.0),
      .initial = resolve_axis(cfg, "initial"),
      .bob = resolve_axis(cfg, "bob"),
      .alice = resolve_axis(cfg, "alice"),
  };
  const auto t1 = cfg.numbers("t1");
  const auto t2 = cfg.numbers("t2");
  const bool reversed = cfg.kind == ExperimentKind::EchoGrid;
  const EchoGrid grid = echo_grid(pc, t1, t2, reversed, workers);
  CsvTable table({"t1", "t2", "prob"});
  for (std::size_t i = 0; i < t1.size(); ++i) {
    for (std::size_t j = 0; j < t2.size(); ++j) table.add_row({t1[i], t2[j], grid.prob[i][j]});
  }
  out.write_csv("_grid.csv", table);
}

void run_recover(const ExperimentConfig& cfg, OutputSet& out) {
  ProtocolConfig pc{
      .scrambler = Scrambler::spin_bath(spin_bath_from(cfg), 0.0),
      .initial = resolve_axis(cfg, "initial"),
      .bob = resolve_axis(cfg, "bob"),
      .t1 = cfg.number("t1"),
      .t2 = cfg.number("t2"),
  };
  const long long shots = cfg.integer("shots");
  RecoveryResult result = [&] {
    if (shots == 0) return run_protocol_density(pc);
    pc.shots = static_cast<std::size_t>(shots);
    Rng rng = stream(cfg, "tomography");
    return recover_with_tomography(pc, rng);
  }();
  ComplexMatrix target = ComplexMatrix::Zero(2, 2);
  const auto b = pc.initial.components();
  target << Complex(0.5 + 0.25 * b[2], 0.0), Complex(0.25 * b[0], -0.25 * b[1]),
      Complex(0.25 * b[0], 0.25 * b[1]), Complex(0.5 - 0.25 * b[2], 0.0);
  write_recovery(out, result, trace_distance(result.final_state.matrix(), target));
}

void run_nohiding(const ExperimentConfig& cfg, OutputSet& out) {
  ProtocolConfig pc{
      .scrambler = Scrambler::no_hiding(),
      .initial = resolve_axis(cfg, "initial"),
      .bob = PauliSet{cfg.flag("include_identity")},
      .bath = ProductBath{{BlochAxis::X(), BlochAxis::X()}},
  };
  const long long shots = cfg.integer("shots");
  RecoveryResult result = [&] {
    if (shots == 0) return run_protocol_density(pc);
    pc.shots = static_cast<std::size_t>(shots);
    Rng rng = stream(cfg, "tomography");
    return recover_with_tomography(pc, rng);
  }();
  write_recovery(out, result, std::nullopt);
}

void run_otoc_series(const ExperimentConfig& cfg, OutputSet& out) {
  const SpinBathModel model = spin_bath_from(cfg);
  const OtocSpec spec =
      OtocSpec::from_axes(resolve_axis(cfg, "r"), resolve_axis(cfg, "i"), resolve_axis(cfg, "f"));
  const auto times = cfg.numbers("times");
  const auto values = otoc_time_series(model, spec, times);
  CsvTable table({"t", "otoc"});
  for (std::size_t k = 0; k < times.size(); ++k) table.add_row({times[k], values[k]});
  out.write_csv("_otoc.csv", table);
}

void run_haar_check(const ExperimentConfig& cfg, unsigned workers, OutputSet& out) {
  const Index dim = static_cast<Index>(cfg.integer("dim"));
  const OtocSpec spec =
      OtocSpec::from_axes(resolve_axis(cfg, "r"), resolve_axis(cfg, "i"), resolve_axis(cfg, "f"));
  Rng rng = stream(cfg, "haar");
  const HaarEstimate est =
      haar_average_mc(spec, dim, static_cast<std::size_t>(cfg.integer("samples")), rng, workers);
  out.write_json("_haar.json", json{
                                   {"dim", dim},
                                   {"samples", est.samples},
                                   {"mc_mean", est.mean},
                                   {"mc_std_error", est.std_error},
                                   {"analytic", haar_average_analytic(spec, dim)},
                               });
}

void run_fluctuation_scaling(const ExperimentConfig& cfg, unsigned workers, OutputSet& out) {
  const auto sizes = cfg.integers("n_q");
  const int layers = static_cast<int>(cfg.integer("layers"));
  const auto samples = static_cast<std::size_t>(cfg.integer("samples"));
  const Pairing pairing =
      cfg.text("pairing") == "random-pairs" ? Pairing::RandomPairs : Pairing::BrickWall;

  std::vector<VarianceRecord> records;
  json errors = json::array();
  CsvTable scaling({"n_q", "variance", "samples"});
  for (long long n : sizes) {
    Rng rng(derive_seed(cfg.seed, {stream_tag("fluctuation"), static_cast<std::uint64_t>(n)}));
    const FluctuationResult res =
        fluctuation_study(static_cast<int>(n), layers, samples, rng, workers, pairing);
    CsvTable runs({"run_index", "axis", "prob"});
    for (std::size_t k = 0; k < res.runs.size(); ++k) {
      for (std::size_t a = 0; a < 3; ++a) {
        runs.add_row({static_cast<long long>(k), std::string(kAxisNames[a]), res.runs[k].prob[a]});
      }
    }
    out.write_csv("_runs_nq" + std::to_string(n) + ".csv", runs);
    scaling.add_row({n, res.variance, static_cast<long long>(samples)});
    records.push_back({static_cast<int>(n), res.variance, samples});
    errors.push_back({{"n_q", n}, {"variance_std_error", res.variance_std_error}});
  }
  out.write_csv("_scaling.csv", scaling);
  out.write_json("_fit.json", json{{"slope", scaling_fit(records)}, {"bootstrap", errors}});
}

void run_classical_butterfly(const ExperimentConfig& cfg, unsigned workers, OutputSet& out) {
  SpinBathModel quantum_model;
  {
    Rng rng = stream(cfg, "couplings");
    quantum_model = sample_spin_bath(static_cast<int>(cfg.integer("n_bath")), cfg.number("j_std"), rng);
  }
  const ClassicalModel model = ClassicalModel::from(quantum_model);
  const BlochAxis bob = resolve_axis(cfg, "bob");
  const double t1 = cfg.number("t1");
  const double dt = cfg.number("dt");
  const auto stride = static_cast<std::size_t>(cfg.integer("stride"));
  const auto ensemble = static_cast<std::size_t>(cfg.integer("ensemble"));
  const std::uint64_t master = derive_seed(cfg.seed, {stream_tag("classical")});

  struct Member {
    ClassicalProtocolResult plain;
    ClassicalProtocolResult measured;
  };
  std::vector<Member> members(ensemble);
  parallel_for(ensemble, workers, [&](std::size_t k) {
    Rng plain_rng(derive_seed(master, {k}));
    Rng measured_rng(derive_seed(master, {k}));
    members[k].plain = run_classical_protocol(model, t1, dt, false, bob, plain_rng, stride);
    members[k].measured = run_classical_protocol(model, t1, dt, true, bob, measured_rng, stride);
    if (k != 0) {
      members[k].plain.trajectory.times = {members[k].plain.trajectory.times.back()};
      members[k].plain.trajectory.central_z = {members[k].plain.trajectory.central_z.back()};
      members[k].measured.trajectory.times = {members[k].measured.trajectory.times.back()};
      members[k].measured.trajectory.central_z = {members[k].measured.trajectory.central_z.back()};
    }
  });

  auto trajectory_csv = [](const Trajectory& t) {
    CsvTable table({"t", "central_z"});
    for (std::size_t k = 0; k < t.times.size(); ++k) table.add_row({t.times[k], t.central_z[k]});
    return table;
  };
  out.write_csv("_unmeasured.csv", trajectory_csv(members[0].plain.trajectory));
  out.write_csv("_measured.csv", trajectory_csv(members[0].measured.trajectory));

  CompensatedSum deviation;
  double worst_plain = 0.0;
  double worst_drift = 0.0;
  json finals = json::array();
  for (std::size_t k = 0; k < ensemble; ++k) {
    const double zp = members[k].plain.trajectory.central_z.back();
    const double zm = members[k].measured.trajectory.central_z.back();
    worst_plain = std::max(worst_plain, std::abs(zp - 1.0));
    worst_drift = std::max({worst_drift, members[k].plain.energy_drift, members[k].measured.energy_drift});
    deviation.add(std::abs(zm - 1.0));
    finals.push_back({{"run_index", k}, {"unmeasured_z", zp}, {"measured_z", zm}});
  }
  out.write_json("_summary.json",
                 json{
                     {"ensemble", ensemble},
                     {"max_unmeasured_deviation", worst_plain},
                     {"mean_measured_deviation", deviation.value() / static_cast<double>(ensemble)},
                     {"max_energy_drift", worst_drift},
                     {"final_central_z", finals},
                 });
}

}  // namespace

unsigned resolve_workers(std::optional<unsigned> flag, const ExperimentConfig& config) {
  if (flag) {
    if (*flag == 0) throw std::invalid_argument("--workers must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("SCRAMBLESIM_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) {
      throw std::invalid_argument("SCRAMBLESIM_WORKERS must be an integer in [1, 1024]");
    }
    return static_cast<unsigned>(v);
  }
  if (config.workers) return *config.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

BlochAxis resolve_axis(const ExperimentConfig& config, const std::string& field) {
  const json& v = config.raw(field);
  if (v.is_array()) {
    return BlochAxis::normalized(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  const auto name = v.get<std::string>();
  if (name == "random") {
    Rng rng = stream(config, "axis:" + field);
    return BlochAxis::random(rng);
  }
  const bool negative = name.front() == '-';
  const char c = name.back();
  const BlochAxis base = c == 'x' ? BlochAxis::X() : c == 'y' ? BlochAxis::Y() : BlochAxis::Z();
  return negative ? base.opposite() : base;
}

RunResult run(const ExperimentConfig& config, unsigned workers) {
  const auto start = std::chrono::steady_clock::now();
  OutputSet out(config.output);
  switch (config.kind) {
    case ExperimentKind::EchoGrid:
    case ExperimentKind::EchoGridForward:
      run_echo_grid(config, workers, out);
      break;
    case ExperimentKind::Recover:
      run_recover(config, out);
      break;
    case ExperimentKind::NoHiding:
      run_nohiding(config, out);
      break;
    case ExperimentKind::OtocSeries:
      run_otoc_series(config, out);
      break;
    case ExperimentKind::HaarCheck:
      run_haar_check(config, workers, out);
      break;
    case ExperimentKind::FluctuationScaling:
      run_fluctuation_scaling(config, workers, out);
      break;
    case ExperimentKind::ClassicalButterfly:
      run_classical_butterfly(config, workers, out);
      break;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunResult result;
  for (const auto& r : out.records()) result.outputs.push_back(r.path);
  result.manifest = out.write_manifest(to_json(config), seconds);
  return result;
}

}  // namespace scramble::experiments
