#include "scramble/experiments/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <utility>

namespace scramble::experiments {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 8> kKindNames{{
    {ExperimentKind::EchoGrid, "echo-grid"},
    {ExperimentKind::EchoGridForward, "echo-grid-forward"},
    {ExperimentKind::Recover, "recover"},
    {ExperimentKind::NoHiding, "nohiding"},
    {ExperimentKind::OtocSeries, "otoc-series"},
    {ExperimentKind::HaarCheck, "haar-check"},
    {ExperimentKind::FluctuationScaling, "fluctuation-scaling"},
    {ExperimentKind::ClassicalButterfly, "classical-butterfly"},
}};

enum class FieldType { Int, Number, Bool, Axis, Grid, IntList, Choice };

struct Field {
  std::string name;
  FieldType type;
  json fallback;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  std::vector<std::string> choices = {};
  bool exclusive_min = false;
};

json grid(double start, double stop, int count) {
  return json{{"start", start}, {"stop", stop}, {"count", count}};
}

std::vector<Field> spin_bath_fields() {
  return {
      {"n_bath", FieldType::Int, 10, 1, 13},
      {"j_std", FieldType::Number, 1.0, 0.0, 1e6, {}, true},
  };
}

std::vector<Field> schema(ExperimentKind kind) {
  std::vector<Field> f;
  switch (kind) {
    case ExperimentKind::EchoGrid:
    case ExperimentKind::EchoGridForward:
      f = spin_bath_fields();
      f.push_back({"t1", FieldType::Grid, grid(2.0, 40.0, 20)});
      f.push_back({"t2", FieldType::Grid, grid(2.0, 40.0, 20)});
      f.push_back({"initial", FieldType::Axis, "z"});
      f.push_back({"bob", FieldType::Axis, "random"});
      f.push_back({"alice", FieldType::Axis, "z"});
      break;
    case ExperimentKind::Recover:
      f = spin_bath_fields();
      f.push_back({"t1", FieldType::Number, 20.0, 0.0});
      f.push_back({"t2", FieldType::Number, 20.0, 0.0});
      f.push_back({"initial", FieldType::Axis, "z"});
      f.push_back({"bob", FieldType::Axis, "random"});
      f.push_back({"shots", FieldType::Int, 0, 0, 1e12});
      break;
    case ExperimentKind::NoHiding:
      f.push_back({"initial", FieldType::Axis, "z"});
      f.push_back({"shots", FieldType::Int, 8192, 0, 1e12});
      f.push_back({"include_identity", FieldType::Bool, true});
      break;
    case ExperimentKind::OtocSeries:
      f = spin_bath_fields();
      f.push_back({"times", FieldType::Grid, grid(0.0, 40.0, 41)});
      f.push_back({"r", FieldType::Axis, "x"});
      f.push_back({"i", FieldType::Axis, "z"});
      f.push_back({"f", FieldType::Axis, "z"});
      break;
    case ExperimentKind::HaarCheck:
      f.push_back({"dim", FieldType::Int, 8, 4, 4096});
      f.push_back({"samples", FieldType::Int, 10000, 100, 1e9});
      f.push_back({"r", FieldType::Axis, "x"});
      f.push_back({"i", FieldType::Axis, "z"});
      f.push_back({"f", FieldType::Axis, "z"});
      break;
    case ExperimentKind::FluctuationScaling:
      f.push_back({"n_q", FieldType::IntList, json::array({4, 5, 6, 7, 8}), 2, 14});
      f.push_back({"layers", FieldType::Int, 1000, 1, 1e7});
      f.push_back({"samples", FieldType::Int, 100, 30, 1e9});
      f.push_back({"pairing", FieldType::Choice, "brick-wall", 0, 0, {"brick-wall", "random-pairs"}});
      break;
    case ExperimentKind::ClassicalButterfly:
      f.push_back({"n_bath", FieldType::Int, 30, 1, 100000});
      f.push_back({"j_std", FieldType::Number, 1.0, 0.0, 1e6, {}, true});
      f.push_back({"t1", FieldType::Number, 20.0, 0.0});
      f.push_back({"dt", FieldType::Number, 1e-3, 0.0, 1e6, {}, true});
      f.push_back({"ensemble", FieldType::Int, 100, 1, 1e7});
      f.push_back({"bob", FieldType::Axis, "random"});
      f.push_back({"stride", FieldType::Int, 100, 1, 1e9});
      break;
  }
  return f;
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

long long integer_at(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<long long>();
}

void check_range(double x, const Field& field, const std::string& path) {
  if (x < field.min || (field.exclusive_min && x == field.min)) {
    throw ConfigError(path, "must be " + std::string(field.exclusive_min ? "> " : ">= ") +
                                json(field.min).dump());
  }
  if (x > field.max) throw ConfigError(path, "must be <= " + json(field.max).dump());
}

json validate_axis(const json& v, const std::string& path) {
  static const std::set<std::string> names{"x", "y", "z", "-x", "-y", "-z", "random"};
  if (v.is_string()) {
    if (!names.contains(v.get<std::string>())) {
      throw ConfigError(path, "axis must be one of x, y, z, -x, -y, -z, random or [x, y, z]");
    }
    return v;
  }
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "axis must be a string or [x, y, z]");
  double norm2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double c = number_at(v[k], path + "[" + std::to_string(k) + "]");
    norm2 += c * c;
  }
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9) throw ConfigError(path, "axis must have unit norm");
  return v;
}

json validate_grid(const json& v, const std::string& path) {
  json out = json::array();
  if (v.is_array()) {
    if (v.empty()) throw ConfigError(path, "grid must not be empty");
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double x = number_at(v[k], path + "[" + std::to_string(k) + "]");
      if (x < 0.0) throw ConfigError(path + "[" + std::to_string(k) + "]", "must be >= 0");
      out.push_back(x);
    }
    return out;
  }
  if (!v.is_object()) throw ConfigError(path, "grid must be an array or {start, stop, count}");
  for (const auto& [key, _] : v.items()) {
    if (key != "start" && key != "stop" && key != "count") {
      throw ConfigError(path + "." + key, "unknown key");
    }
  }
  for (const char* key : {"start", "stop", "count"}) {
    if (!v.contains(key)) throw ConfigError(path + "." + key, "missing required field");
  }
  const double start = number_at(v["start"], path + ".start");
  const double stop = number_at(v["stop"], path + ".stop");
  const long long count = integer_at(v["count"], path + ".count");
  if (count < 1 || count > 100000) throw ConfigError(path + ".count", "must be in [1, 100000]");
  if (start < 0.0 || stop < 0.0) throw ConfigError(path, "grid times must be >= 0");
  if (count == 1 && start != stop) throw ConfigError(path + ".count", "a single point needs start == stop");
  for (long long k = 0; k < count; ++k) {
    const double x = count == 1 ? start
                                : start + (stop - start) * static_cast<double>(k) /
                                              static_cast<double>(count - 1);
    out.push_back(x);
  }
  return out;
}

json validate_field(const Field& field, const json& v, const std::string& path) {
  switch (field.type) {
    case FieldType::Int: {
      const long long x = integer_at(v, path);
      check_range(static_cast<double>(x), field, path);
      return x;
    }
    case FieldType::Number: {
      const double x = number_at(v, path);
      check_range(x, field, path);
      return x;
    }
    case FieldType::Bool:
      if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
      return v;
    case FieldType::Axis:
      return validate_axis(v, path);
    case FieldType::Grid:
      return validate_grid(v, path);
    case FieldType::IntList: {
      if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty integer list");
      json out = json::array();
      for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string p = path + "[" + std::to_string(k) + "]";
        const long long x = integer_at(v[k], p);
        check_range(static_cast<double>(x), field, p);
        out.push_back(x);
      }
      return out;
    }
    case FieldType::Choice: {
      if (!v.is_string()) throw ConfigError(path, "expected a string");
      const auto s = v.get<std::string>();
      for (const auto& c : field.choices) {
        if (c == s) return v;
      }
      std::string list;
      for (const auto& c : field.choices) list += (list.empty() ? "" : ", ") + c;
      throw ConfigError(path, "must be one of " + list);
    }
  }
  throw ConfigError(path, "unsupported field type");
}

void kind_specific_checks(ExperimentKind kind, const json& params) {
  if (kind == ExperimentKind::HaarCheck) {
    const auto dim = params["dim"].get<long long>();
    if ((dim & (dim - 1)) != 0) throw ConfigError("dim", "must be a power of two");
  }
  if (kind == ExperimentKind::FluctuationScaling && params["n_q"].size() < 3) {
    throw ConfigError("n_q", "the scaling fit needs at least three qubit counts");
  }
}

const json& lookup(const json& params, const std::string& key) {
  if (!params.contains(key)) throw std::out_of_range("config has no field '" + key + "'");
  return params.at(key);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> out;
    for (const auto& [k, _] : kKindNames) out.push_back(k);
    return out;
  }();
  return kinds;
}

std::vector<std::string> field_names(ExperimentKind kind) {
  std::vector<std::string> out;
  for (const auto& f : schema(kind)) out.push_back(f.name);
  return out;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  if (!doc.contains("kind")) throw ConfigError("kind", "missing required field");
  if (!doc["kind"].is_string()) throw ConfigError("kind", "expected a string");
  const auto kind = parse_kind(doc["kind"].get<std::string>());
  if (!kind) throw ConfigError("kind", "unknown experiment kind '" + doc["kind"].get<std::string>() + "'");

  ExperimentConfig cfg;
  cfg.kind = *kind;

  if (!doc.contains("seed")) throw ConfigError("seed", "missing required field");
  if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
    throw ConfigError("seed", "expected a non-negative integer");
  }
  cfg.seed = doc["seed"].get<std::uint64_t>();

  if (doc.contains("output")) {
    if (!doc["output"].is_string() || doc["output"].get<std::string>().empty()) {
      throw ConfigError("output", "expected a non-empty path prefix");
    }
    cfg.output = doc["output"].get<std::string>();
  } else {
    cfg.output = "out/" + std::string(to_string(*kind));
  }

  if (doc.contains("workers")) {
    const long long w = integer_at(doc["workers"], "workers");
    if (w < 1 || w > 1024) throw ConfigError("workers", "must be in [1, 1024]");
    cfg.workers = static_cast<unsigned>(w);
  }

  const auto fields = schema(*kind);
  for (const auto& [key, _] : doc.items()) {
    if (key == "kind" || key == "seed" || key == "output" || key == "workers") continue;
    bool known = false;
    for (const auto& f : fields) known = known || f.name == key;
    if (!known) {
      throw ConfigError(key, "unknown key for experiment '" + std::string(to_string(*kind)) + "'");
    }
  }
  for (const auto& f : fields) {
    const json& v = doc.contains(f.name) ? doc[f.name] : f.fallback;
    cfg.params[f.name] = validate_field(f, v, f.name);
  }
  kind_specific_checks(*kind, cfg.params);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& config) {
  json doc = config.params;
  doc["kind"] = std::string(to_string(config.kind));
  doc["seed"] = config.seed;
  doc["output"] = config.output;
  if (config.workers) doc["workers"] = *config.workers;
  return doc;
}

double ExperimentConfig::number(const std::string& key) const {
  return lookup(params, key).get<double>();
}

long long ExperimentConfig::integer(const std::string& key) const {
  return lookup(params, key).get<long long>();
}

bool ExperimentConfig::flag(const std::string& key) const { return lookup(params, key).get<bool>(); }

std::string ExperimentConfig::text(const std::string& key) const {
  return lookup(params, key).get<std::string>();
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  return lookup(params, key).get<std::vector<double>>();
}

std::vector<long long> ExperimentConfig::integers(const std::string& key) const {
  return lookup(params, key).get<std::vector<long long>>();
}

const json& ExperimentConfig::raw(const std::string& key) const { return lookup(params, key); }

}  // namespace scramble::experiments
