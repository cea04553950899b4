#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace scramble::experiments {

enum class ExperimentKind {
  EchoGrid,
  EchoGridForward,
  Recover,
  NoHiding,
  OtocSeries,
  HaarCheck,
  FluctuationScaling,
  ClassicalButterfly,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);
const std::vector<ExperimentKind>& all_kinds();

/// Schema violation. what() starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// A validated run description. `params` holds the kind-specific fields with
/// every default filled in, so to_json/parse_config round-trips exactly.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::EchoGrid;
  std::uint64_t seed = 0;
  std::string output;
  std::optional<unsigned> workers;
  nlohmann::json params = nlohmann::json::object();

  bool operator==(const ExperimentConfig&) const = default;

  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<long long> integers(const std::string& key) const;
  const nlohmann::json& raw(const std::string& key) const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Field names accepted for `kind` besides the common ones
/// (kind, seed, output, workers).
std::vector<std::string> field_names(ExperimentKind kind);

}  // namespace scramble::experiments
