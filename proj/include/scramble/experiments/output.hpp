#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace scramble::experiments {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

using CsvCell = std::variant<double, long long, std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<CsvCell> row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

std::string sha256_hex(std::string_view bytes);

struct OutputRecord {
  std::filesystem::path path;
  std::string sha256;
  std::size_t bytes = 0;
};

/// Writes `content` to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Collects the files of one run and writes the manifest last.
class OutputSet {
 public:
  explicit OutputSet(std::string prefix);

  /// <prefix><suffix>, e.g. prefix "out/grid" + "_reversed.csv".
  std::filesystem::path path_for(std::string_view suffix) const;

  const OutputRecord& write(std::string_view suffix, std::string_view content);
  const OutputRecord& write_csv(std::string_view suffix, const CsvTable& table);
  const OutputRecord& write_json(std::string_view suffix, const nlohmann::json& doc);

  const std::vector<OutputRecord>& records() const { return records_; }

  /// <prefix>_manifest.json with the config echo, tool version, wall-clock
  /// duration and one checksum per output.
  std::filesystem::path write_manifest(const nlohmann::json& config, double seconds) const;

 private:
  std::string prefix_;
  std::vector<OutputRecord> records_;
};

std::string_view tool_version();

}  // namespace scramble::experiments
