#include "scramble/experiments/output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace scramble::experiments {

namespace fs = std::filesystem;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("CSV header must not be empty");
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("CSV row width mismatch");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t k = 0; k < header_.size(); ++k) {
    if (k) out += ',';
    out += header_[k];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out += format_double(v);
            } else if constexpr (std::is_same_v<T, long long>) {
              out += std::to_string(v);
            } else {
              out += v;
            }
          },
          row[k]);
    }
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xf];
  }
  return out;
}

void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

OutputSet::OutputSet(std::string prefix) : prefix_(std::move(prefix)) {
  if (prefix_.empty()) throw std::invalid_argument("output prefix must not be empty");
}

fs::path OutputSet::path_for(std::string_view suffix) const {
  return fs::path(prefix_ + std::string(suffix));
}

const OutputRecord& OutputSet::write(std::string_view suffix, std::string_view content) {
  const fs::path p = path_for(suffix);
  write_atomic(p, content);
  records_.push_back({p, sha256_hex(content), content.size()});
  return records_.back();
}

const OutputRecord& OutputSet::write_csv(std::string_view suffix, const CsvTable& table) {
  return write(suffix, table.str());
}

const OutputRecord& OutputSet::write_json(std::string_view suffix, const nlohmann::json& doc) {
  return write(suffix, doc.dump(2) + "\n");
}

fs::path OutputSet::write_manifest(const nlohmann::json& config, double seconds) const {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& r : records_) {
    outputs.push_back({{"path", r.path.string()}, {"sha256", r.sha256}, {"bytes", r.bytes}});
  }
  const nlohmann::json manifest{
      {"config", config},
      {"tool_version", tool_version()},
      {"wall_clock_seconds", seconds},
      {"outputs", outputs},
  };
  const fs::path p = path_for("_manifest.json");
  write_atomic(p, manifest.dump(2) + "\n");
  return p;
}

std::string_view tool_version() { return "scramblesim 1.0.0"; }

}  // namespace scramble::experiments
