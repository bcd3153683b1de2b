#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace nhm::io {

std::string sha256Hex(std::string_view data);

struct OutputEntry {
  std::string file;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string commandLine;
  std::string subcommand;
  nlohmann::json config;
  std::string toolVersion;
  std::string timestamp;  // UTC, ISO 8601
  std::vector<OutputEntry> outputs;

  nlohmann::json toJson() const;
};

/// Writes files into one directory and records their digests; finish() adds manifest.json.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  void write(const std::string& name, const std::string& content);
  const std::vector<OutputEntry>& entries() const { return entries_; }
  RunManifest finish(std::string commandLine, std::string subcommand, nlohmann::json config);

 private:
  std::filesystem::path root_;
  std::vector<OutputEntry> entries_;
};

std::string utcTimestamp();
const char* toolVersion() noexcept;

}  // namespace nhm::io
