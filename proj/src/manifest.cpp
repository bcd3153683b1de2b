#include "nhmetal/manifest.hpp"

#include <chrono>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "nhmetal/common.hpp"

#ifndef NHMETAL_VERSION
#define NHMETAL_VERSION "0.0.0"
#endif

namespace nhm::io {

const char* toolVersion() noexcept { return NHMETAL_VERSION; }

std::string sha256Hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::Unsupported, "SHA-256 digest failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::string utcTimestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

nlohmann::json RunManifest::toJson() const {
  nlohmann::json j;
  j["tool"] = "nhmetal";
  j["tool_version"] = toolVersion;
  j["command_line"] = commandLine;
  j["subcommand"] = subcommand;
  j["timestamp"] = timestamp;
  j["config"] = config;
  j["outputs"] = nlohmann::json::array();
  for (const auto& o : outputs) j["outputs"].push_back({{"file", o.file}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  return j;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error(Errc::InvalidConfig, fmt::format("cannot create output directory {}: {}", root_.string(), ec.message()));
}

void OutputDir::write(const std::string& name, const std::string& content) {
  const auto path = root_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidConfig, fmt::format("cannot write {}", path.string()));
  out << content;
  if (!out) throw Error(Errc::InvalidConfig, fmt::format("write failed for {}", path.string()));
  entries_.push_back({name, sha256Hex(content), content.size()});
}

RunManifest OutputDir::finish(std::string commandLine, std::string subcommand, nlohmann::json config) {
  RunManifest m;
  m.commandLine = std::move(commandLine);
  m.subcommand = std::move(subcommand);
  m.config = std::move(config);
  m.toolVersion = toolVersion();
  m.timestamp = utcTimestamp();
  m.outputs = entries_;
  const auto path = root_ / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidConfig, fmt::format("cannot write {}", path.string()));
  out << m.toJson().dump(2) << '\n';
  return m;
}

}  // namespace nhm::io
