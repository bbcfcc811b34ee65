// Run manifests: every artifact-producing command writes a line-oriented
// `key = value` record of its resolved configuration, input digests, seed,
// and wall-clock runtime, sufficient to reproduce the artifact bit-exactly.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace flowmine {

// Hex CRC-32 of a file's bytes; throws Error if unreadable.
std::string file_digest(const std::string& path);

struct RunManifest {
  std::string subcommand;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> inputs;

  void add_config(const std::string& key, const std::string& value);
  void add_config(const std::string& key, std::uint64_t value);
  void add_config(const std::string& key, double value);
  // Records `label = <path> crc32=<digest>`.
  void add_input(const std::string& label, const std::string& path);

  std::string serialize() const;
  // Writes serialize() to `path` (conventionally <artifact dir>/manifest.txt).
  void write(const std::string& path) const;
};

}  // namespace flowmine
