#include "flowmine/manifest.hpp"

#include <cstdio>
#include <sstream>

#include "flowmine/crc32.hpp"
#include "flowmine/errors.hpp"
#include "flowmine/io.hpp"
#include "flowmine/version.hpp"

namespace flowmine {

std::string file_digest(const std::string& path) {
  std::string bytes = read_file(path);
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc32(bytes.data(), bytes.size()));
  return hex;
}

void RunManifest::add_config(const std::string& key, const std::string& value) {
  config.emplace_back(key, value);
}

void RunManifest::add_config(const std::string& key, std::uint64_t value) {
  config.emplace_back(key, std::to_string(value));
}

void RunManifest::add_config(const std::string& key, double value) {
  std::ostringstream os;
  os << value;
  config.emplace_back(key, os.str());
}

void RunManifest::add_input(const std::string& label, const std::string& path) {
  inputs.emplace_back(label, path + " crc32=" + file_digest(path));
}

std::string RunManifest::serialize() const {
  std::ostringstream os;
  os << "tool_version = " << kVersion << "\n";
  os << "subcommand = " << subcommand << "\n";
  os << "seed = " << seed << "\n";
  os << "runtime_seconds = " << runtime_seconds << "\n";
  for (const auto& [k, v] : config) os << "config." << k << " = " << v << "\n";
  for (const auto& [k, v] : inputs) os << "input." << k << " = " << v << "\n";
  return os.str();
}

void RunManifest::write(const std::string& path) const {
  write_file(path, serialize());
}

}  // namespace flowmine
