// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace nfsense {

/// Flat key=value settings. `#` starts a comment; blank lines are ignored.
/// Keys outside the allowed set are rejected by name.
class RunConfig {
 public:
  RunConfig() = default;
  explicit RunConfig(std::set<std::string> allowed) : allowed_(std::move(allowed)) {}

  void parse(std::string_view text);
  void load(const std::filesystem::path& path);
  /// Overrides (or adds) one value; the key must be allowed.
  void set(const std::string& key, std::string value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, std::string fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void check_key(const std::string& key) const;

  std::set<std::string> allowed_;
  std::map<std::string, std::string> values_;
};

}  // namespace nfsense
