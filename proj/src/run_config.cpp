// SPDX-License-Identifier: Apache-2.0
#include "nfsense/run_config.hpp"

#include <sstream>
#include <stdexcept>

#include "nfsense/text_io.hpp"

namespace nfsense {

void RunConfig::check_key(const std::string& key) const {
  if (!allowed_.empty() && allowed_.count(key) == 0) throw std::invalid_argument("unknown config key: " + key);
}

void RunConfig::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    set(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
}

void RunConfig::load(const std::filesystem::path& path) { parse(read_text_file(path)); }

void RunConfig::set(const std::string& key, std::string value) {
  if (key.empty()) throw std::invalid_argument("config key is empty");
  check_key(key);
  values_[key] = std::move(value);
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_string(const std::string& key, std::string fallback) const {
  return get(key).value_or(std::move(fallback));
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    return parse_double(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + ": not a number: " + *v);
  }
}

long long RunConfig::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    return parse_int(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + ": not an integer: " + *v);
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(*v, &used);
    if (used != v->size() || (!v->empty() && v->front() == '-')) throw std::invalid_argument(*v);
    return n;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + ": not an unsigned integer: " + *v);
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw std::invalid_argument("config key " + key + ": not a boolean: " + *v);
}

}  // namespace nfsense
