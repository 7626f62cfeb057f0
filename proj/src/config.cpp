#include "kolmonet/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace kolmonet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_'))
    return false;
  for (char ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) return false;
  return true;
}

double parse_real(std::string_view s, const std::string& context) {
  const std::string_view t = trim(s);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw std::invalid_argument(context + ": '" + std::string(t) +
                                "' is not a number");
  return out;
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open '" + path.string() + "'");
  return from_stream(in, path.string());
}

Config Config::from_stream(std::istream& is, std::string source) {
  Config cfg;
  cfg.source_ = std::move(source);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view body{line};
    if (const auto hash = body.find('#'); hash != std::string_view::npos)
      body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument(cfg.source_ + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key{trim(body.substr(0, eq))};
    if (!is_identifier(key))
      throw std::invalid_argument(cfg.source_ + ":" + std::to_string(line_no) +
                                  ": '" + key + "' is not a valid key");
    if (cfg.entries_.count(key))
      throw std::invalid_argument(cfg.source_ + ":" + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
    cfg.entries_[key] = Entry{std::string(trim(body.substr(eq + 1))), line_no};
  }
  return cfg;
}

void Config::set(const std::string& key, std::string value) {
  if (!is_identifier(key))
    throw std::invalid_argument("config: '" + key + "' is not a valid key");
  entries_[key] = Entry{std::move(value), 0};
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

void Config::fail(const std::string& key, const std::string& why) const {
  std::string where = source_;
  if (const auto it = entries_.find(key); it != entries_.end() && it->second.line > 0)
    where += ":" + std::to_string(it->second.line);
  throw std::invalid_argument(where + ": key '" + key + "' " + why);
}

const Config::Entry& Config::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::invalid_argument(source_ + ": missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const {
  return require(key).value;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double Config::get_real(const std::string& key) const {
  try {
    return parse_real(require(key).value, "value");
  } catch (const std::invalid_argument&) {
    fail(key, "must be a number, got '" + require(key).value + "'");
  }
}

double Config::get_real(const std::string& key, double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string& raw = require(key).value;
  std::int64_t out = 0;
  const std::string_view t = trim(raw);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    fail(key, "must be an integer, got '" + raw + "'");
  return out;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& key) const {
  const std::string& raw = require(key).value;
  std::uint64_t out = 0;
  const std::string_view t = trim(raw);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    fail(key, "must be a nonnegative integer, got '" + raw + "'");
  return out;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_uint(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "must be a boolean (true/false), got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string& raw = require(key).value;
  std::vector<double> out;
  std::string_view rest{raw};
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view piece =
        comma == std::string_view::npos ? rest : rest.substr(0, comma);
    try {
      out.push_back(parse_real(piece, "list entry"));
    } catch (const std::invalid_argument&) {
      fail(key, "has a non-numeric list entry '" + std::string(trim(piece)) + "'");
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::vector<double> Config::get_list(const std::string& key,
                                     std::vector<double> fallback) const {
  return has(key) ? get_list(key) : std::move(fallback);
}

}  // namespace kolmonet
