#include "slat/keyvalue.hpp"

#include <charconv>
#include <sstream>

#include "slat/error.hpp"

namespace slat {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string KeyValues::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ValidationError("missing required key '" + key + "'");
  return it->second;
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValues::require_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("key '" + key + "': not a number: '" + v + "'");
  }
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

long KeyValues::get_int(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ValidationError("key '" + key + "': not an integer: '" + v + "'");
  return out;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ValidationError("key '" + key + "': not an unsigned integer: '" + v + "'");
  return out;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ValidationError("key '" + key + "': not a boolean: '" + v + "'");
}

std::string KeyValues::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::vector<KeyValues> parse_key_value_blocks(const std::string& text) {
  std::vector<KeyValues> blocks;
  KeyValues current;
  bool open = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) {
      if (open) blocks.push_back(std::move(current));
      current = KeyValues();
      open = false;
      continue;
    }
    if (t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (current.has(key))
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    current.set(key, trim(t.substr(eq + 1)));
    open = true;
  }
  if (open) blocks.push_back(std::move(current));
  return blocks;
}

KeyValues parse_key_values(const std::string& text) {
  auto blocks = parse_key_value_blocks(text);
  if (blocks.empty()) return {};
  if (blocks.size() > 1) throw ValidationError("expected a single key=value block");
  return blocks.front();
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace slat
