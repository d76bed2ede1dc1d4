#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace slat {

/// Flat `key=value` block. Lines starting with '#' are comments; keys are
/// unique within a block.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Serializes one `key=value` line per entry, sorted by key.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Splits text into blocks separated by one or more blank lines.
std::vector<KeyValues> parse_key_value_blocks(const std::string& text);

/// Parses exactly one block; throws if the text holds several.
KeyValues parse_key_values(const std::string& text);

/// Shortest round-tripping decimal form.
std::string format_double(double v);

}  // namespace slat
