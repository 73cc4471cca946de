#pragma once

#include <map>
#include <string>
#include <vector>

namespace flocbal {

// Flat view of a sectioned key=value config file. Keys are stored as
// "section.key" (nested keys keep their own dots: "column.settling.w0").
struct ConfigMap {
  std::map<std::string, std::string> entries;

  bool has(const std::string& key) const;
  // Raw string access; `fallback` when the key is absent.
  std::string get(const std::string& key, const std::string& fallback) const;
  // Typed access; throws std::runtime_error naming the key on a parse
  // failure, returns `fallback` when the key is absent.
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
};

// Parses the sectioned text format:
//   [section]
//   key = value        # trailing comments with '#' or ';'
// Blank lines and full-line comments are skipped. Throws std::runtime_error
// with a line number on malformed input (key outside any section, missing
// '=', unterminated section header, duplicate key).
ConfigMap parse_config_text(const std::string& text);

// parse_config_text over the file contents; throws on unreadable files.
ConfigMap load_config(const std::string& path);

// Full schema validation without running anything: unknown sections or keys,
// missing required keys, unparseable numbers, and every violated invariant
// (bounds, family names, cross-key consistency) are reported together. An
// empty result means the config is runnable.
std::vector<std::string> validate_config(const ConfigMap& cfg);

}  // namespace flocbal
