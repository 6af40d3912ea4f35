#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vessel {

/// Configuration file problem (unreadable file, syntax error, bad value,
/// unknown or missing key). Messages carry "source:line:" where a line is
/// known.
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/// Parsed "key = value" file with [section] headers, '#' comments, and blank
/// lines. Keys are addressed as "section.key"; every lookup marks the entry
/// used so unknown_keys() can flag typos after a consumer has pulled what it
/// understands.
class Config {
 public:
  /// Parses text; source names the origin for error messages.
  static Config parse_text(const std::string& text, std::string source) {
    Config cfg;
    cfg.source_ = std::move(source);
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;

      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3)
          throw ConfigParseError(cfg.at_line(lineno) +
                                 "malformed section header: " + line);
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }

      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigParseError(cfg.at_line(lineno) +
                               "expected 'key = value', got: " + line);
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigParseError(cfg.at_line(lineno) + "empty key");
      if (section.empty())
        throw ConfigParseError(cfg.at_line(lineno) +
                               "key '" + key + "' before any [section]");
      const std::string full = section + "." + key;
      if (cfg.entries_.count(full))
        throw ConfigParseError(cfg.at_line(lineno) + "duplicate key '" + full +
                               "' (first at line " +
                               std::to_string(cfg.entries_[full].line) + ")");
      cfg.entries_[full] = {value, lineno, false};
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
      throw ConfigParseError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_text(text.str(), path);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    return entry(key).value;
  }

  double get_double(const std::string& key) const {
    const Entry& e = entry(key);
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(e.value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != e.value.size() || e.value.empty())
      throw ConfigParseError(at_line(e.line) + "value for '" + key +
                             "' is not a number: '" + e.value + "'");
    return v;
  }

  int get_int(const std::string& key) const {
    const Entry& e = entry(key);
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(e.value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != e.value.size() || e.value.empty())
      throw ConfigParseError(at_line(e.line) + "value for '" + key +
                             "' is not an integer: '" + e.value + "'");
    return static_cast<int>(v);
  }

  /// Whitespace-separated list of numbers; an absent key is an empty list.
  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const Entry& e = entry(key);
    std::istringstream in(e.value);
    std::string tok;
    while (in >> tok) {
      std::size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != tok.size())
        throw ConfigParseError(at_line(e.line) + "list entry for '" + key +
                               "' is not a number: '" + tok + "'");
      out.push_back(v);
    }
    return out;
  }

  /// Entries never looked up, with their line numbers; used to reject typos.
  std::vector<std::pair<std::string, int>> unknown_keys() const {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [key, e] : entries_)
      if (!e.used) out.emplace_back(key, e.line);
    return out;
  }

  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  const Entry& entry(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
      throw ConfigParseError(source_ + ": missing required key '" + key + "'");
    it->second.used = true;
    return it->second;
  }

  std::string at_line(int line) const {
    return source_ + ":" + std::to_string(line) + ": ";
  }

  std::map<std::string, Entry> entries_;
  std::string source_;
};

}  // namespace vessel
