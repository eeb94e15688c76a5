// Flat key=value config files with [section] headers, plus the structured
// report writer used by the CLI. Keys are addressed as "section.key".
#ifndef SINDEX_CONFIG_HPP
#define SINDEX_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#define SINDEX_VERSION "0.1.0"

namespace sindex {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  static Config parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto strip = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = strip(line);
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
        section = strip(line.substr(1, line.size() - 2));
        if (section.empty())
          throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
      const std::string key = strip(line.substr(0, eq));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[section.empty() ? key : section + "." + key] = strip(line.substr(eq + 1));
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key " + key + " is not a number: " + it->second);
    }
  }

  int64_t get_int(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      size_t pos = 0;
      const int64_t v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key " + key + " is not an integer: " + it->second);
    }
  }

  uint64_t get_u64(const std::string& key, uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      size_t pos = 0;
      const uint64_t v = std::stoull(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key " + key + " is not a u64: " + it->second);
    }
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& items() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Writes reports in config syntax so every artifact embeds a reusable
/// [config] section alongside its results.
class ReportWriter {
 public:
  explicit ReportWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("report: cannot open " + path);
    out_.precision(17);
  }

  void section(const std::string& name) { out_ << "[" << name << "]\n"; }

  template <typename T>
  void kv(const std::string& key, const T& value) {
    out_ << key << " = " << value << "\n";
  }

  void raw(const std::string& line) { out_ << line << "\n"; }

  void config_echo(const Config& cfg) {
    section("config");
    for (const auto& [k, v] : cfg.items()) kv(k, v);
    kv("version", SINDEX_VERSION);
  }

 private:
  std::ofstream out_;
};

/// "a,b,c" -> doubles; used by sweep-grid flags.
inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad numeric list element: " + tok);
    }
  }
  return out;
}

}  // namespace sindex

#endif  // SINDEX_CONFIG_HPP
