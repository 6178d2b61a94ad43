#pragma once

// key=value run configuration and atomically committed output directories.

#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace bpress {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class RunConfig {
 public:
  static RunConfig parse(std::istream& in, fs::path base, const std::set<std::string>& known) {
    RunConfig c;
    c.base_ = std::move(base);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw UsageError("config line " + std::to_string(n) + ": expected key=value");
      const std::string key = trim(line.substr(0, eq));
      if (!known.count(key)) throw UsageError("config line " + std::to_string(n) + ": unknown key '" + key + "'");
      if (c.values_.count(key)) throw UsageError("config line " + std::to_string(n) + ": duplicate key '" + key + "'");
      c.values_[key] = trim(line.substr(eq + 1));
    }
    return c;
  }

  static RunConfig load(const fs::path& path, const std::set<std::string>& known) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config " + path.string());
    return parse(in, fs::absolute(path).parent_path(), known);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw UsageError(key + ": not a number: '" + it->second + "'");
    }
  }

  long long integer(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw UsageError(key + ": not an integer: '" + it->second + "'");
    }
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw UsageError(key + ": expected true or false");
  }

  /// Existing file named by `key`, relative paths taken from the config's directory.
  fs::path input(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("config needs '" + key + "'");
    fs::path p(it->second);
    if (p.is_relative()) p = base_ / p;
    if (!fs::is_regular_file(p)) throw UsageError(key + ": no such file " + p.string());
    return p;
  }

  /// FNV-1a over the canonical "key=value" lines.
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [k, v] : values_)
      for (char ch : k + "=" + v + "\n") {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
      }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  nlohmann::json to_json() const { return nlohmann::json(values_); }

 private:
  fs::path base_;
  std::map<std::string, std::string> values_;
};

/// Files are staged in a hidden sibling directory and renamed into place on
/// commit; an uncommitted stage is removed.
class Artifacts {
 public:
  Artifacts(fs::path destination, std::string command, std::string config_hash, std::uint64_t seed)
      : final_(std::move(destination)),
        command_(std::move(command)),
        hash_(std::move(config_hash)),
        seed_(seed) {
    if (final_.empty()) throw UsageError("--output is required");
    final_ = fs::absolute(final_);
    fs::create_directories(final_.parent_path());
    stage_ = final_.parent_path() / ("." + final_.filename().string() + ".tmp-" + std::to_string(::getpid()));
    fs::remove_all(stage_);
    fs::create_directories(stage_);
  }
  Artifacts(const Artifacts&) = delete;
  Artifacts& operator=(const Artifacts&) = delete;
  ~Artifacts() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(stage_, ec);
    }
  }

  std::string provenance() const {
    return "bpress " + command_ + " config_hash=" + hash_ + " seed=" + std::to_string(seed_);
  }

  /// Text file whose first line is the provenance comment, unless the
  /// format carries its own header (`with_header` false).
  std::ofstream open(const std::string& name, bool with_header = true) {
    files_.push_back(name);
    std::ofstream out(stage_ / name);
    if (!out) throw std::runtime_error("cannot write " + (stage_ / name).string());
    if (with_header) out << "# " << provenance() << '\n';
    return out;
  }

  void write_json(const std::string& name, nlohmann::json j) {
    j["config_hash"] = hash_;
    j["seed"] = seed_;
    auto out = open(name, false);
    out << j.dump(2) << '\n';
  }

  void commit(const nlohmann::json& config) {
    nlohmann::json manifest{{"command", command_}, {"config_hash", hash_}, {"seed", seed_},
                            {"config", config},    {"files", files_}};
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest["created_at"] = stamp;
    std::ofstream(stage_ / "manifest.json") << manifest.dump(2) << '\n';
    fs::remove_all(final_);
    fs::rename(stage_, final_);
    committed_ = true;
  }

  const std::string& config_hash() const { return hash_; }
  std::uint64_t seed() const { return seed_; }

 private:
  fs::path final_;
  fs::path stage_;
  std::string command_;
  std::string hash_;
  std::uint64_t seed_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

}  // namespace bpress
