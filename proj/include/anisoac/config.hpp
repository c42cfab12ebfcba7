#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "anisoac/util.hpp"

namespace anisoac {

// Flat key=value configuration with dotted namespaces; '#' starts a comment.
// Validation rejects unknown keys and reports all violations at once.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& dflt) const;

  // Throws with every violation listed when a key is unknown.
  void validate(const std::set<std::string>& known) const;

  // Sorted key=value lines; basis of the config fingerprint.
  std::string normalized() const;
  std::uint64_t hash() const { return fnv1a64(normalized()); }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Every key any subcommand reads.
const std::set<std::string>& known_config_keys();

}  // namespace anisoac
