#include "anisoac/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace anisoac {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos,
            "config: line " + std::to_string(lineno) + " is not key=value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), "config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_string(text);
}

void Config::set(const std::string& key, const std::string& value) {
  require(!key.empty(), "config: empty key");
  kv_[key] = value;
}

std::string Config::get_string(const std::string& key, const std::string& dflt) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key, double dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw std::invalid_argument("config: key '" + key + "' is not a number: " +
                                it->second);
  }
}

int Config::get_int(const std::string& key, int dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    return std::stoi(it->second);
  } catch (...) {
    throw std::invalid_argument("config: key '" + key + "' is not an integer: " +
                                it->second);
  }
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean");
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw std::invalid_argument("config: key '" + key + "' has a bad list entry: " +
                                  item);
    }
  }
  return out;
}

void Config::validate(const std::set<std::string>& known) const {
  std::vector<std::string> bad;
  for (const auto& [k, v] : kv_)
    if (known.count(k) == 0) bad.push_back(k);
  if (!bad.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& k : bad) msg += " '" + k + "'";
    throw std::invalid_argument(msg);
  }
}

std::string Config::normalized() const {
  std::string s;
  for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
  return s;
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "run.seed", "run.threads",
      "grid.dim", "grid.cells", "grid.lengths",
      "metric.phi_amplitude",
      "potential.family", "potential.coeffs",
      "integrand.family", "integrand.matrix", "integrand.beta", "integrand.delta",
      "integrand.quad_order", "integrand.modulation",
      "energy.epsilon",
      "init.kind", "init.value", "init.axis", "init.amplitude", "init.snapshot",
      "init.width",
      "flow.dt", "flow.steps", "flow.tol",
      "newton.tol", "newton.max_iter",
      "spectrum.k", "spectrum.max_iter", "spectrum.rtol",
      "minmax.axis", "minmax.nodes", "minmax.rounds", "minmax.tol", "minmax.gamma",
      "minmax.climb_after", "minmax.descent_steps", "minmax.delta_continuation",
      "minmax.checkpoint_every", "minmax.resume",
      "gamma.shape", "gamma.axis", "gamma.center", "gamma.radius", "gamma.width",
      "gamma.semi_axes", "gamma.eps_list", "gamma.gamma",
      "diagnose.snapshot", "diagnose.winding", "diagnose.tau", "diagnose.r_list",
      "diagnose.tangential_max_fraction", "diagnose.samples_per_cell",
      "heteroclinic.t_max", "heteroclinic.n",
      "audit.samples",
  };
  return keys;
}

}  // namespace anisoac
