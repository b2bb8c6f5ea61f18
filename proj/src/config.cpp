#include "hypercube/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hypercube/errors.hpp"
#include "hypercube/rng.hpp"

namespace hypercube {

std::optional<std::string> ConfigMap::get(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::exception&) {
    throw Error("config: bad numeric value for '" + key + "': " + *v);
  }
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  int out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
    throw Error("config: bad integer value for '" + key + "': " + *v);
  return out;
}

std::uint64_t ConfigMap::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
    throw Error("config: bad unsigned value for '" + key + "': " + *v);
  return out;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config file '" + path + "'");
  ConfigMap c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value in config", lineno);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(val);
    if (key.empty()) throw ParseError("empty key in config", lineno);
    c.values[key] = val;
  }
  return c;
}

std::optional<std::string> resolve_config_path(const std::string& flag_path) {
  if (!flag_path.empty()) return flag_path;
  if (const char* env = std::getenv("HYPERCUBE_CONF"); env && *env)
    return std::string(env);
  if (std::filesystem::exists("hypercube.conf"))
    return std::string("hypercube.conf");
  return std::nullopt;
}

void apply_config(const ConfigMap& c, OptConfig& opt) {
  opt.restarts = c.get_int("restarts", opt.restarts);
  opt.max_steps = c.get_int("max_steps", opt.max_steps);
  opt.step_size = c.get_double("step_size", opt.step_size);
  opt.feas_tol = c.get_double("feas_tol", opt.feas_tol);
  opt.init_scale = c.get_double("init_scale", opt.init_scale);
  opt.seed = c.get_u64("seed", opt.seed);
  if (const auto sched = c.get("penalty_schedule"); sched) {
    std::vector<PenaltyPhase> phases;
    std::size_t start = 0;
    const int per = std::max(1, opt.max_steps /
                                    std::max<int>(1, 1 + static_cast<int>(std::count(
                                                           sched->begin(), sched->end(), ','))));
    while (start <= sched->size()) {
      const std::size_t pos = sched->find(',', start);
      const std::string tok = sched->substr(
          start, pos == std::string::npos ? std::string::npos : pos - start);
      if (!tok.empty()) {
        try {
          phases.push_back({std::stod(tok), per});
        } catch (const std::exception&) {
          throw Error("config: bad penalty_schedule entry '" + tok + "'");
        }
      }
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    opt.schedule = std::move(phases);
  }
}

void apply_config(const ConfigMap& c, DiagnosticsConfig& diag) {
  diag.dominance_c = c.get_double("dominance_c", diag.dominance_c);
  diag.sync_tol = c.get_double("sync_tol", diag.sync_tol);
  diag.rank_tol = c.get_double("rank_tol", diag.rank_tol);
}

std::uint64_t settings_fingerprint(const OptConfig& opt,
                                   const DiagnosticsConfig& diag) {
  std::uint64_t h = opt_config_fingerprint(opt);
  h = fnv1a(&diag.dominance_c, sizeof diag.dominance_c, h);
  h = fnv1a(&diag.sync_tol, sizeof diag.sync_tol, h);
  h = fnv1a(&diag.rank_tol, sizeof diag.rank_tol, h);
  return h;
}

}  // namespace hypercube
