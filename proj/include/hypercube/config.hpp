#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "hypercube/diagnostics.hpp"
#include "hypercube/optimizer.hpp"

namespace hypercube {

inline constexpr const char* kVersion = "0.1.0";

/// Flat key=value settings file ('#' starts a comment). Recognized keys:
/// restarts, max_steps, step_size, feas_tol, init_scale, seed,
/// penalty_schedule (comma-separated mu list), dominance_c, sync_tol,
/// rank_tol, sample_count, workers.
struct ConfigMap {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
};

ConfigMap load_config_file(const std::string& path);

/// Resolution order: explicit flag path, then $HYPERCUBE_CONF, then
/// ./hypercube.conf when present. Empty result means built-in defaults.
std::optional<std::string> resolve_config_path(const std::string& flag_path);

void apply_config(const ConfigMap& c, OptConfig& opt);
void apply_config(const ConfigMap& c, DiagnosticsConfig& diag);

/// Hash of the effective settings (after the config file is applied);
/// reported by --version.
std::uint64_t settings_fingerprint(const OptConfig& opt,
                                   const DiagnosticsConfig& diag);

}  // namespace hypercube
