#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hypercube/enumeration.hpp"
#include "hypercube/optimizer.hpp"

namespace hypercube {

struct SweepRecord {
  int order = 0;
  int loop_id = 0;                 ///< index within its order, sorted by hash
  std::uint64_t canonical_hash = 0;
  double n_v_norm = 0.0;
  double H_min = 0.0, B_min = 0.0, R_min = 0.0;
  double H_norm = 0.0, B_norm = 0.0, R_norm = 0.0;  ///< divided by n^2
  double feas_residual = 0.0;
  bool converged = false;
  int restarts_used = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kRecordsHeader =
    "order,loop_id,canonical_hash,n_v_norm,H_min,B_min,R_min,H_norm,B_norm,"
    "R_norm,feas_residual,converged,restarts_used,seed";

/// Lossless CSV round-trip (17 significant digits on doubles).
void write_records(const std::string& path, const std::vector<SweepRecord>& rs);
std::vector<SweepRecord> read_records(const std::string& path);

struct SweepConfig {
  std::vector<int> orders;   ///< subset of [2, 8]
  OptConfig opt;
  int sample_count = 100;    ///< per order, for orders 7-8
  std::uint64_t enum_seed = 0;
  int workers = 1;
  /// When non-empty, records persist here (plus "<path>.meta.json") and
  /// existing entries with a matching config fingerprint are reused.
  std::string out_path;
};

struct SweepSummary {
  std::vector<SweepRecord> records;  ///< sorted by (order, canonical_hash)
  int computed = 0;
  int resumed = 0;
};

/// Enumerates the loop population per order (exhaustive through order 6,
/// seeded sampling above), optimizes each loop, and joins the minima with
/// the associativity-violation metric. Deterministic for a fixed config
/// regardless of worker count.
SweepSummary run_sweep(const SweepConfig& cfg);

struct FitResult {
  double c_R = 0.0, c_B = 0.0, c_H = 0.0;  ///< slope magnitudes
  double intercept_R = 0.0, intercept_B = 0.0, intercept_H = 0.0;
  double c_ratio = 0.0;                    ///< c_B / c_R
  std::array<double, 3> r_squared{};       ///< order: R, B, H series
  int n_points = 0;
  bool fixed_intercept_mode = false;
};

/// Least-squares slopes of R_norm, B_norm, H_norm against n_v_norm over
/// converged records. Fixed mode pins the intercepts at (0, 3, 3), which
/// makes c_H = c_R - c_B an exact identity. Throws InsufficientData when
/// fewer than two distinct abscissae are available.
FitResult fit_scaling(const std::vector<SweepRecord>& rs, bool fixed_intercepts);

/// Three-panel scatter (H_norm, R_norm, B_norm vs n_v_norm) with per-order
/// markers and the fitted lines; byte-for-byte deterministic.
std::string render_scatter_svg(const std::vector<SweepRecord>& rs,
                               const FitResult* fit);
void emit_scatter_svg(const std::vector<SweepRecord>& rs, const FitResult* fit,
                      const std::string& path);

}  // namespace hypercube
