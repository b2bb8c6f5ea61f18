#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypercube/cayley.hpp"
#include "hypercube/model.hpp"

#include "json.hpp"

namespace hypercube {

struct DiagnosticsConfig {
  /// Trade-off constant in the dominance margin B - 3n^2 + c*R.
  double dominance_c = 0.28;
  /// Refusal threshold handed to synchronize().
  double sync_tol = 1e-4;
  /// Relative singular-value cutoff for rank fields.
  double rank_tol = 1e-8;
};

/// Numeric residuals for the structural properties a factorization is
/// supposed to satisfy. Fields that cannot be computed (degenerate slices,
/// synchronization refused, table not a loop) are absent and the reason is
/// appended to `flags`; the report never aborts as a whole.
struct StructureReport {
  double H = 0.0;
  std::optional<double> B, R;
  std::optional<double> collinearity;         ///< R / n^2
  double unitarity_distance = 0.0;            ///< max over all 3n slices
  std::optional<double> kappa_mean, kappa_spread;
  std::optional<double> gram_spread;
  std::optional<double> character_residual;   ///< max_g |tr(rho_g) - n*[g=e]|
  std::optional<double> homomorphism_residual;
  std::optional<double> amgm_gap;             ///< B - 3 sum |T|^{4/3} kappa^{-1/3}
  std::optional<double> dominance_margin;     ///< B - 3n^2 + c*R
  int unfolding_rank = 0;                     ///< mode-1 rank of T(theta)
  double feas_residual = 0.0;
  double dominance_c = 0.28;
  std::vector<std::string> flags;
};

StructureReport structure_report(const FactorSet& f, const CayleyTable& t,
                                 const DiagnosticsConfig& cfg = {});

/// Flat JSON with snake_case keys; absent fields serialize as null and are
/// named in the "flags" array.
nlohmann::json report_to_json(const StructureReport& rep);

enum class GroupVerdict { GroupIsotopeEvidence, Inconclusive };

struct GroupCheckResult {
  GroupVerdict verdict = GroupVerdict::Inconclusive;
  bool feasible = false;           ///< max|T - delta| <= tol
  double feas_residual = 0.0;
  double collinearity = 0.0;
  double unitarity_distance = 0.0;
  /// Independent combinatorial check: the loop isotope of t is a group.
  bool combinatorial_group = false;
  bool agree = false;
};

/// Numerical evidence (collinearity and unitarity residuals below tol on a
/// feasible factorization) that the table is a group isotope, cross-checked
/// against the exact combinatorial test.
GroupCheckResult check_quasigroup_to_group(const FactorSet& f,
                                           const CayleyTable& t, double tol);

const char* to_string(GroupVerdict v);

}  // namespace hypercube
