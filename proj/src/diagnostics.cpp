#include "hypercube/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypercube/errors.hpp"

namespace hypercube {

StructureReport structure_report(const FactorSet& f, const CayleyTable& t,
                                 const DiagnosticsConfig& cfg) {
  check_factorset(f);
  if (f.n != t.n())
    throw DimensionMismatch("structure_report: order mismatch");
  const int n = f.n;
  const double n2 = static_cast<double>(n) * n;

  StructureReport rep;
  rep.dominance_c = cfg.dominance_c;

  const DecompositionReport dec = decompose(f, t, /*with_gram=*/true);
  rep.H = dec.H;
  const bool degenerate =
      std::find(dec.flags.begin(), dec.flags.end(), "degenerate_slice") !=
      dec.flags.end();
  if (degenerate) {
    rep.flags.push_back("degenerate_slice");
  } else {
    rep.B = dec.B;
    rep.R = dec.R;
    rep.collinearity = dec.R / n2;
    rep.dominance_margin = dec.B - 3.0 * n2 + cfg.dominance_c * dec.R;
  }

  for (const auto* stack : {&f.A, &f.B, &f.C})
    for (const CMatrix& m : *stack)
      rep.unitarity_distance = std::max(rep.unitarity_distance, unitarity_defect(m));

  // kappa statistics and the per-triple AM-GM bound share the same
  // nondegeneracy requirements.
  {
    bool any_triple_degenerate = false;
    std::vector<double> kappas;
    double amgm_rhs = 0.0;
    for (const TripleReport& tr : dec.per_triple) {
      if (tr.degenerate || !tr.kappa.has_value()) {
        any_triple_degenerate = true;
        continue;
      }
      kappas.push_back(*tr.kappa);
      amgm_rhs += 3.0 * std::pow(std::norm(tr.T), 2.0 / 3.0) *
                  std::pow(*tr.kappa, -1.0 / 3.0);
    }
    if (any_triple_degenerate) rep.flags.push_back("degenerate_triple");
    if (!kappas.empty() && !any_triple_degenerate && !degenerate) {
      double mean = 0.0;
      for (double k : kappas) mean += k;
      mean /= static_cast<double>(kappas.size());
      double spread = 0.0;
      for (double k : kappas) spread = std::max(spread, std::abs(k - mean));
      rep.kappa_mean = mean;
      rep.kappa_spread = spread;
      rep.amgm_gap = dec.B - amgm_rhs;
    }
  }

  if (dec.gram.has_value()) rep.gram_spread = dec.gram->spread;

  const Tensor3 T = contract(f);
  rep.feas_residual = feas_residual_max(T, t);
  rep.unfolding_rank = mode1_unfolding_rank(T, cfg.rank_tol);

  if (!t.has_identity_at_zero()) {
    rep.flags.push_back("not_a_loop");
  } else {
    try {
      const RepMap rm = synchronize(f, t, SyncOptions{cfg.sync_tol});
      double chr = 0.0;
      for (int g = 0; g < n; ++g) {
        Complex tr = 0.0;
        for (int i = 0; i < n; ++i) tr += rm.rho[g](i, i);
        chr = std::max(chr, std::abs(tr - Complex(g == 0 ? n : 0.0)));
      }
      double hom = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const int c = t.at(a, b);
          hom = std::max(hom, std::sqrt(norm_sq(matmul(rm.rho[a], rm.rho[b]) -
                                                rm.rho[c])));
        }
      rep.character_residual = chr;
      rep.homomorphism_residual = hom;
    } catch (const NotSynchronizable&) {
      rep.flags.push_back("not_synchronizable");
    }
  }

  return rep;
}

namespace {

nlohmann::json opt_field(const std::optional<double>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

}  // namespace

nlohmann::json report_to_json(const StructureReport& rep) {
  nlohmann::json j;
  j["h"] = rep.H;
  j["b"] = opt_field(rep.B);
  j["r"] = opt_field(rep.R);
  j["collinearity"] = opt_field(rep.collinearity);
  j["unitarity_distance"] = rep.unitarity_distance;
  j["kappa_mean"] = opt_field(rep.kappa_mean);
  j["kappa_spread"] = opt_field(rep.kappa_spread);
  j["gram_spread"] = opt_field(rep.gram_spread);
  j["character_residual"] = opt_field(rep.character_residual);
  j["homomorphism_residual"] = opt_field(rep.homomorphism_residual);
  j["amgm_gap"] = opt_field(rep.amgm_gap);
  j["dominance_margin"] = opt_field(rep.dominance_margin);
  j["dominance_c"] = rep.dominance_c;
  j["unfolding_rank"] = rep.unfolding_rank;
  j["feas_residual"] = rep.feas_residual;
  j["flags"] = rep.flags;
  return j;
}

GroupCheckResult check_quasigroup_to_group(const FactorSet& f,
                                           const CayleyTable& t, double tol) {
  check_factorset(f);
  if (f.n != t.n())
    throw DimensionMismatch("check_quasigroup_to_group: order mismatch");
  const int n = f.n;

  GroupCheckResult out;
  out.feas_residual = feas_residual_max(contract(f), t);
  out.feasible = out.feas_residual <= tol;

  for (const auto* stack : {&f.A, &f.B, &f.C})
    for (const CMatrix& m : *stack)
      out.unitarity_distance = std::max(out.unitarity_distance, unitarity_defect(m));

  bool collinearity_ok = false;
  try {
    out.collinearity =
        misalignment_R(f, t).value / (static_cast<double>(n) * n);
    collinearity_ok = out.collinearity < tol;
  } catch (const DegenerateSlice&) {
    out.collinearity = std::numeric_limits<double>::infinity();
  }

  out.verdict = (out.feasible && collinearity_ok && out.unitarity_distance < tol)
                    ? GroupVerdict::GroupIsotopeEvidence
                    : GroupVerdict::Inconclusive;

  out.combinatorial_group = assoc_report(to_loop_isotope(t).loop).is_group;
  out.agree = (out.verdict == GroupVerdict::GroupIsotopeEvidence) ==
              out.combinatorial_group;
  return out;
}

const char* to_string(GroupVerdict v) {
  return v == GroupVerdict::GroupIsotopeEvidence ? "group_isotope_evidence"
                                                 : "inconclusive";
}

}  // namespace hypercube
