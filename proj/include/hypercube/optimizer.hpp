#pragma once

#include <cstdint>
#include <vector>

#include "hypercube/cayley.hpp"
#include "hypercube/model.hpp"

namespace hypercube {

struct PenaltyPhase {
  double mu;
  int steps;
};

struct OptConfig {
  int restarts = 8;
  int max_steps = 50'000;
  double step_size = 1e-2;
  /// Empty means the default geometric schedule mu = 10, 10^2, 10^3, 10^4
  /// with max_steps/4 steps each. Phases that plateau early donate their
  /// unused budget to later phases.
  std::vector<PenaltyPhase> schedule;
  double feas_tol = 1e-3;  ///< max entrywise |T - delta| for convergence
  std::uint64_t seed = 0;
  bool tied = false;       ///< optimize a single stack rho with A=B=rho, C=rho^H
  double init_scale = 0.0;  ///< 0 -> 1/sqrt(n)
  int trace_stride = 0;     ///< 0 -> no trace; 1 -> every step

  std::vector<PenaltyPhase> effective_schedule() const;
  void validate() const;
};

struct TracePoint {
  int step;     ///< global step index within the run
  double mu;
  double loss;
  double feas;  ///< max |T - delta| at that step
};

struct RunResult {
  FactorSet theta;
  double H = 0.0, B = 0.0, R = 0.0;
  double feas_residual = 0.0;
  bool converged = false;
  int steps_used = 0;
  std::uint64_t seed = 0;
  std::vector<TracePoint> trace;
};

/// i.i.d. complex gaussian slices with E|entry|^2 = scale^2 (so an expected
/// squared slice norm of n * scale^2). Deterministic per (n, seed, scale).
FactorSet init_random(int n, std::uint64_t seed, double scale);

/// L = mu * sum over all n^3 entries of |T_abc - delta_abc|^2 + H(theta).
double penalty_loss(const FactorSet& f, const CayleyTable& t, double mu);

/// Gradient of the penalty loss in the real coordinates (Re, Im treated as
/// independent), packed as complex: G = dL/dRe + i dL/dIm.  Matches central
/// finite differences entrywise.
FactorSet analytic_grad(const FactorSet& f, const CayleyTable& t, double mu);

/// Tied variant: gradient with respect to the single stack rho, where the
/// factors are A = rho, B = rho, C_g = rho_g^H; the three chain
/// contributions are summed.
std::vector<CMatrix> analytic_grad_tied(const std::vector<CMatrix>& rho,
                                        const CayleyTable& t, double mu);

struct MinimizeOutcome {
  RunResult best;
  std::vector<RunResult> runs;  ///< one per restart, ordered by seed
};

/// Multi-restart penalty-method minimization of H over factorizations of
/// the table's structure tensor. Adam-style adaptive steps with a monotone
/// backtracking safeguard; a run converges when the feasibility residual is
/// within feas_tol and the loss changed by less than 1e-9 (relative) over a
/// 500-step window. Best = lowest H among converged runs, else the lowest
/// feasibility residual. Fully deterministic for a fixed (table, config).
MinimizeOutcome minimize(const CayleyTable& t, const OptConfig& cfg);

/// Convenience wrapper forcing cfg.tied = true; returns the best run.
RunResult minimize_tied(const CayleyTable& t, OptConfig cfg);

/// Stable hash of every result-affecting config field; used to guard
/// persisted sweep records against config drift.
std::uint64_t opt_config_fingerprint(const OptConfig& cfg);

}  // namespace hypercube
