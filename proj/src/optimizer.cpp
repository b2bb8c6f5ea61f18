#include "hypercube/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hypercube/errors.hpp"
#include "hypercube/rng.hpp"

namespace hypercube {

std::vector<PenaltyPhase> OptConfig::effective_schedule() const {
  if (!schedule.empty()) return schedule;
  const int per = std::max(1, max_steps / 4);
  return {{1e1, per}, {1e2, per}, {1e3, per}, {1e4, per}};
}

void OptConfig::validate() const {
  if (restarts < 1) throw Error("config: restarts must be positive");
  if (max_steps < 1) throw Error("config: max_steps must be positive");
  if (step_size <= 0.0) throw Error("config: step_size must be positive");
  if (feas_tol <= 0.0) throw Error("config: feas_tol must be positive");
  if (init_scale < 0.0) throw Error("config: init_scale must be non-negative");
  const auto sched = effective_schedule();
  double prev = 0.0;
  for (const PenaltyPhase& p : sched) {
    if (p.mu <= prev) throw Error("config: penalty schedule must be strictly increasing");
    if (p.steps < 1) throw Error("config: phase steps must be positive");
    prev = p.mu;
  }
}

FactorSet init_random(int n, std::uint64_t seed, double scale) {
  if (n < 1) throw DimensionMismatch("init_random: n must be positive");
  Rng rng(splitmix64(seed) ^ 0x696e697472616e64ULL);
  FactorSet f = FactorSet::zeros(n);
  for (auto* stack : {&f.A, &f.B, &f.C})
    for (CMatrix& m : *stack)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.cgaussian(scale);
  return f;
}

namespace {

using std::size_t;

/// Loss/gradient engine over flat parameter vectors. Caches the pairwise
/// slice products and the residual tensor from the last loss() call so the
/// following grad() call reuses them.
class Evaluator {
 public:
  Evaluator(const CayleyTable& t, bool tied)
      : t_(t), n_(t.n()), nn_(static_cast<size_t>(n_) * n_), tied_(tied) {
    const size_t n3 = nn_ * n_;
    A_.resize(n3);
    B_.resize(n3);
    C_.resize(n3);
    AB_.resize(nn_ * nn_);
    BC_.resize(nn_ * nn_);
    CA_.resize(nn_ * nn_);
    T_.resize(n3);
    E_.resize(n3);
    sup_.resize(n3, 0);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        sup_[(static_cast<size_t>(a) * n_ + b) * n_ + t.at(a, b)] = 1;
  }

  size_t param_count() const { return tied_ ? nn_ * n_ : 3 * nn_ * n_; }

  double loss(const std::vector<Complex>& params, double mu) {
    expand(params);
    const int n = n_;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        matmul_into(&AB_[(static_cast<size_t>(x) * n + y) * nn_], &A_[x * nn_],
                    &B_[y * nn_], n);
        matmul_into(&BC_[(static_cast<size_t>(x) * n + y) * nn_], &B_[x * nn_],
                    &C_[y * nn_], n);
        matmul_into(&CA_[(static_cast<size_t>(x) * n + y) * nn_], &C_[x * nn_],
                    &A_[y * nn_], n);
      }

    double h = 0.0;
    for (const Complex& z : AB_) h += std::norm(z);
    for (const Complex& z : BC_) h += std::norm(z);
    for (const Complex& z : CA_) h += std::norm(z);
    h /= n;

    // T_abc = tr(A_a BC_bc)/n
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const Complex* bc = &BC_[(static_cast<size_t>(b) * n + c) * nn_];
        for (int a = 0; a < n; ++a) {
          const Complex* sa = &A_[a * nn_];
          Complex acc = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) acc += sa[i * n + j] * bc[j * n + i];
          T_[(static_cast<size_t>(a) * n + b) * n + c] = acc / static_cast<double>(n);
        }
      }

    double pen = 0.0;
    feas_ = 0.0;
    for (size_t i = 0; i < T_.size(); ++i) {
      const Complex e = T_[i] - Complex(sup_[i] ? 1.0 : 0.0);
      E_[i] = e;
      const double a2 = std::norm(e);
      pen += a2;
      feas_ = std::max(feas_, a2);
    }
    feas_ = std::sqrt(feas_);
    H_ = h;
    return mu * pen + h;
  }

  double cached_feas() const { return feas_; }
  double cached_H() const { return H_; }

  /// Gradient at the parameters of the last loss() call.
  void grad(double mu, std::vector<Complex>& g) {
    const int n = n_;
    gA_.assign(nn_ * n, Complex{});
    gB_.assign(nn_ * n, Complex{});
    gC_.assign(nn_ * n, Complex{});

    // Constraint part: for each entry, E_abc spreads onto the three slices
    // through the daggered partner products.
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const Complex e = E_[(static_cast<size_t>(a) * n + b) * n + c];
          const Complex* bc = &BC_[(static_cast<size_t>(b) * n + c) * nn_];
          const Complex* ca = &CA_[(static_cast<size_t>(c) * n + a) * nn_];
          const Complex* ab = &AB_[(static_cast<size_t>(a) * n + b) * nn_];
          Complex* ga = &gA_[a * nn_];
          Complex* gb = &gB_[b * nn_];
          Complex* gc = &gC_[c * nn_];
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              const size_t ij = static_cast<size_t>(i) * n + j;
              const size_t ji = static_cast<size_t>(j) * n + i;
              ga[ij] += e * std::conj(bc[ji]);
              gb[ij] += e * std::conj(ca[ji]);
              gc[ij] += e * std::conj(ab[ji]);
            }
        }
    const double cpen = 2.0 * mu / n;
    for (Complex& z : gA_) z *= cpen;
    for (Complex& z : gB_) z *= cpen;
    for (Complex& z : gC_) z *= cpen;

    // Objective part: grad_A = (2/n)(A_a M_B + N_C A_a) with
    // M_B = sum_b B_b B_b^H, N_C = sum_c C_c^H C_c, and the analogues.
    accum_left_gram(B_, MB_);
    accum_right_gram(C_, NC_);
    accum_left_gram(C_, MC_);
    accum_right_gram(A_, NA_);
    accum_left_gram(A_, MA_);
    accum_right_gram(B_, NB_);

    scratch_.resize(nn_);
    const double cobj = 2.0 / n;
    for (int x = 0; x < n; ++x) {
      add_two_sided(&gA_[x * nn_], &A_[x * nn_], MB_.data(), NC_.data(), cobj);
      add_two_sided(&gB_[x * nn_], &B_[x * nn_], MC_.data(), NA_.data(), cobj);
      add_two_sided(&gC_[x * nn_], &C_[x * nn_], MA_.data(), NB_.data(), cobj);
    }

    // Fold back into parameter shape.
    if (!tied_) {
      g.resize(3 * nn_ * n);
      std::copy(gA_.begin(), gA_.end(), g.begin());
      std::copy(gB_.begin(), gB_.end(), g.begin() + nn_ * n);
      std::copy(gC_.begin(), gC_.end(), g.begin() + 2 * nn_ * n);
    } else {
      // C_g = rho_g^H contributes the dagger of its gradient.
      g.assign(nn_ * n, Complex{});
      for (int x = 0; x < n; ++x)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const size_t ij = static_cast<size_t>(i) * n + j;
            const size_t ji = static_cast<size_t>(j) * n + i;
            g[x * nn_ + ij] = gA_[x * nn_ + ij] + gB_[x * nn_ + ij] +
                              std::conj(gC_[x * nn_ + ji]);
          }
    }
  }

  FactorSet unpack(const std::vector<Complex>& params) const {
    FactorSet f = FactorSet::zeros(n_);
    auto fill = [&](std::vector<CMatrix>& stack, const Complex* src) {
      for (int x = 0; x < n_; ++x)
        std::copy(src + x * nn_, src + (x + 1) * nn_, stack[x].data());
    };
    if (!tied_) {
      fill(f.A, params.data());
      fill(f.B, params.data() + nn_ * static_cast<size_t>(n_));
      fill(f.C, params.data() + 2 * nn_ * static_cast<size_t>(n_));
    } else {
      fill(f.A, params.data());
      fill(f.B, params.data());
      for (int x = 0; x < n_; ++x)
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j)
            f.C[x](i, j) = std::conj(params[x * nn_ + static_cast<size_t>(j) * n_ + i]);
    }
    return f;
  }

 private:
  void expand(const std::vector<Complex>& params) {
    if (!tied_) {
      std::copy(params.begin(), params.begin() + nn_ * n_, A_.begin());
      std::copy(params.begin() + nn_ * n_, params.begin() + 2 * nn_ * n_, B_.begin());
      std::copy(params.begin() + 2 * nn_ * n_, params.end(), C_.begin());
    } else {
      std::copy(params.begin(), params.end(), A_.begin());
      std::copy(params.begin(), params.end(), B_.begin());
      for (int x = 0; x < n_; ++x)
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j)
            C_[x * nn_ + static_cast<size_t>(i) * n_ + j] =
                std::conj(params[x * nn_ + static_cast<size_t>(j) * n_ + i]);
    }
  }

  // out = sum_x S_x S_x^H
  void accum_left_gram(const std::vector<Complex>& slices, std::vector<Complex>& out) {
    out.assign(nn_, Complex{});
    const int n = n_;
    for (int x = 0; x < n; ++x) {
      const Complex* s = &slices[x * nn_];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Complex acc = 0.0;
          for (int k = 0; k < n; ++k)
            acc += s[static_cast<size_t>(i) * n + k] * std::conj(s[static_cast<size_t>(j) * n + k]);
          out[static_cast<size_t>(i) * n + j] += acc;
        }
    }
  }

  // out = sum_x S_x^H S_x
  void accum_right_gram(const std::vector<Complex>& slices, std::vector<Complex>& out) {
    out.assign(nn_, Complex{});
    const int n = n_;
    for (int x = 0; x < n; ++x) {
      const Complex* s = &slices[x * nn_];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Complex acc = 0.0;
          for (int k = 0; k < n; ++k)
            acc += std::conj(s[static_cast<size_t>(k) * n + i]) * s[static_cast<size_t>(k) * n + j];
          out[static_cast<size_t>(i) * n + j] += acc;
        }
    }
  }

  // g += coeff * (S * M + N * S)
  void add_two_sided(Complex* g, const Complex* s, const Complex* m,
                     const Complex* nmat, double coeff) {
    const int n = n_;
    matmul_into(scratch_.data(), s, m, n);
    for (size_t i = 0; i < nn_; ++i) g[i] += coeff * scratch_[i];
    matmul_into(scratch_.data(), nmat, s, n);
    for (size_t i = 0; i < nn_; ++i) g[i] += coeff * scratch_[i];
  }

  const CayleyTable& t_;
  int n_;
  size_t nn_;
  bool tied_;

  std::vector<Complex> A_, B_, C_;
  std::vector<Complex> AB_, BC_, CA_;
  std::vector<Complex> T_, E_;
  std::vector<char> sup_;
  std::vector<Complex> gA_, gB_, gC_;
  std::vector<Complex> MB_, NC_, MC_, NA_, MA_, NB_, scratch_;
  double feas_ = 0.0;
  double H_ = 0.0;
};

std::vector<Complex> pack(const FactorSet& f) {
  const size_t nn = static_cast<size_t>(f.n) * f.n;
  std::vector<Complex> p(3 * nn * f.n);
  for (int x = 0; x < f.n; ++x) {
    std::copy(f.A[x].data(), f.A[x].data() + nn, p.begin() + x * nn);
    std::copy(f.B[x].data(), f.B[x].data() + nn, p.begin() + (f.n + x) * nn);
    std::copy(f.C[x].data(), f.C[x].data() + nn, p.begin() + (2 * f.n + x) * nn);
  }
  return p;
}

struct AdamState {
  explicit AdamState(size_t real_dim) : m(real_dim, 0.0), v(real_dim, 0.0) {}
  void reset() {
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    t = 0;
  }
  std::vector<double> m, v;
  long t = 0;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr int kWindow = 500;
constexpr double kWindowTol = 1e-9;
constexpr double kAcceptSlack = 1e-12;

RunResult run_single(const CayleyTable& t, const OptConfig& cfg,
                     std::uint64_t seed, Evaluator& ev) {
  const int n = t.n();
  const double scale = cfg.init_scale > 0.0 ? cfg.init_scale : 1.0 / std::sqrt(n);

  std::vector<Complex> params;
  {
    const FactorSet f0 = init_random(n, seed, scale);
    if (!cfg.tied) {
      params = pack(f0);
    } else {
      params.assign(f0.A.size() * f0.A[0].size(), Complex{});
      for (int x = 0; x < n; ++x)
        std::copy(f0.A[x].data(), f0.A[x].data() + f0.A[x].size(),
                  params.begin() + static_cast<size_t>(x) * n * n);
    }
  }

  const size_t dim = params.size();
  std::vector<Complex> cand(dim), grad(dim);
  std::vector<double> dir(2 * dim);
  AdamState adam(2 * dim);

  RunResult rr;
  rr.seed = seed;

  const auto phases = cfg.effective_schedule();
  int steps_used = 0;
  bool plateau_final = false;
  int carry = 0;

  for (size_t pi = 0; pi < phases.size(); ++pi) {
    const double mu = phases[pi].mu;
    int budget = phases[pi].steps + carry;
    double L = ev.loss(params, mu);
    adam.reset();
    double trust = 1.0;
    std::vector<double> ring(kWindow, 0.0);
    bool plateau = false;
    int k = 0;

    for (; k < budget && steps_used < cfg.max_steps; ++k) {
      ev.grad(mu, grad);
      adam.t += 1;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
      const double* gr = reinterpret_cast<const double*>(grad.data());
      for (size_t i = 0; i < 2 * dim; ++i) {
        adam.m[i] = kBeta1 * adam.m[i] + (1.0 - kBeta1) * gr[i];
        adam.v[i] = kBeta2 * adam.v[i] + (1.0 - kBeta2) * gr[i] * gr[i];
        dir[i] = (adam.m[i] / bc1) / (std::sqrt(adam.v[i] / bc2) + kAdamEps);
      }

      // Monotone safeguard: halve the step until the loss does not increase.
      bool accepted = false;
      double s = cfg.step_size * trust;
      for (int bt = 0; bt < 26; ++bt, s *= 0.5) {
        for (size_t i = 0; i < dim; ++i)
          cand[i] = params[i] - Complex(s * dir[2 * i], s * dir[2 * i + 1]);
        const double lc = ev.loss(cand, mu);
        if (lc <= L + kAcceptSlack * std::max(1.0, std::abs(L))) {
          params.swap(cand);
          L = lc;
          trust = std::min(1.0, (s / cfg.step_size) * 1.3);
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // Even tiny steps along the (momentum) direction ascend; drop the
        // stale moments and re-prime the caches at the current point.
        adam.reset();
        trust = std::max(trust * 0.25, 1e-9);
        ev.loss(params, mu);
      }

      ++steps_used;
      if (cfg.trace_stride > 0 && (steps_used % cfg.trace_stride) == 0)
        rr.trace.push_back({steps_used, mu, L, ev.cached_feas()});

      if (k >= kWindow) {
        const double lold = ring[k % kWindow];
        if (lold - L <= kWindowTol * std::max(1.0, std::abs(L))) {
          plateau = true;
          ring[k % kWindow] = L;
          ++k;
          break;
        }
      }
      ring[k % kWindow] = L;
    }

    carry = budget - k;
    if (pi + 1 == phases.size()) plateau_final = plateau;
    if (steps_used >= cfg.max_steps) {
      if (pi + 1 < phases.size()) plateau_final = false;
      break;
    }
  }

  rr.steps_used = steps_used;
  rr.theta = ev.unpack(params);
  const Tensor3 T = contract(rr.theta);
  rr.feas_residual = feas_residual_max(T, t);
  rr.H = objective_H(rr.theta);
  try {
    rr.B = base_term_B(rr.theta, t).value;
    rr.R = misalignment_R(rr.theta, t).value;
  } catch (const DegenerateSlice&) {
    rr.B = std::numeric_limits<double>::quiet_NaN();
    rr.R = std::numeric_limits<double>::quiet_NaN();
  }
  rr.converged = plateau_final && rr.feas_residual <= cfg.feas_tol;
  return rr;
}

}  // namespace

double penalty_loss(const FactorSet& f, const CayleyTable& t, double mu) {
  check_factorset(f);
  if (f.n != t.n()) throw DimensionMismatch("penalty_loss: order mismatch");
  Evaluator ev(t, /*tied=*/false);
  return ev.loss(pack(f), mu);
}

FactorSet analytic_grad(const FactorSet& f, const CayleyTable& t, double mu) {
  check_factorset(f);
  if (f.n != t.n()) throw DimensionMismatch("analytic_grad: order mismatch");
  Evaluator ev(t, /*tied=*/false);
  ev.loss(pack(f), mu);
  std::vector<Complex> g;
  ev.grad(mu, g);
  return ev.unpack(g);
}

std::vector<CMatrix> analytic_grad_tied(const std::vector<CMatrix>& rho,
                                        const CayleyTable& t, double mu) {
  const int n = t.n();
  if (static_cast<int>(rho.size()) != n)
    throw DimensionMismatch("analytic_grad_tied: expected n slices");
  Evaluator ev(t, /*tied=*/true);
  std::vector<Complex> params(static_cast<size_t>(n) * n * n);
  for (int x = 0; x < n; ++x) {
    if (rho[x].n() != n) throw DimensionMismatch("analytic_grad_tied: slice shape");
    std::copy(rho[x].data(), rho[x].data() + rho[x].size(),
              params.begin() + static_cast<size_t>(x) * n * n);
  }
  ev.loss(params, mu);
  std::vector<Complex> g;
  ev.grad(mu, g);
  std::vector<CMatrix> out(n, CMatrix(n));
  for (int x = 0; x < n; ++x)
    std::copy(g.begin() + static_cast<size_t>(x) * n * n,
              g.begin() + static_cast<size_t>(x + 1) * n * n, out[x].data());
  return out;
}

MinimizeOutcome minimize(const CayleyTable& t, const OptConfig& cfg) {
  cfg.validate();
  Evaluator ev(t, cfg.tied);
  MinimizeOutcome out;
  for (int i = 0; i < cfg.restarts; ++i)
    out.runs.push_back(run_single(t, cfg, cfg.seed + static_cast<std::uint64_t>(i), ev));

  const RunResult* best = nullptr;
  for (const RunResult& r : out.runs) {
    if (!best) {
      best = &r;
      continue;
    }
    if (r.converged != best->converged) {
      if (r.converged) best = &r;
      continue;
    }
    if (r.converged ? r.H < best->H : r.feas_residual < best->feas_residual)
      best = &r;
  }
  out.best = *best;
  return out;
}

RunResult minimize_tied(const CayleyTable& t, OptConfig cfg) {
  cfg.tied = true;
  return minimize(t, cfg).best;
}

std::uint64_t opt_config_fingerprint(const OptConfig& cfg) {
  char buf[512];
  std::string s;
  std::snprintf(buf, sizeof buf,
                "restarts=%d;max_steps=%d;step=%.17g;feas=%.17g;seed=%llu;"
                "tied=%d;scale=%.17g;sched=",
                cfg.restarts, cfg.max_steps, cfg.step_size, cfg.feas_tol,
                static_cast<unsigned long long>(cfg.seed), cfg.tied ? 1 : 0,
                cfg.init_scale);
  s = buf;
  for (const PenaltyPhase& p : cfg.effective_schedule()) {
    std::snprintf(buf, sizeof buf, "%.17g:%d,", p.mu, p.steps);
    s += buf;
  }
  return fnv1a(s.data(), s.size());
}

}  // namespace hypercube
