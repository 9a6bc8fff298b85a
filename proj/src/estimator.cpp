#include "mixest/estimator.hpp"

#include "mixest/common.hpp"
#include "mixest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mixest {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

// Row i contributes  top_i + log(base_i + slope_i * alpha)  for alpha in (0, 1),
// where top_i = max(log P, log Q) and, with e_i = exp(-|log Q - log P|) in (0, 1]:
//   Q dominant: alpha + (1 - alpha) e_i  ->  base e_i, slope 1 - e_i
//   P dominant: (1 - alpha) + alpha e_i  ->  base 1,   slope -(1 - e_i)
// No exponential of a log-likelihood is ever formed, so nothing underflows.
struct Rows {
  std::vector<double> base;
  std::vector<double> slope;
  std::vector<double> log_human;
  std::vector<double> log_ai;
  std::vector<double> grad0;  // d/dalpha at 0: Q/P - 1
  std::vector<double> grad1;  // d/dalpha at 1: 1 - P/Q
  std::vector<char> separated;

  void reserve(std::size_t n) {
    base.reserve(n);
    slope.reserve(n);
    log_human.reserve(n);
    log_ai.reserve(n);
    grad0.reserve(n);
    grad1.reserve(n);
    separated.reserve(n);
  }
  void clear() {
    base.clear();
    slope.clear();
    log_human.clear();
    log_ai.clear();
    grad0.clear();
    grad1.clear();
    separated.clear();
  }
  void push(double lh, double la) {
    const double d = la - lh;
    const double one_minus_e = -std::expm1(-std::fabs(d));
    if (d >= 0) {
      base.push_back(1.0 - one_minus_e);
      slope.push_back(one_minus_e);
    } else {
      base.push_back(1.0);
      slope.push_back(-one_minus_e);
    }
    log_human.push_back(lh);
    log_ai.push_back(la);
    grad0.push_back(std::expm1(d));
    grad1.push_back(-std::expm1(-d));
    separated.push_back(std::fabs(d) > kSeparationEps ? 1 : 0);
  }
  void push_from(const Rows& other, std::size_t i) {
    base.push_back(other.base[i]);
    slope.push_back(other.slope[i]);
    log_human.push_back(other.log_human[i]);
    log_ai.push_back(other.log_ai[i]);
    grad0.push_back(other.grad0[i]);
    grad1.push_back(other.grad1[i]);
    separated.push_back(other.separated[i]);
  }
  std::size_t size() const { return base.size(); }
};

Rows rows_from(const LikelihoodTable& table) {
  Rows rows;
  rows.reserve(table.size());
  for (const auto& r : table.rows) {
    if (!std::isfinite(r.log_human) || !std::isfinite(r.log_ai)) {
      throw InputError("likelihood table row '" + r.doc_id + "' is not finite");
    }
    rows.push(r.log_human, r.log_ai);
  }
  return rows;
}

// L(alpha) up to the alpha-independent sum of top_i.
double shape(const Rows& rows, double alpha) {
  double s = 0.0;
  const std::size_t n = rows.size();
  const double* base = rows.base.data();
  const double* slope = rows.slope.data();
  for (std::size_t i = 0; i < n; ++i) s += std::log(base[i] + slope[i] * alpha);
  return s;
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double full_log_likelihood(const Rows& rows, double alpha) {
  if (alpha == 0.0) return sum_of(rows.log_human);
  if (alpha == 1.0) return sum_of(rows.log_ai);
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s += std::max(rows.log_human[i], rows.log_ai[i]) +
         std::log(rows.base[i] + rows.slope[i] * alpha);
  }
  return s;
}

struct Solution {
  double alpha;
  int iters;
};

Solution golden_section(const Rows& rows, double lo, double hi, const SolverConfig& cfg) {
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = shape(rows, x1);
  double f2 = shape(rows, x2);
  int iters = 0;
  while (b - a > cfg.tol_alpha && iters < cfg.max_iter) {
    ++iters;
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = shape(rows, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = shape(rows, x1);
    }
  }
  return {0.5 * (a + b), iters};
}

// Returns nullopt for a degenerate (unseparated) set of rows.
std::optional<Solution> solve(const Rows& rows, const SolverConfig& cfg) {
  bool any_separated = false;
  for (char s : rows.separated) any_separated = any_separated || s;
  if (!any_separated) return std::nullopt;

  // Concavity: the sign of L' at an endpoint decides a boundary optimum.
  if (sum_of(rows.grad0) <= 0.0) return Solution{0.0, 0};
  if (sum_of(rows.grad1) >= 0.0) return Solution{1.0, 0};

  if (cfg.method == SolverMethod::golden_section) return golden_section(rows, 0.0, 1.0, cfg);

  constexpr int kGrid = 100;
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int k = 1; k < kGrid; ++k) {
    const double v = shape(rows, static_cast<double>(k) / kGrid);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  const double lo = static_cast<double>(best - 1) / kGrid;
  const double hi = static_cast<double>(best + 1) / kGrid;
  auto sol = golden_section(rows, lo, hi, cfg);
  sol.iters += kGrid - 1;
  return sol;
}

MixtureEstimate make_estimate(const Rows& rows, const Solution& sol, const SolverConfig& cfg) {
  MixtureEstimate est;
  est.alpha_hat = std::clamp(sol.alpha, 0.0, 1.0);
  est.log_likelihood = full_log_likelihood(rows, est.alpha_hat);
  est.n_docs = rows.size();
  est.solver_iters = sol.iters;
  est.at_boundary = est.alpha_hat <= cfg.tol_alpha || est.alpha_hat >= 1.0 - cfg.tol_alpha;
  return est;
}

}  // namespace

std::string_view to_string(SolverMethod method) {
  return method == SolverMethod::golden_section ? "golden_section" : "grid_then_refine";
}

SolverMethod parse_solver_method(std::string_view text) {
  if (text == "golden_section") return SolverMethod::golden_section;
  if (text == "grid_then_refine") return SolverMethod::grid_then_refine;
  throw InputError("unknown solver '" + std::string(text) + "'");
}

void SolverConfig::validate() const {
  if (!(tol_alpha > 0.0 && tol_alpha < 1.0)) throw InputError("tol_alpha must lie in (0, 1)");
  if (max_iter < 1) throw InputError("max_iter must be >= 1");
}

double corpus_log_likelihood(const LikelihoodTable& table, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  double s = 0.0;
  if (alpha == 0.0) {
    for (const auto& r : table.rows) s += r.log_human;
    return s;
  }
  if (alpha == 1.0) {
    for (const auto& r : table.rows) s += r.log_ai;
    return s;
  }
  const double log_w_human = std::log1p(-alpha);
  const double log_w_ai = std::log(alpha);
  for (const auto& r : table.rows) {
    const double a = log_w_human + r.log_human;
    const double b = log_w_ai + r.log_ai;
    const double m = std::max(a, b);
    s += m + std::log1p(std::exp(std::min(a, b) - m));
  }
  return s;
}

MixtureEstimate mle_alpha(const LikelihoodTable& table, const SolverConfig& config) {
  config.validate();
  if (table.empty()) throw EmptyCorpus("likelihood table is empty");
  const Rows rows = rows_from(table);
  auto sol = solve(rows, config);
  if (!sol) {
    throw DegenerateLikelihood("log P == log Q on all " + std::to_string(table.size()) +
                               " documents; alpha is unidentifiable");
  }
  return make_estimate(rows, *sol, config);
}

ConfidenceInterval bootstrap_ci(const LikelihoodTable& table, const SolverConfig& config,
                                std::size_t replicates, double level, std::uint64_t seed,
                                unsigned threads) {
  config.validate();
  if (replicates < 100) throw InputError("bootstrap needs at least 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw InputError("confidence level must lie in (0, 1)");
  if (table.empty()) throw EmptyCorpus("likelihood table is empty");

  const Rows rows = rows_from(table);
  const std::size_t n = rows.size();
  std::vector<double> estimates(replicates, 0.0);
  std::vector<char> degenerate(replicates, 0);

  parallel_for(replicates, threads, [&](std::size_t r) {
    Engine engine(splitmix64(seed + r));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    Rows sample;
    sample.reserve(n);
    for (std::size_t k = 0; k < n; ++k) sample.push_from(rows, pick(engine));
    if (auto sol = solve(sample, config)) {
      estimates[r] = std::clamp(sol->alpha, 0.0, 1.0);
    } else {
      degenerate[r] = 1;
    }
  });

  std::vector<double> valid;
  valid.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    if (!degenerate[r]) valid.push_back(estimates[r]);
  }
  const std::size_t n_degenerate = replicates - valid.size();
  if (2 * n_degenerate > replicates) {
    throw DegenerateLikelihood(std::to_string(n_degenerate) + " of " + std::to_string(replicates) +
                               " bootstrap replicates are degenerate");
  }
  std::sort(valid.begin(), valid.end());
  const double tail = (1.0 - level) / 2.0;
  ConfidenceInterval ci;
  ci.low = sorted_quantile(valid, tail);
  ci.high = sorted_quantile(valid, 1.0 - tail);
  ci.replicates = replicates;
  ci.degenerate_replicates = n_degenerate;
  return ci;
}

MixtureEstimate with_interval(MixtureEstimate estimate, const ConfidenceInterval& ci) {
  estimate.ci_low = std::min(ci.low, estimate.alpha_hat);
  estimate.ci_high = std::max(ci.high, estimate.alpha_hat);
  return estimate;
}

KappaDiagnostic kappa_diagnostic(const LikelihoodTable& table, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  if (table.empty()) throw EmptyCorpus("likelihood table is empty");

  KappaDiagnostic diag;
  diag.n = table.size();
  diag.delta = delta;
  double kappa = std::numeric_limits<double>::infinity();
  std::size_t separated = 0;
  for (const auto& r : table.rows) {
    const double gap = std::fabs(r.log_ai - r.log_human);
    const double top = std::max(r.log_human, r.log_ai);
    diag.max_abs_log = std::max({diag.max_abs_log, std::fabs(r.log_human), std::fabs(r.log_ai)});
    if (gap > kSeparationEps) ++separated;
    // |P - Q| / max(P, Q)^2 = (1 - e^{-gap}) e^{-top}, evaluated in log space.
    double ratio = 0.0;
    if (gap > 0.0) {
      const double log_ratio = std::log(-std::expm1(-gap)) - top;
      ratio = log_ratio >= std::log(std::numeric_limits<double>::max())
                  ? std::numeric_limits<double>::max()
                  : std::exp(log_ratio);
    }
    kappa = std::min(kappa, ratio);
  }
  diag.kappa_hat = kappa;
  diag.frac_separated = static_cast<double>(separated) / static_cast<double>(diag.n);
  diag.bound_value =
      kappa > 0.0 ? std::sqrt(std::sqrt(std::log(1.0 / delta)) /
                              (std::sqrt(static_cast<double>(diag.n)) * kappa))
                  : std::numeric_limits<double>::infinity();
  return diag;
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace mixest
