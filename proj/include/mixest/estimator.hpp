#pragma once

// Maximum-likelihood estimation of the mixture weight alpha in
//
//   L(alpha) = sum_i log((1 - alpha) P(x_i) + alpha Q(x_i)),
//
// bootstrap percentile intervals, and separation diagnostics.

#include <cstdint>
#include <optional>

#include "mixest/distribution.hpp"

namespace mixest {

enum class SolverMethod { golden_section, grid_then_refine };

std::string_view to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view text);

struct SolverConfig {
  SolverMethod method = SolverMethod::golden_section;
  double tol_alpha = 1e-6;
  int max_iter = 200;
  void validate() const;
};

struct MixtureEstimate {
  double alpha_hat = 0.0;
  double log_likelihood = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t n_docs = 0;
  int solver_iters = 0;
  bool at_boundary = false;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  std::size_t replicates = 0;
  std::size_t degenerate_replicates = 0;
};

struct KappaDiagnostic {
  double kappa_hat = 0.0;       // min_i |P - Q| / max(P^2, Q^2)
  double frac_separated = 0.0;  // share of rows with |log P - log Q| > 1e-12
  std::size_t n = 0;
  double delta = 0.05;
  double bound_value = 0.0;  // +inf when kappa_hat == 0
  double max_abs_log = 0.0;  // max_i max(|log P|, |log Q|)
};

// Rows with |log P - log Q| at or below this count as unseparated.
inline constexpr double kSeparationEps = 1e-12;

// Exact at the endpoints: alpha = 0 gives sum log P, alpha = 1 gives sum log Q.
// Throws InputError when alpha is outside [0, 1].
double corpus_log_likelihood(const LikelihoodTable& table, double alpha);

// Maximizer of L over [0, 1]. L is concave, so a derivative sign check at the
// endpoints settles boundary optima exactly and a golden-section search
// handles interior ones. CI fields stay empty.
// Throws DegenerateLikelihood when no row separates P from Q.
MixtureEstimate mle_alpha(const LikelihoodTable& table, const SolverConfig& config = {});

// Percentile bootstrap over table rows. Replicate r draws from its own stream
// seeded from seed + r, so results do not depend on `threads`. Degenerate
// replicates are skipped; a degenerate majority throws DegenerateLikelihood.
ConfidenceInterval bootstrap_ci(const LikelihoodTable& table, const SolverConfig& config,
                                std::size_t replicates, double level, std::uint64_t seed,
                                unsigned threads = 1);

// Attaches an interval, widening it if needed so that low <= alpha_hat <= high.
MixtureEstimate with_interval(MixtureEstimate estimate, const ConfidenceInterval& ci);

// bound_value = sqrt(sqrt(ln(1/delta)) / (sqrt(n) * kappa_hat)) with unit
// constant. It indicates scale only and certifies nothing.
KappaDiagnostic kappa_diagnostic(const LikelihoodTable& table, double delta);

// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
double sorted_quantile(std::span<const double> sorted, double q);

}  // namespace mixest
