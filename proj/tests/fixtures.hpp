#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mixest/common.hpp"
#include "mixest/distribution.hpp"
#include "mixest/validation.hpp"

namespace fixtures {

// Random table with n rows and log-likelihood gaps in [-6, 6]. A per-table
// offset tilts the gaps so that optima land anywhere in [0, 1].
inline mixest::LikelihoodTable random_table(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> level(-60.0, -2.0);
  std::uniform_real_distribution<double> tilt(-3.0, 3.0);
  std::uniform_real_distribution<double> gap(-6.0, 6.0);
  const double offset = tilt(rng);
  mixest::LikelihoodTable table;
  table.model_fingerprint = "0000000000000000";
  for (std::size_t i = 0; i < n; ++i) {
    const double lp = level(rng);
    const double d = std::clamp(gap(rng) + offset, -6.0, 6.0);
    table.rows.push_back({"r" + std::to_string(i), lp, lp + d});
  }
  return table;
}

inline std::size_t random_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Table built from fresh documents drawn from the known mixture.
inline mixest::LikelihoodTable mixture_table(const mixest::SyntheticCorpora& truth,
                                             const mixest::OccurrenceModel& model, double alpha,
                                             std::size_t n, std::uint64_t seed) {
  const auto n_ai = static_cast<std::size_t>(mixest::round_half_even(alpha * static_cast<double>(n)));
  auto docs = mixest::sample_documents(truth.true_q, n_ai, "a", seed);
  auto human = mixest::sample_documents(truth.true_p, n - n_ai, "h", seed ^ 0x9e3779b97f4a7c15ULL);
  docs.insert(docs.end(), human.begin(), human.end());
  return mixest::build_likelihood_table(model, docs);
}

// Same, but every document independently comes from Q with probability
// alpha, the sampling model the row bootstrap assumes.
inline mixest::LikelihoodTable iid_mixture_table(const mixest::SyntheticCorpora& truth,
                                                 const mixest::OccurrenceModel& model, double alpha,
                                                 std::size_t n, std::uint64_t seed) {
  mixest::Engine engine(mixest::substream_seed(seed, "composition"));
  const std::size_t n_ai = std::binomial_distribution<std::size_t>(n, alpha)(engine);
  return mixture_table(truth, model, static_cast<double>(n_ai) / static_cast<double>(n), n, seed);
}

}  // namespace fixtures
