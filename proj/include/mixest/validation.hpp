#pragma once

// Validation protocol: fit on a training split, synthesize target corpora with
// a known AI share from held-out documents, and compare the estimate with the
// truth over a grid of shares.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mixest/distribution.hpp"
#include "mixest/estimator.hpp"

namespace mixest {

// "start:stop:step" (inclusive stop) or a comma separated list. Values are
// sorted, must be distinct and lie in [0, 1].
std::vector<double> parse_alpha_grid(std::string_view text);

struct ValidationConfig {
  std::vector<double> alpha_grid = parse_alpha_grid("0:0.25:0.025");
  std::size_t n_target = 5000;
  int repeats = 5;
  std::uint64_t seed = 0;
  double split_fraction = 0.8;
  std::size_t bootstrap = 200;  // replicates per repeat; 0 disables intervals
  double level = 0.95;
  SolverConfig solver;
  unsigned threads = 1;
  void validate() const;
};

struct ValidationRow {
  double alpha_true = 0.0;
  std::optional<double> alpha_hat_mean;
  std::optional<double> ci_low_mean;
  std::optional<double> ci_high_mean;
  std::optional<double> prediction_error;  // |alpha_hat_mean - alpha_true|
  int repeats = 0;
  int degenerate = 0;  // repeats that failed with DegenerateLikelihood
  bool flagged = false;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  ValidationConfig config;
  std::string model_fingerprint;

  // Largest error over unflagged rows; nullopt when every row is flagged.
  std::optional<double> max_prediction_error() const;
  nlohmann::json to_json() const;
  // Columns: alpha_true, alpha_hat, CI (+-), error, all in percent.
  std::string to_text_table() const;
  // Estimated vs. true alpha with a y = x guide.
  std::string to_svg() const;
};

// Document ids the model was fitted on, written next to the model by `fit`.
struct TrainingManifest {
  std::string model_fingerprint;
  std::vector<std::string> human_ids;
  std::vector<std::string> ai_ids;

  nlohmann::json to_json() const;
  static TrainingManifest from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TrainingManifest load(const std::filesystem::path& path);
};

// Seeded shuffle, then the first floor(n * fraction) documents train.
// Throws InputError with fewer than two documents.
std::pair<std::vector<Document>, std::vector<Document>> split_corpus(std::vector<Document> docs,
                                                                     double fraction,
                                                                     std::uint64_t seed);

// Meta key carrying "human" / "ai" on synthesized target documents.
inline constexpr const char* kProvenanceKey = "provenance";

// round_half_even(alpha * n) documents drawn with replacement from `ai_pool`,
// the rest from `human_pool`, then shuffled.
std::vector<Document> synthesize_mixture(std::span<const Document> human_pool,
                                         std::span<const Document> ai_pool, double alpha,
                                         std::size_t n, std::uint64_t seed);

// Throws LeakageError if a validation id appears in the training manifest or
// the manifest was written for a different model.
void check_leakage(const OccurrenceModel& model, const TrainingManifest& manifest,
                   std::span<const Document> human_val, std::span<const Document> ai_val);

ValidationReport run_validation_grid(const OccurrenceModel& model,
                                     std::span<const Document> human_val,
                                     std::span<const Document> ai_val, const ValidationConfig& config,
                                     const TrainingManifest* manifest = nullptr);

// ---------------------------------------------------------------------------
// Fully synthetic reference corpora drawn from a known product-of-Bernoulli
// model.

struct SyntheticSpec {
  std::size_t vocab_size = 300;
  double beta_a = 2.0;
  double beta_b = 50.0;
  std::size_t boosted_count = 30;
  double boost_factor = 5.0;
  double clip_max = 0.9;
  std::uint64_t seed = 7;
  void validate() const;
};

struct SyntheticCorpora {
  Vocabulary vocab;  // "w000", "w001", ...
  std::vector<Document> human_docs;  // ids "h<i>"
  std::vector<Document> ai_docs;     // ids "a<i>"
  std::vector<double> true_p;
  std::vector<double> true_q;
  std::vector<TokenId> boosted;  // sorted

  // Model with the generating probabilities.
  OccurrenceModel true_model() const;
};

// true_p ~ Beta(a, b); true_q = true_p except for `boosted_count` random
// tokens, where q = max(p, min(p * boost_factor, clip_max)). Documents are
// independent Bernoulli draws per token. n_docs documents per corpus.
SyntheticCorpora synthetic_corpora(const SyntheticSpec& spec, std::size_t n_docs);

// Fresh documents from given probabilities (ids "<prefix><i>").
std::vector<Document> sample_documents(std::span<const double> probs, std::size_t n,
                                       std::string_view id_prefix, std::uint64_t seed);

}  // namespace mixest
