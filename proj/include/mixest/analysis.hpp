#pragma once

// Corpus-level reports: which tokens the AI distribution over-uses, and alpha
// estimated separately on metadata-defined strata.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixest/estimator.hpp"

namespace mixest {

struct TokenShiftRow {
  std::string token;
  double p_hat = 0.0;
  double q_hat = 0.0;
  double ratio = 0.0;  // q_hat / p_hat on smoothed probabilities
  // Same ratio, labelled as the fold change in per-unit occurrence probability.
  double fold_in_sentence_prob = 0.0;
};

enum class ShiftDirection { ai_favored, human_favored };

// Sorted by ratio (descending for ai_favored, ascending for human_favored);
// ties broken by token text. Throws InputError when top_k exceeds the vocabulary.
std::vector<TokenShiftRow> token_shift_report(const OccurrenceModel& model, std::size_t top_k,
                                              ShiftDirection direction = ShiftDirection::ai_favored);

std::string token_shift_csv(const std::vector<TokenShiftRow>& rows);
nlohmann::json token_shift_json(const std::vector<TokenShiftRow>& rows);

// ---------------------------------------------------------------------------
// Predicates: "meta.<key> <op> <literal>" with op in ==, !=, <=, >=, <, >, contains.
// Literals are numbers, true/false, or quoted strings ('..' or "..").

enum class CompareOp { eq, ne, le, ge, lt, gt, contains };

struct Predicate {
  std::string key;  // without the "meta." prefix
  CompareOp op = CompareOp::eq;
  MetaValue literal;
  std::string text;  // as written

  static Predicate parse(std::string_view text);  // throws InputError
  // Throws UnknownMetadataKey when the key is absent, InputError on a type
  // mismatch (ordering a string against a number, etc.).
  bool evaluate(const Metadata& metadata) const;
};

struct Stratum {
  std::string name;
  std::string predicate_desc;
  std::size_t n_docs = 0;
  MixtureEstimate estimate;
};

struct StratumReport {
  std::vector<Stratum> strata;  // [predicate true, predicate false]
  // Where the stratifying labels came from; external labelers can feed
  // metadata in under another source name.
  std::string stratum_source = "metadata";
  std::optional<MixtureEstimate> pooled;
  // Pooled alpha_hat within [min, max] of the stratum estimates. Logged, not
  // enforced: the pooled MLE is not a convex combination in general.
  bool pooling_bound_holds = true;
  std::string model_fingerprint;

  nlohmann::json to_json() const;
  std::string to_text_table() const;
};

// Partitions by predicate truth and runs mle_alpha + bootstrap_ci per stratum.
// Throws EmptyStratum naming the empty side, UnknownMetadataKey, and
// DegenerateLikelihood from either stratum.
StratumReport stratified_estimate(std::span<const Document> corpus, const OccurrenceModel& model,
                                  const Predicate& predicate, const SolverConfig& config,
                                  std::size_t replicates, double level, std::uint64_t seed,
                                  unsigned threads = 1);

nlohmann::json estimate_to_json(const MixtureEstimate& estimate);

}  // namespace mixest
