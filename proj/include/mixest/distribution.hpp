#pragma once

// Per-token occurrence probabilities for the human (p) and AI (q) reference
// corpora, and the product-of-Bernoulli document likelihood
//
//   P(x) = prod_{t in x} p(t) * prod_{t not in x} (1 - p(t))
//
// evaluated in log space.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mixest/corpus.hpp"

namespace mixest {

struct SmoothingConfig {
  double pseudocount = 1.0;  // Laplace
  void validate() const;
};

class OccurrenceModel {
 public:
  // p(t) = (#human docs containing t + s) / (n_human + 2 s); q likewise.
  // Throws EmptyCorpus if either corpus is empty, UnknownToken if a document
  // references an id outside `vocab`.
  static OccurrenceModel fit(std::span<const Document> human, std::span<const Document> ai,
                             const Vocabulary& vocab, SmoothingConfig smoothing = {});

  // Known probabilities (synthetic ground truth). Every value must lie in (0, 1).
  static OccurrenceModel from_probabilities(Vocabulary vocab, std::vector<double> p,
                                            std::vector<double> q, SmoothingConfig smoothing = {},
                                            std::size_t n_human = 0, std::size_t n_ai = 0);

  // Canonical JSON: {vocab, p, q, smoothing, n_human, n_ai, fingerprint} with
  // 17 significant digits per float. Byte-stable for a given model.
  std::string to_json() const;
  static OccurrenceModel from_json(const std::string& text);  // verifies the fingerprint
  void save(const std::filesystem::path& path) const;
  static OccurrenceModel load(const std::filesystem::path& path);

  // 16 hex digits of FNV-1a over the canonical serialization (minus the
  // fingerprint field itself).
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  // Same probabilities with the human and AI roles exchanged.
  OccurrenceModel swapped() const;

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return p_.size(); }
  const SmoothingConfig& smoothing() const noexcept { return smoothing_; }
  std::size_t n_human() const noexcept { return n_human_; }
  std::size_t n_ai() const noexcept { return n_ai_; }

  std::span<const double> p() const noexcept { return p_; }
  std::span<const double> q() const noexcept { return q_; }
  std::span<const double> log_p() const noexcept { return log_p_; }
  std::span<const double> log_1mp() const noexcept { return log_1mp_; }
  std::span<const double> log_q() const noexcept { return log_q_; }
  std::span<const double> log_1mq() const noexcept { return log_1mq_; }
  double sum_log_1mp() const noexcept { return sum_log_1mp_; }
  double sum_log_1mq() const noexcept { return sum_log_1mq_; }

 private:
  OccurrenceModel() = default;
  void finalize();
  std::string canonical_body() const;

  Vocabulary vocab_;
  std::vector<double> p_, q_;
  std::vector<double> log_p_, log_1mp_, log_q_, log_1mq_;
  double sum_log_1mp_ = 0.0;
  double sum_log_1mq_ = 0.0;
  SmoothingConfig smoothing_;
  std::size_t n_human_ = 0;
  std::size_t n_ai_ = 0;
  std::string fingerprint_;
};

struct LogLikelihoods {
  double log_human;  // ln P(x)
  double log_ai;     // ln Q(x)
};

// O(|doc|) via the precomputed sum of ln(1 - p) over the vocabulary.
// Throws UnknownToken for ids beyond the model vocabulary.
LogLikelihoods doc_log_likelihoods(const OccurrenceModel& model, const Document& doc);

struct LikelihoodRow {
  std::string doc_id;
  double log_human;
  double log_ai;
};

struct LikelihoodTable {
  std::vector<LikelihoodRow> rows;
  std::string model_fingerprint;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
};

// One row per document in input order. Throws EmptyCorpus on an empty corpus
// and UnknownToken (naming the document) on out-of-vocabulary ids.
LikelihoodTable build_likelihood_table(const OccurrenceModel& model,
                                       std::span<const Document> corpus, unsigned threads = 1);

}  // namespace mixest
