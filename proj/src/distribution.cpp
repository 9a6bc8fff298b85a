#include "mixest/distribution.hpp"

#include "mixest/common.hpp"
#include "mixest/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace mixest {

namespace {

// Neumaier-compensated sum; the vocabulary-wide totals feed every document.
double compensated_sum(std::span<const double> values) {
  double sum = 0.0, c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

std::vector<std::size_t> document_frequency(std::span<const Document> docs, std::size_t vocab_size,
                                            const char* which) {
  std::vector<std::size_t> counts(vocab_size, 0);
  for (const auto& doc : docs) {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      const TokenId t = doc.tokens[i];
      if (t >= vocab_size) {
        throw UnknownToken("token id " + std::to_string(t) + " in " + which + " document '" +
                           doc.id + "' exceeds vocabulary size " + std::to_string(vocab_size));
      }
      // Documents are sets; a repeated id must not count twice.
      if (i > 0 && doc.tokens[i - 1] == t) continue;
      ++counts[t];
    }
  }
  return counts;
}

void append_array(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  out += ']';
}

}  // namespace

void SmoothingConfig::validate() const {
  if (!(pseudocount > 0.0) || !std::isfinite(pseudocount)) {
    throw InputError("pseudocount must be a positive finite number");
  }
}

OccurrenceModel OccurrenceModel::fit(std::span<const Document> human, std::span<const Document> ai,
                                     const Vocabulary& vocab, SmoothingConfig smoothing) {
  smoothing.validate();
  if (human.empty()) throw EmptyCorpus("human reference corpus is empty");
  if (ai.empty()) throw EmptyCorpus("AI reference corpus is empty");

  const auto human_df = document_frequency(human, vocab.size(), "human");
  const auto ai_df = document_frequency(ai, vocab.size(), "AI");
  const double s = smoothing.pseudocount;
  const double human_den = static_cast<double>(human.size()) + 2.0 * s;
  const double ai_den = static_cast<double>(ai.size()) + 2.0 * s;

  OccurrenceModel m;
  m.vocab_ = vocab;
  m.smoothing_ = smoothing;
  m.n_human_ = human.size();
  m.n_ai_ = ai.size();
  m.p_.resize(vocab.size());
  m.q_.resize(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    m.p_[t] = (static_cast<double>(human_df[t]) + s) / human_den;
    m.q_[t] = (static_cast<double>(ai_df[t]) + s) / ai_den;
  }
  m.finalize();
  return m;
}

OccurrenceModel OccurrenceModel::from_probabilities(Vocabulary vocab, std::vector<double> p,
                                                    std::vector<double> q,
                                                    SmoothingConfig smoothing, std::size_t n_human,
                                                    std::size_t n_ai) {
  smoothing.validate();
  if (p.size() != vocab.size() || q.size() != vocab.size()) {
    throw InputError("probability vectors must match the vocabulary size");
  }
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (!(p[t] > 0.0 && p[t] < 1.0) || !(q[t] > 0.0 && q[t] < 1.0)) {
      throw InputError("probabilities for token '" + vocab.token(static_cast<TokenId>(t)) +
                       "' must lie strictly inside (0, 1)");
    }
  }
  OccurrenceModel m;
  m.vocab_ = std::move(vocab);
  m.p_ = std::move(p);
  m.q_ = std::move(q);
  m.smoothing_ = smoothing;
  m.n_human_ = n_human;
  m.n_ai_ = n_ai;
  m.finalize();
  return m;
}

void OccurrenceModel::finalize() {
  const std::size_t n = p_.size();
  log_p_.resize(n);
  log_1mp_.resize(n);
  log_q_.resize(n);
  log_1mq_.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    log_p_[t] = std::log(p_[t]);
    log_1mp_[t] = std::log1p(-p_[t]);
    log_q_[t] = std::log(q_[t]);
    log_1mq_[t] = std::log1p(-q_[t]);
  }
  sum_log_1mp_ = compensated_sum(log_1mp_);
  sum_log_1mq_ = compensated_sum(log_1mq_);
  fingerprint_ = hex64(fnv1a64(canonical_body()));
}

std::string OccurrenceModel::canonical_body() const {
  std::string out = "{\"vocab\":";
  out += nlohmann::json(vocab_.tokens()).dump();
  out += ",\"p\":";
  append_array(out, p_);
  out += ",\"q\":";
  append_array(out, q_);
  out += ",\"smoothing\":{\"pseudocount\":" + format_double(smoothing_.pseudocount) + "}";
  out += ",\"n_human\":" + std::to_string(n_human_);
  out += ",\"n_ai\":" + std::to_string(n_ai_);
  return out;
}

std::string OccurrenceModel::to_json() const {
  return canonical_body() + ",\"fingerprint\":\"" + fingerprint_ + "\"}\n";
}

OccurrenceModel OccurrenceModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    auto vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
    SmoothingConfig smoothing{j.at("smoothing").at("pseudocount").get<double>()};
    auto m = from_probabilities(std::move(vocab), j.at("p").get<std::vector<double>>(),
                                j.at("q").get<std::vector<double>>(), smoothing,
                                j.at("n_human").get<std::size_t>(), j.at("n_ai").get<std::size_t>());
    if (auto fp = j.find("fingerprint"); fp != j.end() && fp->get<std::string>() != m.fingerprint_) {
      throw InputError("model fingerprint mismatch: file says " + fp->get<std::string>() +
                       ", content hashes to " + m.fingerprint_);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

void OccurrenceModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write model '" + path.string() + "'");
  out << to_json();
}

OccurrenceModel OccurrenceModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read model '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

OccurrenceModel OccurrenceModel::swapped() const {
  return from_probabilities(vocab_, q_, p_, smoothing_, n_ai_, n_human_);
}

LogLikelihoods doc_log_likelihoods(const OccurrenceModel& model, const Document& doc) {
  const auto log_p = model.log_p();
  const auto log_1mp = model.log_1mp();
  const auto log_q = model.log_q();
  const auto log_1mq = model.log_1mq();
  const std::size_t v = model.size();
  double present_p = 0.0, absent_p = 0.0, present_q = 0.0, absent_q = 0.0;
  for (TokenId t : doc.tokens) {
    if (t >= v) {
      throw UnknownToken("token id " + std::to_string(t) + " exceeds vocabulary size " +
                         std::to_string(v));
    }
    present_p += log_p[t];
    absent_p += log_1mp[t];
    present_q += log_q[t];
    absent_q += log_1mq[t];
  }
  return {present_p + (model.sum_log_1mp() - absent_p),
          present_q + (model.sum_log_1mq() - absent_q)};
}

LikelihoodTable build_likelihood_table(const OccurrenceModel& model,
                                       std::span<const Document> corpus, unsigned threads) {
  if (corpus.empty()) throw EmptyCorpus("target corpus is empty");
  LikelihoodTable table;
  table.model_fingerprint = model.fingerprint();
  table.rows.resize(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const auto& doc = corpus[i];
    LogLikelihoods ll;
    try {
      ll = doc_log_likelihoods(model, doc);
    } catch (const UnknownToken& e) {
      throw UnknownToken("document '" + doc.id + "': " + e.what());
    }
    table.rows[i] = LikelihoodRow{doc.id, ll.log_human, ll.log_ai};
  });
  return table;
}

}  // namespace mixest
