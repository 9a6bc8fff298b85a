#include "mixest/analysis.hpp"

#include "mixest/common.hpp"
#include "mixest/errors.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace mixest {

using nlohmann::json;

std::vector<TokenShiftRow> token_shift_report(const OccurrenceModel& model, std::size_t top_k,
                                              ShiftDirection direction) {
  if (top_k > model.size()) {
    throw InputError("top_k " + std::to_string(top_k) + " exceeds vocabulary size " +
                     std::to_string(model.size()));
  }
  std::vector<TokenShiftRow> rows;
  rows.reserve(model.size());
  const auto& vocab = model.vocabulary();
  for (std::size_t t = 0; t < model.size(); ++t) {
    TokenShiftRow row;
    row.token = vocab.token(static_cast<TokenId>(t));
    row.p_hat = model.p()[t];
    row.q_hat = model.q()[t];
    row.ratio = row.q_hat / row.p_hat;
    row.fold_in_sentence_prob = row.ratio;
    rows.push_back(std::move(row));
  }
  const bool descending = direction == ShiftDirection::ai_favored;
  std::sort(rows.begin(), rows.end(), [descending](const TokenShiftRow& a, const TokenShiftRow& b) {
    if (a.ratio != b.ratio) return descending ? a.ratio > b.ratio : a.ratio < b.ratio;
    return a.token < b.token;
  });
  rows.resize(top_k);
  return rows;
}

std::string token_shift_csv(const std::vector<TokenShiftRow>& rows) {
  std::string out = "token,p,q,ratio\n";
  for (const auto& r : rows) {
    // Tokens come from whitespace splitting, but may still hold commas or quotes.
    std::string token = r.token;
    if (token.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : token) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      token = quoted + "\"";
    }
    out += token + "," + format_double(r.p_hat) + "," + format_double(r.q_hat) + "," +
           format_double(r.ratio) + "\n";
  }
  return out;
}

json token_shift_json(const std::vector<TokenShiftRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"token", r.token},
                   {"p_hat", r.p_hat},
                   {"q_hat", r.q_hat},
                   {"ratio", r.ratio},
                   {"fold_in_sentence_prob", r.fold_in_sentence_prob},
                   {"smoothed", true}});
  }
  return out;
}

json estimate_to_json(const MixtureEstimate& e) {
  json out;
  out["alpha_hat"] = e.alpha_hat;
  out["ci"] = (e.ci_low && e.ci_high) ? json::array({*e.ci_low, *e.ci_high}) : json(nullptr);
  out["n_docs"] = e.n_docs;
  out["log_likelihood"] = e.log_likelihood;
  out["at_boundary"] = e.at_boundary;
  out["solver_iters"] = e.solver_iters;
  return out;
}

json StratumReport::to_json() const {
  json out;
  out["stratum_source"] = stratum_source;
  out["model_fingerprint"] = model_fingerprint;
  json list = json::array();
  for (const auto& s : strata) {
    list.push_back({{"name", s.name},
                    {"predicate_desc", s.predicate_desc},
                    {"n_docs", s.n_docs},
                    {"estimate", estimate_to_json(s.estimate)}});
  }
  out["strata"] = std::move(list);
  out["pooled"] = pooled ? estimate_to_json(*pooled) : json(nullptr);
  out["pooling_bound_holds"] = pooling_bound_holds;
  return out;
}

std::string StratumReport::to_text_table() const {
  std::ostringstream out;
  out << std::left << std::setw(36) << "stratum" << std::right << std::setw(8) << "n" << std::setw(12)
      << "alpha_hat" << std::setw(22) << "CI" << '\n';
  out << std::fixed << std::setprecision(4);
  auto line = [&](const std::string& name, std::size_t n, const MixtureEstimate& e) {
    out << std::left << std::setw(36) << name << std::right << std::setw(8) << n << std::setw(12) << e.alpha_hat;
    if (e.ci_low && e.ci_high) {
      std::ostringstream ci;
      ci << std::fixed << std::setprecision(4) << '[' << *e.ci_low << ", " << *e.ci_high << ']';
      out << std::setw(22) << ci.str();
    }
    out << '\n';
  };
  for (const auto& s : strata) line(s.name, s.n_docs, s.estimate);
  if (pooled) line("(pooled)", pooled->n_docs, *pooled);
  return out.str();
}

StratumReport stratified_estimate(std::span<const Document> corpus, const OccurrenceModel& model,
                                  const Predicate& predicate, const SolverConfig& config,
                                  std::size_t replicates, double level, std::uint64_t seed,
                                  unsigned threads) {
  std::vector<Document> matched, unmatched;
  for (const auto& doc : corpus) {
    (predicate.evaluate(doc.metadata) ? matched : unmatched).push_back(doc);
  }
  const std::string names[2] = {predicate.text, "not (" + predicate.text + ")"};
  if (matched.empty()) throw EmptyStratum(names[0]);
  if (unmatched.empty()) throw EmptyStratum(names[1]);

  StratumReport report;
  report.model_fingerprint = model.fingerprint();
  const std::vector<Document>* parts[2] = {&matched, &unmatched};
  for (int k = 0; k < 2; ++k) {
    const auto table = build_likelihood_table(model, *parts[k], threads);
    auto est = mle_alpha(table, config);
    if (replicates > 0) {
      est = with_interval(est, bootstrap_ci(table, config, replicates, level,
                                            substream_seed(seed, "stratum", static_cast<std::uint64_t>(k)),
                                            threads));
    }
    report.strata.push_back(Stratum{names[k], "meta." + predicate.key + (k == 0 ? " satisfies " : " fails ") +
                                                  predicate.text,
                                    parts[k]->size(), est});
  }

  const auto pooled_table = build_likelihood_table(model, corpus, threads);
  report.pooled = mle_alpha(pooled_table, config);
  const double lo = std::min(report.strata[0].estimate.alpha_hat, report.strata[1].estimate.alpha_hat);
  const double hi = std::max(report.strata[0].estimate.alpha_hat, report.strata[1].estimate.alpha_hat);
  const double tol = config.tol_alpha;
  report.pooling_bound_holds = report.pooled->alpha_hat >= lo - tol && report.pooled->alpha_hat <= hi + tol;
  if (!report.pooling_bound_holds) {
    std::ostringstream msg;
    msg << "pooled alpha_hat " << report.pooled->alpha_hat << " lies outside the stratum range [" << lo << ", "
        << hi << "]";
    log_warn(msg.str());
  }
  return report;
}

}  // namespace mixest
