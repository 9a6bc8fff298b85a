#include "mixest/common.hpp"
#include "mixest/errors.hpp"
#include "mixest/validation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace mixest {

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

std::string token_name(std::size_t i, std::size_t vocab_size) {
  int width = 3;
  for (std::size_t v = vocab_size; v >= 1000; v /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof buf, "w%0*zu", width, i);
  return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (vocab_size < 1) throw InputError("vocab_size must be >= 1");
  if (!(beta_a > 0.0 && beta_b > 0.0)) throw InputError("beta parameters must be positive");
  if (boosted_count > vocab_size) throw InputError("boosted_count exceeds vocab_size");
  if (!(boost_factor >= 1.0)) throw InputError("boost_factor must be >= 1");
  if (!(clip_max > 0.0 && clip_max < 1.0)) throw InputError("clip_max must lie in (0, 1)");
}

std::vector<Document> sample_documents(std::span<const double> probs, std::size_t n,
                                       std::string_view id_prefix, std::uint64_t seed) {
  Engine engine(seed);
  std::vector<Document> docs(n);
  for (std::size_t i = 0; i < n; ++i) {
    Document& d = docs[i];
    d.id = std::string(id_prefix) + std::to_string(i);
    for (std::size_t t = 0; t < probs.size(); ++t) {
      if (unit_uniform(engine) < probs[t]) d.tokens.push_back(static_cast<TokenId>(t));
    }
    d.n_words = d.tokens.size();
  }
  return docs;
}

SyntheticCorpora synthetic_corpora(const SyntheticSpec& spec, std::size_t n_docs) {
  spec.validate();
  SyntheticCorpora out;
  for (std::size_t i = 0; i < spec.vocab_size; ++i) out.vocab.add(token_name(i, spec.vocab_size));

  Engine p_engine(substream_seed(spec.seed, "synthetic-p"));
  std::gamma_distribution<double> ga(spec.beta_a, 1.0), gb(spec.beta_b, 1.0);
  out.true_p.resize(spec.vocab_size);
  for (auto& p : out.true_p) {
    const double x = ga(p_engine), y = gb(p_engine);
    p = std::clamp(x / (x + y), 1e-9, 1.0 - 1e-9);
  }

  Engine boost_engine(substream_seed(spec.seed, "synthetic-boost"));
  std::vector<TokenId> ids(spec.vocab_size);
  std::iota(ids.begin(), ids.end(), TokenId{0});
  std::shuffle(ids.begin(), ids.end(), boost_engine);
  out.boosted.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(spec.boosted_count));
  std::sort(out.boosted.begin(), out.boosted.end());

  out.true_q = out.true_p;
  for (TokenId t : out.boosted) {
    const double p = out.true_p[t];
    out.true_q[t] = std::max(p, std::min(p * spec.boost_factor, spec.clip_max));
  }

  out.human_docs = sample_documents(out.true_p, n_docs, "h", substream_seed(spec.seed, "synthetic-human"));
  out.ai_docs = sample_documents(out.true_q, n_docs, "a", substream_seed(spec.seed, "synthetic-ai"));
  return out;
}

OccurrenceModel SyntheticCorpora::true_model() const {
  return OccurrenceModel::from_probabilities(vocab, true_p, true_q, SmoothingConfig{},
                                             human_docs.size(), ai_docs.size());
}

}  // namespace mixest
