#include <doctest.h>

#include "mixest/distribution.hpp"
#include "mixest/errors.hpp"
#include "oracles.hpp"
#include "schema_check.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace mixest;

namespace {

Document doc(std::string id, std::vector<TokenId> tokens) {
  Document d;
  d.id = std::move(id);
  d.tokens = std::move(tokens);
  d.normalize();
  return d;
}

// 10 human documents, token 0 in 5, token 1 in none, token 2 in all.
std::vector<Document> ten_human() {
  std::vector<Document> out;
  for (int i = 0; i < 10; ++i) {
    std::vector<TokenId> t{2};
    if (i < 5) t.push_back(0);
    out.push_back(doc("h" + std::to_string(i), t));
  }
  return out;
}

Vocabulary abc() { return Vocabulary(std::vector<std::string>{"a", "b", "c"}); }

}  // namespace

TEST_SUITE("distribution") {
  TEST_CASE("smoothed occurrence probabilities") {
    const auto ai = std::vector<Document>{doc("x", {0})};
    const auto m = OccurrenceModel::fit(ten_human(), ai, abc());
    CHECK(m.p()[0] == doctest::Approx(6.0 / 12.0).epsilon(1e-15));
    CHECK(m.p()[1] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(m.p()[2] == doctest::Approx(11.0 / 12.0).epsilon(1e-15));
    CHECK(m.p()[2] < 1.0);
    CHECK(m.q()[0] == doctest::Approx(oracle::laplace(1, 1, 1.0)));
    CHECK(m.n_human() == 10);
    CHECK(m.n_ai() == 1);
  }

  TEST_CASE("pseudocount changes the estimate") {
    const auto ai = std::vector<Document>{doc("x", {0})};
    const auto m = OccurrenceModel::fit(ten_human(), ai, abc(), SmoothingConfig{0.5});
    CHECK(m.p()[1] == doctest::Approx(oracle::laplace(0, 10, 0.5)));
    CHECK_THROWS_AS(OccurrenceModel::fit(ten_human(), ai, abc(), SmoothingConfig{0.0}), InputError);
  }

  TEST_CASE("fit contract errors") {
    const std::vector<Document> none;
    CHECK_THROWS_AS(OccurrenceModel::fit(none, ten_human(), abc()), EmptyCorpus);
    CHECK_THROWS_AS(OccurrenceModel::fit(ten_human(), none, abc()), EmptyCorpus);
    const auto bad = std::vector<Document>{doc("z", {7})};
    CHECK_THROWS_AS(OccurrenceModel::fit(ten_human(), bad, abc()), UnknownToken);
  }

  TEST_CASE("two-token document likelihood") {
    Vocabulary v(std::vector<std::string>{"a", "b"});
    const auto m = OccurrenceModel::from_probabilities(v, {0.5, 0.5}, {0.2, 0.7});
    const auto ll = doc_log_likelihoods(m, doc("d", {0}));
    CHECK(ll.log_human == doctest::Approx(std::log(0.25)).epsilon(1e-14));
    CHECK(ll.log_ai == doctest::Approx(std::log(0.2 * 0.3)).epsilon(1e-14));
  }

  TEST_CASE("empty and full documents") {
    const auto m = OccurrenceModel::fit(ten_human(), std::vector<Document>{doc("x", {0, 1})}, abc());
    const auto empty = doc_log_likelihoods(m, doc("e", {}));
    CHECK(empty.log_human == doctest::Approx(m.sum_log_1mp()).epsilon(1e-15));
    CHECK(empty.log_ai == doctest::Approx(m.sum_log_1mq()).epsilon(1e-15));
    const auto full = doc_log_likelihoods(m, doc("f", {0, 1, 2}));
    double expect = 0.0;
    for (double lp : m.log_p()) expect += lp;
    CHECK(full.log_human == doctest::Approx(expect).epsilon(1e-13));
  }

  TEST_CASE("unknown token ids") {
    const auto m = OccurrenceModel::fit(ten_human(), ten_human(), abc());
    CHECK_THROWS_AS(doc_log_likelihoods(m, doc("u", {3})), UnknownToken);
    const std::vector<Document> corpus{doc("ok", {0}), doc("broken", {9})};
    try {
      build_likelihood_table(m, corpus);
      FAIL("expected UnknownToken");
    } catch (const UnknownToken& e) {
      CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
  }

  TEST_CASE("model invariants") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<std::string> words;
    for (int i = 0; i < 40; ++i) words.push_back("t" + std::to_string(i));
    Vocabulary v(words);
    std::vector<Document> human, ai;
    for (int d = 0; d < 30; ++d) {
      std::vector<TokenId> th, ta;
      for (TokenId t = 0; t < 40; ++t) {
        if (coin(rng) && t % 3) th.push_back(t);
        if (coin(rng) && t % 5) ta.push_back(t);
      }
      human.push_back(doc("h" + std::to_string(d), th));
      ai.push_back(doc("a" + std::to_string(d), ta));
    }
    const auto m = OccurrenceModel::fit(human, ai, v);
    double sum_p = 0.0, sum_q = 0.0;
    for (std::size_t t = 0; t < m.size(); ++t) {
      CHECK(m.p()[t] > 0.0);
      CHECK(m.p()[t] < 1.0);
      CHECK(m.q()[t] > 0.0);
      CHECK(m.q()[t] < 1.0);
      CHECK(std::abs(std::exp(m.log_p()[t]) + std::exp(m.log_1mp()[t]) - 1.0) <= 1e-12);
      CHECK(std::abs(std::exp(m.log_q()[t]) + std::exp(m.log_1mq()[t]) - 1.0) <= 1e-12);
      sum_p += m.log_1mp()[t];
      sum_q += m.log_1mq()[t];
    }
    CHECK(std::abs(m.sum_log_1mp() - sum_p) <= 1e-9 * std::abs(sum_p));
    CHECK(std::abs(m.sum_log_1mq() - sum_q) <= 1e-9 * std::abs(sum_q));
  }

  TEST_CASE("property: adding a human document with t raises p(t) only") {
    auto human = ten_human();
    const std::vector<Document> ai{doc("x", {0, 1})};
    const auto before = OccurrenceModel::fit(human, ai, abc());
    human.push_back(doc("extra", {1}));
    const auto after = OccurrenceModel::fit(human, ai, abc());
    CHECK(after.p()[1] > before.p()[1]);
    for (std::size_t t = 0; t < 3; ++t) CHECK(after.q()[t] == before.q()[t]);
  }

  TEST_CASE("property: adding a token shifts log P by log p - log(1 - p)") {
    const auto m = OccurrenceModel::fit(ten_human(), std::vector<Document>{doc("x", {0})}, abc());
    const auto base = doc_log_likelihoods(m, doc("d", {2}));
    const auto more = doc_log_likelihoods(m, doc("d", {1, 2}));
    CHECK(more.log_human - base.log_human == doctest::Approx(m.log_p()[1] - m.log_1mp()[1]).epsilon(1e-12));
    CHECK(more.log_ai - base.log_ai == doctest::Approx(m.log_q()[1] - m.log_1mq()[1]).epsilon(1e-12));
  }

  TEST_CASE("property: log space matches the direct product on small vocabularies") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::uniform_int_distribution<int> size(1, 12);
    for (int c = 0; c < 100; ++c) {
      const int k = size(rng);
      std::vector<std::string> words;
      std::vector<double> p, q;
      for (int t = 0; t < k; ++t) {
        words.push_back("w" + std::to_string(t));
        p.push_back(u(rng));
        q.push_back(u(rng));
      }
      const auto m = OccurrenceModel::from_probabilities(Vocabulary(words), p, q);
      std::set<std::size_t> present;
      std::vector<TokenId> ids;
      for (int t = 0; t < k; ++t) {
        if (u(rng) < 0.5) {
          present.insert(static_cast<std::size_t>(t));
          ids.push_back(static_cast<TokenId>(t));
        }
      }
      const auto ll = doc_log_likelihoods(m, doc("d", ids));
      const double direct_p = oracle::doc_probability(p, present);
      const double direct_q = oracle::doc_probability(q, present);
      CHECK(std::abs(std::exp(ll.log_human) - direct_p) <= 1e-10 * direct_p);
      CHECK(std::abs(std::exp(ll.log_ai) - direct_q) <= 1e-10 * direct_q);
    }
  }

  TEST_CASE("likelihood table cardinality, order and determinism") {
    const auto m = OccurrenceModel::fit(ten_human(), std::vector<Document>{doc("x", {0})}, abc());
    const auto corpus = ten_human();
    const auto t1 = build_likelihood_table(m, corpus);
    const auto t2 = build_likelihood_table(m, corpus, 3);
    REQUIRE(t1.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      CHECK(t1.rows[i].doc_id == corpus[i].id);
      CHECK(t1.rows[i].log_human == t2.rows[i].log_human);
      CHECK(t1.rows[i].log_ai == t2.rows[i].log_ai);
      CHECK(std::isfinite(t1.rows[i].log_human));
    }
    CHECK(t1.model_fingerprint == m.fingerprint());
    CHECK_THROWS_AS(build_likelihood_table(m, std::vector<Document>{}), EmptyCorpus);
  }

  TEST_CASE("fingerprint tracks the serialized model") {
    const std::vector<Document> ai{doc("x", {0})};
    const auto a = OccurrenceModel::fit(ten_human(), ai, abc(), SmoothingConfig{1.0});
    const auto b = OccurrenceModel::fit(ten_human(), ai, abc(), SmoothingConfig{1.0});
    const auto c = OccurrenceModel::fit(ten_human(), ai, abc(), SmoothingConfig{0.5});
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
    CHECK(a.fingerprint().size() == 16);
    CHECK(a.to_json() == b.to_json());
  }

  TEST_CASE("JSON round trip is exact") {
    const auto m = OccurrenceModel::fit(ten_human(), std::vector<Document>{doc("x", {0, 1})}, abc(),
                                        SmoothingConfig{0.3});
    const auto back = OccurrenceModel::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    for (std::size_t t = 0; t < m.size(); ++t) {
      CHECK(back.p()[t] == m.p()[t]);
      CHECK(back.q()[t] == m.q()[t]);
    }
    const auto errors = schema_check::validate(
        schema_check::load(std::string(MIXEST_SCHEMA_DIR) + "/model.schema.json"), nlohmann::json::parse(m.to_json()));
    CHECK_MESSAGE(errors.empty(), (errors.empty() ? "" : errors.front()));
  }

  TEST_CASE("tampered model is rejected") {
    const auto m = OccurrenceModel::fit(ten_human(), std::vector<Document>{doc("x", {0})}, abc());
    auto j = nlohmann::json::parse(m.to_json());
    j["p"][0] = 0.25;
    CHECK_THROWS_AS(OccurrenceModel::from_json(j.dump()), InputError);
  }

  TEST_CASE("swapped exchanges roles") {
    const auto m = OccurrenceModel::fit(ten_human(), std::vector<Document>{doc("x", {0})}, abc());
    const auto s = m.swapped();
    for (std::size_t t = 0; t < m.size(); ++t) {
      CHECK(s.p()[t] == m.q()[t]);
      CHECK(s.q()[t] == m.p()[t]);
    }
  }
}
