#include <doctest.h>

#include "fixtures.hpp"
#include "mixest/analysis.hpp"
#include "mixest/errors.hpp"
#include "schema_check.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace mixest;

namespace {

Document with_meta(Document d, Metadata meta) {
  d.metadata = std::move(meta);
  return d;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("ratio of a strongly shifted token") {
    Vocabulary v(std::vector<std::string>{"meticulous", "plain"});
    const auto m = OccurrenceModel::from_probabilities(v, {0.01, 0.2}, {0.347, 0.2});
    const auto rows = token_shift_report(m, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].token == "meticulous");
    CHECK(rows[0].ratio == doctest::Approx(34.7).epsilon(1e-12));
    CHECK(rows[0].fold_in_sentence_prob == rows[0].ratio);
    CHECK(rows[1].ratio == 1.0);
    const auto human = token_shift_report(m, 1, ShiftDirection::human_favored);
    CHECK(human[0].token == "plain");
  }

  TEST_CASE("identical corpora give unit ratios, ties by token") {
    Vocabulary v(std::vector<std::string>{"c", "a", "b"});
    const auto m = OccurrenceModel::from_probabilities(v, {0.1, 0.2, 0.3}, {0.1, 0.2, 0.3});
    const auto rows = token_shift_report(m, 3);
    for (const auto& r : rows) CHECK(r.ratio == 1.0);
    CHECK(rows[0].token == "a");
    CHECK(rows[1].token == "b");
    CHECK(rows[2].token == "c");
    CHECK_THROWS_AS(token_shift_report(m, 4), InputError);
  }

  TEST_CASE("property: swapping corpora inverts ratios") {
    const auto c = synthetic_corpora(SyntheticSpec{}, 500);
    const auto m = OccurrenceModel::fit(c.human_docs, c.ai_docs, c.vocab);
    const auto fwd = token_shift_report(m, m.size());
    const auto back = token_shift_report(m.swapped(), m.size());
    std::map<std::string, double> inverse;
    for (const auto& r : back) inverse[r.token] = r.ratio;
    for (const auto& r : fwd) CHECK(r.ratio == doctest::Approx(1.0 / inverse.at(r.token)).epsilon(1e-15));
  }

  TEST_CASE("csv and json output") {
    Vocabulary v(std::vector<std::string>{"odd,token", "b"});
    const auto m = OccurrenceModel::from_probabilities(v, {0.1, 0.2}, {0.3, 0.2});
    const auto rows = token_shift_report(m, 2);
    const auto csv = token_shift_csv(rows);
    CHECK(csv.rfind("token,p,q,ratio\n\"odd,token\",", 0) == 0);
    const auto errors = schema_check::validate(
        schema_check::load(std::string(MIXEST_SCHEMA_DIR) + "/token_shift.schema.json"), token_shift_json(rows));
    CHECK(errors.empty());
  }

  TEST_CASE("predicate parsing and evaluation") {
    const Metadata meta{{"conf", 2.0}, {"venue", std::string("iclr 2024")}, {"late", true}};
    CHECK(Predicate::parse("meta.conf <= 2").evaluate(meta));
    CHECK_FALSE(Predicate::parse("meta.conf < 2").evaluate(meta));
    CHECK(Predicate::parse("meta.conf != 3").evaluate(meta));
    CHECK(Predicate::parse("meta.venue contains 'iclr'").evaluate(meta));
    CHECK(Predicate::parse("meta.venue == \"iclr 2024\"").evaluate(meta));
    CHECK(Predicate::parse("meta.late == true").evaluate(meta));
    CHECK_THROWS_AS(Predicate::parse("meta.missing > 1").evaluate(meta), UnknownMetadataKey);
    CHECK_THROWS_AS(Predicate::parse("meta.venue > 1").evaluate(meta), InputError);
    CHECK_THROWS_AS(Predicate::parse("meta.late < true").evaluate(meta), InputError);
    CHECK_THROWS_AS(Predicate::parse("conf <= 2"), InputError);
    CHECK_THROWS_AS(Predicate::parse("meta.conf ~ 2"), InputError);
    CHECK_THROWS_AS(Predicate::parse("meta.conf <= iclr"), InputError);
  }

  TEST_CASE("strata recover constructed shares") {
    const auto truth = synthetic_corpora(SyntheticSpec{}, 1);
    const auto model = truth.true_model();
    auto build = [&](double alpha, std::size_t n, double days, std::uint64_t seed) {
      const auto n_ai = static_cast<std::size_t>(round_half_even(alpha * static_cast<double>(n)));
      auto docs = sample_documents(truth.true_q, n_ai, "a" + std::to_string(seed) + "-", seed);
      const auto human = sample_documents(truth.true_p, n - n_ai, "h" + std::to_string(seed) + "-", seed + 1);
      docs.insert(docs.end(), human.begin(), human.end());
      for (auto& d : docs) d.metadata["days_before_deadline"] = days;
      return docs;
    };
    auto corpus = build(0.12, 4000, 2.0, 10);
    const auto early = build(0.08, 4000, 10.0, 20);
    corpus.insert(corpus.end(), early.begin(), early.end());

    const auto report = stratified_estimate(corpus, model, Predicate::parse("meta.days_before_deadline <= 3"),
                                            SolverConfig{}, 300, 0.95, 4);
    REQUIRE(report.strata.size() == 2);
    const auto& near = report.strata[0].estimate;
    const auto& far = report.strata[1].estimate;
    CHECK(report.strata[0].n_docs == 4000);
    CHECK(report.strata[1].n_docs == 4000);
    CHECK(*near.ci_low <= 0.12);
    CHECK(0.12 <= *near.ci_high);
    CHECK(*far.ci_low <= 0.08);
    CHECK(0.08 <= *far.ci_high);
    CHECK(report.pooling_bound_holds);
    CHECK(report.strata[1].name == "not (meta.days_before_deadline <= 3)");

    const auto errors = schema_check::validate(
        schema_check::load(std::string(MIXEST_SCHEMA_DIR) + "/strata.schema.json"), report.to_json());
    CHECK_MESSAGE(errors.empty(), (errors.empty() ? "" : errors.front()));
    CHECK(report.to_text_table().find("(pooled)") != std::string::npos);
  }

  TEST_CASE("property: strata partition the corpus") {
    const auto c = synthetic_corpora(SyntheticSpec{}, 600);
    const auto model = c.true_model();
    std::vector<Document> corpus;
    for (std::size_t i = 0; i < c.human_docs.size(); ++i) {
      corpus.push_back(with_meta(i % 3 ? c.human_docs[i] : c.ai_docs[i], {{"has_et_al", i % 4 == 0}}));
    }
    const auto report =
        stratified_estimate(corpus, model, Predicate::parse("meta.has_et_al == true"), SolverConfig{}, 0, 0.95, 1);
    CHECK(report.strata[0].n_docs + report.strata[1].n_docs == corpus.size());
    CHECK(report.strata[0].n_docs == 150);
    CHECK_FALSE(report.strata[0].estimate.ci_low.has_value());
  }

  TEST_CASE("stratum errors") {
    const auto c = synthetic_corpora(SyntheticSpec{}, 20);
    const auto model = c.true_model();
    std::vector<Document> corpus;
    for (const auto& d : c.human_docs) corpus.push_back(with_meta(d, {{"conf", 4.0}}));
    try {
      stratified_estimate(corpus, model, Predicate::parse("meta.conf <= 2"), SolverConfig{}, 0, 0.95, 1);
      FAIL("expected EmptyStratum");
    } catch (const EmptyStratum& e) {
      CHECK(std::string(e.what()).find("meta.conf <= 2") != std::string::npos);
    }
    CHECK_THROWS_AS(
        stratified_estimate(corpus, model, Predicate::parse("meta.rating <= 2"), SolverConfig{}, 0, 0.95, 1),
        UnknownMetadataKey);
  }
}
