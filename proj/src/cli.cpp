#include "mixest/cli.hpp"

#include "mixest/analysis.hpp"
#include "mixest/common.hpp"
#include "mixest/corpus.hpp"
#include "mixest/distribution.hpp"
#include "mixest/errors.hpp"
#include "mixest/estimator.hpp"
#include "mixest/generate.hpp"
#include "mixest/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#ifndef MIXEST_VERSION
#define MIXEST_VERSION "dev"
#endif

namespace mixest {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Recorded with every command; re-running with the same inputs reproduces
// the numeric outputs exactly.
struct RunManifest {
  std::string command;
  json config = json::object();
  json seeds = json::object();
  std::map<std::string, std::string> input_hashes;
  std::string model_fingerprint;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void hash_input(const fs::path& path) { input_hashes[path.string()] = hash_file(path); }

  json to_json() const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return json{{"command", command},
                {"config", config},
                {"seeds", seeds},
                {"input_hashes", input_hashes},
                {"model_fingerprint", model_fingerprint},
                {"tool_version", MIXEST_VERSION},
                {"wall_clock_seconds", wall}};
  }
};

struct CorpusFlags {
  std::string unit = "sentence";
  bool case_sensitive = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--unit", unit, "Analysis unit")->check(CLI::IsMember({"sentence", "document"}));
    cmd->add_flag("--case-sensitive", case_sensitive, "Do not lowercase tokens");
  }
  CorpusOptions options() const {
    CorpusOptions o;
    o.unit = parse_unit(unit);
    return o;
  }
};

struct SolverFlags {
  std::string method = "golden_section";
  double tol = 1e-6;
  int max_iter = 200;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--solver", method, "golden_section|grid_then_refine")
        ->check(CLI::IsMember({"golden_section", "grid_then_refine"}));
    cmd->add_option("--tol", tol, "Solver tolerance on alpha");
    cmd->add_option("--max-iter", max_iter, "Solver iteration cap");
  }
  SolverConfig config() const {
    SolverConfig c;
    c.method = parse_solver_method(method);
    c.tol_alpha = tol;
    c.max_iter = max_iter;
    c.validate();
    return c;
  }
  json to_json() const { return {{"method", method}, {"tol_alpha", tol}, {"max_iter", max_iter}}; }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << content;
}

json kappa_to_json(const KappaDiagnostic& k) {
  return json{{"kappa_hat", k.kappa_hat},
              {"bound_value", std::isfinite(k.bound_value) ? json(k.bound_value) : json(nullptr)},
              {"delta", k.delta},
              {"frac_separated", k.frac_separated},
              {"max_abs_log", k.max_abs_log}};
}

// ---------------------------------------------------------------------------

struct FitCommand {
  std::string human, ai, pos = "adjective", lexicon, exclude, out, train_manifest;
  double pseudocount = 1.0;
  std::size_t min_len = 1;
  CorpusFlags corpus;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("fit", "Fit human/AI occurrence probabilities");
    cmd->add_option("--human", human, "Human reference corpus (JSONL)")->required();
    cmd->add_option("--ai", ai, "AI reference corpus (JSONL)")->required();
    cmd->add_option("--pos", pos, "Vocabulary part of speech")
        ->check(CLI::IsMember({"adjective", "adverb", "verb", "noun"}));
    cmd->add_option("--lexicon", lexicon, "word<TAB>POS lexicon");
    cmd->add_option("--exclude", exclude, "Tokens to exclude, one per line");
    cmd->add_option("--pseudocount", pseudocount, "Additive smoothing count");
    cmd->add_option("--min-len", min_len, "Minimum token length");
    cmd->add_option("--out", out, "Model JSON output")->required();
    cmd->add_option("--train-manifest", train_manifest, "Training id manifest (default <out>.train.json)");
    corpus.add_to(cmd);
  }

  int run(std::ostream& os, RunManifest& manifest) {
    manifest.command = "fit";
    VocabFilterConfig filter_cfg;
    filter_cfg.pos_class = parse_pos_class(pos);
    filter_cfg.lexicon_path = lexicon;
    filter_cfg.lowercase = !corpus.case_sensitive;
    filter_cfg.min_token_len = min_len;
    if (!exclude.empty()) {
      filter_cfg.exclusion_list = load_exclusion_list(exclude);
      manifest.hash_input(exclude);
    }
    const TokenFilter filter(filter_cfg);
    manifest.hash_input(lexicon);
    manifest.hash_input(human);
    manifest.hash_input(ai);

    const auto options = corpus.options();
    Vocabulary vocab;
    const auto human_docs = load_corpus_into(human, options, filter, vocab);
    const auto ai_docs = load_corpus_into(ai, options, filter, vocab);
    const auto model = OccurrenceModel::fit(human_docs, ai_docs, vocab, SmoothingConfig{pseudocount});
    model.save(out);

    TrainingManifest train;
    train.model_fingerprint = model.fingerprint();
    for (const auto& d : human_docs) train.human_ids.push_back(d.id);
    for (const auto& d : ai_docs) train.ai_ids.push_back(d.id);
    const std::string manifest_path = train_manifest.empty() ? out + ".train.json" : train_manifest;
    train.save(manifest_path);

    manifest.model_fingerprint = model.fingerprint();
    manifest.config = {{"pos", pos},          {"unit", corpus.unit},   {"pseudocount", pseudocount},
                       {"min_len", min_len},  {"lexicon", lexicon},    {"exclude", exclude},
                       {"lowercase", !corpus.case_sensitive},          {"out", out},
                       {"train_manifest", manifest_path}};
    os << json{{"model", out},
               {"model_fingerprint", model.fingerprint()},
               {"vocab_size", model.size()},
               {"n_human", model.n_human()},
               {"n_ai", model.n_ai()},
               {"train_manifest", manifest_path}}
              .dump()
       << '\n';
    return 0;
  }
};

struct EstimateCommand {
  std::string model_path, target;
  std::size_t bootstrap = 1000;
  double level = 0.95, delta = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool as_json = false;
  CorpusFlags corpus;
  SolverFlags solver;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("estimate", "Estimate the AI share of a target corpus");
    cmd->add_option("--model", model_path, "Model JSON")->required();
    cmd->add_option("--target", target, "Target corpus (JSONL)")->required();
    cmd->add_option("--bootstrap", bootstrap, "Bootstrap replicates (0 disables)");
    cmd->add_option("--level", level, "Confidence level");
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--delta", delta, "Failure probability for the error-bound indicator");
    cmd->add_option("--threads", threads, "Worker threads");
    cmd->add_flag("--json", as_json, "Print the estimate as JSON");
    corpus.add_to(cmd);
    solver.add_to(cmd);
  }

  int run(std::ostream& os, RunManifest& manifest) {
    manifest.command = "estimate";
    manifest.hash_input(model_path);
    manifest.hash_input(target);
    manifest.seeds = {{"seed", seed}, {"bootstrap", seed}};
    manifest.config = {{"bootstrap", bootstrap}, {"level", level},       {"delta", delta},
                       {"unit", corpus.unit},    {"threads", threads},   {"solver", solver.to_json()}};
    const auto cfg = solver.config();
    if (bootstrap != 0 && bootstrap < 100) throw InputError("--bootstrap must be 0 or >= 100");

    const auto model = OccurrenceModel::load(model_path);
    manifest.model_fingerprint = model.fingerprint();
    const auto docs = load_target_corpus(target, corpus.options(), model.vocabulary(), !corpus.case_sensitive);
    const auto table = build_likelihood_table(model, docs, threads);
    auto est = mle_alpha(table, cfg);
    if (bootstrap > 0) {
      est = with_interval(est, bootstrap_ci(table, cfg, bootstrap, level, seed, threads));
    }
    const auto kappa = kappa_diagnostic(table, delta);

    double words = 0.0;
    for (const auto& d : docs) words += static_cast<double>(d.n_words);

    json out;
    out["alpha_hat"] = est.alpha_hat;
    out["ci"] = (est.ci_low && est.ci_high) ? json::array({*est.ci_low, *est.ci_high}) : json(nullptr);
    out["level"] = level;
    out["B"] = bootstrap;
    out["n_docs"] = est.n_docs;
    out["log_likelihood"] = est.log_likelihood;
    out["at_boundary"] = est.at_boundary;
    out["solver_iters"] = est.solver_iters;
    out["kappa"] = kappa_to_json(kappa);
    out["mean_unit_words"] = words / static_cast<double>(docs.size());
    out["model_fingerprint"] = model.fingerprint();
    if (as_json) {
      os << out.dump(2) << '\n';
    } else {
      os << "alpha_hat      " << est.alpha_hat << '\n';
      if (est.ci_low) os << "ci (" << level << ")      [" << *est.ci_low << ", " << *est.ci_high << "]\n";
      os << "n_docs         " << est.n_docs << '\n'
         << "at_boundary    " << (est.at_boundary ? "yes" : "no") << '\n'
         << "kappa_hat      " << kappa.kappa_hat << '\n';
    }
    return 0;
  }
};

struct ValidateCommand {
  std::string model_path, human_val, ai_val, grid = "0:0.25:0.025", train_manifest, out_json, out_table, out_svg;
  std::size_t n = 5000, bootstrap = 200;
  int repeats = 5;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CorpusFlags corpus;
  SolverFlags solver;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("validate", "Recover known AI shares from held-out documents");
    cmd->add_option("--model", model_path, "Model JSON")->required();
    cmd->add_option("--human-val", human_val, "Held-out human corpus (JSONL)")->required();
    cmd->add_option("--ai-val", ai_val, "Held-out AI corpus (JSONL)")->required();
    cmd->add_option("--grid", grid, "start:stop:step or comma list");
    cmd->add_option("--n", n, "Target corpus size");
    cmd->add_option("--repeats", repeats, "Target corpora per grid value");
    cmd->add_option("--bootstrap", bootstrap, "Bootstrap replicates per repeat (0 disables)");
    cmd->add_option("--level", level, "Confidence level");
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--threads", threads, "Worker threads");
    cmd->add_option("--train-manifest", train_manifest, "Training id manifest (default <model>.train.json)");
    cmd->add_option("--out", out_json, "Also write the JSON report here");
    cmd->add_option("--table", out_table, "Write the plain-text table here");
    cmd->add_option("--svg", out_svg, "Write an SVG plot here");
    corpus.add_to(cmd);
    solver.add_to(cmd);
  }

  int run(std::ostream& os, RunManifest& manifest) {
    manifest.command = "validate";
    ValidationConfig cfg;
    cfg.alpha_grid = parse_alpha_grid(grid);
    cfg.n_target = n;
    cfg.repeats = repeats;
    cfg.seed = seed;
    cfg.bootstrap = bootstrap;
    cfg.level = level;
    cfg.solver = solver.config();
    cfg.threads = threads;
    cfg.validate();
    manifest.seeds = {{"seed", seed}, {"substreams", {"mixture", "bootstrap"}}};
    manifest.config = {{"grid", grid}, {"n", n},           {"repeats", repeats}, {"bootstrap", bootstrap},
                       {"level", level}, {"unit", corpus.unit}, {"threads", threads},
                       {"solver", solver.to_json()}};

    const auto model = OccurrenceModel::load(model_path);
    manifest.model_fingerprint = model.fingerprint();
    manifest.hash_input(model_path);
    manifest.hash_input(human_val);
    manifest.hash_input(ai_val);
    const std::string manifest_path = train_manifest.empty() ? model_path + ".train.json" : train_manifest;
    const auto train = TrainingManifest::load(manifest_path);
    manifest.hash_input(manifest_path);

    const auto options = corpus.options();
    const auto human_docs = load_target_corpus(human_val, options, model.vocabulary(), !corpus.case_sensitive);
    const auto ai_docs = load_target_corpus(ai_val, options, model.vocabulary(), !corpus.case_sensitive);
    const auto report = run_validation_grid(model, human_docs, ai_docs, cfg, &train);

    const std::string text = report.to_json().dump(2) + "\n";
    os << text;
    if (!out_json.empty()) write_file(out_json, text);
    if (!out_table.empty()) write_file(out_table, report.to_text_table());
    if (!out_svg.empty()) write_file(out_svg, report.to_svg());
    return 0;
  }
};

struct ReportCommand {
  CLI::App* token_shift = nullptr;
  CLI::App* strata = nullptr;
  std::string model_path, target, predicate, format;
  std::size_t top = 100, bootstrap = 1000;
  bool human_favored = false;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CorpusFlags corpus;
  SolverFlags solver;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("report", "Token-shift and stratified reports");
    cmd->require_subcommand(1);
    token_shift = cmd->add_subcommand("token-shift", "Tokens ranked by q/p");
    token_shift->add_option("--model", model_path, "Model JSON")->required();
    token_shift->add_option("--top", top, "Rows to emit");
    token_shift->add_flag("--human-favored", human_favored, "Rank by p/q instead");
    token_shift->add_option("--format", format, "csv|json (default csv)")->check(CLI::IsMember({"csv", "json"}));

    strata = cmd->add_subcommand("strata", "Alpha per metadata stratum");
    strata->add_option("--model", model_path, "Model JSON")->required();
    strata->add_option("--target", target, "Target corpus (JSONL)")->required();
    strata->add_option("--predicate", predicate, "e.g. \"meta.conf <= 2\"")->required();
    strata->add_option("--bootstrap", bootstrap, "Bootstrap replicates (0 disables)");
    strata->add_option("--level", level, "Confidence level");
    strata->add_option("--seed", seed, "Random seed");
    strata->add_option("--threads", threads, "Worker threads");
    strata->add_option("--format", format, "json|text (default json)")->check(CLI::IsMember({"json", "text"}));
    corpus.add_to(strata);
    solver.add_to(strata);
  }

  int run(std::ostream& os, RunManifest& manifest) {
    const auto model = OccurrenceModel::load(model_path);
    manifest.model_fingerprint = model.fingerprint();
    manifest.hash_input(model_path);
    if (token_shift->parsed()) {
      manifest.command = "report token-shift";
      manifest.config = {{"top", top}, {"human_favored", human_favored}};
      const auto rows = token_shift_report(
          model, top, human_favored ? ShiftDirection::human_favored : ShiftDirection::ai_favored);
      if (format == "json") {
        os << token_shift_json(rows).dump(2) << '\n';
      } else {
        os << token_shift_csv(rows);
      }
      return 0;
    }
    manifest.command = "report strata";
    manifest.hash_input(target);
    manifest.seeds = {{"seed", seed}};
    manifest.config = {{"predicate", predicate}, {"bootstrap", bootstrap}, {"level", level},
                       {"unit", corpus.unit},    {"solver", solver.to_json()}};
    if (bootstrap != 0 && bootstrap < 100) throw InputError("--bootstrap must be 0 or >= 100");
    const auto pred = Predicate::parse(predicate);
    const auto docs = load_target_corpus(target, corpus.options(), model.vocabulary(), !corpus.case_sensitive);
    const auto report = stratified_estimate(docs, model, pred, solver.config(), bootstrap, level, seed, threads);
    if (format == "text") {
      os << report.to_text_table();
    } else {
      os << report.to_json().dump(2) << '\n';
    }
    return 0;
  }
};

struct GenerateCommand {
  std::string prompts, endpoint, model_name, system_prompt, system_prompt_file, auth_env, out;
  std::string response_path = "choices[0].message.content";
  int max_retries = 3;
  long timeout = 60, backoff_ms = 500;
  unsigned concurrency = 1;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("generate", "Build an AI reference corpus from prompts");
    cmd->add_option("--prompts", prompts, "Prompt file, one per line")->required();
    cmd->add_option("--endpoint", endpoint, "Chat-completion URL")->required();
    cmd->add_option("--model-name", model_name, "Model name sent in the request")->required();
    cmd->add_option("--system-prompt", system_prompt, "System message");
    cmd->add_option("--system-prompt-file", system_prompt_file, "System message from file");
    cmd->add_option("--auth-env", auth_env, "Environment variable holding the bearer token");
    cmd->add_option("--max-retries", max_retries, "Retries per prompt");
    cmd->add_option("--timeout", timeout, "Request timeout in seconds");
    cmd->add_option("--backoff-ms", backoff_ms, "Initial retry backoff");
    cmd->add_option("--concurrency", concurrency, "Parallel requests");
    cmd->add_option("--response-path", response_path, "Completion field in the response");
    cmd->add_option("--out", out, "Output JSONL")->required();
  }

  int run(std::ostream& os, RunManifest& manifest) {
    manifest.command = "generate";
    manifest.hash_input(prompts);
    GenEndpointConfig cfg;
    cfg.base_url = endpoint;
    cfg.auth_token_env_var = auth_env;
    cfg.model_name = model_name;
    cfg.system_prompt = system_prompt;
    if (!system_prompt_file.empty()) {
      std::ifstream f(system_prompt_file);
      if (!f) throw InputError("cannot read '" + system_prompt_file + "'");
      cfg.system_prompt.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    cfg.max_retries = max_retries;
    cfg.timeout = std::chrono::seconds(timeout);
    cfg.retry_backoff = std::chrono::milliseconds(backoff_ms);
    cfg.concurrency = concurrency;
    cfg.response_path = response_path;
    manifest.config = {{"endpoint", endpoint},       {"model_name", model_name}, {"auth_env", auth_env},
                       {"max_retries", max_retries}, {"timeout", timeout},       {"concurrency", concurrency},
                       {"response_path", response_path}};
    const auto list = read_prompts(prompts);
    const auto written = generate_ai_reference(list, cfg, out);
    os << json{{"prompts", list.size()}, {"written", written}, {"out", out}}.dump() << '\n';
    return 0;
  }
};

struct SynthCommand {
  SyntheticSpec spec;
  std::size_t n = 10000;
  double split = 0.5;
  std::string out_dir;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "Write synthetic reference corpora with known probabilities");
    cmd->add_option("--vocab", spec.vocab_size, "Vocabulary size");
    cmd->add_option("--beta-a", spec.beta_a, "Beta shape a for p");
    cmd->add_option("--beta-b", spec.beta_b, "Beta shape b for p");
    cmd->add_option("--boosted", spec.boosted_count, "Tokens boosted in q");
    cmd->add_option("--factor", spec.boost_factor, "Boost factor");
    cmd->add_option("--clip", spec.clip_max, "Upper clip for boosted q");
    cmd->add_option("--seed", spec.seed, "Random seed");
    cmd->add_option("--n", n, "Documents per corpus (before the split)");
    cmd->add_option("--split", split, "Training fraction");
    cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  }

  int run(std::ostream& os, RunManifest& manifest) {
    manifest.command = "synth";
    manifest.seeds = {{"seed", spec.seed}};
    manifest.config = {{"vocab", spec.vocab_size}, {"beta_a", spec.beta_a},     {"beta_b", spec.beta_b},
                       {"boosted", spec.boosted_count}, {"factor", spec.boost_factor}, {"clip", spec.clip_max},
                       {"n", n},                   {"split", split}};
    const auto corpora = synthetic_corpora(spec, n);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    std::string lexicon;
    for (const auto& t : corpora.vocab.tokens()) lexicon += t + "\tADJ\n";
    write_file(dir / "lexicon.tsv", lexicon);

    auto dump = [&](const std::vector<Document>& docs, const char* label, const fs::path& path) {
      std::string text;
      for (const auto& d : docs) {
        std::string body;
        for (TokenId t : d.tokens) {
          if (!body.empty()) body += ' ';
          body += corpora.vocab.token(t);
        }
        // Every document needs text; "none" is outside the lexicon.
        if (body.empty()) body = "none";
        text += json{{"id", d.id}, {"text", body}, {"label", label}}.dump() + "\n";
      }
      write_file(path, text);
    };
    auto [human_train, human_val] = split_corpus(corpora.human_docs, split, substream_seed(spec.seed, "synth-split-human"));
    auto [ai_train, ai_val] = split_corpus(corpora.ai_docs, split, substream_seed(spec.seed, "synth-split-ai"));
    dump(human_train, "human", dir / "human_train.jsonl");
    dump(human_val, "human", dir / "human_val.jsonl");
    dump(ai_train, "ai", dir / "ai_train.jsonl");
    dump(ai_val, "ai", dir / "ai_val.jsonl");

    std::vector<std::string> boosted;
    for (TokenId t : corpora.boosted) boosted.push_back(corpora.vocab.token(t));
    write_file(dir / "truth.json", json{{"vocab", corpora.vocab.tokens()},
                                        {"p", corpora.true_p},
                                        {"q", corpora.true_q},
                                        {"boosted", boosted}}
                                       .dump() +
                                       "\n");
    os << json{{"out_dir", out_dir},
               {"human_train", human_train.size()},
               {"human_val", human_val.size()},
               {"ai_train", ai_train.size()},
               {"ai_val", ai_val.size()}}
              .dump()
       << '\n';
    return 0;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mixest: estimate the share of AI-generated documents in a corpus"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MIXEST_VERSION));
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "Write the run manifest here instead of stderr");

  FitCommand fit;
  EstimateCommand estimate;
  ValidateCommand validate;
  ReportCommand report;
  GenerateCommand generate;
  SynthCommand synth;
  fit.add_to(app);
  estimate.add_to(app);
  validate.add_to(app);
  report.add_to(app);
  generate.add_to(app);
  synth.add_to(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::input);
  }

  set_log_sink([&err](std::string_view level, std::string_view message) {
    err << "[" << level << "] " << message << '\n';
  });
  struct SinkReset {
    ~SinkReset() { set_log_sink(nullptr); }
  } reset;

  RunManifest manifest;
  int code = 0;
  try {
    if (app.got_subcommand("fit")) {
      code = fit.run(out, manifest);
    } else if (app.got_subcommand("estimate")) {
      code = estimate.run(out, manifest);
    } else if (app.got_subcommand("validate")) {
      code = validate.run(out, manifest);
    } else if (app.got_subcommand("report")) {
      code = report.run(out, manifest);
    } else if (app.got_subcommand("generate")) {
      code = generate.run(out, manifest);
    } else {
      code = synth.run(out, manifest);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  const std::string manifest_text = manifest.to_json().dump();
  if (manifest_path.empty()) {
    err << "manifest " << manifest_text << '\n';
  } else {
    write_file(manifest_path, manifest_text + "\n");
  }
  return code;
}

}  // namespace mixest
