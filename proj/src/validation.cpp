#include "mixest/validation.hpp"

#include "mixest/common.hpp"
#include "mixest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace mixest {

using nlohmann::json;

namespace {

double tidy(double v) { return std::round(v * 1e12) / 1e12; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<double> parse_alpha_grid(std::string_view text) {
  std::vector<double> grid;
  auto to_double = [&](std::string_view s) {
    try {
      std::size_t used = 0;
      const std::string str(s);
      const double v = std::stod(str, &used);
      if (used != str.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw InputError("bad number '" + std::string(s) + "' in alpha grid '" + std::string(text) + "'");
    }
  };
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw InputError("alpha grid must be start:stop:step");
    const double start = to_double(text.substr(0, c1));
    const double stop = to_double(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = to_double(text.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) throw InputError("alpha grid needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) grid.push_back(tidy(start + static_cast<double>(k) * step));
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto piece = text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
      grid.push_back(to_double(piece));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  std::sort(grid.begin(), grid.end());
  if (grid.empty()) throw InputError("alpha grid is empty");
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw InputError("alpha grid values must be distinct");
  }
  if (grid.front() < 0.0 || grid.back() > 1.0) throw InputError("alpha grid values must lie in [0, 1]");
  return grid;
}

void ValidationConfig::validate() const {
  if (alpha_grid.empty()) throw InputError("alpha grid is empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (alpha_grid[i] < 0.0 || alpha_grid[i] > 1.0) throw InputError("alpha grid values must lie in [0, 1]");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw InputError("alpha grid must be sorted with distinct values");
    }
  }
  if (n_target < 1) throw InputError("n_target must be >= 1");
  if (repeats < 1) throw InputError("repeats must be >= 1");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw InputError("split_fraction must lie in (0, 1)");
  if (bootstrap != 0 && bootstrap < 100) throw InputError("bootstrap needs 0 or >= 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must lie in (0, 1)");
  solver.validate();
}

std::optional<double> ValidationReport::max_prediction_error() const {
  std::optional<double> worst;
  for (const auto& row : rows) {
    if (row.flagged || !row.prediction_error) continue;
    worst = std::max(worst.value_or(0.0), *row.prediction_error);
  }
  return worst;
}

json ValidationReport::to_json() const {
  json out;
  out["model_fingerprint"] = model_fingerprint;
  out["config"] = {{"alpha_grid", config.alpha_grid},
                   {"n_target", config.n_target},
                   {"repeats", config.repeats},
                   {"seed", config.seed},
                   {"split_fraction", config.split_fraction},
                   {"bootstrap", config.bootstrap},
                   {"level", config.level},
                   {"solver", {{"method", to_string(config.solver.method)},
                               {"tol_alpha", config.solver.tol_alpha},
                               {"max_iter", config.solver.max_iter}}}};
  json rows_json = json::array();
  for (const auto& row : rows) {
    json r;
    r["alpha_true"] = row.alpha_true;
    r["alpha_hat_mean"] = optional_number(row.alpha_hat_mean);
    r["ci_mean"] = (row.ci_low_mean && row.ci_high_mean) ? json::array({*row.ci_low_mean, *row.ci_high_mean})
                                                         : json(nullptr);
    r["prediction_error"] = optional_number(row.prediction_error);
    r["repeats"] = row.repeats;
    r["degenerate"] = row.degenerate;
    r["flagged"] = row.flagged;
    rows_json.push_back(std::move(r));
  }
  out["rows"] = std::move(rows_json);
  out["max_prediction_error"] = optional_number(max_prediction_error());
  return out;
}

std::string ValidationReport::to_text_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << std::setw(5) << "No." << std::setw(12) << "alpha_true" << std::setw(12) << "alpha_hat"
      << std::setw(10) << "CI(+-)" << std::setw(10) << "error" << '\n';
  int k = 1;
  for (const auto& row : rows) {
    out << std::setw(5) << ("(" + std::to_string(k++) + ")") << std::setw(11) << 100.0 * row.alpha_true
        << '%';
    if (!row.alpha_hat_mean) {
      out << std::setw(12) << "degenerate" << std::setw(10) << "-" << std::setw(10) << "-" << '\n';
      continue;
    }
    out << std::setw(11) << 100.0 * *row.alpha_hat_mean << '%';
    if (row.ci_low_mean && row.ci_high_mean) {
      out << std::setw(9) << 50.0 * (*row.ci_high_mean - *row.ci_low_mean) << '%';
    } else {
      out << std::setw(10) << "-";
    }
    out << std::setw(9) << 100.0 * row.prediction_error.value_or(0.0) << '%';
    if (row.flagged) out << "  (" << row.degenerate << " degenerate)";
    out << '\n';
  }
  return out.str();
}

std::string ValidationReport::to_svg() const {
  constexpr double size = 400.0, margin = 50.0, plot = size - 2 * margin;
  double top = 0.05;
  for (const auto& row : rows) {
    top = std::max({top, row.alpha_true, row.alpha_hat_mean.value_or(0.0), row.ci_high_mean.value_or(0.0)});
  }
  top = std::min(1.0, std::ceil(top * 20.0) / 20.0);
  auto px = [&](double a) { return margin + plot * a / top; };
  auto py = [&](double a) { return size - margin - plot * a / top; };
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(top) << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0) << "\" y2=\"" << py(top)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(top) << "\" y2=\"" << py(top)
      << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  out << "<text x=\"" << size / 2 << "\" y=\"" << size - 12 << "\" text-anchor=\"middle\">true alpha</text>\n";
  out << "<text x=\"14\" y=\"" << size / 2 << "\" transform=\"rotate(-90 14 " << size / 2
      << ")\" text-anchor=\"middle\">estimated alpha</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double a = top * k / 4.0;
    out << "<text x=\"" << px(a) << "\" y=\"" << py(0) + 16 << "\" font-size=\"10\" text-anchor=\"middle\">"
        << std::setprecision(3) << a << std::setprecision(2) << "</text>\n";
    out << "<text x=\"" << px(0) - 6 << "\" y=\"" << py(a) + 3 << "\" font-size=\"10\" text-anchor=\"end\">"
        << std::setprecision(3) << a << std::setprecision(2) << "</text>\n";
  }
  std::string path;
  for (const auto& row : rows) {
    if (!row.alpha_hat_mean) continue;
    const double x = px(row.alpha_true), y = py(*row.alpha_hat_mean);
    if (row.ci_low_mean && row.ci_high_mean) {
      out << "<line x1=\"" << x << "\" y1=\"" << py(*row.ci_low_mean) << "\" x2=\"" << x << "\" y2=\""
          << py(*row.ci_high_mean) << "\" stroke=\"steelblue\"/>\n";
    }
    out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"steelblue\"/>\n";
    std::ostringstream pt;
    pt << std::fixed << std::setprecision(2) << (path.empty() ? "M" : " L") << x << ' ' << y;
    path += pt.str();
  }
  if (!path.empty()) out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"steelblue\"/>\n";
  out << "</svg>\n";
  return out.str();
}

json TrainingManifest::to_json() const {
  return json{{"model_fingerprint", model_fingerprint}, {"human_ids", human_ids}, {"ai_ids", ai_ids}};
}

TrainingManifest TrainingManifest::from_json(const json& j) {
  try {
    TrainingManifest m;
    m.model_fingerprint = j.at("model_fingerprint").get<std::string>();
    m.human_ids = j.at("human_ids").get<std::vector<std::string>>();
    m.ai_ids = j.at("ai_ids").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed training manifest: ") + e.what());
  }
}

void TrainingManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << to_json().dump() << '\n';
}

TrainingManifest TrainingManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read training manifest '" + path.string() + "'");
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed training manifest: ") + e.what());
  }
}

std::pair<std::vector<Document>, std::vector<Document>> split_corpus(std::vector<Document> docs,
                                                                     double fraction,
                                                                     std::uint64_t seed) {
  if (docs.size() < 2) throw InputError("split needs at least two documents");
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("split fraction must lie in (0, 1)");
  Engine engine(substream_seed(seed, "split"));
  std::shuffle(docs.begin(), docs.end(), engine);
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(docs.size()) * fraction + 1e-9));
  std::vector<Document> validation(std::make_move_iterator(docs.begin() + static_cast<std::ptrdiff_t>(n_train)),
                                   std::make_move_iterator(docs.end()));
  docs.resize(n_train);
  return {std::move(docs), std::move(validation)};
}

std::vector<Document> synthesize_mixture(std::span<const Document> human_pool,
                                         std::span<const Document> ai_pool, double alpha,
                                         std::size_t n, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  const auto n_ai = static_cast<std::size_t>(round_half_even(alpha * static_cast<double>(n)));
  const std::size_t n_human = n - n_ai;
  if (n_ai > 0 && ai_pool.empty()) throw EmptyCorpus("AI validation pool is empty");
  if (n_human > 0 && human_pool.empty()) throw EmptyCorpus("human validation pool is empty");

  Engine engine(seed);
  std::vector<Document> out;
  out.reserve(n);
  auto draw = [&](std::span<const Document> pool, std::size_t count, const char* tag) {
    if (count == 0) return;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t k = 0; k < count; ++k) {
      Document d = pool[pick(engine)];
      d.metadata[kProvenanceKey] = std::string(tag);
      out.push_back(std::move(d));
    }
  };
  draw(ai_pool, n_ai, "ai");
  draw(human_pool, n_human, "human");
  std::shuffle(out.begin(), out.end(), engine);
  return out;
}

void check_leakage(const OccurrenceModel& model, const TrainingManifest& manifest,
                   std::span<const Document> human_val, std::span<const Document> ai_val) {
  if (manifest.model_fingerprint != model.fingerprint()) {
    throw InputError("training manifest belongs to model " + manifest.model_fingerprint +
                     ", not " + model.fingerprint());
  }
  auto check = [](const std::vector<std::string>& train_ids, std::span<const Document> val,
                  const char* which) {
    const std::unordered_set<std::string> train(train_ids.begin(), train_ids.end());
    std::size_t overlap = 0;
    std::string first;
    for (const auto& d : val) {
      if (train.count(d.id)) {
        if (overlap++ == 0) first = d.id;
      }
    }
    if (overlap > 0) {
      throw LeakageError(std::to_string(overlap) + " " + which +
                         " validation document(s) were used for training, e.g. '" + first + "'");
    }
  };
  check(manifest.human_ids, human_val, "human");
  check(manifest.ai_ids, ai_val, "AI");
}

ValidationReport run_validation_grid(const OccurrenceModel& model,
                                     std::span<const Document> human_val,
                                     std::span<const Document> ai_val, const ValidationConfig& config,
                                     const TrainingManifest* manifest) {
  config.validate();
  if (human_val.empty()) throw EmptyCorpus("human validation pool is empty");
  if (ai_val.empty()) throw EmptyCorpus("AI validation pool is empty");
  if (manifest) check_leakage(model, *manifest, human_val, ai_val);

  struct Cell {
    std::optional<double> alpha_hat;
    std::optional<ConfidenceInterval> ci;
  };
  const std::size_t grid = config.alpha_grid.size();
  const auto repeats = static_cast<std::size_t>(config.repeats);
  std::vector<Cell> cells(grid * repeats);

  parallel_for(cells.size(), config.threads, [&](std::size_t idx) {
    const std::size_t g = idx / repeats, r = idx % repeats;
    const double alpha = config.alpha_grid[g];
    const auto target = synthesize_mixture(human_val, ai_val, alpha, config.n_target,
                                           substream_seed(config.seed, "mixture", g, r));
    const auto table = build_likelihood_table(model, target);
    Cell& cell = cells[idx];
    try {
      cell.alpha_hat = mle_alpha(table, config.solver).alpha_hat;
    } catch (const DegenerateLikelihood&) {
      return;
    }
    if (config.bootstrap > 0) {
      try {
        cell.ci = bootstrap_ci(table, config.solver, config.bootstrap, config.level,
                               substream_seed(config.seed, "bootstrap", g, r));
      } catch (const DegenerateLikelihood&) {
      }
    }
  });

  ValidationReport report;
  report.config = config;
  report.model_fingerprint = model.fingerprint();
  for (std::size_t g = 0; g < grid; ++g) {
    ValidationRow row;
    row.alpha_true = config.alpha_grid[g];
    row.repeats = config.repeats;
    double sum = 0.0, lo = 0.0, hi = 0.0;
    int n_ok = 0, n_ci = 0;
    for (std::size_t r = 0; r < repeats; ++r) {
      const Cell& c = cells[g * repeats + r];
      if (!c.alpha_hat) {
        ++row.degenerate;
        continue;
      }
      sum += *c.alpha_hat;
      ++n_ok;
      if (c.ci) {
        lo += std::min(c.ci->low, *c.alpha_hat);
        hi += std::max(c.ci->high, *c.alpha_hat);
        ++n_ci;
      }
    }
    row.flagged = row.degenerate > 0;
    if (n_ok > 0) {
      row.alpha_hat_mean = sum / n_ok;
      row.prediction_error = std::fabs(*row.alpha_hat_mean - row.alpha_true);
    }
    if (n_ci > 0) {
      row.ci_low_mean = lo / n_ci;
      row.ci_high_mean = hi / n_ci;
    }
    std::ostringstream msg;
    msg << "alpha=" << row.alpha_true;
    if (row.alpha_hat_mean) {
      msg << " alpha_hat=" << *row.alpha_hat_mean << " error=" << *row.prediction_error;
    } else {
      msg << " degenerate";
    }
    log_info(msg.str());
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace mixest
