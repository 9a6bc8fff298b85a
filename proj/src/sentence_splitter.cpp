#include "mixest/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace mixest {

namespace {

// Lowercased words (without their final period) that never end a sentence.
constexpr std::array<std::string_view, 22> kAbbreviations = {
    "e.g", "i.e", "cf", "vs", "fig", "figs", "eq", "eqs", "sec", "no", "dr",
    "mr", "mrs", "ms", "prof", "approx", "resp", "ref", "refs", "vol", "pp", "al"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

std::string lower_word_before(std::string_view text, std::size_t end) {
  std::size_t b = end;
  while (b > 0 && !is_space(text[b - 1])) --b;
  std::string w(text.substr(b, end - b));
  while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.front()))) w.erase(w.begin());
  for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

// `dot` indexes a '.' that would otherwise end a sentence.
bool is_abbreviation(std::string_view text, std::size_t dot) {
  const std::string word = lower_word_before(text, dot);
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), word) == kAbbreviations.end()) {
    return false;
  }
  if (word != "al") return true;
  // "al." only counts as part of "et al."
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  while (b > 0 && is_space(text[b - 1])) --b;
  return lower_word_before(text, b) == "et";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t e = i;
    while (e < n && is_terminal(text[e])) ++e;
    while (e < n && is_closer(text[e])) ++e;
    std::size_t k = e;
    while (k < n && is_space(text[k])) ++k;
    const bool boundary = e < n && is_space(text[e]) && k < n &&
                          (std::isupper(static_cast<unsigned char>(text[k])) ||
                           std::isdigit(static_cast<unsigned char>(text[k])));
    if (boundary && !(text[i] == '.' && e == i + 1 && is_abbreviation(text, i))) {
      auto s = trim(text.substr(start, e - start));
      if (!s.empty()) out.push_back(s);
      start = k;
      i = k;
    } else {
      i = e;
    }
  }
  auto tail = trim(text.substr(std::min(start, n)));
  if (!tail.empty()) out.push_back(tail);
  return out;
}

}  // namespace

std::vector<RawRecord> split_units(const RawRecord& record, Unit unit) {
  if (unit == Unit::document) return {record};
  const auto sentences = split_sentences(record.text);
  if (sentences.size() <= 1) {
    RawRecord r = record;
    r.id = record.id + "#0";
    if (!sentences.empty()) r.text = std::string(sentences.front());
    return {r};
  }
  std::vector<RawRecord> out;
  out.reserve(sentences.size());
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    RawRecord r;
    r.id = record.id + "#" + std::to_string(k);
    r.text = std::string(sentences[k]);
    r.metadata = record.metadata;
    r.label = record.label;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mixest
