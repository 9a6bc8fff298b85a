#include "mixest/corpus.hpp"

#include "mixest/errors.hpp"

#include <cctype>
#include <fstream>

namespace mixest {

namespace {

std::uint8_t bit(PosClass pos) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(pos)); }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_word_char(unsigned char c) {
  // Non-ASCII bytes are kept so UTF-8 letters survive untouched.
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

std::string_view to_string(SourceLabel label) {
  switch (label) {
    case SourceLabel::human: return "human";
    case SourceLabel::ai: return "ai";
    case SourceLabel::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Unit unit) {
  return unit == Unit::sentence ? "sentence" : "document";
}

std::string_view to_string(PosClass pos) {
  switch (pos) {
    case PosClass::adjective: return "adjective";
    case PosClass::adverb: return "adverb";
    case PosClass::verb: return "verb";
    case PosClass::noun: return "noun";
  }
  return "adjective";
}

SourceLabel parse_source_label(std::string_view text) {
  if (text == "human") return SourceLabel::human;
  if (text == "ai") return SourceLabel::ai;
  if (text == "unknown") return SourceLabel::unknown;
  throw InputError("unknown label '" + std::string(text) + "'");
}

Unit parse_unit(std::string_view text) {
  if (text == "sentence") return Unit::sentence;
  if (text == "document") return Unit::document;
  throw InputError("unknown unit '" + std::string(text) + "' (expected sentence|document)");
}

PosClass parse_pos_class(std::string_view text) {
  if (text == "adjective" || text == "ADJ") return PosClass::adjective;
  if (text == "adverb" || text == "ADV") return PosClass::adverb;
  if (text == "verb" || text == "VERB") return PosClass::verb;
  if (text == "noun" || text == "NOUN") return PosClass::noun;
  throw InputError("unknown part of speech '" + std::string(text) + "'");
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (path.empty() || !in) throw MissingLexicon(path.string());
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "lexicon line lacks a TAB separator");
    const std::string word = trim(std::string_view(t).substr(0, tab));
    const std::string pos = trim(std::string_view(t).substr(tab + 1));
    if (word.empty()) throw ParseError(line_no, "empty lexicon word");
    try {
      lex.add(word, parse_pos_class(pos));
    } catch (const InputError&) {
      throw ParseError(line_no, "unknown POS tag '" + pos + "'");
    }
  }
  return lex;
}

void Lexicon::add(std::string_view word, PosClass pos) {
  entries_[std::string(word)] |= bit(pos);
}

bool Lexicon::matches(std::string_view word, PosClass pos) const {
  auto it = entries_.find(std::string(word));
  return it != entries_.end() && (it->second & bit(pos)) != 0;
}

bool Lexicon::contains(std::string_view word) const {
  return entries_.count(std::string(word)) != 0;
}

std::set<std::string> load_exclusion_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read exclusion list '" + path.string() + "'");
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.insert(std::move(t));
  }
  return out;
}

std::vector<std::string> normalized_words(std::string_view text, bool lowercase,
                                          std::size_t min_len) {
  std::vector<std::string> words;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && !is_word_char(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && !is_word_char(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b && e - b >= min_len) {
      std::string w(text.substr(b, e - b));
      if (lowercase) {
        for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      words.push_back(std::move(w));
    }
    i = j;
  }
  return words;
}

TokenFilter::TokenFilter(VocabFilterConfig config)
    : config_(std::move(config)), lexicon_(Lexicon::load(config_.lexicon_path)) {
  if (config_.min_token_len < 1) throw InputError("min_token_len must be >= 1");
}

TokenFilter::TokenFilter(VocabFilterConfig config, Lexicon lexicon)
    : config_(std::move(config)), lexicon_(std::move(lexicon)) {
  if (config_.min_token_len < 1) throw InputError("min_token_len must be >= 1");
}

bool TokenFilter::keeps(std::string_view word) const {
  if (config_.exclusion_list.count(std::string(word)) != 0) return false;
  if (lexicon_.matches(word, config_.pos_class)) return true;
  if (!config_.lowercase) {
    // Case-preserving mode still looks words up by their lowercase form.
    std::string lower(word);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return config_.exclusion_list.count(lower) == 0 && lexicon_.matches(lower, config_.pos_class);
  }
  return false;
}

std::set<std::string> extract_tokens(std::string_view text, const TokenFilter& filter) {
  std::set<std::string> out;
  const auto& cfg = filter.config();
  for (auto& w : normalized_words(text, cfg.lowercase, cfg.min_token_len)) {
    if (filter.keeps(w)) out.insert(std::move(w));
  }
  return out;
}

}  // namespace mixest
