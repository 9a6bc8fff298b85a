#pragma once

// Corpus ingestion: raw records, sentence units, lexicon-based vocabulary
// filtering and the set-of-occurrences document representation.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace mixest {

enum class SourceLabel { human, ai, unknown };
enum class Unit { sentence, document };
enum class PosClass { adjective, adverb, verb, noun };

std::string_view to_string(SourceLabel label);
std::string_view to_string(Unit unit);
std::string_view to_string(PosClass pos);
SourceLabel parse_source_label(std::string_view text);  // throws InputError
Unit parse_unit(std::string_view text);
PosClass parse_pos_class(std::string_view text);  // accepts "adjective" and "ADJ" forms

// Flat scalar metadata. Integers are carried as doubles.
using MetaValue = std::variant<bool, double, std::string>;
using Metadata = std::map<std::string, MetaValue>;

std::string meta_to_string(const MetaValue& value);

struct RawRecord {
  std::string id;
  std::string text;
  Metadata metadata;
  SourceLabel label = SourceLabel::unknown;
};

// ---------------------------------------------------------------------------
// Lexicon: static word -> set of POS classes. Ambiguous words carry several.

class Lexicon {
 public:
  Lexicon() = default;

  // Lines are "word<TAB>POS" with POS in {ADJ, ADV, VERB, NOUN}. Blank lines
  // and lines starting with '#' are skipped. Throws MissingLexicon when the
  // file cannot be opened and ParseError on malformed lines.
  static Lexicon load(const std::filesystem::path& path);

  void add(std::string_view word, PosClass pos);
  bool matches(std::string_view word, PosClass pos) const;
  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::uint8_t> entries_;
};

struct VocabFilterConfig {
  PosClass pos_class = PosClass::adjective;
  std::filesystem::path lexicon_path;
  std::set<std::string> exclusion_list;  // compared after lowercasing
  bool lowercase = true;
  std::size_t min_token_len = 1;
};

// Reads one lowercase token per line ('#' comments allowed).
std::set<std::string> load_exclusion_list(const std::filesystem::path& path);

// Whitespace split, leading/trailing punctuation stripped, optionally
// lowercased (ASCII). Internal hyphens and apostrophes are kept, so
// "well-motivated" is one word. Words shorter than min_len are dropped.
std::vector<std::string> normalized_words(std::string_view text, bool lowercase,
                                          std::size_t min_len = 1);

// Lexicon plus filter settings; the unit that extract_tokens runs against.
class TokenFilter {
 public:
  explicit TokenFilter(VocabFilterConfig config);  // loads config.lexicon_path
  TokenFilter(VocabFilterConfig config, Lexicon lexicon);

  const VocabFilterConfig& config() const noexcept { return config_; }
  const Lexicon& lexicon() const noexcept { return lexicon_; }
  bool keeps(std::string_view normalized_word) const;

 private:
  VocabFilterConfig config_;
  Lexicon lexicon_;
};

std::set<std::string> extract_tokens(std::string_view text, const TokenFilter& filter);

// ---------------------------------------------------------------------------
// Vocabulary: dense ids, first-seen order.

using TokenId = std::uint32_t;

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);  // throws InputError on duplicates

  TokenId add(std::string_view token);
  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const { return id_to_token_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return id_to_token_; }
  std::size_t size() const noexcept { return id_to_token_.size(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// A unit of analysis reduced to the set of vocabulary tokens it contains.
// `tokens` is sorted and duplicate-free.
struct Document {
  std::string id;
  std::vector<TokenId> tokens;
  Metadata metadata;
  Unit unit = Unit::document;
  std::size_t n_words = 0;  // words in the unit text, before filtering

  // Sorts and deduplicates `tokens`.
  void normalize();
  bool contains(TokenId t) const;
};

// ---------------------------------------------------------------------------
// Units

// Splits on terminal punctuation followed by whitespace and an uppercase letter
// or digit. Abbreviations such as "et al." or "e.g." never end a sentence.
// Units inherit metadata and get ids "<parent>#k", k from 0.
std::vector<RawRecord> split_units(const RawRecord& record, Unit unit);

// ---------------------------------------------------------------------------
// Loading

// Boolean metadata computed on raw record text at ingestion, before the text
// is reduced to a token set.
struct ContainsFlag {
  std::string key;
  std::string needle;
};

struct CorpusOptions {
  Unit unit = Unit::sentence;
  std::vector<ContainsFlag> contains_flags{{"has_et_al", "et al."}};
};

// Streams a JSONL corpus, one callback per validated record. Each line is
// {"id": str?, "text": str, "meta": {...}?, "label": "human"|"ai"|"unknown"?}.
// Missing ids become the 1-based line number. Throws ParseError with the line
// number on malformed input, EmptyCorpus when no record is found.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(RawRecord&&, std::size_t line_no)>& fn);
std::vector<RawRecord> read_records(const std::filesystem::path& path);

struct LoadedCorpus {
  Vocabulary vocab;
  std::vector<Document> docs;
};

// Builds a fresh vocabulary from the emitted tokens.
LoadedCorpus load_corpus(const std::filesystem::path& path, const CorpusOptions& options,
                         const TokenFilter& filter);

// Extends `vocab` with new tokens (used to build one vocabulary over the human
// and AI training corpora).
std::vector<Document> load_corpus_into(const std::filesystem::path& path,
                                       const CorpusOptions& options, const TokenFilter& filter,
                                       Vocabulary& vocab);

// Target-corpus ingestion against a frozen vocabulary: any word outside the
// vocabulary is ignored.
std::vector<Document> load_target_corpus(const std::filesystem::path& path,
                                         const CorpusOptions& options, const Vocabulary& vocab,
                                         bool lowercase = true);

// In-memory counterparts used by the loaders.
std::vector<Document> records_to_documents(const std::vector<RawRecord>& records,
                                           const CorpusOptions& options,
                                           const TokenFilter& filter, Vocabulary& vocab);
std::vector<Document> records_to_target_documents(const std::vector<RawRecord>& records,
                                                  const CorpusOptions& options,
                                                  const Vocabulary& vocab, bool lowercase = true);

}  // namespace mixest
