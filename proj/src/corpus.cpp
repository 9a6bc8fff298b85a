#include "mixest/corpus.hpp"

#include "mixest/common.hpp"
#include "mixest/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

namespace mixest {

using nlohmann::json;

std::string meta_to_string(const MetaValue& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  if (const auto* d = std::get_if<double>(&value)) return format_double(*d);
  return std::get<std::string>(value);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  for (auto& t : tokens) {
    if (find(t)) throw InputError("duplicate vocabulary token '" + t + "'");
    add(t);
  }
}

TokenId Vocabulary::add(std::string_view token) {
  std::string key(token);
  auto it = token_to_id_.find(key);
  if (it != token_to_id_.end()) return it->second;
  const auto id = static_cast<TokenId>(id_to_token_.size());
  token_to_id_.emplace(key, id);
  id_to_token_.push_back(std::move(key));
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

void Document::normalize() {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
}

bool Document::contains(TokenId t) const {
  return std::binary_search(tokens.begin(), tokens.end(), t);
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

RawRecord parse_record(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");

  RawRecord rec;
  auto text = obj.find("text");
  if (text == obj.end() || !text->is_string()) throw ParseError(line_no, "missing string field \"text\"");
  rec.text = text->get<std::string>();
  if (blank(rec.text)) throw ParseError(line_no, "\"text\" is blank");

  if (auto id = obj.find("id"); id != obj.end() && !id->is_null()) {
    if (id->is_string()) {
      rec.id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      rec.id = std::to_string(id->get<long long>());
    } else {
      throw ParseError(line_no, "\"id\" must be a string");
    }
    if (rec.id.empty()) throw ParseError(line_no, "\"id\" is empty");
  } else {
    rec.id = std::to_string(line_no);
  }

  if (auto meta = obj.find("meta"); meta != obj.end() && !meta->is_null()) {
    if (!meta->is_object()) throw ParseError(line_no, "\"meta\" must be an object");
    for (auto& [key, value] : meta->items()) {
      if (value.is_boolean()) {
        rec.metadata[key] = value.get<bool>();
      } else if (value.is_number()) {
        rec.metadata[key] = value.get<double>();
      } else if (value.is_string()) {
        rec.metadata[key] = value.get<std::string>();
      } else if (!value.is_null()) {
        throw ParseError(line_no, "meta." + key + " is not a scalar");
      }
    }
  }

  if (auto label = obj.find("label"); label != obj.end() && !label->is_null()) {
    if (!label->is_string()) throw ParseError(line_no, "\"label\" must be a string");
    try {
      rec.label = parse_source_label(label->get<std::string>());
    } catch (const InputError&) {
      throw ParseError(line_no, "unknown label '" + label->get<std::string>() + "'");
    }
  }
  return rec;
}

// Shared unit expansion: flags on raw text, then split.
template <typename TokenFn>
void expand_record(const RawRecord& rec, const CorpusOptions& options, TokenFn&& to_tokens,
                   std::vector<Document>& out) {
  RawRecord flagged = rec;
  for (const auto& flag : options.contains_flags) {
    flagged.metadata[flag.key] = rec.text.find(flag.needle) != std::string::npos;
  }
  for (auto& unit : split_units(flagged, options.unit)) {
    Document doc;
    doc.id = std::move(unit.id);
    doc.metadata = std::move(unit.metadata);
    doc.unit = options.unit;
    doc.n_words = normalized_words(unit.text, false).size();
    doc.tokens = to_tokens(unit.text);
    doc.normalize();
    out.push_back(std::move(doc));
  }
}

}  // namespace

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(RawRecord&&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read corpus '" + path.string() + "'");
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    RawRecord rec = parse_record(line, line_no);
    if (!seen.insert(rec.id).second) throw ParseError(line_no, "duplicate id '" + rec.id + "'");
    ++count;
    fn(std::move(rec), line_no);
  }
  if (count == 0) throw EmptyCorpus("'" + path.string() + "' contains no records");
}

std::vector<RawRecord> read_records(const std::filesystem::path& path) {
  std::vector<RawRecord> out;
  for_each_record(path, [&](RawRecord&& r, std::size_t) { out.push_back(std::move(r)); });
  return out;
}

std::vector<Document> records_to_documents(const std::vector<RawRecord>& records,
                                           const CorpusOptions& options,
                                           const TokenFilter& filter, Vocabulary& vocab) {
  std::vector<Document> docs;
  auto to_tokens = [&](const std::string& text) {
    std::vector<TokenId> ids;
    // Deterministic first-seen order follows the text, not the set order.
    const auto& cfg = filter.config();
    for (const auto& w : normalized_words(text, cfg.lowercase, cfg.min_token_len)) {
      if (filter.keeps(w)) ids.push_back(vocab.add(w));
    }
    return ids;
  };
  for (const auto& rec : records) expand_record(rec, options, to_tokens, docs);
  return docs;
}

std::vector<Document> records_to_target_documents(const std::vector<RawRecord>& records,
                                                  const CorpusOptions& options,
                                                  const Vocabulary& vocab, bool lowercase) {
  std::vector<Document> docs;
  auto to_tokens = [&](const std::string& text) {
    std::vector<TokenId> ids;
    for (const auto& w : normalized_words(text, lowercase)) {
      if (auto id = vocab.find(w)) ids.push_back(*id);
    }
    return ids;
  };
  for (const auto& rec : records) expand_record(rec, options, to_tokens, docs);
  return docs;
}

std::vector<Document> load_corpus_into(const std::filesystem::path& path,
                                       const CorpusOptions& options, const TokenFilter& filter,
                                       Vocabulary& vocab) {
  std::vector<Document> docs;
  for_each_record(path, [&](RawRecord&& rec, std::size_t) {
    auto part = records_to_documents({rec}, options, filter, vocab);
    std::move(part.begin(), part.end(), std::back_inserter(docs));
  });
  return docs;
}

LoadedCorpus load_corpus(const std::filesystem::path& path, const CorpusOptions& options,
                         const TokenFilter& filter) {
  LoadedCorpus out;
  out.docs = load_corpus_into(path, options, filter, out.vocab);
  return out;
}

std::vector<Document> load_target_corpus(const std::filesystem::path& path,
                                         const CorpusOptions& options, const Vocabulary& vocab,
                                         bool lowercase) {
  std::vector<Document> docs;
  for_each_record(path, [&](RawRecord&& rec, std::size_t) {
    auto part = records_to_target_documents({rec}, options, vocab, lowercase);
    std::move(part.begin(), part.end(), std::back_inserter(docs));
  });
  return docs;
}

}  // namespace mixest
