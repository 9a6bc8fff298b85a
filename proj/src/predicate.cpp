#include "mixest/analysis.hpp"
#include "mixest/errors.hpp"

#include <array>
#include <cctype>

namespace mixest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct OpToken {
  std::string_view text;
  CompareOp op;
};

// Longer operators first so "<=" is not read as "<".
constexpr std::array<OpToken, 6> kSymbolOps = {{{"==", CompareOp::eq},
                                               {"!=", CompareOp::ne},
                                               {"<=", CompareOp::le},
                                               {">=", CompareOp::ge},
                                               {"<", CompareOp::lt},
                                               {">", CompareOp::gt}}};

MetaValue parse_literal(std::string_view s, std::string_view whole) {
  if (s.empty()) throw InputError("predicate '" + std::string(whole) + "' lacks a literal");
  if ((s.front() == '\'' || s.front() == '"') && s.size() >= 2 && s.back() == s.front()) {
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used == str.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("cannot parse literal '" + std::string(s) + "' in predicate '" + std::string(whole) +
                   "' (quote strings)");
}

template <typename T>
bool compare(const T& a, const T& b, CompareOp op) {
  switch (op) {
    case CompareOp::eq: return a == b;
    case CompareOp::ne: return a != b;
    case CompareOp::le: return a <= b;
    case CompareOp::ge: return a >= b;
    case CompareOp::lt: return a < b;
    case CompareOp::gt: return a > b;
    case CompareOp::contains: break;
  }
  return false;
}

}  // namespace

Predicate Predicate::parse(std::string_view text) {
  const std::string_view s = trim(text);
  Predicate pred;
  pred.text = std::string(s);
  if (s.substr(0, 5) != "meta.") {
    throw InputError("predicate '" + pred.text + "' must start with meta.<key>");
  }
  std::size_t key_end = 5;
  while (key_end < s.size() && (std::isalnum(static_cast<unsigned char>(s[key_end])) || s[key_end] == '_' ||
                                s[key_end] == '-' || s[key_end] == '.')) {
    ++key_end;
  }
  pred.key = std::string(s.substr(5, key_end - 5));
  if (pred.key.empty()) throw InputError("predicate '" + pred.text + "' has an empty key");

  std::string_view rest = trim(s.substr(key_end));
  bool found = false;
  if (rest.substr(0, 8) == "contains" && (rest.size() == 8 || std::isspace(static_cast<unsigned char>(rest[8])))) {
    pred.op = CompareOp::contains;
    rest = trim(rest.substr(8));
    found = true;
  } else {
    for (const auto& candidate : kSymbolOps) {
      if (rest.substr(0, candidate.text.size()) == candidate.text) {
        pred.op = candidate.op;
        rest = trim(rest.substr(candidate.text.size()));
        found = true;
        break;
      }
    }
  }
  if (!found) throw InputError("predicate '" + pred.text + "' lacks a comparison operator");
  pred.literal = parse_literal(rest, s);
  if (pred.op == CompareOp::contains && !std::holds_alternative<std::string>(pred.literal)) {
    throw InputError("'contains' needs a quoted string literal in '" + pred.text + "'");
  }
  return pred;
}

bool Predicate::evaluate(const Metadata& metadata) const {
  auto it = metadata.find(key);
  if (it == metadata.end()) throw UnknownMetadataKey(key);
  const MetaValue& value = it->second;

  if (op == CompareOp::contains) {
    const auto* s = std::get_if<std::string>(&value);
    if (!s) throw InputError("meta." + key + " is not a string; 'contains' does not apply");
    return s->find(std::get<std::string>(literal)) != std::string::npos;
  }
  if (value.index() != literal.index()) {
    throw InputError("meta." + key + " = " + meta_to_string(value) + " cannot be compared with " +
                     meta_to_string(literal));
  }
  if (const auto* d = std::get_if<double>(&value)) return compare(*d, std::get<double>(literal), op);
  if (const auto* s = std::get_if<std::string>(&value)) return compare(*s, std::get<std::string>(literal), op);
  const bool b = std::get<bool>(value);
  if (op != CompareOp::eq && op != CompareOp::ne) {
    throw InputError("meta." + key + " is boolean; only == and != apply");
  }
  return compare(b, std::get<bool>(literal), op);
}

}  // namespace mixest
