#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixest {

// Process exit codes. Stable contract for scripting.
enum class ExitCode : int {
  ok = 0,
  input = 2,
  degenerate = 3,
  leakage = 4,
  transport = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ExitCode::input, what) {}
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingLexicon : public InputError {
 public:
  explicit MissingLexicon(const std::string& path)
      : InputError("MissingLexicon: cannot read lexicon '" + path + "'") {}
};

class EmptyCorpus : public InputError {
 public:
  explicit EmptyCorpus(const std::string& what) : InputError("EmptyCorpus: " + what) {}
};

class UnknownToken : public InputError {
 public:
  explicit UnknownToken(const std::string& what) : InputError("UnknownToken: " + what) {}
};

class UnknownMetadataKey : public InputError {
 public:
  explicit UnknownMetadataKey(const std::string& key)
      : InputError("UnknownMetadataKey: '" + key + "'"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class EmptyStratum : public InputError {
 public:
  explicit EmptyStratum(const std::string& name)
      : InputError("EmptyStratum: '" + name + "' has no documents"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class AuthError : public InputError {
 public:
  explicit AuthError(const std::string& what) : InputError("AuthError: " + what) {}
};

// P(x) == Q(x) on every document: the mixture weight is unidentifiable.
class DegenerateLikelihood : public Error {
 public:
  explicit DegenerateLikelihood(const std::string& what)
      : Error(ExitCode::degenerate, "DegenerateLikelihood: " + what) {}
};

class LeakageError : public Error {
 public:
  explicit LeakageError(const std::string& what) : Error(ExitCode::leakage, "LeakageError: " + what) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what, bool retryable = true)
      : Error(ExitCode::transport, "TransportError: " + what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

}  // namespace mixest
