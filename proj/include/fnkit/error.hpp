#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fnkit {

enum class ErrorKind {
  InvalidInput,
  Io,
  SchemaError,
  FetchFailed,
  NotHtml,
  InsufficientClass,
  EmptyDocument,
  UrlError,
  InvalidWord,
  CategoryError,
  DegenerateText,
  DictionaryRequired,
  NotFitted,
  EmptyCorpus,
  EmptyVocabulary,
  DegenerateLabels,
  TooFewRows,
  EmptyEvaluation,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the toolkit; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fnkit
