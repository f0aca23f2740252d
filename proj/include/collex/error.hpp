#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace collex {

enum class ErrorCode {
  io,
  corpus_format,
  corpus_integrity,
  extraction,
  response_validation,
  rule_cycle,
  empty_input,
  degenerate_vector,
  missing_embedding,
  insufficient_data,
  invalid_argument,
  undefined_accuracy,
  adjudication_integrity,
  no_negatives,
  conflict,
  incomplete_round,
  incomplete_adjudication,
  configuration,
  authorization,
  not_found,
  validation,
  integrity,
};

std::string_view to_string(ErrorCode code) noexcept;

// Process exit code for a failure of this kind: 2 for data errors,
// 3 for external-service errors, 1 for usage/configuration errors.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Extraction failures keep the tweet id so the caller can retry later.
class ExtractionError : public Error {
 public:
  ExtractionError(std::string tweet_id, const std::string& message,
                  ErrorCode code = ErrorCode::extraction)
      : Error(code, message), tweet_id_(std::move(tweet_id)) {}

  const std::string& tweet_id() const noexcept { return tweet_id_; }

 private:
  std::string tweet_id_;
};

class MissingEmbeddingError : public Error {
 public:
  explicit MissingEmbeddingError(std::vector<std::string> terms);

  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
};

}  // namespace collex
