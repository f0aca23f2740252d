#include "collex/error.hpp"

#include <fmt/format.h>

namespace collex {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::corpus_format: return "corpus-format";
    case ErrorCode::corpus_integrity: return "corpus-integrity";
    case ErrorCode::extraction: return "extraction";
    case ErrorCode::response_validation: return "response-validation";
    case ErrorCode::rule_cycle: return "rule-cycle";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::degenerate_vector: return "degenerate-vector";
    case ErrorCode::missing_embedding: return "missing-embedding";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::undefined_accuracy: return "undefined-accuracy";
    case ErrorCode::adjudication_integrity: return "adjudication-integrity";
    case ErrorCode::no_negatives: return "no-negatives";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::incomplete_round: return "incomplete-round";
    case ErrorCode::incomplete_adjudication: return "incomplete-adjudication";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::authorization: return "authorization";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::validation: return "validation";
    case ErrorCode::integrity: return "integrity";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::configuration:
    case ErrorCode::invalid_argument:
      return 1;
    case ErrorCode::extraction:
    case ErrorCode::response_validation:
      return 3;
    default:
      return 2;
  }
}

MissingEmbeddingError::MissingEmbeddingError(std::vector<std::string> terms)
    : Error(ErrorCode::missing_embedding,
            fmt::format("no embedding for {} term(s): {}", terms.size(), fmt::join(terms, ", "))),
      terms_(std::move(terms)) {}

}  // namespace collex
