#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpsf {

enum class ErrorKind {
  // seqio
  DuplicateId,
  IllegalResidue,
  EmptySequence,
  MalformedHeader,
  InvalidRange,
  // motif
  SyntaxError,
  EmptyAlternativeGroup,
  NoRulesConfigured,
  // align
  InvalidParams,
  BandTooNarrow,
  EmptyDatabase,
  // partition
  InvalidPartitionSelection,
  // toolio
  SchemaError,
  LogprobPositive,
  LengthMismatch,
  EmptyInput,
  NoAtoms,
  MalformedAtomRow,
  ConfidenceOutOfRange,
  MissingColumn,
  UnparsableRow,
  ScoreOutOfRange,
  MalformedEC,
  RowTooShort,
  // pipeline
  UnknownEvidenceId,
  ConfigInvalid,
  IoError,
};

// Validation errors map to CLI exit 1, I/O errors to exit 2.
enum class ErrorCategory { Validation, Io };

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept {
    return kind_ == ErrorKind::IoError ? ErrorCategory::Io : ErrorCategory::Validation;
  }

 private:
  ErrorKind kind_;
};

}  // namespace tpsf
