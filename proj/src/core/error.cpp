#include "tpsfilter/error.hpp"

namespace tpsf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::IllegalResidue: return "IllegalResidue";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::InvalidRange: return "InvalidRange";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::EmptyAlternativeGroup: return "EmptyAlternativeGroup";
    case ErrorKind::NoRulesConfigured: return "NoRulesConfigured";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::BandTooNarrow: return "BandTooNarrow";
    case ErrorKind::EmptyDatabase: return "EmptyDatabase";
    case ErrorKind::InvalidPartitionSelection: return "InvalidPartitionSelection";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::LogprobPositive: return "LogprobPositive";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NoAtoms: return "NoAtoms";
    case ErrorKind::MalformedAtomRow: return "MalformedAtomRow";
    case ErrorKind::ConfidenceOutOfRange: return "ConfidenceOutOfRange";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnparsableRow: return "UnparsableRow";
    case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::MalformedEC: return "MalformedEC";
    case ErrorKind::RowTooShort: return "RowTooShort";
    case ErrorKind::UnknownEvidenceId: return "UnknownEvidenceId";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tpsf
