#include "procscore/error.hpp"

namespace procscore {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::UnsupportedBinaryContent: return "UnsupportedBinaryContent";
    case ErrorKind::RepositoryNotFound: return "RepositoryNotFound";
    case ErrorKind::CorruptObject: return "CorruptObject";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaFieldUnknown: return "SchemaFieldUnknown";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::OrderMismatch: return "OrderMismatch";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateTimeRange: return "DegenerateTimeRange";
    case ErrorKind::NoEvents: return "NoEvents";
    case ErrorKind::ZeroTotalWeight: return "ZeroTotalWeight";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::AllZeroWeights: return "AllZeroWeights";
    case ErrorKind::InvalidSegment: return "InvalidSegment";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::ZeroMassSegment: return "ZeroMassSegment";
    case ErrorKind::MissingActivity: return "MissingActivity";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::EmptySamples: return "EmptySamples";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::TooFewInstances: return "TooFewInstances";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::MissingTransform: return "MissingTransform";
  }
  return "Unknown";
}

}  // namespace procscore
