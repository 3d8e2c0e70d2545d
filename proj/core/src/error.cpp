#include "bwshare/error.hpp"

namespace bwshare {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kEmptyRoute: return "EmptyRoute";
    case ErrorCode::kNonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::kNotCriticallyLoaded: return "NotCriticallyLoaded";
    case ErrorCode::kRatePositivityViolated: return "RatePositivityViolated";
    case ErrorCode::kMixtureInvalid: return "MixtureInvalid";
    case ErrorCode::kSolverDiverged: return "SolverDiverged";
    case ErrorCode::kStepTooLarge: return "StepTooLarge";
    case ErrorCode::kNotInCone: return "NotInCone";
    case ErrorCode::kSingularG: return "SingularG";
    case ErrorCode::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::kTopologyMismatch: return "TopologyMismatch";
    case ErrorCode::kInvariantViolated: return "InvariantViolated";
    case ErrorCode::kHorizonTooShort: return "HorizonTooShort";
    case ErrorCode::kTooFewBatches: return "TooFewBatches";
    case ErrorCode::kStabilityViolated: return "StabilityViolated";
    case ErrorCode::kNotSubcritical: return "NotSubcritical";
    case ErrorCode::kLcpNotConverged: return "LcpNotConverged";
    case ErrorCode::kNotApplicable: return "NotApplicable";
    case ErrorCode::kEliminationBlowup: return "EliminationBlowup";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kInvalidMultipath: return "InvalidMultipath";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace bwshare
