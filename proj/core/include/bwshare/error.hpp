#ifndef BWSHARE_ERROR_HPP
#define BWSHARE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace bwshare {

enum class ErrorCode {
  kDimensionMismatch,
  kRankDeficient,
  kEmptyRoute,
  kNonPositiveParameter,
  kNotCriticallyLoaded,
  kRatePositivityViolated,
  kMixtureInvalid,
  kSolverDiverged,
  kStepTooLarge,
  kNotInCone,
  kSingularG,
  kDimensionTooLarge,
  kTopologyMismatch,
  kInvariantViolated,
  kHorizonTooShort,
  kTooFewBatches,
  kStabilityViolated,
  kNotSubcritical,
  kLcpNotConverged,
  kNotApplicable,
  kEliminationBlowup,
  kUnbounded,
  kInvalidMultipath,
  kConfigInvalid,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library carries the module that raised it and
// a stable code; the CLI turns both into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string module, ErrorCode code, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)), code_(code) {}

  const std::string& module() const { return module_; }
  ErrorCode code() const { return code_; }

 private:
  std::string module_;
  ErrorCode code_;
};

}  // namespace bwshare

#endif  // BWSHARE_ERROR_HPP
