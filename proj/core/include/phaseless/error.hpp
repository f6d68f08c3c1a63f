#pragma once

#include <stdexcept>
#include <string>

namespace phaseless {

enum class ErrorCode {
  kInvalidArgument,
  kSupportOutsideBox,
  kGridMismatch,
  kUnsupportedPrimitive,
  kZeroDisplacement,
  kUnderResolvedGrid,
  kNonConvergence,
  kEnergyShellMismatch,
  kOutOfBall,
  kOrdering,
  kSingularNode,
  kNoValidChannel,
  kDegeneracy,
  kNoData,
  kDivergentIntegral,
  kUnboundedDomain,
  kDegenerateFit,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

// Every library failure is reported through this type; the code lets the
// CLI map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace phaseless
