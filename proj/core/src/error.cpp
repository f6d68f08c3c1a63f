#include "phaseless/error.hpp"

namespace phaseless {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kSupportOutsideBox: return "support-outside-box";
    case ErrorCode::kGridMismatch: return "grid-mismatch";
    case ErrorCode::kUnsupportedPrimitive: return "unsupported-primitive";
    case ErrorCode::kZeroDisplacement: return "zero-displacement";
    case ErrorCode::kUnderResolvedGrid: return "under-resolved-grid";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kEnergyShellMismatch: return "energy-shell-mismatch";
    case ErrorCode::kOutOfBall: return "out-of-ball";
    case ErrorCode::kOrdering: return "ordering";
    case ErrorCode::kSingularNode: return "singular-node";
    case ErrorCode::kNoValidChannel: return "no-valid-channel";
    case ErrorCode::kDegeneracy: return "degeneracy";
    case ErrorCode::kNoData: return "no-data";
    case ErrorCode::kDivergentIntegral: return "divergent-integral";
    case ErrorCode::kUnboundedDomain: return "unbounded-domain";
    case ErrorCode::kDegenerateFit: return "degenerate-fit";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace phaseless
