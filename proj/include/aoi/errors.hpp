#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter validation
struct UnstableSystem : Error { using Error::Error; };
struct InvalidCapacity : Error { using Error::Error; };
struct InvalidRate : Error { using Error::Error; };

// Penalty evaluation
struct PenaltyDiverges : Error { using Error::Error; };
struct UnsupportedPenalty : Error { using Error::Error; };
struct MgfDiverges : Error { using Error::Error; };
struct QuadratureFailed : Error { using Error::Error; };
struct NegativePenalty : Error { using Error::Error; };
struct NonIntegrable : Error { using Error::Error; };

// Battery sizing
struct Infeasible : Error { using Error::Error; };
struct DegenerateArgument : Error { using Error::Error; };

// QBD solver
struct NotConverged : Error { using Error::Error; };
struct DegenerateNullSpace : Error { using Error::Error; };

// Simulator
struct ModeUnsupported : Error { using Error::Error; };

}  // namespace aoi
