#pragma once

#include <stdexcept>
#include <string>

namespace risdet {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteError : Error { using Error::Error; };
struct NonHermitianError : Error { using Error::Error; };
struct RankDeficientError : Error { using Error::Error; };
struct NotPsdError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };

/// Bisection bracket does not enclose a sign change.
struct BracketError : Error { using Error::Error; };
struct MaxIterationsError : Error { using Error::Error; };

/// Communication SNR target cannot be met at the given power budget.
struct InfeasibleError : Error { using Error::Error; };
struct SingularBlockError : Error { using Error::Error; };
struct ZeroClutterError : Error { using Error::Error; };
struct InsufficientTrialsError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace risdet
