#pragma once
#include <stdexcept>
#include <string>

namespace mbpt {

// Base class for all domain errors raised by the library. The CLI maps these
// to exit code 1; anything else (bad flags, missing files) is a usage error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct InvalidMatching : Error {
  using Error::Error;
};
struct OrderTooLarge : Error {
  using Error::Error;
};
struct OddCount : Error {
  using Error::Error;
};
struct NotAMatchedPair : Error {
  using Error::Error;
};
struct NotTruncated : Error {
  using Error::Error;
};
struct NotOnePI : Error {
  using Error::Error;
};
struct DimensionTooLarge : Error {
  using Error::Error;
};
struct GridBudgetExceeded : Error {
  using Error::Error;
};
struct MissingEdgeAssignment : Error {
  using Error::Error;
};
struct SingularScreening : Error {
  using Error::Error;
};
struct LogBranchFailure : Error {
  using Error::Error;
};
struct LostPositivity : Error {
  using Error::Error;
};
struct NotSPD : Error {
  using Error::Error;
};
struct PerturbationBreaksSPD : Error {
  using Error::Error;
};
struct DivergentSeries : Error {
  using Error::Error;
};

}  // namespace mbpt
