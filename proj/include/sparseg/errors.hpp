#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sparseg {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct ParamError : Error { using Error::Error; };
struct EmptyInputError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct LocalizationError : Error { using Error::Error; };
struct DegenerateStateError : Error { using Error::Error; };

// Raised when the evolving interior empties out. Carries the energy trace
// accumulated up to the failure so callers can still dump it.
struct DivergenceError : Error {
  DivergenceError(const std::string& what, std::string trace_csv)
      : Error(what), trace(std::move(trace_csv)) {}
  std::string trace;
};

}  // namespace sparseg
