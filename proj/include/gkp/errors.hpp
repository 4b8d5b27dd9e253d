#pragma once

#include <stdexcept>
#include <string>

namespace gkp {

/// Bad input: a precondition of the called operation does not hold.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The numerics did not reach the accuracy the caller asked for.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GKP_DEFINE_ERROR(Name, Base)          \
  class Name : public Base {                  \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Base(std::string(#Name ": ") + what) {} \
  };

GKP_DEFINE_ERROR(NonRationalFlux, ValidationError)
GKP_DEFINE_ERROR(MissingInductance, ValidationError)
GKP_DEFINE_ERROR(ZeroConfinement, ValidationError)
GKP_DEFINE_ERROR(NonHermitianInput, ValidationError)
GKP_DEFINE_ERROR(GridTooNarrow, ValidationError)
GKP_DEFINE_ERROR(GridMismatch, ValidationError)
GKP_DEFINE_ERROR(NonSquareGrid, ValidationError)
GKP_DEFINE_ERROR(BadTau, ValidationError)
GKP_DEFINE_ERROR(ZeroCurrent, ValidationError)
GKP_DEFINE_ERROR(EmptyGrid, ValidationError)
GKP_DEFINE_ERROR(GridTooCoarse, ConvergenceError)
GKP_DEFINE_ERROR(TruncationError, ConvergenceError)

#undef GKP_DEFINE_ERROR

}  // namespace gkp
