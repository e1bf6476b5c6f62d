#pragma once

#include <stdexcept>
#include <string>

namespace sdre {

enum class ErrorKind {
  DimensionMismatch,
  SingularLyapunov,
  ZeroMatrix,
  InvalidTolerance,
  RankDeficient,
  NonConvergence,
  NoStabilizingSolution,
  NonStabilizingGuess,
  MaxItersExceeded,
  SingularR,
  EmptyMask,
  OutOfBounds,
  DegenerateBox,
  NonFinite,
  GridMismatch,
  NonOrthonormalBasis,
  SingularGramian,
  UnstableClosedLoop,
  CoincidentStates,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sdre
