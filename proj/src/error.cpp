#include "sdre/error.hpp"

namespace sdre {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularLyapunov: return "SingularLyapunov";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::InvalidTolerance: return "InvalidTolerance";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NoStabilizingSolution: return "NoStabilizingSolution";
    case ErrorKind::NonStabilizingGuess: return "NonStabilizingGuess";
    case ErrorKind::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorKind::SingularR: return "SingularR";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::DegenerateBox: return "DegenerateBox";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case ErrorKind::SingularGramian: return "SingularGramian";
    case ErrorKind::UnstableClosedLoop: return "UnstableClosedLoop";
    case ErrorKind::CoincidentStates: return "CoincidentStates";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace sdre
