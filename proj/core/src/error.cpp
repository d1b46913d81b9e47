#include "netsync/error.hpp"

namespace netsync {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDuplicateEdge: return "DuplicateEdge";
    case ErrorKind::kSelfLoop: return "SelfLoop";
    case ErrorKind::kNonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kNotConnected: return "NotConnected";
    case ErrorKind::kNotUndirected: return "NotUndirected";
    case ErrorKind::kNotTwoComponents: return "NotTwoComponents";
    case ErrorKind::kNoSpanningTree: return "NoSpanningTree";
    case ErrorKind::kNotIrreducible: return "NotIrreducible";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::kNotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorKind::kNotSimple: return "NotSimple";
    case ErrorKind::kGapNotSimple: return "GapNotSimple";
    case ErrorKind::kEigenvalueCollision: return "EigenvalueCollision";
    case ErrorKind::kAmbiguousLocation: return "AmbiguousLocation";
    case ErrorKind::kGapInMaster: return "GapInMaster";
    case ErrorKind::kSingularShift: return "SingularShift";
    case ErrorKind::kNotDiagonalizable: return "NotDiagonalizable";
    case ErrorKind::kBlowUp: return "BlowUp";
    case ErrorKind::kNoBracket: return "NoBracket";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConvergenceFailure:
    case ErrorKind::kEigenvalueCollision:
    case ErrorKind::kSingularShift:
    case ErrorKind::kBlowUp:
    case ErrorKind::kNoBracket:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace netsync
