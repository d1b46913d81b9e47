#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netsync {

// Every failure the library reports. The CLI maps these onto exit codes:
// structural/precondition kinds -> 2, numerical kinds -> 3.
enum class ErrorKind {
  // graph construction and parsing
  kDuplicateEdge,
  kSelfLoop,
  kNonPositiveWeight,
  kIndexOutOfRange,
  kParseError,
  // structure
  kNotConnected,
  kNotUndirected,
  kNotTwoComponents,
  kNoSpanningTree,
  kNotIrreducible,
  kInvalidArgument,
  // spectral
  kConvergenceFailure,
  kNotAnEigenvalue,
  kNotSimple,
  kGapNotSimple,
  kEigenvalueCollision,
  kAmbiguousLocation,
  kGapInMaster,
  kSingularShift,
  kNotDiagonalizable,
  // dynamics
  kBlowUp,
  kNoBracket,
};

std::string_view to_string(ErrorKind kind);

// True for kinds that signal numerical trouble rather than bad input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace netsync
