#pragma once

// Error taxonomy shared by all modules. Every failure carries a Kind so the
// CLI can map it to an exit code (user input vs numeric/internal).

#include <stdexcept>
#include <string>

namespace sslab {

enum class ErrorKind { user_input, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

#define SSLAB_DEFINE_ERROR(Name, Kind)                                     \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  }

SSLAB_DEFINE_ERROR(LevelOutOfRange, user_input);
SSLAB_DEFINE_ERROR(ShapeMismatch, user_input);
SSLAB_DEFINE_ERROR(SingularSystem, numeric);
SSLAB_DEFINE_ERROR(BracketFailure, numeric);
SSLAB_DEFINE_ERROR(NonPositiveLambda, user_input);
SSLAB_DEFINE_ERROR(DegenerateDof, numeric);
SSLAB_DEFINE_ERROR(InsufficientGrid, user_input);
SSLAB_DEFINE_ERROR(DegenerateFit, numeric);
SSLAB_DEFINE_ERROR(DomainError, user_input);
SSLAB_DEFINE_ERROR(BudgetTooSmall, user_input);
SSLAB_DEFINE_ERROR(ParseError, user_input);
SSLAB_DEFINE_ERROR(DuplicateCell, user_input);
SSLAB_DEFINE_ERROR(MissingLabels, user_input);
SSLAB_DEFINE_ERROR(BudgetInfeasible, user_input);
SSLAB_DEFINE_ERROR(DegenerateSubset, user_input);
SSLAB_DEFINE_ERROR(ConfigError, user_input);

#undef SSLAB_DEFINE_ERROR

}  // namespace sslab
