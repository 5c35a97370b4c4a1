#pragma once

#include <stdexcept>
#include <string>

namespace alab {

/// Base class for every error raised by the library. The CLI maps any
/// LabError to a nonzero exit code and prints what().
class LabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ALAB_DEFINE_ERROR(Name)                  \
  class Name : public LabError {                 \
   public:                                       \
    explicit Name(const std::string& what)       \
        : LabError(#Name ": " + what) {}         \
  }

ALAB_DEFINE_ERROR(MomentResidualTooLarge);
ALAB_DEFINE_ERROR(GridMismatch);
ALAB_DEFINE_ERROR(GammaOutOfRange);
ALAB_DEFINE_ERROR(AssemblyBudgetExceeded);
ALAB_DEFINE_ERROR(NullspaceDefect);
ALAB_DEFINE_ERROR(UnsupportedKernel);
ALAB_DEFINE_ERROR(NonpositiveGap);
ALAB_DEFINE_ERROR(IllConditionedGram);
ALAB_DEFINE_ERROR(SolveFailure);
ALAB_DEFINE_ERROR(InadmissibleInitialData);
ALAB_DEFINE_ERROR(UnsupportedN);
ALAB_DEFINE_ERROR(ConfigError);
ALAB_DEFINE_ERROR(FormatError);

#undef ALAB_DEFINE_ERROR

}  // namespace alab
