#pragma once

#include <stdexcept>
#include <string>

namespace gmrfdiff {

// Root of every error raised by the library. Each subclass names one failure
// condition so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GMRFDIFF_DEFINE_ERROR(Name)       \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

GMRFDIFF_DEFINE_ERROR(InvalidEdge);
GMRFDIFF_DEFINE_ERROR(SubgraphViolation);
GMRFDIFF_DEFINE_ERROR(InvalidParameter);
GMRFDIFF_DEFINE_ERROR(SingularPair);
GMRFDIFF_DEFINE_ERROR(NotPositiveDefinite);
GMRFDIFF_DEFINE_ERROR(DimensionMismatch);
GMRFDIFF_DEFINE_ERROR(InvalidSupport);
GMRFDIFF_DEFINE_ERROR(InvalidSpec);
GMRFDIFF_DEFINE_ERROR(Diverged);
GMRFDIFF_DEFINE_ERROR(InconsistentModel);
GMRFDIFF_DEFINE_ERROR(TooLarge);
GMRFDIFF_DEFINE_ERROR(Unstable);
GMRFDIFF_DEFINE_ERROR(NoConvergence);
GMRFDIFF_DEFINE_ERROR(ConfigError);
GMRFDIFF_DEFINE_ERROR(UnknownPreset);

#undef GMRFDIFF_DEFINE_ERROR

}  // namespace gmrfdiff
