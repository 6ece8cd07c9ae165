#pragma once

#include <stdexcept>
#include <string>

namespace lgm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LGM_DEFINE_ERROR(Name)        \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

LGM_DEFINE_ERROR(InvalidArgument);
LGM_DEFINE_ERROR(DomainError);
LGM_DEFINE_ERROR(UnboundedRegion);
LGM_DEFINE_ERROR(RegionOutsideGrid);
LGM_DEFINE_ERROR(NonMonotoneRadius);
LGM_DEFINE_ERROR(NonFiniteValue);
LGM_DEFINE_ERROR(WrongBasisKind);
LGM_DEFINE_ERROR(UnknownId);
LGM_DEFINE_ERROR(NegativeTargetCoefficient);
LGM_DEFINE_ERROR(AssumptionViolation);
LGM_DEFINE_ERROR(AliasError);
LGM_DEFINE_ERROR(SingularCovariance);
LGM_DEFINE_ERROR(InsufficientData);
LGM_DEFINE_ERROR(NonConvergence);
LGM_DEFINE_ERROR(InfeasibleBounds);
LGM_DEFINE_ERROR(MalformedFile);
LGM_DEFINE_ERROR(NonUniformGrid);
LGM_DEFINE_ERROR(NonPositiveRadius);

/// An exponential moment that does not exist (kumulant evaluated outside its domain).
class KumulantDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

#undef LGM_DEFINE_ERROR

}  // namespace lgm
