#pragma once

#include <stdexcept>
#include <string>

namespace isochron {

/// Base of every error raised by the library. The message names the failing
/// condition; derived types let drivers react to specific failures.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define ISOCHRON_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

// algebra
ISOCHRON_DEFINE_ERROR(DegeneratePairError);
ISOCHRON_DEFINE_ERROR(ZeroDenominatorError);
ISOCHRON_DEFINE_ERROR(ParseError);

// catalog
ISOCHRON_DEFINE_ERROR(UnknownSystemError);
ISOCHRON_DEFINE_ERROR(TemplateMismatchError);

// flow
ISOCHRON_DEFINE_ERROR(PoleEncounterError);
ISOCHRON_DEFINE_ERROR(StepUnderflowError);
ISOCHRON_DEFINE_ERROR(NoReturnError);
ISOCHRON_DEFINE_ERROR(NonTransversalCrossingError);
ISOCHRON_DEFINE_ERROR(BoundaryExitError);
ISOCHRON_DEFINE_ERROR(OpenCurveError);
ISOCHRON_DEFINE_ERROR(GradientDegeneracyError);

// elliptic
ISOCHRON_DEFINE_ERROR(ModulusRangeError);
ISOCHRON_DEFINE_ERROR(NonPositiveEnergyError);

// abelian
ISOCHRON_DEFINE_ERROR(SingularIntegrandError);
ISOCHRON_DEFINE_ERROR(AsymmetricOvalError);
ISOCHRON_DEFINE_ERROR(AnalyticityError);
ISOCHRON_DEFINE_ERROR(EnergyRangeError);

// chebyshev
ISOCHRON_DEFINE_ERROR(DerivativeAccuracyError);

// periodlab
ISOCHRON_DEFINE_ERROR(LostOrbitError);
ISOCHRON_DEFINE_ERROR(IllConditionedLadderError);
ISOCHRON_DEFINE_ERROR(SearchBudgetExhaustedError);

#undef ISOCHRON_DEFINE_ERROR

} // namespace isochron
