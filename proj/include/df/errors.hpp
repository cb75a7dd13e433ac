#pragma once

#include <stdexcept>
#include <string>

namespace df {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define DF_DEFINE_ERROR(Name)                                                  \
  struct Name : Error {                                                        \
    using Error::Error;                                                        \
  }

DF_DEFINE_ERROR(DimensionMismatch);
DF_DEFINE_ERROR(DomainError);
DF_DEFINE_ERROR(PreconditionViolated);
DF_DEFINE_ERROR(NotAdmissible);
DF_DEFINE_ERROR(SubcriticalityViolated);
DF_DEFINE_ERROR(QuadratureFailure);
DF_DEFINE_ERROR(SchemaMismatch);
DF_DEFINE_ERROR(ChecksumMismatch);
DF_DEFINE_ERROR(IoError);
DF_DEFINE_ERROR(EigensolverFailure);
DF_DEFINE_ERROR(ZeroEigenvalue);
DF_DEFINE_ERROR(KappaTooLarge);
DF_DEFINE_ERROR(StepTooLarge);
DF_DEFINE_ERROR(LineSearchStalled);

#undef DF_DEFINE_ERROR

} // namespace df
