#pragma once

#include <stdexcept>
#include <string>

namespace symgen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SYMGEN_DEFINE_ERROR(Name)      \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

SYMGEN_DEFINE_ERROR(MalformedSequence);
SYMGEN_DEFINE_ERROR(PathOutOfRange);
SYMGEN_DEFINE_ERROR(InvalidConfig);
SYMGEN_DEFINE_ERROR(InternalInexactDivision);
SYMGEN_DEFINE_ERROR(DomainError);
SYMGEN_DEFINE_ERROR(TooLarge);
SYMGEN_DEFINE_ERROR(ConfigMismatch);
SYMGEN_DEFINE_ERROR(UnsupportedOperator);
SYMGEN_DEFINE_ERROR(ProbeFailed);
SYMGEN_DEFINE_ERROR(NoFactorRemains);
SYMGEN_DEFINE_ERROR(NotInvertiblePath);
SYMGEN_DEFINE_ERROR(MultipleOccurrences);
SYMGEN_DEFINE_ERROR(OracleUnavailable);
SYMGEN_DEFINE_ERROR(FileMalformed);
SYMGEN_DEFINE_ERROR(RetriesExhausted);

#undef SYMGEN_DEFINE_ERROR

}  // namespace symgen
