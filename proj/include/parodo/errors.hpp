#pragma once

#include <stdexcept>
#include <string>

namespace parodo {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define PARODO_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                               \
    public:                                                                    \
        using Error::Error;                                                    \
    }

PARODO_DEFINE_ERROR(SymbolRangeError);
PARODO_DEFINE_ERROR(LengthMismatch);
PARODO_DEFINE_ERROR(BufferOverflow);
PARODO_DEFINE_ERROR(BudgetExceeded);
PARODO_DEFINE_ERROR(NotRelated);
PARODO_DEFINE_ERROR(TransportDomainError);
PARODO_DEFINE_ERROR(HypothesisViolated);
PARODO_DEFINE_ERROR(NoFeasibleScale);
PARODO_DEFINE_ERROR(WindowMassTooSmall);
PARODO_DEFINE_ERROR(CaseSplitFailed);
PARODO_DEFINE_ERROR(NotFoundError);
PARODO_DEFINE_ERROR(ConfigError);
PARODO_DEFINE_ERROR(InvalidPathError);

#undef PARODO_DEFINE_ERROR

} // namespace parodo
