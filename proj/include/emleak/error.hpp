#pragma once

#include <stdexcept>
#include <string>

namespace emleak {

// Base for every domain failure raised by the library. The CLI maps any
// Error to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define EMLEAK_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(what) {}    \
    }

EMLEAK_DEFINE_ERROR(InvalidArgument);
EMLEAK_DEFINE_ERROR(UnknownMode);
EMLEAK_DEFINE_ERROR(IoError);
EMLEAK_DEFINE_ERROR(FormatError);
EMLEAK_DEFINE_ERROR(MissingMeta);
EMLEAK_DEFINE_ERROR(DimensionMismatch);
EMLEAK_DEFINE_ERROR(EmptyFrame);
EMLEAK_DEFINE_ERROR(EmptySequence);
EMLEAK_DEFINE_ERROR(NumericalOverflow);
EMLEAK_DEFINE_ERROR(TooShort);
EMLEAK_DEFINE_ERROR(NoVisibleHarmonics);

#undef EMLEAK_DEFINE_ERROR

}  // namespace emleak
