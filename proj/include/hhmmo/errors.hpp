#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hhmmo {

enum class ErrorKind {
    DegenerateDenominator,
    NegativeRadicand,
    PartialVanishes,
    FoldSingularity,
    NotOnManifold,
    NoFoldAtV,
    NotFound,
    NoLandingPoint,
    SingularIntegrand,
    NoSignChange,
    StepUnderflow,
    LeftDomain,
    TooShort,
    Unclassifiable,
    ConfigError,
};

std::string_view error_name(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above; the CLI maps
// ConfigError to exit code 2 and everything else to 3.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail);

}  // namespace hhmmo
