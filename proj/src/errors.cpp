#include "hhmmo/errors.hpp"

namespace hhmmo {

std::string_view error_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::NegativeRadicand: return "NegativeRadicand";
        case ErrorKind::PartialVanishes: return "PartialVanishes";
        case ErrorKind::FoldSingularity: return "FoldSingularity";
        case ErrorKind::NotOnManifold: return "NotOnManifold";
        case ErrorKind::NoFoldAtV: return "NoFoldAtV";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::NoLandingPoint: return "NoLandingPoint";
        case ErrorKind::SingularIntegrand: return "SingularIntegrand";
        case ErrorKind::NoSignChange: return "NoSignChange";
        case ErrorKind::StepUnderflow: return "StepUnderflow";
        case ErrorKind::LeftDomain: return "LeftDomain";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::Unclassifiable: return "Unclassifiable";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(error_name(kind)) + ": " + detail), kind_(kind) {}

void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace hhmmo
