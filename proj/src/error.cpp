#include "ac/error.hpp"

namespace ac {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::CyclicModel:              return "cyclic-model";
        case Errc::MissingContextVariable:   return "missing-context-variable";
        case Errc::UnknownVariable:          return "unknown-variable";
        case Errc::UnknownEvent:             return "unknown-event";
        case Errc::TooManyExogenous:         return "too-many-exogenous";
        case Errc::SearchBudgetExceeded:     return "search-budget-exceeded";
        case Errc::InvalidSetting:           return "invalid-setting";
        case Errc::NoFocalEvent:             return "no-focal-event";
        case Errc::ExternalResolverFailure:  return "external-resolver-failure";
        case Errc::ServiceUnreachable:       return "service-unreachable";
        case Errc::ParseFailureAfterRetries: return "parse-failure-after-retries";
        case Errc::ValidationFailure:        return "validation-failure";
        case Errc::UnparseableVerdict:       return "unparseable-verdict";
        case Errc::IoFailure:                return "io-failure";
        case Errc::MalformedDocument:        return "malformed-document";
        case Errc::EmptyDataset:             return "empty-dataset";
        case Errc::EmptyInput:               return "empty-input";
        case Errc::RankDeficientDesign:      return "rank-deficient-design";
        case Errc::TooFewRows:               return "too-few-rows";
        case Errc::NoOverlap:                return "no-overlap";
        case Errc::InvalidArgument:          return "invalid-argument";
    }
    return "unknown-error";
}

} // namespace ac
