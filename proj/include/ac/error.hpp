#pragma once

#include <stdexcept>
#include <string>

namespace ac {

// Stable error identities used across the library and mapped to CLI exit
// codes. The string form (errc_name) is what reports and traces carry.
enum class Errc {
    CyclicModel,
    MissingContextVariable,
    UnknownVariable,
    UnknownEvent,
    TooManyExogenous,
    SearchBudgetExceeded,
    InvalidSetting,
    NoFocalEvent,
    ExternalResolverFailure,
    ServiceUnreachable,
    ParseFailureAfterRetries,
    ValidationFailure,
    UnparseableVerdict,
    IoFailure,
    MalformedDocument,
    EmptyDataset,
    EmptyInput,
    RankDeficientDesign,
    TooFewRows,
    NoOverlap,
    InvalidArgument,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace ac
