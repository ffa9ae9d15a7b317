#include "ac/names.hpp"

#include "ac/error.hpp"

#include <unicode/errorcode.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <cctype>

namespace ac {

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_ascii(std::string_view s) {
    for (unsigned char c : s) {
        if (c >= 0x80) return false;
    }
    return true;
}

} // namespace

std::string normalize_name(std::string_view raw) {
    std::string_view t = trim(raw);
    if (is_ascii(t)) {
        return std::string(t); // ASCII is NFC already
    }
    icu::ErrorCode status;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (status.isFailure()) {
        return std::string(t);
    }
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(t.data(), static_cast<int32_t>(t.size())));
    icu::UnicodeString normalized = nfc->normalize(u, status);
    if (status.isFailure()) {
        return std::string(t);
    }
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

EventName::EventName(std::string_view raw) : text_(normalize_name(raw)) {
    if (text_.empty()) {
        fail(Errc::InvalidArgument, "event name must be non-empty");
    }
}

} // namespace ac
