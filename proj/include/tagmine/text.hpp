#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/locid.h>

#include "tagmine/errors.hpp"

namespace tagmine {

namespace detail {

inline bool is_ascii(std::string_view s) {
    for (unsigned char c : s)
        if (c >= 0x80) return false;
    return true;
}

inline bool ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

/// Lowercase and NFC-normalize UTF-8 text. ASCII input takes a fast path.
inline std::string fold_text(std::string_view raw) {
    if (detail::is_ascii(raw)) {
        std::string out(raw);
        for (char& c : out)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return out;
    }
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    u.toLower(icu::Locale::getRoot());
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
    icu::UnicodeString normalized = nfc->normalize(u, status);
    if (U_FAILURE(status)) throw ParseError("cannot normalize text");
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

/// True when the string contains any Unicode whitespace code point.
inline bool contains_whitespace(std::string_view s) {
    if (detail::is_ascii(s)) {
        for (unsigned char c : s)
            if (detail::ascii_space(c)) return true;
        return false;
    }
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    for (int32_t i = 0; i < u.length();) {
        UChar32 cp = u.char32At(i);
        if (u_isUWhiteSpace(cp)) return true;
        i += U16_LENGTH(cp);
    }
    return false;
}

/// Term text rule: non-empty, no whitespace, no '#'.
inline bool is_valid_term_text(std::string_view s) {
    return !s.empty() && s.find('#') == std::string_view::npos && !contains_whitespace(s);
}

/// Strip leading '#', lowercase, NFC-normalize. Throws InvalidHashtag when the
/// result is empty or carries whitespace or an inner '#'.
inline std::string normalize_hashtag(std::string_view raw) {
    std::size_t start = 0;
    while (start < raw.size() && raw[start] == '#') ++start;
    std::string out = fold_text(raw.substr(start));
    if (!is_valid_term_text(out))
        throw InvalidHashtag("invalid hashtag: \"" + std::string(raw) + "\"");
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && detail::ascii_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && detail::ascii_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

/// 64-bit FNV-1a, used for content-derived identifiers.
class Fnv1a {
public:
    Fnv1a& update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    // Length-prefix so that ("ab","c") and ("a","bc") differ.
    Fnv1a& field(std::string_view bytes) {
        update(std::to_string(bytes.size()));
        update(":");
        return update(bytes);
    }
    std::uint64_t digest() const { return state_; }
    std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xF];
            v >>= 4;
        }
        return out;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace tagmine
