#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "peerreview/core.hpp"
#include "peerreview/errors.hpp"

namespace peerreview {

// Deterministic parsing of final answers from model text and of verbalized
// confidence from review text. Everything here is a pure function of the
// given text; identical input yields identical output on every platform.

// ---------------------------------------------------------------------------
// Numeric normalization
// ---------------------------------------------------------------------------

// Parses a decorated numeric string: optional sign, optional '$', thousands
// commas, decimal point, optional '%', trailing sentence punctuation.
// Percentages are kept as the literal number (no /100 rescaling). Anything
// left over after stripping (fractions like "155/3", units glued to digits)
// is a parse error; callers fall back to their next pattern.
inline double normalize_numeric(const std::string& raw) {
    std::size_t b = raw.find_first_not_of(" \t\r\n");
    std::size_t e = raw.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) throw parse_error("empty numeric string");
    std::string s = raw.substr(b, e - b + 1);

    auto is_trailing_junk = [](char c) {
        return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == '%';
    };
    while (!s.empty() && is_trailing_junk(s.back())) s.pop_back();

    std::string cleaned;
    cleaned.reserve(s.size());
    bool sign_seen = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if ((c == '+' || c == '-') && cleaned.empty() && !sign_seen) {
            sign_seen = true;
            cleaned.push_back(c);
        } else if (c == '$') {
            if (!cleaned.empty() && cleaned.back() != '+' && cleaned.back() != '-')
                throw parse_error("misplaced currency symbol in: " + raw);
        } else if (c == ',') {
            // thousands separator, only valid between digits
            bool prev_digit = !cleaned.empty() && std::isdigit(static_cast<unsigned char>(cleaned.back()));
            bool next_digit = i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]));
            if (!prev_digit || !next_digit) throw parse_error("misplaced comma in: " + raw);
        } else {
            cleaned.push_back(c);
        }
    }
    if (cleaned.empty()) throw parse_error("no digits in: " + raw);

    const char* begin = cleaned.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + cleaned.size())
        throw parse_error("not a plain number: " + raw);
    if (!std::isfinite(v)) throw parse_error("non-finite number: " + raw);
    return v;
}

namespace detail {

// Standalone numeric token: not glued to letters or another number. No
// lookbehind in std::regex, so the left boundary is a captured prefix class.
inline const std::regex& number_token_re() {
    static const std::regex re(
        R"((?:^|[^A-Za-z0-9_.])([-+]?\$?(?:[0-9][0-9,]*[0-9]|[0-9])(?:\.[0-9]+)?%?)(?![A-Za-z0-9]))");
    return re;
}

// Last token in [first, last) that normalizes to a number.
inline std::optional<double> last_number(std::string::const_iterator first,
                                         std::string::const_iterator last) {
    std::optional<double> result;
    for (std::sregex_iterator it(first, last, number_token_re()), end; it != end; ++it) {
        try {
            result = normalize_numeric((*it)[1].str());
        } catch (const parse_error&) {
            // keep previous candidate
        }
    }
    return result;
}

// Content of the last "boxed{...}" occurrence, with balanced braces.
inline std::optional<std::string> last_boxed(const std::string& text) {
    const std::string marker = "boxed{";
    std::size_t pos = text.rfind(marker);
    if (pos == std::string::npos) return std::nullopt;
    std::size_t i = pos + marker.size();
    int depth = 1;
    std::string content;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '{') ++depth;
        if (c == '}' && --depth == 0) return content;
        content.push_back(c);
    }
    return std::nullopt; // unterminated
}

// End of the sentence-ish clause starting at `from`: stops at '!', '?',
// newline, or a '.' that is not a decimal point.
inline std::size_t clause_end(const std::string& text, std::size_t from) {
    for (std::size_t i = from; i < text.size(); ++i) {
        char c = text[i];
        if (c == '!' || c == '?' || c == '\n') return i;
        if (c == '.') {
            bool decimal = i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]));
            if (!decimal) return i;
        }
    }
    return text.size();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Answer extraction
// ---------------------------------------------------------------------------

// Pulls the structured answer out of a full model response. Strategies per
// answer type are fixed and tried in order; within a strategy the LAST
// occurrence wins, because chain-of-thought text states intermediate values
// before the final one and the prompt asks for the answer "at the end of
// your response".
//
//   numeric: last boxed{...}; else last "answer is"/"Answer:" clause;
//            else last standalone number anywhere.
//   option:  last standalone letter A-E, optionally parenthesized.
//   yes_no:  last standalone yes/no token, case-insensitive.
//
// Returns AnswerValue::unparsed() when nothing matches; extraction never
// throws on ordinary text.
inline AnswerValue extract_answer(const std::string& text, AnswerType answer_type) {
    if (text.empty()) return AnswerValue::unparsed();

    switch (answer_type) {
        case AnswerType::numeric: {
            if (auto boxed = detail::last_boxed(text)) {
                try {
                    return AnswerValue::number(normalize_numeric(*boxed));
                } catch (const parse_error&) {
                    // boxed content not a plain number (e.g. "155/3"); fall through
                }
            }
            static const std::regex label_re(R"(answer\s+is|answer\s*:)", std::regex::icase);
            std::optional<std::size_t> label_end;
            for (std::sregex_iterator it(text.begin(), text.end(), label_re), end; it != end; ++it)
                label_end = static_cast<std::size_t>(it->position() + it->length());
            if (label_end) {
                std::size_t stop = detail::clause_end(text, *label_end);
                auto v = detail::last_number(text.begin() + static_cast<std::ptrdiff_t>(*label_end),
                                             text.begin() + static_cast<std::ptrdiff_t>(stop));
                if (v) return AnswerValue::number(*v);
            }
            if (auto v = detail::last_number(text.begin(), text.end()))
                return AnswerValue::number(*v);
            return AnswerValue::unparsed();
        }
        case AnswerType::option: {
            static const std::regex option_re(
                R"(\(\s*([A-Ea-e])\s*\)|(?:^|[^A-Za-z0-9_])([A-E])(?![A-Za-z0-9]))");
            std::optional<char> letter;
            for (std::sregex_iterator it(text.begin(), text.end(), option_re), end; it != end; ++it) {
                const auto& m = *it;
                char c = m[1].matched ? m[1].str()[0] : m[2].str()[0];
                letter = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            }
            return letter ? AnswerValue::option(*letter) : AnswerValue::unparsed();
        }
        case AnswerType::yes_no: {
            static const std::regex yn_re(R"((?:^|[^A-Za-z])(yes|no)(?![A-Za-z]))",
                                          std::regex::icase);
            std::optional<bool> yes;
            for (std::sregex_iterator it(text.begin(), text.end(), yn_re), end; it != end; ++it) {
                std::string tok = (*it)[1].str();
                yes = tok.size() == 3;
            }
            return yes ? AnswerValue::yes_no(*yes) : AnswerValue::unparsed();
        }
    }
    return AnswerValue::unparsed();
}

// ---------------------------------------------------------------------------
// Confidence extraction
// ---------------------------------------------------------------------------

struct ConfidenceExtraction {
    std::optional<int> value;
    bool conflicting = false; // multiple mentions with different values; last won
};

// Finds the verbalized 1-10 confidence in a review. Pattern classes are
// tried in the listed order; within the winning class the last occurrence
// wins (reviewers sometimes restate confidence in a closing line). Gaps
// never cross a sentence boundary, so an echo of the instruction text
// ("...on a scale from 1-10...") does not match.
inline ConfidenceExtraction extract_confidence_info(const std::string& text) {
    static const std::vector<std::regex> patterns = {
        std::regex(R"(confidence[^.?!\n]*?\bas\s+an?\s+(10|[1-9])(?![0-9]))", std::regex::icase),
        std::regex(R"(confidence[^.?!\n]*?\b(10|[1-9])\s*/\s*10(?![0-9]))", std::regex::icase),
        std::regex(R"(rate[^.?!\n]*?\b(10|[1-9])\s+out\s+of\s+10(?![0-9]))", std::regex::icase),
        std::regex(R"(confidence\s+in\s+feedback\s*:\s*(10|[1-9])\s*/\s*10)", std::regex::icase),
        std::regex(R"(confidence\s*:\s*(10|[1-9])(?![0-9]))", std::regex::icase),
    };
    for (const auto& re : patterns) {
        ConfidenceExtraction out;
        for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
            int v = std::stoi((*it)[1].str());
            if (out.value && *out.value != v) out.conflicting = true;
            out.value = v;
        }
        if (out.value) return out;
    }
    return {};
}

inline std::optional<int> extract_confidence(const std::string& text) {
    return extract_confidence_info(text).value;
}

// Maps the 1-10 verbal scale onto [0.1, 1.0], matching how the paper's
// distribution plots label confidence in percent.
inline double confidence_to_probability(int c) {
    if (c < 1 || c > 10) throw domain_error("confidence must lie in [1, 10]");
    return static_cast<double>(c) / 10.0;
}

} // namespace peerreview
