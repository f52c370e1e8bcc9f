#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peerreview/errors.hpp"

namespace peerreview {

// ---------------------------------------------------------------------------
// Answers
// ---------------------------------------------------------------------------

enum class AnswerType { numeric, option, yes_no };

inline const char* to_string(AnswerType t) {
    switch (t) {
        case AnswerType::numeric: return "numeric";
        case AnswerType::option: return "option";
        case AnswerType::yes_no: return "yes_no";
    }
    return "numeric";
}

inline AnswerType answer_type_from_string(const std::string& s) {
    if (s == "numeric") return AnswerType::numeric;
    if (s == "option") return AnswerType::option;
    if (s == "yes_no") return AnswerType::yes_no;
    throw config_error("unknown answer type: " + s);
}

// Shortest decimal representation that parses back to exactly the same
// double. Written by hand because gcc 11 lacks std::format.
inline std::string format_number(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// The extracted answer of one model response. `unparsed` is a first-class
// value, not an error: a batch run over hundreds of problems must keep
// going when one completion cannot be parsed, and the vote simply ignores
// that agent. An unparsed value compares equal to nothing, including
// another unparsed value.
class AnswerValue {
public:
    enum class Kind { unparsed, number, option, yes_no };

    AnswerValue() = default; // unparsed

    static AnswerValue unparsed() { return AnswerValue(); }

    static AnswerValue number(double v) {
        if (!std::isfinite(v)) throw domain_error("answer number must be finite");
        AnswerValue a;
        a.kind_ = Kind::number;
        a.number_ = v;
        return a;
    }

    // Options restricted to A-E: the benchmark option sets never exceed five.
    static AnswerValue option(char letter) {
        if (letter < 'A' || letter > 'E')
            throw domain_error(std::string("option letter out of range A-E: ") + letter);
        AnswerValue a;
        a.kind_ = Kind::option;
        a.option_ = letter;
        return a;
    }

    static AnswerValue yes_no(bool yes) {
        AnswerValue a;
        a.kind_ = Kind::yes_no;
        a.yes_ = yes;
        return a;
    }

    Kind kind() const { return kind_; }
    bool is_unparsed() const { return kind_ == Kind::unparsed; }

    double number_value() const {
        require(Kind::number);
        return number_;
    }
    char option_value() const {
        require(Kind::option);
        return option_;
    }
    bool yes_value() const {
        require(Kind::yes_no);
        return yes_;
    }

    std::string to_string() const {
        switch (kind_) {
            case Kind::unparsed: return "<unparsed>";
            case Kind::number: return format_number(number_);
            case Kind::option: return std::string(1, option_);
            case Kind::yes_no: return yes_ ? "Yes" : "No";
        }
        return "<unparsed>";
    }

private:
    void require(Kind k) const {
        if (kind_ != k) throw structural_error("answer value accessed as wrong variant");
    }

    Kind kind_ = Kind::unparsed;
    double number_ = 0.0;
    char option_ = 'A';
    bool yes_ = false;
};

// The one equality used for voting, scoring and diversity metrics.
// Numbers compare with a relative tolerance so "30" and "30.0" style
// formatting differences never count as disagreement; the benchmarks
// themselves use small integers, so the tolerance carries no semantic
// weight. Different variants are unequal (not an error), and unparsed is
// equal to nothing.
inline bool answers_equal(const AnswerValue& a, const AnswerValue& b,
                          double rel_tol = 1e-6) {
    using Kind = AnswerValue::Kind;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Kind::unparsed: return false;
        case Kind::number: {
            double x = a.number_value(), y = b.number_value();
            double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
            return std::fabs(x - y) <= rel_tol * scale;
        }
        case Kind::option: return a.option_value() == b.option_value();
        case Kind::yes_no: return a.yes_value() == b.yes_value();
    }
    return false;
}

// ---------------------------------------------------------------------------
// Problems and agents
// ---------------------------------------------------------------------------

struct Problem {
    std::string id;
    std::string question;
    AnswerValue gold; // never unparsed for a loaded problem
    AnswerType answer_type = AnswerType::numeric;
    std::string source; // dataset name
};

struct AgentSpec {
    int index = 0;
    std::string backend_id;
    std::optional<std::string> role_prompt; // system message, when roles are enabled
};

struct Solution {
    int agent = 0;
    int round = 0; // 0 = initial submission
    std::string text;
    AnswerValue answer; // extract_answer(text), reproducible from text
};

struct Review {
    int reviewer = 0;
    int reviewee = 0;
    int round = 0;
    std::string text;
    std::optional<int> confidence; // verbalized 1-10 rating, absent when not stated
};

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

enum class Role { system, user, assistant };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

inline Role role_from_string(const std::string& s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw parse_error("unknown role: " + s);
}

struct Message {
    Role role = Role::user;
    std::string content;
};

// Ordered per-agent dialogue history. Append-only: stages grow it, nothing
// rewrites it. Roles must alternate user/assistant after an optional
// leading system message.
struct Transcript {
    int agent = 0;
    std::vector<Message> messages;
};

inline Transcript transcript_append(const Transcript& t, Role role, std::string content) {
    if (role == Role::system) {
        if (!t.messages.empty())
            throw structural_error("system message only allowed at transcript start");
    } else {
        Role expected = Role::user;
        if (!t.messages.empty() && t.messages.back().role != Role::system)
            expected = t.messages.back().role == Role::user ? Role::assistant : Role::user;
        if (role != expected)
            throw structural_error("transcript roles must alternate user/assistant");
    }
    Transcript out = t;
    out.messages.push_back(Message{role, std::move(content)});
    return out;
}

// Flat rendering used for fingerprints and diffing; a pure function of the
// append sequence.
inline std::string transcript_render(const Transcript& t) {
    std::string out;
    for (const auto& m : t.messages) {
        out += to_string(m.role);
        out += ": ";
        out += m.content;
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

// Everything one agent did on one problem, including its full dialogue so a
// run can be byte-compared on replay.
struct AgentTrace {
    int agent = 0;
    std::string backend_id;
    std::optional<std::string> role_prompt;
    Solution initial;
    std::vector<Review> reviews_written;
    std::vector<Review> reviews_received;
    std::vector<Solution> revised; // one entry per review round
    Transcript transcript;
};

// The complete per-problem outcome. Gold is repeated here so reports can be
// computed from record files alone.
struct RunRecord {
    std::string problem_id;
    std::string dataset;
    std::string protocol;
    std::vector<AgentTrace> agents;
    std::vector<AnswerValue> final_answers;
    AnswerValue majority;
    bool tie = false;
    bool correct = false;
    AnswerValue gold;
    bool failed = false;      // backend error mid-problem; partial trace kept
    std::string error;        // description when failed
    int backend_requests = 0; // simple usage counter
    long response_chars = 0;
};

inline RunRecord record_finalize(const std::vector<Solution>& initial,
                                 const std::vector<Solution>& revised,
                                 const AnswerValue& majority, bool tie,
                                 const AnswerValue& gold) {
    if (initial.empty() || initial.size() != revised.size())
        throw structural_error("record_finalize: initial/revised solution lists must be nonempty and equal length");
    RunRecord rec;
    rec.agents.resize(initial.size());
    for (std::size_t i = 0; i < initial.size(); ++i) {
        rec.agents[i].agent = static_cast<int>(i);
        rec.agents[i].initial = initial[i];
        if (revised[i].round > 0) rec.agents[i].revised.push_back(revised[i]);
        rec.final_answers.push_back(revised[i].answer);
    }
    rec.majority = majority;
    rec.tie = tie;
    rec.gold = gold;
    rec.correct = answers_equal(majority, gold);
    return rec;
}

} // namespace peerreview
