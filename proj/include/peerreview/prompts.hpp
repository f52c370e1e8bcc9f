#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "peerreview/core.hpp"
#include "peerreview/errors.hpp"

namespace peerreview {

// Instruction templates for every stage and baseline. The create, review
// (both variants) and revise (both variants) defaults are fixed strings the
// whole pipeline depends on; tests assert them character for character, so
// do not touch them casually. The self-correct and debate defaults are our
// own wording and are documented in the README.
//
// Placeholders: {question}, {answer_format}, {peer_solution}, {feedbacks},
// {peer_count}, {peer_solutions}.
struct PromptTemplates {
    std::string create =
        "Can you solve the following math problem? {question} Explain your reasoning. "
        "Your final answer should be {answer_format}, at the end of your response.";

    std::string review_with_conf =
        "Here is a solution from another agent: {peer_solution} Please examine this "
        "agent's reasoning process step by step and offer feedback on its reasoning. "
        "You can rate your confidence in your feedback on a scale from 1-10, where 10 "
        "indicates the highest level of confidence.";

    // The confidence ablation: identical minus the rating sentence.
    std::string review_no_conf =
        "Here is a solution from another agent: {peer_solution} Please examine this "
        "agent's reasoning process step by step and offer feedback on its reasoning.";

    std::string revise_with_solution =
        "Here are the feedbacks for your solution from the above {peer_count} agents: "
        "{feedbacks} Using other agents' solutions and feedbacks as additional "
        "information, can you provide your answer to the math problem? The original "
        "math problem is {question} Your final answer should be {answer_format}, at "
        "the end of your response.";

    // The solution ablation swaps in the core sentence "Using other agents'
    // feedbacks as additional information, can you provide your answer to
    // the problem?" (the peer solutions are also hidden from the dialogue
    // history at call time).
    std::string revise_no_solution =
        "Here are the feedbacks for your solution from the above {peer_count} agents: "
        "{feedbacks} Using other agents' feedbacks as additional information, can you "
        "provide your answer to the problem? The original math problem is {question} "
        "Your final answer should be {answer_format}, at the end of your response.";

    std::string self_correct_review =
        "Review your previous answer and find problems with your answer.";

    std::string self_correct_refine =
        "Based on the problems you found, improve your answer. Your final answer "
        "should be {answer_format}, at the end of your response.";

    std::string debate_update =
        "These are the solutions to the problem from other agents: {peer_solutions} "
        "Using the solutions from other agents as additional information, can you "
        "provide your answer to the math problem? The original math problem is "
        "{question} Your final answer should be {answer_format}, at the end of your "
        "response.";
};

// The numeric wording is fixed by the pipeline's extraction contract; the
// option and yes/no wordings are ours.
inline std::string answer_format_for(AnswerType t) {
    switch (t) {
        case AnswerType::numeric:
            return "a single numerical number, in the form \\boxed{answer}";
        case AnswerType::option:
            return "a single option letter (A, B, C, D, or E), in the form \\boxed{answer}";
        case AnswerType::yes_no:
            return "either Yes or No, in the form \\boxed{answer}";
    }
    return "a single numerical number, in the form \\boxed{answer}";
}

namespace detail {

inline void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos)) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

inline std::string spelled_count(int n) {
    static const std::array<const char*, 13> words = {
        "zero", "one", "two", "three", "four", "five", "six",
        "seven", "eight", "nine", "ten", "eleven", "twelve"};
    if (n >= 0 && n < static_cast<int>(words.size())) return words[static_cast<std::size_t>(n)];
    return std::to_string(n);
}

} // namespace detail

inline std::string render_create(const PromptTemplates& t, const std::string& question,
                                 AnswerType type) {
    std::string out = t.create;
    detail::replace_all(out, "{question}", question);
    detail::replace_all(out, "{answer_format}", answer_format_for(type));
    return out;
}

inline std::string render_review(const PromptTemplates& t, const std::string& peer_solution,
                                 bool with_confidence) {
    std::string out = with_confidence ? t.review_with_conf : t.review_no_conf;
    detail::replace_all(out, "{peer_solution}", peer_solution);
    return out;
}

// Feedback texts must arrive in ascending reviewer index; they are joined
// as "One agent feedback: <text> One agent feedback: <text>", matching the
// dialogue layout of the reference transcripts.
inline std::string render_revise(const PromptTemplates& t,
                                 const std::vector<std::string>& feedbacks,
                                 const std::string& question, AnswerType type,
                                 bool with_solution_history) {
    if (feedbacks.empty()) throw structural_error("render_revise: no feedbacks");
    std::string joined;
    for (std::size_t i = 0; i < feedbacks.size(); ++i) {
        if (i > 0) joined += ' ';
        joined += "One agent feedback: ";
        joined += feedbacks[i];
    }
    std::string out = with_solution_history ? t.revise_with_solution : t.revise_no_solution;
    detail::replace_all(out, "{peer_count}", detail::spelled_count(static_cast<int>(feedbacks.size())));
    detail::replace_all(out, "{feedbacks}", joined);
    detail::replace_all(out, "{question}", question);
    detail::replace_all(out, "{answer_format}", answer_format_for(type));
    return out;
}

inline std::string render_self_correct_review(const PromptTemplates& t) {
    return t.self_correct_review;
}

inline std::string render_self_correct_refine(const PromptTemplates& t, AnswerType type) {
    std::string out = t.self_correct_refine;
    detail::replace_all(out, "{answer_format}", answer_format_for(type));
    return out;
}

inline std::string render_debate(const PromptTemplates& t,
                                 const std::vector<std::string>& peer_solutions,
                                 const std::string& question, AnswerType type) {
    if (peer_solutions.empty()) throw structural_error("render_debate: no peer solutions");
    std::string joined;
    for (std::size_t i = 0; i < peer_solutions.size(); ++i) {
        if (i > 0) joined += ' ';
        joined += "One agent solution: ";
        joined += peer_solutions[i];
    }
    std::string out = t.debate_update;
    detail::replace_all(out, "{peer_solutions}", joined);
    detail::replace_all(out, "{question}", question);
    detail::replace_all(out, "{answer_format}", answer_format_for(type));
    return out;
}

// Identifies the template set in run manifests, so a replay can detect
// edited prompts. FNV-1a over all fields with a separator byte.
inline std::string template_hash(const PromptTemplates& t) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ULL;
    };
    mix(t.create);
    mix(t.review_with_conf);
    mix(t.review_no_conf);
    mix(t.revise_with_solution);
    mix(t.revise_no_solution);
    mix(t.self_correct_review);
    mix(t.self_correct_refine);
    mix(t.debate_update);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Role presets
// ---------------------------------------------------------------------------

struct RolePreset {
    std::string name;
    std::string prompt;
};

// The five role prompts used for diverse-role runs; "single" mode gives
// every agent the AI Assistant preset.
inline const std::array<RolePreset, 5>& role_presets() {
    static const std::array<RolePreset, 5> presets = {{
        {"AI Assistant",
         "You are an advanced AI capable of performing complex calculations, logical "
         "reasoning, and providing efficient solutions to mathematical problems."},
        {"Math Teacher",
         "You are an experienced math teacher with a deep understanding of mathematical "
         "concepts, methods, and pedagogy. You can offer insights into problem-solving "
         "strategies and educational approaches to mathematics."},
        {"Mathematical Scientist",
         "You are a scientist who specializes in advanced mathematical theories and "
         "research. You can contribute deep theoretical knowledge and expertise in "
         "cutting-edge mathematical areas, such as topology, abstract algebra, or "
         "number theory."},
        {"Engineer",
         "You are a professional engineer with practical experience in applying "
         "mathematical concepts to solve real-world problems. You can offer a practical "
         "viewpoint on how mathematics is used in designing, analyzing, and improving "
         "systems and structures."},
        {"Computer Scientist",
         "You are an expert in computer science, well-versed in algorithms, "
         "computational theory, and programming. You can assist in solving problems "
         "that involve algorithmic thinking, computational complexity, or numerical "
         "methods."},
    }};
    return presets;
}

} // namespace peerreview
