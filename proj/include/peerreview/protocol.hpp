#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peerreview/backend.hpp"
#include "peerreview/core.hpp"
#include "peerreview/errors.hpp"
#include "peerreview/extraction.hpp"
#include "peerreview/prompts.hpp"
#include "peerreview/rng.hpp"

namespace peerreview {

// The collaboration engine: the three-stage create/review/revise protocol
// with majority voting, plus the baselines (zero-shot, self-correct,
// independent majority, debate) and the two ablations (no confidence
// rating, no peer solutions in the revise context).

enum class ProtocolVariant { peer_review, zero_shot, self_correct, majority, debate };

inline const char* to_string(ProtocolVariant v) {
    switch (v) {
        case ProtocolVariant::peer_review: return "peer_review";
        case ProtocolVariant::zero_shot: return "zero_shot";
        case ProtocolVariant::self_correct: return "self_correct";
        case ProtocolVariant::majority: return "majority";
        case ProtocolVariant::debate: return "debate";
    }
    return "peer_review";
}

inline ProtocolVariant protocol_variant_from_string(const std::string& s) {
    if (s == "peer_review") return ProtocolVariant::peer_review;
    if (s == "zero_shot") return ProtocolVariant::zero_shot;
    if (s == "self_correct") return ProtocolVariant::self_correct;
    if (s == "majority") return ProtocolVariant::majority;
    if (s == "debate") return ProtocolVariant::debate;
    throw config_error("unknown protocol variant: " + s);
}

enum class RoleMode { none, single, diverse };

inline const char* to_string(RoleMode m) {
    switch (m) {
        case RoleMode::none: return "none";
        case RoleMode::single: return "single";
        case RoleMode::diverse: return "diverse";
    }
    return "none";
}

inline RoleMode role_mode_from_string(const std::string& s) {
    if (s == "none") return RoleMode::none;
    if (s == "single") return RoleMode::single;
    if (s == "diverse") return RoleMode::diverse;
    throw config_error("unknown role mode: " + s);
}

struct ProtocolConfig {
    ProtocolVariant variant = ProtocolVariant::peer_review;
    int n_agents = 3;      // reference setting
    int review_rounds = 1; // also the self-correct iteration / debate round count
    bool with_confidence = true;
    bool with_solution_history = true;
    RoleMode role_mode = RoleMode::none;
    std::uint64_t seed = 0;
};

inline void validate(const ProtocolConfig& cfg) {
    if (cfg.n_agents < 1) throw config_error("n_agents must be >= 1");
    if (cfg.review_rounds < 1) throw config_error("review_rounds must be >= 1");
    bool multi = cfg.variant == ProtocolVariant::peer_review ||
                 cfg.variant == ProtocolVariant::debate ||
                 cfg.variant == ProtocolVariant::majority;
    if (multi && cfg.n_agents < 2)
        throw config_error(std::string(to_string(cfg.variant)) + " requires n_agents >= 2");
    if (cfg.variant == ProtocolVariant::self_correct && cfg.n_agents != 1)
        throw config_error("self_correct runs a single agent");
}

// ---------------------------------------------------------------------------
// Majority vote
// ---------------------------------------------------------------------------

// Groups answers by answers_equal-equivalence; unparsed answers never join a
// group. Returns a maximal group's representative; on ties the group whose
// first member has the lowest agent index wins and the tie flag is set. When
// every answer is unparsed, the result is unparsed with tie=false.
inline std::pair<AnswerValue, bool> majority_vote(const std::vector<AnswerValue>& answers) {
    if (answers.empty()) throw structural_error("majority_vote: empty answer list");
    struct Group {
        AnswerValue rep;
        int count = 0;
    };
    std::vector<Group> groups; // in first-occurrence (= lowest index) order
    for (const auto& a : answers) {
        if (a.is_unparsed()) continue;
        bool placed = false;
        for (auto& g : groups) {
            if (answers_equal(g.rep, a)) {
                ++g.count;
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({a, 1});
    }
    if (groups.empty()) return {AnswerValue::unparsed(), false};
    int best = 0;
    for (const auto& g : groups) best = std::max(best, g.count);
    int at_best = 0;
    const Group* winner = nullptr;
    for (const auto& g : groups) {
        if (g.count == best) {
            ++at_best;
            if (winner == nullptr) winner = &g;
        }
    }
    return {winner->rep, at_best >= 2};
}

// ---------------------------------------------------------------------------
// Role assignment
// ---------------------------------------------------------------------------

// none: no system messages. single: every agent is the AI Assistant.
// diverse: uniform draw from the five presets, without replacement while
// n <= 5; beyond that sampling falls back to replacement (the caller should
// surface a warning). Deterministic for a fixed seed.
inline std::vector<AgentSpec> assign_roles(std::vector<AgentSpec> agents, RoleMode mode,
                                           std::uint64_t seed,
                                           bool* sampled_with_replacement = nullptr) {
    if (sampled_with_replacement) *sampled_with_replacement = false;
    const auto& presets = role_presets();
    switch (mode) {
        case RoleMode::none:
            for (auto& a : agents) a.role_prompt.reset();
            break;
        case RoleMode::single:
            for (auto& a : agents) a.role_prompt = presets[0].prompt;
            break;
        case RoleMode::diverse: {
            SplitMix64 rng(seed);
            if (agents.size() <= presets.size()) {
                auto picks = sample_indices(presets.size(), agents.size(), rng);
                for (std::size_t i = 0; i < agents.size(); ++i)
                    agents[i].role_prompt = presets[picks[i]].prompt;
            } else {
                if (sampled_with_replacement) *sampled_with_replacement = true;
                for (auto& a : agents)
                    a.role_prompt = presets[rng.next_below(presets.size())].prompt;
            }
            break;
        }
    }
    return agents;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

// Runs one problem through the configured protocol. Construct per problem:
// the engine owns the per-problem dialogue state. Within a stage the
// per-agent backend calls run concurrently; stage boundaries are barriers,
// and all ordering (reviews, transcripts, vote input) is fixed by agent
// index, so results are independent of completion order.
class CollaborationEngine {
public:
    CollaborationEngine(ProtocolConfig cfg, PromptTemplates templates,
                        std::vector<AgentSpec> agents,
                        std::map<std::string, Backend*> backends)
        : cfg_(std::move(cfg)), templates_(std::move(templates)) {
        validate(cfg_);
        if (agents.size() != static_cast<std::size_t>(cfg_.n_agents))
            throw config_error("agent list does not match n_agents");
        for (std::size_t i = 0; i < agents.size(); ++i) {
            if (agents[i].index != static_cast<int>(i))
                throw config_error("agent indices must be contiguous from 0");
            auto it = backends.find(agents[i].backend_id);
            if (it == backends.end() || it->second == nullptr)
                throw config_error("no backend configured with id '" + agents[i].backend_id + "'");
            states_.push_back(AgentState{agents[i], it->second});
        }
    }

    // Full protocol run. Backend and wire-format failures yield a failed
    // (partial) record rather than an exception; the run over the remaining
    // problems must go on.
    RunRecord run(const Problem& problem) {
        try {
            switch (cfg_.variant) {
                case ProtocolVariant::peer_review: return run_peer_review(problem);
                case ProtocolVariant::zero_shot: return run_zero_shot(problem);
                case ProtocolVariant::self_correct: return run_self_correct(problem);
                case ProtocolVariant::majority: return run_majority(problem);
                case ProtocolVariant::debate: return run_debate(problem);
            }
            throw structural_error("unhandled protocol variant");
        } catch (const backend_error& e) {
            return failed_record(problem, e.what());
        } catch (const protocol_error& e) {
            return failed_record(problem, e.what());
        }
    }

    // --- stages, exposed for targeted tests -------------------------------

    std::vector<Solution> stage_create(const Problem& problem) {
        std::vector<Solution> out(states_.size());
        for_each_agent([&](int i) {
            auto& st = states_[static_cast<std::size_t>(i)];
            if (st.spec.role_prompt && st.transcript.messages.empty())
                st.transcript = transcript_append(st.transcript, Role::system, *st.spec.role_prompt);
            std::string text = exchange(st, render_create(templates_, problem.question, problem.answer_type));
            out[static_cast<std::size_t>(i)] =
                Solution{i, 0, text, extract_answer(text, problem.answer_type)};
        });
        return out;
    }

    // Every ordered pair (i, j), i != j: agent i sees agent j's solution as
    // its own user turn (one at a time, ascending j) and writes review r_ij.
    std::vector<Review> stage_review(const std::vector<Solution>& solutions, int round) {
        if (solutions.size() != states_.size())
            throw structural_error("stage_review: need exactly one solution per agent");
        int n = static_cast<int>(states_.size());
        std::vector<Review> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1));
        for_each_agent([&](int i) {
            auto& st = states_[static_cast<std::size_t>(i)];
            std::size_t span_begin = st.transcript.messages.size();
            std::size_t slot = static_cast<std::size_t>(i) * static_cast<std::size_t>(n - 1);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                std::string text = exchange(
                    st, render_review(templates_, solutions[static_cast<std::size_t>(j)].text,
                                      cfg_.with_confidence));
                Review r{i, j, round, text, std::nullopt};
                if (cfg_.with_confidence) {
                    auto info = extract_confidence_info(text);
                    r.confidence = info.value;
                    if (info.conflicting)
                        st.warnings.push_back("conflicting confidence statements in review " +
                                              std::to_string(i) + "->" + std::to_string(j) +
                                              " round " + std::to_string(round) + "; last wins");
                }
                out[slot++] = std::move(r);
            }
            st.review_spans.emplace_back(span_begin, st.transcript.messages.size());
        });
        return out;
    }

    // Each agent receives the reviews written about it (ascending reviewer
    // index) in a single user turn. When peer solutions are ablated, the
    // stage-2 turns are dropped from the context of this call only; the
    // persisted transcript keeps the full dialogue.
    std::vector<Solution> stage_revise(const Problem& problem, const std::vector<Review>& reviews,
                                       int round) {
        int n = static_cast<int>(states_.size());
        if (reviews.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) ||
            reviews.empty())
            throw structural_error("stage_revise: reviews incomplete (need n*(n-1) entries)");
        std::vector<Solution> out(states_.size());
        for_each_agent([&](int i) {
            auto& st = states_[static_cast<std::size_t>(i)];
            std::vector<std::string> feedbacks;
            for (const auto& r : reviews)
                if (r.reviewee == i) feedbacks.push_back(r.text); // reviews arrive reviewer-ascending
            std::string prompt = render_revise(templates_, feedbacks, problem.question,
                                               problem.answer_type, cfg_.with_solution_history);
            std::string text;
            if (cfg_.with_solution_history) {
                text = exchange(st, prompt);
            } else {
                std::vector<Message> context = without_review_spans(st);
                context.push_back(Message{Role::user, prompt});
                text = call_backend(st, context);
                st.transcript = transcript_append(st.transcript, Role::user, prompt);
                st.transcript = transcript_append(st.transcript, Role::assistant, text);
            }
            out[static_cast<std::size_t>(i)] =
                Solution{i, round, text, extract_answer(text, problem.answer_type)};
        });
        return out;
    }

    const Transcript& transcript(int agent) const {
        return states_[static_cast<std::size_t>(agent)].transcript;
    }
    int backend_calls() const { return calls_.load(); }

    // --- protocol variants -------------------------------------------------

    RunRecord run_peer_review(const Problem& problem) {
        require_variant(ProtocolVariant::peer_review);
        auto initial = stage_create(problem);
        std::vector<Solution> latest = initial;
        for (int r = 1; r <= cfg_.review_rounds; ++r) {
            auto reviews = stage_review(latest, r);
            latest = stage_revise(problem, reviews, r);
            for (auto& st : states_) {
                for (const auto& rv : reviews) {
                    if (rv.reviewer == st.spec.index) st.reviews_written.push_back(rv);
                    if (rv.reviewee == st.spec.index) st.reviews_received.push_back(rv);
                }
            }
            for (std::size_t i = 0; i < states_.size(); ++i) states_[i].revised.push_back(latest[i]);
        }
        return assemble(problem, initial, latest);
    }

    RunRecord run_zero_shot(const Problem& problem) {
        require_variant(ProtocolVariant::zero_shot);
        auto initial = stage_create(problem);
        return assemble(problem, initial, initial);
    }

    // One agent critiques and refines its own answer, one exchange pair per
    // round. The critique turn is kept only in the transcript; it reviews
    // nobody else, so no Review entries are produced.
    RunRecord run_self_correct(const Problem& problem) {
        require_variant(ProtocolVariant::self_correct);
        auto initial = stage_create(problem);
        auto& st = states_[0];
        Solution latest = initial[0];
        for (int r = 1; r <= cfg_.review_rounds; ++r) {
            exchange(st, render_self_correct_review(templates_));
            std::string text = exchange(st, render_self_correct_refine(templates_, problem.answer_type));
            latest = Solution{0, r, text, extract_answer(text, problem.answer_type)};
            st.revised.push_back(latest);
        }
        return assemble(problem, initial, {latest});
    }

    RunRecord run_majority(const Problem& problem) {
        require_variant(ProtocolVariant::majority);
        auto initial = stage_create(problem); // independent chains, no interaction
        return assemble(problem, initial, initial);
    }

    RunRecord run_debate(const Problem& problem) {
        require_variant(ProtocolVariant::debate);
        auto initial = stage_create(problem);
        std::vector<Solution> latest = initial;
        for (int r = 1; r <= cfg_.review_rounds; ++r) {
            std::vector<Solution> next(states_.size());
            for_each_agent([&](int i) {
                auto& st = states_[static_cast<std::size_t>(i)];
                std::vector<std::string> peers;
                for (std::size_t j = 0; j < latest.size(); ++j)
                    if (static_cast<int>(j) != i) peers.push_back(latest[j].text);
                std::string text = exchange(
                    st, render_debate(templates_, peers, problem.question, problem.answer_type));
                next[static_cast<std::size_t>(i)] =
                    Solution{i, r, text, extract_answer(text, problem.answer_type)};
            });
            latest = std::move(next);
            for (std::size_t i = 0; i < states_.size(); ++i) states_[i].revised.push_back(latest[i]);
        }
        return assemble(problem, initial, latest);
    }

private:
    struct AgentState {
        AgentSpec spec;
        Backend* backend = nullptr;
        Transcript transcript;
        std::vector<std::pair<std::size_t, std::size_t>> review_spans; // stage-2 message ranges
        std::vector<Review> reviews_written;
        std::vector<Review> reviews_received;
        std::vector<Solution> revised;
        std::vector<std::string> warnings;
    };

    void require_variant(ProtocolVariant v) const {
        if (cfg_.variant != v)
            throw structural_error("protocol entry point does not match configured variant");
    }

    template <typename F>
    void for_each_agent(F&& f) {
        if (states_.size() == 1) {
            f(0);
            return;
        }
        std::vector<std::future<void>> futures;
        futures.reserve(states_.size());
        for (int i = 0; i < static_cast<int>(states_.size()); ++i)
            futures.push_back(std::async(std::launch::async, f, i));
        for (auto& fut : futures) fut.get(); // propagates the first failure
    }

    std::string call_backend(AgentState& st, const std::vector<Message>& messages) {
        std::string text = st.backend->complete(CompletionRequest{messages, st.spec.index});
        calls_.fetch_add(1);
        chars_.fetch_add(static_cast<long>(text.size()));
        return text;
    }

    // user turn -> backend -> assistant turn
    std::string exchange(AgentState& st, std::string prompt) {
        st.transcript = transcript_append(st.transcript, Role::user, std::move(prompt));
        std::string text = call_backend(st, st.transcript.messages);
        st.transcript = transcript_append(st.transcript, Role::assistant, text);
        return text;
    }

    std::vector<Message> without_review_spans(const AgentState& st) const {
        std::vector<Message> out;
        out.reserve(st.transcript.messages.size());
        for (std::size_t k = 0; k < st.transcript.messages.size(); ++k) {
            bool excluded = false;
            for (const auto& [b, e] : st.review_spans)
                if (k >= b && k < e) {
                    excluded = true;
                    break;
                }
            if (!excluded) out.push_back(st.transcript.messages[k]);
        }
        return out;
    }

    RunRecord assemble(const Problem& problem, const std::vector<Solution>& initial,
                       const std::vector<Solution>& final_solutions) {
        auto [majority, tie] = majority_vote([&] {
            std::vector<AnswerValue> answers;
            for (const auto& s : final_solutions) answers.push_back(s.answer);
            return answers;
        }());
        RunRecord rec = record_finalize(initial, final_solutions, majority, tie, problem.gold);
        rec.problem_id = problem.id;
        rec.dataset = problem.source;
        rec.protocol = to_string(cfg_.variant);
        for (std::size_t i = 0; i < states_.size(); ++i) {
            auto& tr = rec.agents[i];
            auto& st = states_[i];
            tr.backend_id = st.spec.backend_id;
            tr.role_prompt = st.spec.role_prompt;
            tr.reviews_written = st.reviews_written;
            tr.reviews_received = st.reviews_received;
            tr.revised = st.revised;
            tr.transcript = st.transcript;
            for (auto& w : st.warnings) rec.warnings.push_back(w);
        }
        rec.backend_requests = calls_.load();
        rec.response_chars = chars_.load();
        return rec;
    }

    RunRecord failed_record(const Problem& problem, const std::string& error) {
        RunRecord rec;
        rec.problem_id = problem.id;
        rec.dataset = problem.source;
        rec.protocol = to_string(cfg_.variant);
        rec.failed = true;
        rec.error = error;
        rec.gold = problem.gold;
        rec.agents.resize(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i) {
            rec.agents[i].agent = static_cast<int>(i);
            rec.agents[i].backend_id = states_[i].spec.backend_id;
            rec.agents[i].role_prompt = states_[i].spec.role_prompt;
            rec.agents[i].transcript = states_[i].transcript; // partial dialogue kept
            rec.final_answers.push_back(AnswerValue::unparsed());
        }
        rec.backend_requests = calls_.load();
        rec.response_chars = chars_.load();
        return rec;
    }

    ProtocolConfig cfg_;
    PromptTemplates templates_;
    std::vector<AgentState> states_;
    std::atomic<int> calls_{0};
    std::atomic<long> chars_{0};
};

} // namespace peerreview
