#pragma once

// Word-substitution attacks against a logit-producing victim: PWWS (greedy,
// saliency-weighted) and a genetic search without a language-model filter.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uawr/corpus.hpp"
#include "uawr/lexicon.hpp"
#include "uawr/model.hpp"

namespace uawr {

struct Substitution {
    std::size_t position = 0;
    std::string original;
    std::string replacement;

    bool operator==(const Substitution&) const = default;
};

struct AdversarialResult {
    std::size_t example_id = 0;
    TokenSeq perturbed;
    /// Ordered by application (PWWS) or by position (GA, rules).
    std::vector<Substitution> substitutions;
    bool success = false;
    std::size_t queries = 0;
    double word_modified_fraction = 0.0;

    std::string to_json() const;
    bool operator==(const AdversarialResult&) const = default;
};

/// Replaces surfaces at the given positions; tags are kept. Throws
/// std::invalid_argument on duplicate or out-of-range positions.
TokenSeq apply_substitutions(const TokenSeq& tokens, const std::vector<Substitution>& subs);

/// |subs| / substitutable token count (0 when nothing is substitutable).
double modified_fraction(const TokenSeq& original, std::size_t substitutions);

AdversarialResult pwws_attack(const LogitFn& victim, const Example& example, const SynonymLexicon& lexicon);

struct GaConfig {
    std::size_t population = 20;
    std::size_t generations = 10;
    std::uint64_t seed = 0;
};

/// `trace`, when given, receives the best population fitness after
/// initialization and after every completed generation.
AdversarialResult ga_attack(const LogitFn& victim, const Example& example, const SynonymLexicon& lexicon,
                            const GaConfig& config, std::vector<double>* trace = nullptr);

enum class AttackKind : std::uint8_t { kPwws, kGa };
std::string_view to_string(AttackKind k);
std::optional<AttackKind> parse_attack_kind(std::string_view s);

struct AttackConfig {
    AttackKind kind = AttackKind::kPwws;
    GaConfig ga;
};

using AttackFn = std::function<AdversarialResult(const LogitFn&, const Example&)>;

/// Binds an engine to a lexicon. GA seeds are derived per example id so
/// results do not depend on evaluation order.
AttackFn make_attack(const AttackConfig& config, const SynonymLexicon& lexicon);

/// Wraps a victim and counts logit evaluations; safe for concurrent use.
class CountingVictim {
public:
    explicit CountingVictim(LogitFn inner) : inner_(std::move(inner)) {}

    std::vector<double> operator()(const TokenSeq& tokens) const {
        ++*calls_;
        return inner_(tokens);
    }
    LogitFn fn() const {
        return [this](const TokenSeq& t) { return (*this)(t); };
    }
    std::size_t calls() const { return *calls_; }
    void reset() { *calls_ = 0; }

private:
    LogitFn inner_;
    std::shared_ptr<std::atomic<std::size_t>> calls_ = std::make_shared<std::atomic<std::size_t>>(0);
};

}  // namespace uawr
