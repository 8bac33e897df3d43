#include "uawr/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "json.hpp"
#include "uawr/rng.hpp"

namespace uawr {

namespace {

struct Probe {
    std::vector<double> probs;
    std::size_t predicted = 0;
};

/// Evaluates the victim once and counts the call.
class Oracle {
public:
    Oracle(const LogitFn& victim, std::size_t gold) : victim_(victim), gold_(gold) {}

    Probe eval(const TokenSeq& tokens) {
        ++queries_;
        const auto z = victim_(tokens);
        return {softmax(z), argmax(z)};
    }
    bool fooled(const Probe& p) const { return p.predicted != gold_; }
    double gold_prob(const Probe& p) const { return p.probs[gold_]; }
    double best_other(const Probe& p) const {
        double best = 0.0;
        for (std::size_t z = 0; z < p.probs.size(); ++z) {
            if (z != gold_) best = std::max(best, p.probs[z]);
        }
        return best;
    }
    std::size_t queries() const { return queries_; }

private:
    const LogitFn& victim_;
    std::size_t gold_;
    std::size_t queries_ = 0;
};

AdversarialResult clean_result(const Example& ex, bool fooled, std::size_t queries) {
    AdversarialResult r;
    r.example_id = ex.id;
    r.perturbed = ex.tokens;
    r.success = fooled;
    r.queries = queries;
    return r;
}

std::vector<Substitution> diff(const TokenSeq& original, const TokenSeq& perturbed) {
    std::vector<Substitution> subs;
    for (std::size_t i = 0; i < original.size(); ++i) {
        if (original[i].surface != perturbed[i].surface) {
            subs.push_back({i, original[i].surface, perturbed[i].surface});
        }
    }
    return subs;
}

}  // namespace

TokenSeq apply_substitutions(const TokenSeq& tokens, const std::vector<Substitution>& subs) {
    TokenSeq out = tokens;
    std::vector<char> used(tokens.size(), 0);
    for (const auto& s : subs) {
        if (s.position >= tokens.size()) throw std::invalid_argument("substitution position out of range");
        if (used[s.position]) throw std::invalid_argument("duplicate substitution position");
        used[s.position] = 1;
        out[s.position].surface = s.replacement;
    }
    return out;
}

double modified_fraction(const TokenSeq& original, std::size_t substitutions) {
    const std::size_t n = substitutable_count(original);
    return n == 0 ? 0.0 : static_cast<double>(substitutions) / static_cast<double>(n);
}

std::string AdversarialResult::to_json() const {
    nlohmann::ordered_json j;
    j["id"] = example_id;
    auto& subs = j["substitutions"] = nlohmann::ordered_json::array();
    for (const auto& s : substitutions) {
        subs.push_back({{"position", s.position}, {"original", s.original}, {"replacement", s.replacement}});
    }
    j["success"] = success;
    j["queries"] = queries;
    j["word_modified_fraction"] = word_modified_fraction;
    return j.dump();
}

// ---------------------------------------------------------------------------
// PWWS

AdversarialResult pwws_attack(const LogitFn& victim, const Example& example, const SynonymLexicon& lexicon) {
    Oracle oracle(victim, example.label);
    const Probe clean = oracle.eval(example.tokens);
    if (oracle.fooled(clean)) return clean_result(example, true, oracle.queries());
    const double p0 = oracle.gold_prob(clean);

    struct Slot {
        std::size_t position;
        double saliency;
        double delta;
        const std::string* best;
    };
    std::vector<Slot> slots;
    TokenSeq probe = example.tokens;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const auto& cands = lexicon.candidates_for(example.tokens[i]);
        if (cands.empty()) continue;
        Slot slot{i, 0.0, -std::numeric_limits<double>::infinity(), nullptr};
        probe[i].surface = std::string(kUnkSurface);
        slot.saliency = p0 - oracle.gold_prob(oracle.eval(probe));
        for (const auto& c : cands) {
            probe[i].surface = c;
            const double delta = p0 - oracle.gold_prob(oracle.eval(probe));
            if (delta > slot.delta) {
                slot.delta = delta;
                slot.best = &c;
            }
        }
        probe[i].surface = example.tokens[i].surface;
        slots.push_back(slot);
    }
    if (slots.empty()) return clean_result(example, false, oracle.queries());

    // softmax over saliencies; the shared normalizer keeps ordering intact
    double smax = -std::numeric_limits<double>::infinity();
    for (const auto& s : slots) smax = std::max(smax, s.saliency);
    double norm = 0.0;
    for (const auto& s : slots) norm += std::exp(s.saliency - smax);
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (!(slots[k].delta > 0.0)) continue;  // cannot lower the gold probability
        order.emplace_back(std::exp(slots[k].saliency - smax) / norm * slots[k].delta, k);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    AdversarialResult result = clean_result(example, false, 0);
    for (const auto& [score, k] : order) {
        const Slot& s = slots[k];
        result.perturbed[s.position].surface = *s.best;
        result.substitutions.push_back({s.position, example.tokens[s.position].surface, *s.best});
        if (oracle.fooled(oracle.eval(result.perturbed))) {
            result.success = true;
            break;
        }
    }
    result.queries = oracle.queries();
    result.word_modified_fraction = modified_fraction(example.tokens, result.substitutions.size());
    return result;
}

// ---------------------------------------------------------------------------
// GA

AdversarialResult ga_attack(const LogitFn& victim, const Example& example, const SynonymLexicon& lexicon,
                            const GaConfig& config, std::vector<double>* trace) {
    if (config.population < 2) throw std::invalid_argument("ga_attack: population must be >= 2");
    if (config.generations < 1) throw std::invalid_argument("ga_attack: generations must be >= 1");
    Oracle oracle(victim, example.label);
    const Probe clean = oracle.eval(example.tokens);
    if (oracle.fooled(clean)) return clean_result(example, true, oracle.queries());

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < example.tokens.size(); ++i) {
        if (!lexicon.candidates_for(example.tokens[i]).empty()) eligible.push_back(i);
    }
    if (eligible.empty()) return clean_result(example, false, oracle.queries());

    Rng rng(config.seed);
    auto mutate = [&](TokenSeq& member) {
        const std::size_t pos = eligible[rng.below(eligible.size())];
        const auto& cands = lexicon.candidates_for(example.tokens[pos]);
        member[pos].surface = cands[rng.below(cands.size())];
    };
    auto finish = [&](const TokenSeq& member, bool success) {
        AdversarialResult r = clean_result(example, success, oracle.queries());
        r.perturbed = member;
        r.substitutions = diff(example.tokens, member);
        r.word_modified_fraction = modified_fraction(example.tokens, r.substitutions.size());
        return r;
    };

    std::vector<TokenSeq> pop(config.population, example.tokens);
    std::vector<double> fit(config.population);
    for (std::size_t k = 0; k < pop.size(); ++k) {
        mutate(pop[k]);
        const Probe p = oracle.eval(pop[k]);
        if (oracle.fooled(p)) return finish(pop[k], true);
        fit[k] = oracle.best_other(p);
    }
    auto best_index = [&] { return static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin()); };
    if (trace != nullptr) trace->push_back(fit[best_index()]);

    std::vector<TokenSeq> next(config.population);
    std::vector<double> next_fit(config.population);
    for (std::size_t g = 0; g < config.generations; ++g) {
        const std::size_t elite = best_index();
        next[0] = pop[elite];
        next_fit[0] = fit[elite];
        for (std::size_t k = 1; k < pop.size(); ++k) {
            const TokenSeq& a = pop[rng.roulette(fit)];
            const TokenSeq& b = pop[rng.roulette(fit)];
            TokenSeq child = a;
            for (std::size_t pos : eligible) {
                if (rng.bernoulli(0.5)) child[pos].surface = b[pos].surface;
            }
            mutate(child);
            const Probe p = oracle.eval(child);
            if (oracle.fooled(p)) return finish(child, true);
            next_fit[k] = oracle.best_other(p);
            next[k] = std::move(child);
        }
        std::swap(pop, next);
        std::swap(fit, next_fit);
        if (trace != nullptr) trace->push_back(fit[best_index()]);
    }
    return finish(pop[best_index()], false);
}

// ---------------------------------------------------------------------------

std::string_view to_string(AttackKind k) { return k == AttackKind::kPwws ? "PWWS" : "GA"; }

std::optional<AttackKind> parse_attack_kind(std::string_view s) {
    if (s == "PWWS" || s == "pwws") return AttackKind::kPwws;
    if (s == "GA" || s == "ga") return AttackKind::kGa;
    return std::nullopt;
}

AttackFn make_attack(const AttackConfig& config, const SynonymLexicon& lexicon) {
    if (config.kind == AttackKind::kPwws) {
        return [&lexicon](const LogitFn& victim, const Example& ex) { return pwws_attack(victim, ex, lexicon); };
    }
    const GaConfig ga = config.ga;
    return [&lexicon, ga](const LogitFn& victim, const Example& ex) {
        GaConfig local = ga;
        local.seed = derive_seed(ga.seed, ex.id);
        return ga_attack(victim, ex, lexicon, local);
    };
}

}  // namespace uawr
