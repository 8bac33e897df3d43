#pragma once

// Universal word-replacement rules: mined from ensemble logit changes over a
// training corpus, or scored from word/label PMI; applied without any access
// to the model under attack.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uawr/attack.hpp"
#include "uawr/corpus.hpp"
#include "uawr/lexicon.hpp"
#include "uawr/model.hpp"
#include "uawr/transfer.hpp"

namespace uawr {

struct ReplacementRule {
    std::size_t label = 0;
    std::string original;
    std::string replacement;
    double salience = 0.0;
    std::size_t support = 0;

    bool operator==(const ReplacementRule&) const = default;
};

class RuleSet {
public:
    RuleSet() = default;
    /// Throws std::invalid_argument on duplicate keys or identity rules.
    explicit RuleSet(std::vector<ReplacementRule> rules);
    RuleSet(const RuleSet& o) : rules_(o.rules_) { build_index(); }
    RuleSet& operator=(const RuleSet& o) {
        rules_ = o.rules_;
        build_index();
        return *this;
    }
    RuleSet(RuleSet&&) noexcept = default;
    RuleSet& operator=(RuleSet&&) noexcept = default;

    /// Ordered by label, then descending salience, then original and
    /// replacement.
    const std::vector<ReplacementRule>& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }
    bool empty() const { return rules_.empty(); }

    /// Rules for (label, original) by descending salience, ties by
    /// replacement. Empty when none.
    const std::vector<const ReplacementRule*>& matching(std::size_t label, const std::string& original) const;

    RuleSet with_min_support(std::size_t min_support) const;

    /// `label<TAB>original<TAB>replacement<TAB>salience<TAB>support` lines.
    std::string to_tsv() const;
    static RuleSet from_tsv(const std::string& text);

private:
    void build_index();

    std::vector<ReplacementRule> rules_;
    std::map<std::pair<std::size_t, std::string>, std::vector<const ReplacementRule*>> index_;
};

struct MiningConfig {
    std::size_t min_support = 1;
    std::size_t workers = 1;
};

/// Accumulates, for every training position and lexicon candidate, the
/// gold-logit drop plus the other-logit gains, keyed by (gold, word,
/// candidate) and averaged over events.
RuleSet mine_uawr(const LogitFn& ensemble, std::span<const Example> train, const SynonymLexicon& lexicon,
                  const MiningConfig& config = {});

/// Document-level word/label statistics with the ratio form
/// p(w,z) / (p(w) p(z)).
class PmiTable {
public:
    static PmiTable build(std::span<const Example> train, std::size_t label_count);

    std::size_t label_count() const { return p_z_.size(); }
    std::size_t instances() const { return instances_; }
    double p_z(std::size_t z) const { return p_z_[z]; }
    double p_w(const std::string& w) const;
    double p_wz(const std::string& w, std::size_t z) const;
    /// 0 for words never seen.
    double pmi(const std::string& w, std::size_t z) const;

    /// Sorted words.
    std::vector<std::string> words() const;
    /// `word<TAB>label<TAB>pmi` lines, sorted by word then label.
    std::string to_tsv() const;

private:
    std::size_t instances_ = 0;
    std::vector<double> p_z_;
    std::map<std::string, std::vector<std::size_t>> counts_;  // per-label document counts
};

double pmi_salience(const PmiTable& table, std::size_t z, const std::string& w, const std::string& w_hat);

/// PMI-scored rules over every (gold label, word, candidate) event in the
/// training set; support counts events.
RuleSet pmi_rules(const PmiTable& table, std::span<const Example> train, const SynonymLexicon& lexicon,
                  std::size_t min_support = 1);

/// Greedy model-free attack. Only positive-salience rules are applied; the
/// substitution cap is floor(rho * substitutable count). `success` is left
/// false and `queries` is 0.
AdversarialResult rule_attack(const Example& example, const RuleSet& rules, double rho);

struct VictimRuleScore {
    std::string victim_id;
    InputForm form = InputForm::kWord;
    std::size_t evaluated = 0;  // clean-correct examples
    double success_rate = 0.0;
    double word_fraction = 0.0;
};

struct GroupRuleScore {
    std::string group;  // ALL, WORD, CHAR_NGRAM
    std::size_t victims = 0;
    double success_rate = 0.0;
    double word_fraction = 0.0;
};

struct RuleEvaluation {
    double rho = 0.0;
    std::vector<VictimRuleScore> victims;
    std::vector<GroupRuleScore> groups;

    const GroupRuleScore* group(const std::string& name) const;
    /// Rates as percentages with 2 decimals.
    std::string to_csv() const;
};

/// `forms` aligns with `victims`.
RuleEvaluation evaluate_rules(const RuleSet& rules, std::span<const Victim> victims, std::span<const InputForm> forms,
                              std::span<const Example> test, double rho, std::size_t workers = 1);
RuleEvaluation evaluate_rules(const RuleSet& rules, std::span<const Classifier> victims,
                              std::span<const Example> test, double rho, std::size_t workers = 1);

}  // namespace uawr
