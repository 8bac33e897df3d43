#include "uawr/rules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "uawr/error.hpp"
#include "uawr/parallel.hpp"

namespace uawr {

namespace {

using RuleKey = std::tuple<std::size_t, std::string, std::string>;

bool rule_order(const ReplacementRule& a, const ReplacementRule& b) {
    if (a.label != b.label) return a.label < b.label;
    if (a.salience != b.salience) return a.salience > b.salience;
    if (a.original != b.original) return a.original < b.original;
    return a.replacement < b.replacement;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// RuleSet

RuleSet::RuleSet(std::vector<ReplacementRule> rules) : rules_(std::move(rules)) {
    std::sort(rules_.begin(), rules_.end(), rule_order);
    std::set<RuleKey> seen;
    for (const auto& r : rules_) {
        if (r.original == r.replacement) throw std::invalid_argument("identity rule for " + r.original);
        if (!seen.emplace(r.label, r.original, r.replacement).second) {
            throw std::invalid_argument("duplicate rule " + r.original + " -> " + r.replacement);
        }
    }
    build_index();
}

void RuleSet::build_index() {
    index_.clear();
    for (const auto& r : rules_) index_[{r.label, r.original}].push_back(&r);
    for (auto& [key, list] : index_) {
        std::stable_sort(list.begin(), list.end(), [](const ReplacementRule* a, const ReplacementRule* b) {
            if (a->salience != b->salience) return a->salience > b->salience;
            return a->replacement < b->replacement;
        });
    }
}

const std::vector<const ReplacementRule*>& RuleSet::matching(std::size_t label, const std::string& original) const {
    static const std::vector<const ReplacementRule*> kNone;
    const auto it = index_.find({label, original});
    return it == index_.end() ? kNone : it->second;
}

RuleSet RuleSet::with_min_support(std::size_t min_support) const {
    std::vector<ReplacementRule> kept;
    for (const auto& r : rules_) {
        if (r.support >= min_support) kept.push_back(r);
    }
    return RuleSet(std::move(kept));
}

std::string RuleSet::to_tsv() const {
    std::string out;
    for (const auto& r : rules_) {
        out += std::to_string(r.label) + '\t' + r.original + '\t' + r.replacement + '\t' + fixed(r.salience, 9) + '\t' +
               std::to_string(r.support) + '\n';
    }
    return out;
}

RuleSet RuleSet::from_tsv(const std::string& text) {
    std::vector<ReplacementRule> rules;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (f.size() != 5) throw DataError("rules line " + std::to_string(n) + ": expected 5 fields");
        try {
            rules.push_back({std::stoul(f[0]), f[1], f[2], std::stod(f[3]), std::stoul(f[4])});
        } catch (const std::logic_error&) {
            throw DataError("rules line " + std::to_string(n) + ": bad number");
        }
    }
    return RuleSet(std::move(rules));
}

// ---------------------------------------------------------------------------
// mining

RuleSet mine_uawr(const LogitFn& ensemble, std::span<const Example> train, const SynonymLexicon& lexicon,
                  const MiningConfig& config) {
    struct Event {
        std::size_t position;
        const std::string* replacement;
        double contribution;
    };
    std::vector<std::vector<Event>> per_instance(train.size());
    parallel_for(train.size(), config.workers, [&](std::size_t k) {
        const Example& ex = train[k];
        const auto base = ensemble(ex.tokens);
        TokenSeq probe = ex.tokens;
        for (std::size_t i = 0; i < probe.size(); ++i) {
            for (const auto& cand : lexicon.candidates_for(ex.tokens[i])) {
                probe[i].surface = cand;
                const auto out = ensemble(probe);
                double h = 0.0;
                for (std::size_t z = 0; z < base.size(); ++z) h += z == ex.label ? base[z] - out[z] : out[z] - base[z];
                per_instance[k].push_back({i, &cand, h});
            }
            probe[i].surface = ex.tokens[i].surface;
        }
    });

    // contributions are summed in sorted order so the result does not depend
    // on instance order or on how work was split
    std::map<RuleKey, std::vector<double>> acc;
    for (std::size_t k = 0; k < train.size(); ++k) {
        for (const auto& e : per_instance[k]) {
            acc[{train[k].label, train[k].tokens[e.position].surface, *e.replacement}].push_back(e.contribution);
        }
    }
    std::vector<ReplacementRule> rules;
    for (auto& [key, values] : acc) {
        if (values.size() < config.min_support) continue;
        std::sort(values.begin(), values.end());
        double sum = 0.0;
        for (double v : values) sum += v;
        rules.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), sum / static_cast<double>(values.size()),
                         values.size()});
    }
    return RuleSet(std::move(rules));
}

// ---------------------------------------------------------------------------
// PMI

PmiTable PmiTable::build(std::span<const Example> train, std::size_t label_count) {
    if (train.empty()) throw std::invalid_argument("pmi_table: empty training set");
    PmiTable t;
    t.instances_ = train.size();
    std::vector<std::size_t> per_label(label_count, 0);
    for (const auto& ex : train) {
        if (ex.label >= label_count) throw std::invalid_argument("pmi_table: label out of range");
        ++per_label[ex.label];
        std::set<std::string> words;
        for (const auto& tok : ex.tokens) words.insert(tok.surface);
        for (const auto& w : words) {
            auto& c = t.counts_[w];
            if (c.empty()) c.assign(label_count, 0);
            ++c[ex.label];
        }
    }
    const double n = static_cast<double>(train.size());
    for (std::size_t c : per_label) t.p_z_.push_back(static_cast<double>(c) / n);
    return t;
}

double PmiTable::p_w(const std::string& w) const {
    const auto it = counts_.find(w);
    if (it == counts_.end()) return 0.0;
    std::size_t total = 0;
    for (std::size_t c : it->second) total += c;
    return static_cast<double>(total) / static_cast<double>(instances_);
}

double PmiTable::p_wz(const std::string& w, std::size_t z) const {
    const auto it = counts_.find(w);
    if (it == counts_.end()) return 0.0;
    return static_cast<double>(it->second[z]) / static_cast<double>(instances_);
}

double PmiTable::pmi(const std::string& w, std::size_t z) const {
    const double pw = p_w(w);
    if (pw == 0.0 || p_z_[z] == 0.0) return 0.0;
    return p_wz(w, z) / (pw * p_z_[z]);
}

std::vector<std::string> PmiTable::words() const {
    std::vector<std::string> out;
    for (const auto& [w, _] : counts_) out.push_back(w);
    return out;
}

std::string PmiTable::to_tsv() const {
    std::string out;
    for (const auto& [w, _] : counts_) {
        for (std::size_t z = 0; z < label_count(); ++z) out += w + '\t' + std::to_string(z) + '\t' + fixed(pmi(w, z), 6) + '\n';
    }
    return out;
}

double pmi_salience(const PmiTable& table, std::size_t z, const std::string& w, const std::string& w_hat) {
    double h = table.pmi(w, z) - table.pmi(w_hat, z);
    for (std::size_t other = 0; other < table.label_count(); ++other) {
        if (other != z) h += table.pmi(w_hat, other) - table.pmi(w, other);
    }
    return h;
}

RuleSet pmi_rules(const PmiTable& table, std::span<const Example> train, const SynonymLexicon& lexicon,
                  std::size_t min_support) {
    std::map<RuleKey, std::size_t> support;
    for (const auto& ex : train) {
        for (const auto& tok : ex.tokens) {
            for (const auto& cand : lexicon.candidates_for(tok)) ++support[{ex.label, tok.surface, cand}];
        }
    }
    std::vector<ReplacementRule> rules;
    for (const auto& [key, count] : support) {
        if (count < min_support) continue;
        const auto& [z, w, w_hat] = key;
        rules.push_back({z, w, w_hat, pmi_salience(table, z, w, w_hat), count});
    }
    return RuleSet(std::move(rules));
}

// ---------------------------------------------------------------------------
// application and evaluation

AdversarialResult rule_attack(const Example& example, const RuleSet& rules, double rho) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rule_attack: rho must lie in [0, 1]");
    AdversarialResult r;
    r.example_id = example.id;
    r.perturbed = example.tokens;
    const std::size_t n = substitutable_count(example.tokens);
    const auto cap = static_cast<std::size_t>(std::floor(rho * static_cast<double>(n) + 1e-9));

    // each position's best rule never changes while it stays unmodified, so
    // the greedy loop reduces to one ordering of per-position best rules
    struct Pick {
        std::size_t position;
        const ReplacementRule* rule;
    };
    std::vector<Pick> picks;
    for (std::size_t i = 0; i < example.tokens.size(); ++i) {
        const auto& m = rules.matching(example.label, example.tokens[i].surface);
        if (!m.empty() && m.front()->salience > 0.0) picks.push_back({i, m.front()});
    }
    std::stable_sort(picks.begin(), picks.end(), [](const Pick& a, const Pick& b) {
        if (a.rule->salience != b.rule->salience) return a.rule->salience > b.rule->salience;
        if (a.position != b.position) return a.position < b.position;
        return a.rule->replacement < b.rule->replacement;
    });
    for (const auto& p : picks) {
        if (r.substitutions.size() >= cap) break;
        r.perturbed[p.position].surface = p.rule->replacement;
        r.substitutions.push_back({p.position, p.rule->original, p.rule->replacement});
    }
    r.word_modified_fraction = modified_fraction(example.tokens, r.substitutions.size());
    return r;
}

const GroupRuleScore* RuleEvaluation::group(const std::string& name) const {
    for (const auto& g : groups) {
        if (g.group == name) return &g;
    }
    return nullptr;
}

std::string RuleEvaluation::to_csv() const {
    std::string out = "rho,scope,name,evaluated,succ_pct,word_pct\n";
    for (const auto& g : groups) {
        out += fixed(rho, 2) + ",group," + g.group + "," + std::to_string(g.victims) + "," +
               fixed(100 * g.success_rate, 2) + "," + fixed(100 * g.word_fraction, 2) + "\n";
    }
    for (const auto& v : victims) {
        out += fixed(rho, 2) + ",victim," + v.victim_id + "," + std::to_string(v.evaluated) + "," +
               fixed(100 * v.success_rate, 2) + "," + fixed(100 * v.word_fraction, 2) + "\n";
    }
    return out;
}

RuleEvaluation evaluate_rules(const RuleSet& rules, std::span<const Victim> victims, std::span<const InputForm> forms,
                              std::span<const Example> test, double rho, std::size_t workers) {
    if (forms.size() != victims.size()) throw std::invalid_argument("evaluate_rules: forms/victims mismatch");
    RuleEvaluation ev;
    ev.rho = rho;
    std::vector<AdversarialResult> attacked(test.size());
    for (std::size_t k = 0; k < test.size(); ++k) attacked[k] = rule_attack(test[k], rules, rho);

    ev.victims.resize(victims.size());
    parallel_for(victims.size(), workers, [&](std::size_t v) {
        VictimRuleScore& s = ev.victims[v];
        s.victim_id = victims[v].id;
        s.form = forms[v];
        std::size_t flipped = 0;
        double words = 0.0;
        for (std::size_t k = 0; k < test.size(); ++k) {
            if (argmax(victims[v].fn(test[k].tokens)) != test[k].label) continue;
            ++s.evaluated;
            words += attacked[k].word_modified_fraction;
            if (!attacked[k].substitutions.empty() && argmax(victims[v].fn(attacked[k].perturbed)) != test[k].label) {
                ++flipped;
            }
        }
        if (s.evaluated > 0) {
            s.success_rate = static_cast<double>(flipped) / static_cast<double>(s.evaluated);
            s.word_fraction = words / static_cast<double>(s.evaluated);
        }
    });

    auto add_group = [&](const std::string& name, auto keep) {
        GroupRuleScore g{name, 0, 0.0, 0.0};
        for (const auto& s : ev.victims) {
            if (!keep(s)) continue;
            ++g.victims;
            g.success_rate += s.success_rate;
            g.word_fraction += s.word_fraction;
        }
        if (g.victims == 0) return;
        g.success_rate /= static_cast<double>(g.victims);
        g.word_fraction /= static_cast<double>(g.victims);
        ev.groups.push_back(g);
    };
    add_group("ALL", [](const VictimRuleScore&) { return true; });
    add_group("WORD", [](const VictimRuleScore& s) { return s.form == InputForm::kWord; });
    add_group("CHAR_NGRAM", [](const VictimRuleScore& s) { return s.form == InputForm::kCharNgram; });
    return ev;
}

RuleEvaluation evaluate_rules(const RuleSet& rules, std::span<const Classifier> victims,
                              std::span<const Example> test, double rho, std::size_t workers) {
    std::vector<InputForm> forms;
    for (const auto& m : victims) forms.push_back(m.spec().input_form);
    return evaluate_rules(rules, victims_of(victims), forms, test, rho, workers);
}

}  // namespace uawr
