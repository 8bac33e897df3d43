#include "uawr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "uawr/error.hpp"
#include "uawr/rng.hpp"

namespace uawr {

EnsembleModel::EnsembleModel(std::vector<Victim> members) : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("ensemble needs at least one member");
    for (std::size_t i = 0; i < members_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (members_[i].id == members_[j].id) throw std::invalid_argument("duplicate ensemble member " + members_[i].id);
        }
    }
}

std::vector<double> ensemble_logits(std::span<const Victim> members, const TokenSeq& tokens) {
    std::vector<double> sum = members[0].fn(tokens);
    for (std::size_t k = 1; k < members.size(); ++k) {
        const auto z = members[k].fn(tokens);
        if (z.size() != sum.size()) throw std::invalid_argument("ensemble members disagree on label count");
        for (std::size_t i = 0; i < z.size(); ++i) sum[i] += z[i];
    }
    for (double& v : sum) v /= static_cast<double>(members.size());
    return sum;
}

std::vector<double> EnsembleModel::logits(const TokenSeq& tokens) const { return ensemble_logits(members_, tokens); }

LogitFn EnsembleModel::as_logit_fn() const {
    return [members = members_](const TokenSeq& t) { return ensemble_logits(members, t); };
}

Victim EnsembleModel::as_victim() const { return {id(), as_logit_fn()}; }

std::string EnsembleModel::id() const {
    std::string out = "ensemble(";
    for (std::size_t k = 0; k < members_.size(); ++k) out += (k ? "+" : "") + members_[k].id;
    return out + ")";
}

std::vector<std::string> EnsembleCandidate::member_ids(const TransferMatrix& matrix) const {
    std::vector<std::string> out;
    for (std::size_t m : members) out.push_back(matrix.model_ids[m]);
    return out;
}

double fitness(std::span<const std::size_t> members, const TransferMatrix& matrix,
               std::span<const std::size_t> targets, std::span<const std::size_t> excluded) {
    if (members.empty()) throw std::invalid_argument("fitness: empty candidate");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t : targets) {
        if (std::find(excluded.begin(), excluded.end(), t) != excluded.end()) continue;
        double best = -1.0;
        for (std::size_t s : members) {
            const double r = matrix.at(s, t);
            if (std::isnan(r)) {
                throw std::invalid_argument("fitness: missing rate " + matrix.model_ids[s] + " -> " +
                                            matrix.model_ids[t]);
            }
            best = std::max(best, r);
        }
        sum += best;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("fitness: no targets");
    return sum / static_cast<double>(n);
}

void SearchConfig::validate(std::size_t pool_size) const {
    if (population < 2) throw ConfigError("search: population must be >= 2");
    if (ensemble_size < 1) throw ConfigError("search: ensemble size must be >= 1");
    if (ensemble_size > pool_size) {
        throw ConfigError("search: ensemble size " + std::to_string(ensemble_size) + " exceeds pool of " +
                          std::to_string(pool_size));
    }
    if (elitism >= population) throw ConfigError("search: elitism must be below population");
    if (mutation_probability < 0.0 || mutation_probability > 1.0) throw ConfigError("search: bad mutation probability");
    if (exclude_members && ensemble_size == pool_size) throw ConfigError("search: no held-out targets remain");
}

std::string SearchTrace::to_csv() const {
    std::string out = "generation,best,mean\n";
    char buf[96];
    for (std::size_t g = 0; g < best.size(); ++g) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", g, best[g], mean[g]);
        out += buf;
    }
    return out;
}

namespace {

void check_pool(const TransferMatrix& matrix, std::span<const std::size_t> pool) {
    if (pool.empty()) throw ConfigError("search: empty pool");
    for (std::size_t i : pool) {
        if (i >= matrix.size()) throw std::invalid_argument("search: pool index out of range");
        if (matrix.row_missing(i)) throw ConfigError("search: pool model without adversaries: " + matrix.model_ids[i]);
    }
}

}  // namespace

EnsembleCandidate genetic_search(const TransferMatrix& matrix, std::span<const std::size_t> pool,
                                 const SearchConfig& config, SearchTrace* trace) {
    config.validate(pool.size());
    check_pool(matrix, pool);
    const std::size_t m = config.ensemble_size;
    Rng rng(config.seed);

    std::map<std::vector<std::size_t>, double> cache;
    auto score = [&](const std::vector<std::size_t>& members) {
        auto it = cache.find(members);
        if (it != cache.end()) return it->second;
        const double f = config.exclude_members ? fitness(members, matrix, pool, members) : fitness(members, matrix, pool);
        cache.emplace(members, f);
        return f;
    };
    auto random_member_set = [&] {
        std::vector<std::size_t> out;
        for (std::size_t k : rng.sample_indices(pool.size(), m)) out.push_back(pool[k]);
        std::sort(out.begin(), out.end());
        return out;
    };

    std::vector<std::vector<std::size_t>> pop(config.population);
    for (auto& c : pop) c = random_member_set();
    std::vector<double> fit(pop.size());
    EnsembleCandidate best{{}, -1.0};

    auto evaluate = [&] {
        double total = 0.0;
        for (std::size_t k = 0; k < pop.size(); ++k) {
            fit[k] = score(pop[k]);
            total += fit[k];
            if (fit[k] > best.fitness) best = {pop[k], fit[k]};
        }
        if (trace != nullptr) {
            trace->best.push_back(best.fitness);
            trace->mean.push_back(total / static_cast<double>(pop.size()));
        }
    };
    evaluate();

    for (std::size_t g = 0; g < config.generations; ++g) {
        std::vector<std::size_t> order(pop.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

        std::vector<std::vector<std::size_t>> next;
        for (std::size_t e = 0; e < config.elitism; ++e) next.push_back(pop[order[e]]);
        while (next.size() < pop.size()) {
            const auto& a = pop[rng.roulette(fit)];
            const auto& b = pop[rng.roulette(fit)];
            std::vector<std::size_t> merged;
            std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
            for (int c = 0; c < 2 && next.size() < pop.size(); ++c) {
                std::vector<std::size_t> child;
                for (std::size_t k : rng.sample_indices(merged.size(), m)) child.push_back(merged[k]);
                if (rng.bernoulli(config.mutation_probability) && m < pool.size()) {
                    std::vector<std::size_t> outside;
                    for (std::size_t i : pool) {
                        if (std::find(child.begin(), child.end(), i) == child.end()) outside.push_back(i);
                    }
                    child[rng.below(child.size())] = outside[rng.below(outside.size())];
                }
                std::sort(child.begin(), child.end());
                next.push_back(std::move(child));
            }
        }
        pop = std::move(next);
        evaluate();
    }
    return best;
}

EnsembleCandidate greedy_expert_baseline(const TransferMatrix& matrix, std::span<const std::size_t> pool,
                                         std::span<const ModelSpec> specs, std::size_t m, bool exclude_members) {
    check_pool(matrix, pool);
    if (m < 1 || m > pool.size()) throw ConfigError("greedy baseline: bad ensemble size");
    if (!specs.empty() && specs.size() != matrix.size()) throw std::invalid_argument("greedy baseline: specs mismatch");
    auto score = [&](const std::vector<std::size_t>& members) {
        return exclude_members ? fitness(members, matrix, pool, members) : fitness(members, matrix, pool);
    };
    // the first pick is the best row mean over the pool
    std::vector<std::size_t> chosen;
    {
        std::size_t best = pool[0];
        double best_mean = -1.0;
        for (std::size_t s : pool) {
            const double f = fitness(std::vector<std::size_t>{s}, matrix, pool);
            if (f > best_mean + 1e-9) {
                best_mean = f;
                best = s;
            }
        }
        chosen.push_back(best);
    }
    auto diversity = [&](std::size_t cand) {
        if (specs.empty()) return 0;
        bool form = true, arch = true, emb = true;
        for (std::size_t c : chosen) {
            form = form && specs[cand].input_form != specs[c].input_form;
            arch = arch && specs[cand].architecture != specs[c].architecture;
            emb = emb && specs[cand].embedding_init != specs[c].embedding_init;
        }
        return (form ? 4 : 0) + (arch ? 2 : 0) + (emb ? 1 : 0);
    };
    while (chosen.size() < m) {
        double best_gain = -std::numeric_limits<double>::infinity();
        int best_div = -1;
        std::size_t best = pool.size();
        std::vector<std::size_t> trial = chosen;
        trial.push_back(0);
        for (std::size_t s : pool) {
            if (std::find(chosen.begin(), chosen.end(), s) != chosen.end()) continue;
            trial.back() = s;
            auto sorted = trial;
            std::sort(sorted.begin(), sorted.end());
            const double gain = score(sorted);
            const int div = diversity(s);
            if (best == pool.size() || gain > best_gain + 1e-9 ||
                (std::abs(gain - best_gain) <= 1e-9 && div > best_div)) {
                best_gain = gain;
                best_div = div;
                best = s;
            }
        }
        chosen.push_back(best);
    }
    std::sort(chosen.begin(), chosen.end());
    return {chosen, score(chosen)};
}

std::string candidate_json(const EnsembleCandidate& c, const TransferMatrix& matrix, const SearchConfig& config) {
    nlohmann::ordered_json j;
    j["members"] = c.member_ids(matrix);
    j["fitness"] = c.fitness;
    j["config"] = {{"population", config.population},
                   {"generations", config.generations},
                   {"ensemble_size", config.ensemble_size},
                   {"mutation_probability", config.mutation_probability},
                   {"elitism", config.elitism},
                   {"exclude_members", config.exclude_members}};
    j["seed"] = config.seed;
    return j.dump(2);
}

}  // namespace uawr
