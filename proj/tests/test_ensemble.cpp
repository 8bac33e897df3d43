#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "uawr/ensemble.hpp"
#include "uawr/error.hpp"
#include "uawr/rng.hpp"

using namespace uawr;
using namespace uawr::testing;

namespace {

TransferMatrix random_matrix(Rng& rng, std::size_t n) {
    TransferMatrix m;
    for (std::size_t i = 0; i < n; ++i) m.model_ids.push_back("m" + std::to_string(i));
    m.rates.resize(n * n);
    m.sample_size.assign(n * n, 50);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) m.rates[s * n + t] = s == t ? 1.0 : rng.uniform();
    }
    return m;
}

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

// Direct evaluation of the mean best-member rate, independent of fitness().
double direct_fitness(const TransferMatrix& m, const std::vector<std::size_t>& members) {
    double sum = 0.0;
    for (std::size_t t = 0; t < m.size(); ++t) {
        double best = 0.0;
        for (std::size_t s : members) best = std::max(best, m.rates[s * m.size() + t]);
        sum += best;
    }
    return sum / static_cast<double>(m.size());
}

double brute_force_optimum(const TransferMatrix& m, std::size_t k) {
    double best = 0.0;
    const std::size_t n = m.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) members.push_back(i);
        }
        best = std::max(best, direct_fitness(m, members));
    }
    return best;
}

Victim fixed(std::string id, std::vector<double> z) {
    return {std::move(id), [z](const TokenSeq&) { return z; }};
}

}  // namespace

TEST_CASE("ensemble logits are member means") {
    const auto t = tokens_of("fine film");
    EnsembleModel one({fixed("a", {0.3, -1.2})});
    CHECK(one.logits(t) == std::vector<double>{0.3, -1.2});
    EnsembleModel two({fixed("a", {1.0, 0.0}), fixed("b", {0.0, 1.0})});
    CHECK(two.logits(t) == std::vector<double>{0.5, 0.5});
    EnsembleModel skew({fixed("a", {2.0, 0.0}), fixed("b", {0.0, 4.0})});
    const auto z = skew.logits(t);
    CHECK(z == std::vector<double>{1.0, 2.0});
    CHECK(argmax(z) == 1);
    // logit averaging and probability averaging disagree here
    EnsembleModel split({fixed("a", {10.0, 0.0}), fixed("b", {0.0, 3.0}), fixed("c", {0.0, 3.0})});
    const auto zl = split.logits(t);
    CHECK(argmax(zl) == 0);
    const auto pa = softmax(std::vector<double>{10.0, 0.0});
    const auto pb = softmax(std::vector<double>{0.0, 3.0});
    CHECK((pa[1] + 2 * pb[1]) / 3 > (pa[0] + 2 * pb[0]) / 3);
    CHECK_THROWS_AS(EnsembleModel({fixed("a", {1.0}), fixed("a", {1.0})}), std::invalid_argument);
}

TEST_CASE("fitness by hand") {
    TransferMatrix m;
    m.model_ids = {"s", "t1", "t2"};
    m.rates = {1.0, 0.3, 0.1, 0.2, 1.0, 0.5, 0.6, 0.4, 1.0};
    m.sample_size.assign(9, 10);
    const std::vector<std::size_t> all = {0, 1, 2};
    CHECK(fitness(std::vector<std::size_t>{0}, m, all) == doctest::Approx(1.4 / 3));

    TransferMatrix q;
    q.model_ids = {"a", "b", "c"};
    q.rates = {0.5, 0.1, 0.6, 0.2, 0.4, 0.3, 0.0, 0.0, 0.0};
    q.sample_size.assign(9, 10);
    CHECK(fitness(std::vector<std::size_t>{0, 1}, q, all) == doctest::Approx(0.5));

    auto holes = m;
    holes.rates[1] = std::nan("");
    CHECK_THROWS_AS(fitness(std::vector<std::size_t>{0}, holes, all), std::invalid_argument);
}

TEST_CASE("exhaustive optimum for m=2 on a 6x6 matrix") {
    Rng rng(7);
    const auto m = random_matrix(rng, 6);
    const auto pool = iota(6);
    SearchConfig cfg;
    cfg.ensemble_size = 2;
    cfg.generations = 50;
    cfg.seed = 3;
    const auto best = genetic_search(m, pool, cfg);
    CHECK(best.fitness == doctest::Approx(brute_force_optimum(m, 2)).epsilon(1e-12));
}

TEST_CASE("genetic search near the optimum on 8 models") {
    Rng rng(11);
    const auto m = random_matrix(rng, 8);
    const double opt = brute_force_optimum(m, 2);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SearchConfig cfg;
        cfg.ensemble_size = 2;
        cfg.seed = seed;
        good += genetic_search(m, iota(8), cfg).fitness >= 0.95 * opt ? 1 : 0;
    }
    CHECK(good >= 9);
}

TEST_CASE("degenerate pool and config errors") {
    Rng rng(5);
    const auto m = random_matrix(rng, 4);
    SearchConfig cfg;
    cfg.ensemble_size = 4;
    const auto c = genetic_search(m, iota(4), cfg);
    CHECK(c.members == iota(4));
    CHECK(c.fitness == fitness(iota(4), m, iota(4)));
    cfg.ensemble_size = 5;
    CHECK_THROWS_AS(genetic_search(m, iota(4), cfg), ConfigError);
    cfg.ensemble_size = 2;
    cfg.elitism = cfg.population;
    CHECK_THROWS_AS(genetic_search(m, iota(4), cfg), ConfigError);
    CHECK(greedy_expert_baseline(m, iota(4), {}, 4).members == iota(4));
}

TEST_CASE("greedy baseline") {
    TransferMatrix m;
    m.model_ids = {"a", "b", "c"};
    m.rates = {1.0, 0.2, 0.3,  //
               0.9, 1.0, 0.8,  //
               0.1, 0.1, 1.0};
    m.sample_size.assign(9, 10);
    const auto one = greedy_expert_baseline(m, iota(3), {}, 1);
    CHECK(one.members == std::vector<std::size_t>{1});

    // gain ties resolve towards a different input form
    const std::vector<ModelSpec> specs = {
        {Architecture::kLinearBow, InputForm::kWord, EmbeddingInit::kRandom, 1, 1},
        {Architecture::kLinearBow, InputForm::kWord, EmbeddingInit::kRandom, 2, 1},
        {Architecture::kConv1d, InputForm::kWord, EmbeddingInit::kRandom, 1, 1},
        {Architecture::kLinearBow, InputForm::kCharNgram, EmbeddingInit::kRandom, 1, 1},
    };
    TransferMatrix tie;
    tie.model_ids = {"w1", "w2", "conv", "char"};
    tie.rates = {1.0, 1.0, 1.0, 0.0,  //
                 0.0, 0.0, 0.0, 1.0,  //
                 0.0, 0.0, 0.0, 1.0,  //
                 0.0, 0.0, 0.0, 1.0};
    tie.sample_size.assign(16, 10);
    const auto two = greedy_expert_baseline(tie, iota(4), specs, 2);
    CHECK(two.members == std::vector<std::size_t>{0, 3});
    const auto plain = greedy_expert_baseline(tie, iota(4), {}, 2);
    CHECK(plain.members == std::vector<std::size_t>{0, 1});
}

TEST_CASE("search invariants over random matrices") {
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.below(6);
        const auto m = random_matrix(rng, n);
        const auto pool = iota(n);
        SearchConfig cfg;
        cfg.ensemble_size = 1 + rng.below(std::min<std::size_t>(n, 4));
        cfg.generations = 10;
        cfg.seed = static_cast<std::uint64_t>(trial);
        SearchTrace trace;
        const auto a = genetic_search(m, pool, cfg, &trace);
        const auto b = genetic_search(m, pool, cfg);
        CHECK(a.members == b.members);
        CHECK(a.fitness == b.fitness);
        CHECK(a.members.size() == cfg.ensemble_size);
        CHECK(std::is_sorted(a.members.begin(), a.members.end()));
        CHECK(std::adjacent_find(a.members.begin(), a.members.end()) == a.members.end());
        CHECK(a.fitness == direct_fitness(m, a.members));
        CHECK(trace.best.size() == cfg.generations + 1);
        for (std::size_t g = 1; g < trace.best.size(); ++g) CHECK(trace.best[g] >= trace.best[g - 1]);
        CHECK(a.fitness == trace.best.back());

        // monotone under supersets and dominated by no single member
        std::vector<std::size_t> members = a.members;
        double single_best = 0.0;
        for (std::size_t s : members) single_best = std::max(single_best, fitness(std::vector<std::size_t>{s}, m, pool));
        CHECK(a.fitness >= single_best);
        for (std::size_t extra = 0; extra < n; ++extra) {
            if (std::find(members.begin(), members.end(), extra) != members.end()) continue;
            auto bigger = members;
            bigger.push_back(extra);
            std::sort(bigger.begin(), bigger.end());
            CHECK(fitness(bigger, m, pool) >= a.fitness);
        }
        CHECK(a.fitness >= 0.0);
        CHECK(a.fitness <= 1.0);
    }
}

TEST_CASE("search log and record") {
    Rng rng(2);
    const auto m = random_matrix(rng, 5);
    SearchConfig cfg;
    cfg.generations = 2;
    SearchTrace trace;
    const auto c = genetic_search(m, iota(5), cfg, &trace);
    const auto csv = trace.to_csv();
    CHECK(csv.rfind("generation,best,mean\n0,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    const auto json = candidate_json(c, m, cfg);
    CHECK(json.find("\"members\"") != std::string::npos);
    CHECK(json.find("\"seed\": 0") != std::string::npos);
}
