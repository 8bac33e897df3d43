#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "uawr/error.hpp"
#include "uawr/rng.hpp"
#include "uawr/transfer.hpp"

using namespace uawr;
using namespace uawr::testing;

namespace {

TransferMatrix matrix_of(std::vector<std::string> ids, std::vector<double> rates) {
    TransferMatrix m;
    m.model_ids = std::move(ids);
    m.rates = std::move(rates);
    m.sample_size.assign(m.rates.size(), 10);
    return m;
}

TransferMatrix random_matrix(Rng& rng, std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("m" + std::to_string(i));
    std::vector<double> rates(n * n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) rates[s * n + t] = s == t ? 1.0 : std::round(rng.uniform() * 1e6) / 1e6;
    }
    return matrix_of(ids, rates);
}

SynonymLexicon fixture_lexicon() {
    SynonymLexicon lex;
    lex.add("great", Pos::kAdj, {"fine", "excellent"});
    lex.add("fine", Pos::kAdj, {"great", "dull"});
    lex.add("dull", Pos::kAdj, {"awful", "fine"});
    lex.add("awful", Pos::kAdj, {"dull"});
    lex.add("fun", Pos::kNoun, {"mess"});
    lex.add("mess", Pos::kNoun, {"fun"});
    lex.add("film", Pos::kNoun, {"plot"});
    return lex;
}

}  // namespace

TEST_CASE("transfer_rate") {
    const std::vector<AdversarialSample> set = {{0, tokens_of("great"), 0}, {1, tokens_of("great"), 0},
                                                {2, tokens_of("great"), 0}, {3, tokens_of("dull"), 1}};
    auto always1 = [](const TokenSeq&) { return std::vector<double>{0.0, 1.0}; };
    CHECK(transfer_rate(set, always1) == 0.75);
    auto wrong = [](const TokenSeq& t) {
        return t[0].surface == "great" ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
    };
    CHECK(transfer_rate(set, wrong) == 1.0);
    CHECK_THROWS_AS(transfer_rate({}, wrong), std::invalid_argument);
}

TEST_CASE("identical models transfer perfectly") {
    const auto data = toy_dataset(2, 5, 20);
    Dataset big = data;
    big.test = data.train;
    const auto m = hand_linear_model({}, {{"great", {1.0, 0.0}}, {"fine", {0.5, 0.0}}, {"dull", {0.0, 1.0}},
                                          {"awful", {0.0, 1.5}}, {"mess", {0.0, 0.4}}});
    const auto lex = fixture_lexicon();
    const auto attack = make_attack({}, lex);
    const std::vector<Victim> pair = {{"a", m.as_logit_fn()}, {"b", m.as_logit_fn()}};
    TransferBudget budget{30, 20, 1};
    std::vector<SourceAttack> attacks;
    const auto mat = build_transfer_matrix(pair, attack, big, budget, 2, &attacks);
    REQUIRE_FALSE(attacks[0].transfer_set.empty());
    CHECK(mat.at(0, 1) == 1.0);
    CHECK(mat.at(1, 0) == 1.0);
    CHECK(mat.at(0, 0) == 1.0);
    CHECK(attacks[0].transfer_set.size() <= budget.transferred);
    CHECK(mat.samples(0, 1) == attacks[0].transfer_set.size());

    const std::vector<Victim> one = {{"a", m.as_logit_fn()}};
    const auto single = build_transfer_matrix(one, attack, big, budget);
    CHECK(single.size() == 1);
    CHECK(single.at(0, 0) == 1.0);

    TransferBudget bad{5, 10, 0};
    CHECK_THROWS_AS(attack_source(one[0], attack, big, bad), ConfigError);
}

TEST_CASE("sources without adversaries give missing rows") {
    const auto data = toy_dataset(2, 2, 10);
    const auto lex = fixture_lexicon();
    // a constant victim is correct on class-0 examples and can never be flipped
    auto constant = [](const TokenSeq&) { return std::vector<double>{1.0, 0.0}; };
    Dataset only0 = data;
    only0.test.clear();
    for (const auto& ex : data.train) {
        if (ex.label == 0) only0.test.push_back(ex);
    }
    const std::vector<Victim> models = {{"const", constant}, {"const2", constant}};
    const auto m = build_transfer_matrix(models, make_attack({}, lex), only0, {10, 5, 0});
    CHECK(m.row_missing(0));
    CHECK(m.row_missing(1));
    CHECK(m.to_csv() == "model,const,const2\nconst,NA,NA\nconst2,NA,NA\n");
}

TEST_CASE("twin base rate is 1 for twins that coincide") {
    const auto data = toy_dataset(2, 5, 20);
    Dataset big = data;
    big.test = data.train;
    auto victim = hand_linear_model({}, {{"great", {1.0, 0.0}}, {"fine", {0.5, 0.0}}, {"dull", {0.0, 1.0}},
                                         {"awful", {0.0, 1.5}}, {"mess", {0.0, 0.4}}});
    const Victim a{"a", victim.as_logit_fn()};
    const auto rate = twin_transfer_rate(a, a, make_attack({}, fixture_lexicon()), big, {40, 20, 0});
    REQUIRE(rate.has_value());
    CHECK(*rate == 1.0);
}

TEST_CASE("factor_significance") {
    const std::vector<ModelSpec> specs = {
        {Architecture::kLinearBow, InputForm::kWord, EmbeddingInit::kRandom, 1, 1},
        {Architecture::kLinearBow, InputForm::kCharNgram, EmbeddingInit::kRandom, 1, 1},
        {Architecture::kConv1d, InputForm::kWord, EmbeddingInit::kRandom, 1, 1},
    };
    // r(s,t): rows are sources
    const auto m = matrix_of({specs[0].id(), specs[1].id(), specs[2].id()},
                             {1.0, 0.3, 0.5,  //
                              0.2, 1.0, 0.9,  //
                              0.6, 0.1, 1.0});
    std::map<std::string, double> base = {{specs[0].id(), 0.5}, {specs[1].id(), 0.4}, {specs[2].id(), 0.7}};
    const auto form = factor_significance(m, specs, base, FactorAxis::kInputForm);
    // pairs: (s1,t0): |0.2-0.5|, (s0,t1): |0.3-0.4|
    CHECK(form.pairs == 2);
    CHECK(form.score == doctest::Approx(0.2));
    const auto arch = factor_significance(m, specs, base, FactorAxis::kArchitecture);
    CHECK(arch.score == doctest::Approx((0.1 + 0.2) / 2));
    CHECK_THROWS_AS(factor_significance(m, specs, base, FactorAxis::kEmbedding), ConfigError);

    std::map<std::string, double> exact = {{specs[0].id(), 0.2}, {specs[1].id(), 0.3}, {specs[2].id(), 0.6}};
    CHECK(factor_significance(m, specs, exact, FactorAxis::kInputForm).score == 0.0);

    // missing source rows are excluded
    auto holes = m;
    for (std::size_t t = 0; t < 3; ++t) holes.rates[1 * 3 + t] = std::nan("");
    const auto partial = factor_significance(holes, specs, base, FactorAxis::kInputForm);
    CHECK(partial.pairs == 1);
    CHECK(partial.score == doctest::Approx(0.1));
}

TEST_CASE("class_level_matrix") {
    const auto m = matrix_of({"s1", "s2", "t1"}, {1.0, 0.9, 0.4,  //
                                                  0.7, 1.0, 0.2,  //
                                                  0.1, 0.3, 1.0});
    const auto g = class_level_matrix(m, {{"s1", "A"}, {"s2", "A"}, {"t1", "B"}});
    REQUIRE(g.classes == std::vector<std::string>{"A", "B"});
    CHECK(g.at(0, 1) == doctest::Approx(0.3));
    CHECK(g.at(0, 0) == doctest::Approx(0.8));
    CHECK(std::isnan(g.at(1, 1)));
    CHECK(g.at(1, 0) == doctest::Approx(0.2));
    CHECK_THROWS_AS(class_level_matrix(m, {{"s1", "A"}, {"s2", "A"}}), std::invalid_argument);
    CHECK_THROWS_AS(class_level_matrix(m, {{"s1", "A"}, {"s2", "A"}, {"t1", "B"}, {"ghost", "C"}}),
                    std::invalid_argument);
}

TEST_CASE("aggregates commute with relabeling") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.below(5);
        const auto m = random_matrix(rng, n);
        std::vector<std::string> perm = m.model_ids;
        rng.shuffle(perm);
        const auto p = m.select(perm);
        std::map<std::string, std::string> grouping;
        for (std::size_t i = 0; i < n; ++i) grouping[m.model_ids[i]] = "g" + std::to_string(rng.below(3));
        const auto ga = class_level_matrix(m, grouping);
        const auto gb = class_level_matrix(p, grouping);
        REQUIRE(ga.classes == gb.classes);
        for (std::size_t c = 0; c < ga.cells.size(); ++c) {
            if (std::isnan(ga.cells[c])) {
                CHECK(std::isnan(gb.cells[c]));
            } else {
                CHECK(ga.cells[c] == doctest::Approx(gb.cells[c]).epsilon(1e-12));
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            const auto j = *p.index_of(m.model_ids[t]);
            CHECK(*mean_incoming_rate(m, t) == doctest::Approx(*mean_incoming_rate(p, j)).epsilon(1e-12));
        }
        // asymmetric values stay well-formed through the csv round trip
        const auto back = TransferMatrix::from_csv(m.to_csv(), m.sizes_csv());
        CHECK(back.model_ids == m.model_ids);
        CHECK(back.sample_size == m.sample_size);
        for (std::size_t c = 0; c < m.rates.size(); ++c) {
            CHECK(back.rates[c] >= 0.0);
            CHECK(back.rates[c] <= 1.0);
            CHECK(std::abs(back.rates[c] - m.rates[c]) <= 5e-7);
        }
    }
}

TEST_CASE("property: csv round trip with sizes restores exact count ratios") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        TransferMatrix m;
        for (std::size_t i = 0; i < n; ++i) m.model_ids.push_back("m" + std::to_string(i));
        for (std::size_t c = 0; c < n * n; ++c) {
            const std::size_t size = 1 + rng.below(500);
            m.sample_size.push_back(size);
            m.rates.push_back(static_cast<double>(rng.below(size + 1)) / static_cast<double>(size));
        }
        const auto back = TransferMatrix::from_csv(m.to_csv(), m.sizes_csv());
        CHECK(back.rates == m.rates);
        CHECK(back.sample_size == m.sample_size);
    }
}
