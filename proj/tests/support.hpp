#pragma once

// Shared fixtures for the unit tests.

#include <map>
#include <string>
#include <vector>

#include "uawr/corpus.hpp"
#include "uawr/lexicon.hpp"
#include "uawr/model.hpp"
#include "uawr/rng.hpp"

namespace uawr::testing {

inline PosLexicon fixture_pos_lexicon() {
    PosLexicon lex;
    for (const char* w : {"film", "movie", "plot", "cast", "president", "chairman", "tax", "cuts", "mess",
                          "fun", "web", "network", "flaws", "flaw"}) {
        lex.add(w, Pos::kNoun);
    }
    for (const char* w : {"keep", "preserve", "retain", "film"}) lex.add(w, Pos::kVerb);
    for (const char* w : {"fine", "great", "dull", "awful", "brilliant", "brainy", "average", "mediocre",
                          "excellent", "splendid", "bizarre", "outlandish", "good", "bad"}) {
        lex.add(w, Pos::kAdj);
    }
    for (const char* w : {"very", "quite", "really"}) lex.add(w, Pos::kAdv);
    return lex;
}

inline const Tokenizer& fixture_tokenizer() {
    static const Tokenizer tok(fixture_pos_lexicon());
    return tok;
}

inline TokenSeq tokens_of(std::string_view text) { return fixture_tokenizer().tokenize(text); }

inline Example make_example(std::size_t id, std::string_view text, std::size_t label) {
    return Example{id, tokens_of(text), label};
}

/// Small random corpus: each class prefers its own word block.
inline Dataset toy_dataset(std::size_t classes, std::uint64_t seed = 1, std::size_t per_class = 8) {
    static const std::vector<std::string> words = {"great", "fine", "fun", "dull", "awful", "mess",
                                                   "film", "plot", "cast", "very", "the", "a"};
    Dataset data;
    data.name = "toy";
    for (std::size_t z = 0; z < classes; ++z) data.labels.push_back("c" + std::to_string(z));
    Rng rng(seed);
    std::size_t id = 0;
    auto make = [&](std::size_t z) {
        std::string text;
        const std::size_t len = 2 + rng.below(5);
        for (std::size_t i = 0; i < len; ++i) {
            const std::size_t pick = rng.bernoulli(0.6) ? (z * 3 + rng.below(3)) % words.size()
                                                        : rng.below(words.size());
            if (!text.empty()) text += ' ';
            text += words[pick];
        }
        return Example{id++, tokens_of(text), z};
    };
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t z = 0; z < classes; ++z) data.train.push_back(make(z));
    }
    for (std::size_t z = 0; z < classes; ++z) data.test.push_back(make(z));
    return data;
}

/// Depth-1 LINEAR_BOW whose logits are the sum of hand-set per-word vectors
/// plus `bias`. Words absent from `weights` (and <unk>) contribute nothing.
inline Classifier hand_linear_model(const std::vector<std::string>& vocab_words,
                                    const std::map<std::string, std::vector<double>>& weights,
                                    std::vector<double> bias = {}) {
    std::size_t labels = 2;
    if (!weights.empty()) labels = weights.begin()->second.size();
    std::vector<std::string> entries{"<pad>", std::string(kUnkSurface)};
    for (const auto& w : vocab_words) entries.push_back(w);
    for (const auto& [w, _] : weights) {
        if (std::find(entries.begin(), entries.end(), w) == entries.end()) entries.push_back(w);
    }
    TrainingConfig cfg;
    cfg.embedding_dim = labels;
    cfg.hidden_dim = labels;
    Classifier model(ModelSpec{Architecture::kLinearBow, InputForm::kWord, EmbeddingInit::kRandom, 1, 0},
                     Vocabulary(InputForm::kWord, entries), labels, cfg);
    for (double& p : model.parameters()) p = 0.0;
    for (const auto& [w, vec] : weights) {
        auto row = model.embedding_row(w);
        std::copy(vec.begin(), vec.end(), row.begin());
    }
    auto out = model.output_weight();
    for (std::size_t z = 0; z < labels; ++z) out[z * labels + z] = 1.0;
    if (!bias.empty()) std::copy(bias.begin(), bias.end(), model.output_bias().begin());
    return model;
}

}  // namespace uawr::testing
