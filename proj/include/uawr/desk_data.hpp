#pragma once

// Deterministic generator for the synthetic movie-review desk corpus, its
// synonym lexicon, POS lexicon and pretrained-style word vectors.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uawr/corpus.hpp"

namespace uawr::desk {

struct DeskConfig {
    std::uint64_t seed = 20200;
    std::size_t train_documents = 9000;
    std::size_t test_documents = 1000;
    /// Probability that a sentiment-bearing slot agrees with the label.
    double polarity_agreement = 0.78;
    /// Share of non-head synonyms whose usage leans toward the opposite class.
    double biased_member_share = 0.5;
    /// Usage weight of a biased member in its synset's own class.
    double bias_strength = 0.25;
    /// Spread of the per-word class skew of neutral words (log scale).
    double topic_skew = 0.7;
    /// Leading synset members used at full weight in documents.
    std::size_t corpus_members = 2;
    /// Usage weight of the later members (0 = lexicon-only); small values
    /// make them rare words seen in a handful of documents.
    double tail_weight = 0.003;
    std::size_t embedding_dim = 32;
    /// Synonym-cluster share of a pretrained vector; the rest is noise.
    double embedding_cluster = 0.6;
};

struct Synset {
    Pos pos = Pos::kOther;
    int polarity = 0;  // +1 positive, -1 negative, 0 neutral
    std::vector<std::string> members;
};

/// Hand-authored word bank.
const std::vector<Synset>& synsets();
const std::vector<std::string>& function_words();

struct DeskFiles {
    std::filesystem::path corpus_dir;  // train.tsv, test.tsv, labels.txt
    std::filesystem::path lexicon;
    std::filesystem::path pos_lexicon;
    std::filesystem::path embeddings;
    std::filesystem::path fixture_lexicon;
};

/// Writes every desk asset under `root`; byte-identical for a fixed config.
DeskFiles generate(const DeskConfig& config, const std::filesystem::path& root);

}  // namespace uawr::desk
