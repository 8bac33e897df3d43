#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uawr {

/// Coarse part-of-speech set. Declaration order is the tie-break priority
/// used when a word carries several tags.
enum class Pos : std::uint8_t { kNoun, kVerb, kAdj, kAdv, kOther };

std::string_view pos_name(Pos p);
std::optional<Pos> parse_pos(std::string_view s);

struct Token {
    std::string surface;
    Pos pos = Pos::kOther;
    std::size_t position = 0;

    bool operator==(const Token&) const = default;
};

using TokenSeq = std::vector<Token>;

/// Tokens that can carry a synonym substitution (content words).
inline bool is_substitutable(const Token& t) { return t.pos != Pos::kOther; }
std::size_t substitutable_count(const TokenSeq& tokens);

struct Example {
    std::size_t id = 0;
    TokenSeq tokens;
    std::size_t label = 0;

    bool operator==(const Example&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<std::string> labels;
    std::vector<Example> train;
    std::vector<Example> test;

    std::size_t label_count() const { return labels.size(); }
    bool operator==(const Dataset&) const = default;
};

/// Word -> tag lookup backing the tagger. Words with several tags resolve to
/// the highest-priority tag.
class PosLexicon {
public:
    PosLexicon() = default;

    /// Reads `word<TAB>TAG` lines; blank and '#' lines are skipped.
    static PosLexicon load(const std::filesystem::path& path);

    void add(std::string_view word, Pos pos);
    Pos lookup(std::string_view word) const;
    std::size_t size() const { return tags_.size(); }

private:
    std::unordered_map<std::string, Pos> tags_;
};

class Tokenizer {
public:
    explicit Tokenizer(PosLexicon lexicon = {}) : lexicon_(std::move(lexicon)) {}

    /// Lowercases, splits on whitespace, and emits each ASCII punctuation
    /// character as its own token.
    TokenSeq tokenize(std::string_view text) const;

    /// Tag for an already-lowercased surface. Unknown words are kOther.
    Pos assign_pos(std::string_view surface) const { return lexicon_.lookup(surface); }

    const PosLexicon& lexicon() const { return lexicon_; }

private:
    PosLexicon lexicon_;
};

enum class CorpusFormat {
    /// One `label<TAB>text` file; every record goes to `train`. Labels come
    /// from `<path>.labels` when present.
    kSingleFile,
    /// A directory holding train.tsv, test.tsv and an optional labels.txt.
    kSplitDirectory,
};

Dataset load_dataset(const std::filesystem::path& path, CorpusFormat format,
                     const Tokenizer& tokenizer);

/// Stable content digest of a dataset (labels, splits, token surfaces).
std::string dataset_digest(const Dataset& data);

/// Space-joined surfaces.
std::string join_surfaces(const TokenSeq& tokens);

}  // namespace uawr
