#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "uawr/corpus.hpp"

namespace uawr {

struct SynonymEntry {
    std::string word;
    Pos pos = Pos::kOther;
    std::vector<std::string> candidates;
};

/// POS-constrained synonym table keyed by (word, pos). Immutable after load.
class SynonymLexicon {
public:
    struct LoadStats {
        std::size_t lines = 0;
        std::size_t skipped_empty = 0;   // entries left with no candidates
        std::size_t dropped_multiword = 0;
    };

    SynonymLexicon() = default;

    /// Reads `word<TAB>POS<TAB>cand1,cand2,...` lines. Duplicate (word, pos)
    /// lines are merged, self-references and multi-word candidates dropped.
    static SynonymLexicon load(const std::filesystem::path& path);

    /// Adds or merges one entry, applying the same cleaning as `load`. Returns
    /// false when nothing usable remained.
    bool add(std::string word, Pos pos, const std::vector<std::string>& candidates);

    /// Substitutes for (surface, pos) in file order; empty when absent.
    const std::vector<std::string>& candidates_for(const Token& token) const;
    const std::vector<std::string>& candidates_for(const std::string& surface, Pos pos) const;

    bool allows(const Token& token, const std::string& replacement) const;

    std::size_t size() const { return entries_.size(); }
    const LoadStats& stats() const { return stats_; }

    /// Entries ordered by (word, pos).
    std::vector<SynonymEntry> entries() const;

    /// Tag lexicon covering every head word and candidate under its entry tag.
    PosLexicon derive_pos_lexicon() const;

private:
    std::map<std::pair<std::string, Pos>, std::vector<std::string>> entries_;
    LoadStats stats_;
};

}  // namespace uawr
