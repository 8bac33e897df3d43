#include "uawr/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "uawr/error.hpp"

namespace uawr {

namespace {

std::string lower_trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool has_space(const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

const std::vector<std::string> kNoCandidates;

}  // namespace

bool SynonymLexicon::add(std::string word, Pos pos, const std::vector<std::string>& candidates) {
    word = lower_trim(word);
    auto& list = entries_[{word, pos}];
    for (const auto& raw : candidates) {
        std::string c = lower_trim(raw);
        if (c.empty() || c == word) continue;
        if (has_space(c) || c.find('_') != std::string::npos) {
            ++stats_.dropped_multiword;
            continue;
        }
        if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(std::move(c));
    }
    if (list.empty()) {
        entries_.erase({word, pos});
        return false;
    }
    return true;
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    SynonymLexicon lex;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        const auto pos = t2 == std::string::npos
                             ? std::nullopt
                             : parse_pos(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
        if (t1 == 0 || !pos || *pos == Pos::kOther) {
            throw DataError(path.string() + ":" + std::to_string(n) +
                            ": malformed line (expected word<TAB>POS<TAB>candidates)");
        }
        std::vector<std::string> cands;
        std::string_view rest = std::string_view(line).substr(t2 + 1);
        while (true) {
            const auto comma = rest.find(',');
            cands.emplace_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        ++lex.stats_.lines;
        const bool existed = lex.entries_.count({lower_trim(line.substr(0, t1)), *pos}) != 0;
        if (!lex.add(line.substr(0, t1), *pos, cands) && !existed) ++lex.stats_.skipped_empty;
    }
    return lex;
}

const std::vector<std::string>& SynonymLexicon::candidates_for(const std::string& surface, Pos pos) const {
    if (pos == Pos::kOther) return kNoCandidates;
    auto it = entries_.find({surface, pos});
    return it == entries_.end() ? kNoCandidates : it->second;
}

const std::vector<std::string>& SynonymLexicon::candidates_for(const Token& token) const {
    return candidates_for(token.surface, token.pos);
}

bool SynonymLexicon::allows(const Token& token, const std::string& replacement) const {
    const auto& c = candidates_for(token);
    return std::find(c.begin(), c.end(), replacement) != c.end();
}

std::vector<SynonymEntry> SynonymLexicon::entries() const {
    std::vector<SynonymEntry> out;
    out.reserve(entries_.size());
    for (const auto& [key, cands] : entries_) out.push_back({key.first, key.second, cands});
    return out;
}

PosLexicon SynonymLexicon::derive_pos_lexicon() const {
    PosLexicon lex;
    for (const auto& [key, cands] : entries_) {
        lex.add(key.first, key.second);
        for (const auto& c : cands) lex.add(c, key.second);
    }
    return lex;
}

}  // namespace uawr
