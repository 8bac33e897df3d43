#include "uawr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "uawr/error.hpp"
#include "uawr/hash.hpp"

namespace uawr {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return is_space(static_cast<unsigned char>(c)); });
}

std::vector<std::string> read_label_file(const std::filesystem::path& path) {
    std::vector<std::string> labels;
    for (auto& line : read_lines(path)) {
        if (blank(line)) continue;
        if (std::find(labels.begin(), labels.end(), line) != labels.end()) {
            throw DataError(path.string() + ": duplicate label '" + line + "'");
        }
        labels.push_back(line);
    }
    return labels;
}

struct LabelSet {
    std::vector<std::string> names;
    bool fixed = false;

    std::size_t index(const std::string& label, const std::string& where) {
        auto it = std::find(names.begin(), names.end(), label);
        if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
        if (fixed) throw DataError(where + ": unknown label '" + label + "'");
        names.push_back(label);
        return names.size() - 1;
    }
};

std::vector<Example> read_records(const std::filesystem::path& path, const Tokenizer& tokenizer,
                                  LabelSet& labels, std::size_t& next_id) {
    std::vector<Example> out;
    const auto lines = read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::string& line = lines[n];
        if (blank(line)) continue;
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw DataError(where + ": malformed line (expected label<TAB>text)");
        }
        Example ex;
        ex.label = labels.index(line.substr(0, tab), where);
        ex.tokens = tokenizer.tokenize(std::string_view(line).substr(tab + 1));
        if (ex.tokens.empty()) throw DataError(where + ": malformed line (empty text)");
        ex.id = next_id++;
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace

std::string_view pos_name(Pos p) {
    switch (p) {
        case Pos::kNoun: return "NOUN";
        case Pos::kVerb: return "VERB";
        case Pos::kAdj: return "ADJ";
        case Pos::kAdv: return "ADV";
        case Pos::kOther: return "OTHER";
    }
    return "OTHER";
}

std::optional<Pos> parse_pos(std::string_view s) {
    for (Pos p : {Pos::kNoun, Pos::kVerb, Pos::kAdj, Pos::kAdv, Pos::kOther}) {
        if (pos_name(p) == s) return p;
    }
    return std::nullopt;
}

std::size_t substitutable_count(const TokenSeq& tokens) {
    return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), is_substitutable));
}

PosLexicon PosLexicon::load(const std::filesystem::path& path) {
    PosLexicon lex;
    const auto lines = read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::string& line = lines[n];
        if (blank(line) || line.front() == '#') continue;
        const auto tab = line.find('\t');
        const auto tag = tab == std::string::npos ? std::nullopt
                                                  : parse_pos(std::string_view(line).substr(tab + 1));
        if (tab == 0 || !tag) {
            throw DataError(path.string() + ":" + std::to_string(n + 1) +
                            ": malformed line (expected word<TAB>TAG)");
        }
        lex.add(std::string_view(line).substr(0, tab), *tag);
    }
    return lex;
}

void PosLexicon::add(std::string_view word, Pos pos) {
    std::string key(word);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto [it, inserted] = tags_.emplace(std::move(key), pos);
    if (!inserted && pos < it->second) it->second = pos;
}

Pos PosLexicon::lookup(std::string_view word) const {
    auto it = tags_.find(std::string(word));
    return it == tags_.end() ? Pos::kOther : it->second;
}

TokenSeq Tokenizer::tokenize(std::string_view text) const {
    TokenSeq out;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        Token t{std::move(word), Pos::kOther, out.size()};
        t.pos = assign_pos(t.surface);
        out.push_back(std::move(t));
        word.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_space(c)) {
            flush();
        } else if (is_punct(c)) {
            flush();
            out.push_back(Token{std::string(1, ch), Pos::kOther, out.size()});
        } else {
            word.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    flush();
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, CorpusFormat format,
                     const Tokenizer& tokenizer) {
    Dataset data;
    LabelSet labels;
    std::size_t next_id = 0;
    if (format == CorpusFormat::kSingleFile) {
        data.name = path.stem().string();
        auto sidecar = path;
        sidecar += ".labels";
        if (std::filesystem::exists(sidecar)) {
            labels.names = read_label_file(sidecar);
            labels.fixed = true;
        }
        data.train = read_records(path, tokenizer, labels, next_id);
    } else {
        data.name = path.filename().string();
        if (data.name.empty()) data.name = path.parent_path().filename().string();
        if (std::filesystem::exists(path / "labels.txt")) {
            labels.names = read_label_file(path / "labels.txt");
            labels.fixed = true;
        }
        data.train = read_records(path / "train.tsv", tokenizer, labels, next_id);
        if (std::filesystem::exists(path / "test.tsv")) {
            data.test = read_records(path / "test.tsv", tokenizer, labels, next_id);
        }
    }
    if (data.train.empty() && data.test.empty()) throw DataError(path.string() + ": empty corpus");
    if (labels.names.size() < 2) throw DataError(path.string() + ": need at least 2 labels");
    data.labels = std::move(labels.names);
    return data;
}

std::string join_surfaces(const TokenSeq& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t.surface;
    }
    return out;
}

std::string dataset_digest(const Dataset& data) {
    Sha256 h;
    h.update(data.name).update("\n");
    for (const auto& l : data.labels) h.update(l).update("\t");
    for (const auto* split : {&data.train, &data.test}) {
        h.update("\n#split\n");
        for (const auto& ex : *split) {
            h.update(std::to_string(ex.id)).update("\t").update(std::to_string(ex.label)).update("\t");
            for (const auto& t : ex.tokens) h.update(t.surface).update(pos_name(t.pos)).update(" ");
            h.update("\n");
        }
    }
    return h.hex_digest();
}

}  // namespace uawr
