#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "uawr/corpus.hpp"
#include "uawr/desk_data.hpp"
#include "uawr/error.hpp"
#include "uawr/lexicon.hpp"
#include "uawr/rng.hpp"

using namespace uawr;

namespace {

const std::filesystem::path kData = std::filesystem::path(UAWR_SOURCE_DIR) / "data";

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "uawr_test_corpus";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::filesystem::path write_file(const std::string& name, const std::string& content) {
    const auto path = scratch(name);
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

const Tokenizer& shipped_tokenizer() {
    static const Tokenizer tok(PosLexicon::load(kData / "pos_lexicon.tsv"));
    return tok;
}

std::vector<std::string> surfaces(const TokenSeq& tokens) {
    std::vector<std::string> out;
    for (const auto& t : tokens) out.push_back(t.surface);
    return out;
}

}  // namespace

TEST_CASE("load_dataset reads a two-line single file") {
    const auto path = write_file("two.tsv", "pos\ta fine film\nneg\ta dull film\n");
    const auto data = load_dataset(path, CorpusFormat::kSingleFile, testing::fixture_tokenizer());
    REQUIRE(data.train.size() == 2);
    CHECK(data.labels == std::vector<std::string>{"pos", "neg"});
    CHECK(data.train[0].tokens.size() == 3);
    CHECK(data.train[1].tokens.size() == 3);
    CHECK(data.train[0].label == 0);
    CHECK(data.train[1].label == 1);
    CHECK(data.train[0].id == 0);
    CHECK(data.train[1].id == 1);
}

TEST_CASE("load_dataset rejects an empty corpus") {
    const auto path = write_file("empty.tsv", "");
    CHECK_THROWS_WITH_AS(load_dataset(path, CorpusFormat::kSingleFile, testing::fixture_tokenizer()),
                         doctest::Contains("empty corpus"), DataError);
}

TEST_CASE("load_dataset reports the line number of a malformed record") {
    const auto path = write_file("bad.tsv", "pos\ta fine film\nno tab here\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, CorpusFormat::kSingleFile, testing::fixture_tokenizer()),
                         doctest::Contains(":2"), DataError);
}

TEST_CASE("load_dataset rejects labels outside the sidecar") {
    const auto path = write_file("side.tsv", "pos\ta fine film\nmeh\ta film\n");
    write_file("side.tsv.labels", "pos\nneg\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, CorpusFormat::kSingleFile, testing::fixture_tokenizer()),
                         doctest::Contains("unknown label"), DataError);
}

TEST_CASE("sidecar order defines class indices") {
    const auto path = write_file("order.tsv", "pos\ta fine film\nneg\ta dull film\n");
    write_file("order.tsv.labels", "neg\npos\n");
    const auto data = load_dataset(path, CorpusFormat::kSingleFile, testing::fixture_tokenizer());
    CHECK(data.labels == std::vector<std::string>{"neg", "pos"});
    CHECK(data.train[0].label == 1);
}

TEST_CASE("desk corpus loads with disjoint split ids and two labels") {
    const auto data = load_dataset(kData / "desk_mr", CorpusFormat::kSplitDirectory, shipped_tokenizer());
    CHECK(data.labels.size() == 2);
    CHECK(data.train.size() == 9000);
    CHECK(data.test.size() == 1000);
    std::set<std::size_t> ids;
    for (const auto& e : data.train) ids.insert(e.id);
    for (const auto& e : data.test) CHECK(ids.insert(e.id).second);
}

TEST_CASE("tokenize splits punctuation and tags from the shipped lexicon") {
    const auto toks = shipped_tokenizer().tokenize("A fine film.");
    REQUIRE(toks.size() == 4);
    CHECK(surfaces(toks) == std::vector<std::string>{"a", "fine", "film", "."});
    CHECK(toks[0].pos == Pos::kOther);
    CHECK(toks[1].pos == Pos::kAdj);
    CHECK(toks[2].pos == Pos::kNoun);
    CHECK(toks[3].pos == Pos::kOther);
    for (std::size_t i = 0; i < toks.size(); ++i) CHECK(toks[i].position == i);
}

TEST_CASE("tokenize edge cases") {
    CHECK(shipped_tokenizer().tokenize("").empty());
    CHECK(shipped_tokenizer().tokenize("   \t ").empty());
    const auto toks = shipped_tokenizer().tokenize("Film film FILM");
    CHECK(surfaces(toks) == std::vector<std::string>{"film", "film", "film"});
}

TEST_CASE("assign_pos lookups and tie-break order") {
    CHECK(shipped_tokenizer().assign_pos("brilliant") == Pos::kAdj);
    CHECK(shipped_tokenizer().assign_pos("zzxqv") == Pos::kOther);
    PosLexicon lex;
    lex.add("film", Pos::kVerb);
    lex.add("film", Pos::kNoun);
    CHECK(lex.lookup("film") == Pos::kNoun);
    PosLexicon lex2;
    lex2.add("fast", Pos::kAdv);
    lex2.add("fast", Pos::kAdj);
    lex2.add("fast", Pos::kVerb);
    CHECK(lex2.lookup("fast") == Pos::kVerb);
}

TEST_CASE("property: tokenization round trip and tag closure over random text") {
    Rng rng(11);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJ.,;!?'- \t";
    const std::set<Pos> tags{Pos::kNoun, Pos::kVerb, Pos::kAdj, Pos::kAdv, Pos::kOther};
    const auto& words = desk::synsets();
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const std::size_t n = rng.below(40);
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.bernoulli(0.3)) {
                const auto& s = words[rng.below(words.size())];
                text += " " + s.members[rng.below(s.members.size())] + " ";
            } else {
                text += alphabet[rng.below(alphabet.size())];
            }
        }
        const auto toks = shipped_tokenizer().tokenize(text);
        const auto again = shipped_tokenizer().tokenize(join_surfaces(toks));
        CHECK(surfaces(again) == surfaces(toks));
        for (std::size_t i = 0; i < toks.size(); ++i) {
            CHECK(!toks[i].surface.empty());
            CHECK(toks[i].position == i);
            CHECK(tags.count(toks[i].pos) == 1);
        }
    }
}

TEST_CASE("loading the same corpus twice is deterministic") {
    const auto a = load_dataset(kData / "desk_mr", CorpusFormat::kSplitDirectory, shipped_tokenizer());
    const auto b = load_dataset(kData / "desk_mr", CorpusFormat::kSplitDirectory, shipped_tokenizer());
    CHECK(a == b);
    CHECK(dataset_digest(a) == dataset_digest(b));
}

// ---------------------------------------------------------------------------
// Lexicon

TEST_CASE("fixture lexicon entries from the Table-5 style lines") {
    const auto lex = SynonymLexicon::load(kData / "fixtures" / "lexicon50.tsv");
    CHECK(lex.candidates_for("glorious", Pos::kAdj) == std::vector<std::string>{"splendiferous", "resplendent"});
    CHECK(lex.candidates_for("good", Pos::kAdj).empty());
    CHECK(lex.candidates_for("keep", Pos::kVerb) == std::vector<std::string>{"preserve", "retain"});
    CHECK(lex.stats().skipped_empty >= 1);
    CHECK(lex.size() <= 50);
}

TEST_CASE("candidates_for respects POS and unknown words") {
    const auto lex = SynonymLexicon::load(kData / "fixtures" / "lexicon50.tsv");
    CHECK(lex.candidates_for(Token{"keep", Pos::kVerb, 0}) == std::vector<std::string>{"preserve", "retain"});
    CHECK(lex.candidates_for(Token{"keep", Pos::kNoun, 0}).empty());
    CHECK(lex.candidates_for(Token{"zzxqv", Pos::kOther, 0}).empty());
}

TEST_CASE("lexicon load cleans duplicates, self references and multi-word candidates") {
    const auto path = write_file("lex.tsv",
                                 "# comment\n"
                                 "fine\tADJ\tgood,fine,nice\n"
                                 "fine\tADJ\tnice,decent\n"
                                 "fine\tNOUN\tpenalty,parking ticket\n"
                                 "good\tADJ\tgood\n");
    const auto lex = SynonymLexicon::load(path);
    CHECK(lex.candidates_for("fine", Pos::kAdj) == std::vector<std::string>{"good", "nice", "decent"});
    CHECK(lex.candidates_for("fine", Pos::kNoun) == std::vector<std::string>{"penalty"});
    CHECK(lex.candidates_for("good", Pos::kAdj).empty());
    CHECK(lex.stats().dropped_multiword == 1);
    CHECK(lex.stats().skipped_empty == 1);
}

TEST_CASE("lexicon rejects a malformed line") {
    const auto path = write_file("badlex.tsv", "fine\tADJ\n");
    CHECK_THROWS_AS(SynonymLexicon::load(path), DataError);
}

TEST_CASE("property: candidates never contain the original and loads are stable") {
    const auto a = SynonymLexicon::load(kData / "lexicon.tsv");
    const auto b = SynonymLexicon::load(kData / "lexicon.tsv");
    const auto entries = a.entries();
    REQUIRE(entries.size() >= 100);
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto& e = entries[rng.below(entries.size())];
        const Token t{e.word, e.pos, 0};
        const auto& c = a.candidates_for(t);
        CHECK(!c.empty());
        CHECK(std::find(c.begin(), c.end(), e.word) == c.end());
        CHECK(c == b.candidates_for(t));
        std::set<std::string> distinct(c.begin(), c.end());
        CHECK(distinct.size() == c.size());
    }
}

TEST_CASE("derived POS lexicon agrees with the shipped tags") {
    const auto lex = SynonymLexicon::load(kData / "lexicon.tsv");
    const auto derived = lex.derive_pos_lexicon();
    for (const char* w : {"brilliant", "film", "keep", "very", "splendiferous"}) {
        CHECK(derived.lookup(w) == shipped_tokenizer().assign_pos(w));
    }
}

// ---------------------------------------------------------------------------
// Desk generator

TEST_CASE("desk generator is byte-identical for a fixed config") {
    desk::DeskConfig config;
    config.train_documents = 60;
    config.test_documents = 20;
    const auto a = desk::generate(config, scratch("desk_a"));
    const auto b = desk::generate(config, scratch("desk_b"));
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(a.corpus_dir / "train.tsv") == slurp(b.corpus_dir / "train.tsv"));
    CHECK(slurp(a.lexicon) == slurp(b.lexicon));
    CHECK(slurp(a.embeddings) == slurp(b.embeddings));
}

namespace {

// Members past `corpus_members` that are not also a common member elsewhere.
std::vector<std::string> tail_members(const desk::DeskConfig& config) {
    std::set<std::string> common;
    for (const auto& s : desk::synsets()) {
        for (std::size_t k = 0; k < std::min(s.members.size(), config.corpus_members); ++k) common.insert(s.members[k]);
    }
    std::vector<std::string> out;
    for (const auto& s : desk::synsets()) {
        for (std::size_t r = config.corpus_members; r < s.members.size(); ++r) {
            if (common.count(s.members[r]) == 0) out.push_back(s.members[r]);
        }
    }
    return out;
}

std::map<std::string, std::size_t> document_counts(const Dataset& data) {
    std::map<std::string, std::size_t> counts;
    for (const auto& e : data.train) {
        std::set<std::string> seen;
        for (const auto& t : e.tokens) seen.insert(t.surface);
        for (const auto& w : seen) ++counts[w];
    }
    return counts;
}

}  // namespace

TEST_CASE("tail synonyms are rare in the shipped desk corpus") {
    const auto data = load_dataset(kData / "desk_mr", CorpusFormat::kSplitDirectory, shipped_tokenizer());
    const auto counts = document_counts(data);
    const auto tail = tail_members(desk::DeskConfig{});
    CHECK(tail.size() > 50);
    std::size_t unseen = 0;
    for (const auto& w : tail) {
        const auto it = counts.find(w);
        const std::size_t n = it == counts.end() ? 0 : it->second;
        CHECK_MESSAGE(n <= 10, w);
        unseen += n == 0 ? 1 : 0;
    }
    // both unseen and rarely seen members occur
    CHECK(unseen > 0);
    CHECK(unseen < tail.size());
}

TEST_CASE("tail synonyms never occur at zero tail weight") {
    desk::DeskConfig config;
    config.train_documents = 2000;
    config.test_documents = 10;
    config.tail_weight = 0.0;
    const auto files = desk::generate(config, scratch("desk_no_tail"));
    const Tokenizer tok(PosLexicon::load(files.pos_lexicon));
    const auto counts = document_counts(load_dataset(files.corpus_dir, CorpusFormat::kSplitDirectory, tok));
    for (const auto& w : tail_members(config)) CHECK_MESSAGE(counts.count(w) == 0, w);
}
