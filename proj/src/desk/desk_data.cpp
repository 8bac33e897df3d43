#include "uawr/desk_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "uawr/error.hpp"
#include "uawr/rng.hpp"

namespace uawr::desk {

namespace {

// "TAG polarity member member ..."; the first member is the head word.
constexpr const char* kBank[] = {
    // positive adjectives
    "ADJ + brilliant brainy bright",
    "ADJ + excellent splendid superb",
    "ADJ + glorious splendiferous resplendent",
    "ADJ + wonderful marvelous terrific",
    "ADJ + beautiful lovely gorgeous",
    "ADJ + funny hilarious amusing",
    "ADJ + moving touching poignant",
    "ADJ + clever witty smart",
    "ADJ + charming delightful engaging",
    "ADJ + powerful compelling forceful",
    "ADJ + fresh original novel",
    "ADJ + stunning striking dazzling",
    "ADJ + enjoyable pleasant pleasurable",
    "ADJ + gripping riveting absorbing",
    "ADJ + warm tender affectionate",
    "ADJ + memorable unforgettable notable",
    "ADJ + entertaining diverting engrossing",
    "ADJ + elegant graceful refined",
    "ADJ + honest sincere genuine",
    "ADJ + good fine nice",
    // negative adjectives
    "ADJ - average mediocre middling",
    "ADJ - bizarre outlandish weird",
    "ADJ - excruciating harrowing agonizing",
    "ADJ - dull boring tedious",
    "ADJ - awful terrible dreadful",
    "ADJ - stupid dumb foolish",
    "ADJ - bland insipid flavorless",
    "ADJ - predictable foreseeable formulaic",
    "ADJ - messy sloppy untidy",
    "ADJ - pointless meaningless senseless",
    "ADJ - tired weary stale",
    "ADJ - clumsy awkward inept",
    "ADJ - shallow superficial hollow",
    "ADJ - ugly hideous unsightly",
    "ADJ - lame feeble weak",
    "ADJ - annoying irritating grating",
    "ADJ - confusing baffling perplexing",
    "ADJ - silly ridiculous absurd",
    "ADJ - bad poor lousy",
    "ADJ - slow sluggish plodding",
    // neutral adjectives
    "ADJ 0 routine everyday ordinary",
    "ADJ 0 long lengthy extended",
    "ADJ 0 new recent modern",
    "ADJ 0 old aged ancient",
    "ADJ 0 little small minor",
    "ADJ 0 big large huge",
    "ADJ 0 young youthful juvenile",
    "ADJ 0 final last concluding",
    "ADJ 0 serious grave solemn",
    "ADJ 0 quiet silent still",
    // sentiment nouns
    "NOUN + masterpiece gem treasure",
    "NOUN + pleasure delight joy",
    "NOUN + triumph success victory",
    "NOUN + charm appeal allure",
    "NOUN + talent gift flair",
    "NOUN - flaws flaw defects",
    "NOUN - mess muddle shambles",
    "NOUN - failure flop fiasco",
    "NOUN - disaster catastrophe calamity",
    "NOUN - cliche platitude banality",
    "NOUN - mistake error blunder",
    "NOUN - boredom tedium monotony",
    // neutral nouns
    "NOUN 0 film movie picture",
    "NOUN 0 plot story storyline",
    "NOUN 0 cast ensemble troupe",
    "NOUN 0 director filmmaker auteur",
    "NOUN 0 web network",
    "NOUN 0 toilet bathroom lavatory",
    "NOUN 0 president chairman",
    "NOUN 0 script screenplay",
    "NOUN 0 scene sequence episode",
    "NOUN 0 character role part",
    "NOUN 0 audience viewers spectators",
    "NOUN 0 ending conclusion finale",
    "NOUN 0 music score soundtrack",
    "NOUN 0 city town village",
    "NOUN 0 family household clan",
    "NOUN 0 house home dwelling",
    "NOUN 0 car automobile vehicle",
    "NOUN 0 war battle conflict",
    "NOUN 0 romance love affair",
    "NOUN 0 life existence",
    "NOUN 0 world planet globe",
    "NOUN 0 man guy fellow",
    "NOUN 0 woman lady",
    "NOUN 0 child kid youngster",
    "NOUN 0 friend pal buddy",
    "NOUN 0 dialogue conversation",
    "NOUN 0 effects visuals",
    "NOUN 0 drama play",
    "NOUN 0 comedy farce",
    "NOUN 0 moment instant",
    "NOUN 0 idea notion concept",
    "NOUN 0 heart core center",
    // sentiment verbs
    "VERB + love adore cherish",
    "VERB + enjoy relish savor",
    "VERB + recommend endorse advocate",
    "VERB + impress amaze astonish",
    "VERB + thrive prosper flourish",
    "VERB - hate loathe detest",
    "VERB - fail flounder falter",
    "VERB - squander fritter",
    "VERB - disappoint dismay",
    "VERB - ruin spoil wreck",
    // neutral verbs
    "VERB 0 keep preserve retain",
    "VERB 0 make create produce",
    "VERB 0 show display exhibit",
    "VERB 0 tell narrate recount",
    "VERB 0 watch view observe",
    "VERB 0 play perform act",
    "VERB 0 start begin commence",
    "VERB 0 end finish conclude",
    "VERB 0 feel sense perceive",
    "VERB 0 try attempt endeavor",
    "VERB 0 seem appear look",
    "VERB 0 find discover uncover",
    "VERB 0 give provide offer",
    "VERB 0 become turn grow",
    // adverbs
    "ADV + wonderfully marvelously superbly",
    "ADV + beautifully gracefully elegantly",
    "ADV - poorly badly shoddily",
    "ADV - painfully grievously",
    "ADV 0 very really truly",
    "ADV 0 quite rather fairly",
    "ADV 0 simply merely purely",
    "ADV 0 almost nearly virtually",
    "ADV 0 often frequently repeatedly",
    "ADV 0 finally eventually ultimately",
    "ADV 0 completely totally utterly",
};

constexpr const char* kFunctionWords[] = {"the", "a",  "an",  "this", "that", "is",   "was", "it",  "and",
                                          "but", "of", "to",  "in",   "with", "for",  "as",  "by",  "on",
                                          "at",  "be", "has", "from", "more", "than", "so",  "its", "his",
                                          "her", "their", "who", "when", "too", "also", "even"};

constexpr const char* kDeterminers[] = {"the", "a", "this", "its", "his", "her", "their", "the", "the"};

struct Word {
    std::string surface;
    std::size_t synset;
    std::size_t rank;    // position inside its synset
    double weight[2];    // usage weight per class (0 = pos, 1 = neg)
};

class Bank {
public:
    Bank(const DeskConfig& config, Rng& rng) {
        const auto& sets = synsets();
        for (std::size_t s = 0; s < sets.size(); ++s) {
            const auto& set = sets[s];
            for (std::size_t r = 0; r < set.members.size(); ++r) {
                Word w{set.members[r], s, r, {1.0, 1.0}};
                const double base =
                    r >= config.corpus_members ? config.tail_weight : (r == 0 ? 1.0 : 0.55 / static_cast<double>(r));
                w.weight[0] = w.weight[1] = base;
                if (set.polarity != 0 && r > 0 && rng.bernoulli(config.biased_member_share)) {
                    // leans toward the class opposite to its synset
                    const int own = set.polarity > 0 ? 0 : 1;
                    w.weight[own] *= config.bias_strength;
                } else if (set.polarity == 0) {
                    const double skew = std::exp(config.topic_skew * (2.0 * rng.uniform() - 1.0));
                    w.weight[0] *= skew;
                    w.weight[1] /= skew;
                }
                words_.push_back(w);
            }
        }
        for (std::size_t i = 0; i < words_.size(); ++i) by_synset_[words_[i].synset].push_back(i);
        for (std::size_t s = 0; s < sets.size(); ++s) {
            pools_[{sets[s].pos, sets[s].polarity}].push_back(s);
        }
    }

    /// A word from a random synset of (pos, polarity), chosen by class usage.
    const std::string& pick(Rng& rng, Pos pos, int polarity, int cls) const {
        const auto& pool = pools_.at({pos, polarity});
        const auto& members = by_synset_.at(pool[rng.below(pool.size())]);
        std::vector<double> w;
        for (std::size_t i : members) w.push_back(words_[i].weight[cls]);
        return words_[members[rng.roulette(w)]].surface;
    }

    bool has(Pos pos, int polarity) const { return pools_.count({pos, polarity}) != 0; }

private:
    std::vector<Word> words_;
    std::map<std::size_t, std::vector<std::size_t>> by_synset_;
    std::map<std::pair<Pos, int>, std::vector<std::size_t>> pools_;
};

/// Polarity for a sentiment slot of a class-`cls` document.
int slot_polarity(Rng& rng, int cls, double agreement) {
    const int own = cls == 0 ? +1 : -1;
    return rng.bernoulli(agreement) ? own : -own;
}

std::string clause(Rng& rng, const Bank& bank, int cls, const DeskConfig& config) {
    std::vector<std::string> out;
    auto det = [&] { out.emplace_back(kDeterminers[rng.below(std::size(kDeterminers))]); };
    auto adjective = [&](double sentiment) {
        if (rng.bernoulli(sentiment)) {
            out.push_back(bank.pick(rng, Pos::kAdj, slot_polarity(rng, cls, config.polarity_agreement), cls));
        } else {
            out.push_back(bank.pick(rng, Pos::kAdj, 0, cls));
        }
    };
    auto noun = [&](double sentiment) {
        const int pol = rng.bernoulli(sentiment) ? slot_polarity(rng, cls, config.polarity_agreement) : 0;
        out.push_back(bank.pick(rng, Pos::kNoun, pol, cls));
    };
    auto verb = [&](double sentiment) {
        const int pol = rng.bernoulli(sentiment) ? slot_polarity(rng, cls, config.polarity_agreement) : 0;
        out.push_back(bank.pick(rng, Pos::kVerb, pol, cls));
    };
    auto adverb = [&](double sentiment) {
        const int pol = rng.bernoulli(sentiment) ? slot_polarity(rng, cls, config.polarity_agreement) : 0;
        out.push_back(bank.pick(rng, Pos::kAdv, pol, cls));
    };

    det();
    if (rng.bernoulli(0.4)) adjective(0.5);
    noun(0.15);
    if (rng.bernoulli(0.5)) {
        // "the film is a brilliant gem"
        out.emplace_back(rng.bernoulli(0.5) ? "is" : "was");
        if (rng.bernoulli(0.35)) adverb(0.3);
        adjective(0.75);
        if (rng.bernoulli(0.4)) {
            out.emplace_back(rng.bernoulli(0.5) ? "and" : "but");
            adjective(0.6);
        }
    } else {
        // "the cast keep the old plot"
        if (rng.bernoulli(0.3)) adverb(0.4);
        verb(0.35);
        det();
        adjective(0.6);
        noun(0.3);
        if (rng.bernoulli(0.3)) {
            out.emplace_back(kFunctionWords[9 + rng.below(10)]);
            det();
            noun(0.2);
        }
    }
    std::string text;
    for (const auto& w : out) {
        if (!text.empty()) text += ' ';
        text += w;
    }
    return text;
}

std::string document(Rng& rng, const Bank& bank, int cls, const DeskConfig& config) {
    const std::size_t clauses = 2 + rng.below(2);
    std::string text;
    for (std::size_t c = 0; c < clauses; ++c) {
        if (c > 0) text += rng.bernoulli(0.5) ? " , " : (rng.bernoulli(0.5) ? " and " : " , but ");
        text += clause(rng, bank, cls, config);
    }
    return text + " .";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

const std::vector<Synset>& synsets() {
    static const std::vector<Synset> sets = [] {
        std::vector<Synset> out;
        for (const char* line : kBank) {
            std::istringstream in(line);
            std::string tag, pol, word;
            in >> tag >> pol;
            Synset s;
            s.pos = *parse_pos(tag);
            s.polarity = pol == "+" ? 1 : (pol == "-" ? -1 : 0);
            while (in >> word) s.members.push_back(word);
            out.push_back(std::move(s));
        }
        return out;
    }();
    return sets;
}

const std::vector<std::string>& function_words() {
    static const std::vector<std::string> words(std::begin(kFunctionWords), std::end(kFunctionWords));
    return words;
}

DeskFiles generate(const DeskConfig& config, const std::filesystem::path& root) {
    DeskFiles files;
    files.corpus_dir = root / "desk_mr";
    files.lexicon = root / "lexicon.tsv";
    files.pos_lexicon = root / "pos_lexicon.tsv";
    files.embeddings = root / "embeddings.txt";
    files.fixture_lexicon = root / "fixtures" / "lexicon50.tsv";
    std::filesystem::create_directories(files.corpus_dir);
    std::filesystem::create_directories(files.fixture_lexicon.parent_path());

    Rng bank_rng(derive_seed(config.seed, stream_id("bank")));
    const Bank bank(config, bank_rng);

    Rng doc_rng(derive_seed(config.seed, stream_id("documents")));
    auto split = [&](std::size_t n) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) {
            const int label = static_cast<int>(doc_rng.below(2));
            out += (label == 0 ? "pos\t" : "neg\t") + document(doc_rng, bank, label, config) + '\n';
        }
        return out;
    };
    write_file(files.corpus_dir / "train.tsv", split(config.train_documents));
    write_file(files.corpus_dir / "test.tsv", split(config.test_documents));
    write_file(files.corpus_dir / "labels.txt", "pos\nneg\n");

    // synonym lexicon: every member lists its synset siblings in bank order
    std::string lex = "# word\tPOS\tcandidates\n";
    std::string fixture = "# test fixture: a slice of the desk lexicon plus edge cases\n";
    std::size_t fixture_lines = 0;
    std::string pos_lex;
    std::set<std::string> pos_seen;
    for (const auto& s : synsets()) {
        for (const auto& w : s.members) {
            std::string cands;
            for (const auto& other : s.members) {
                if (other == w) continue;
                if (!cands.empty()) cands += ',';
                cands += other;
            }
            const std::string line = w + '\t' + std::string(pos_name(s.pos)) + '\t' + cands + '\n';
            lex += line;
            if (fixture_lines < 46 && w != "glorious" && w != "good" && w != "keep") {
                fixture += line;
                ++fixture_lines;
            }
            if (pos_seen.insert(w + '\t' + std::string(pos_name(s.pos))).second) {
                pos_lex += w + '\t' + std::string(pos_name(s.pos)) + '\n';
            }
        }
    }
    fixture += "glorious\tADJ\tsplendiferous,resplendent\n";
    fixture += "good\tADJ\tgood\n";
    fixture += "keep\tVERB\tpreserve\n";
    fixture += "keep\tVERB\tretain\n";
    write_file(files.lexicon, lex);
    write_file(files.fixture_lexicon, fixture);
    for (const auto& w : function_words()) pos_lex += w + "\tOTHER\n";
    write_file(files.pos_lexicon, pos_lex);

    // word vectors: a shared synset direction plus per-word noise
    Rng emb_rng(derive_seed(config.seed, stream_id("embeddings")));
    std::string emb;
    std::size_t count = 0;
    std::string body;
    auto vec_line = [&](const std::string& word, const std::vector<double>& center) {
        body += word;
        for (std::size_t d = 0; d < config.embedding_dim; ++d) {
            const double noise = emb_rng.uniform(-0.1, 0.1);
            body += ' ' + fixed6(config.embedding_cluster * center[d] + (1.0 - config.embedding_cluster) * noise);
        }
        body += '\n';
        ++count;
    };
    for (const auto& s : synsets()) {
        std::vector<double> center(config.embedding_dim);
        for (double& c : center) c = emb_rng.uniform(-0.1, 0.1);
        for (const auto& w : s.members) vec_line(w, center);
    }
    for (const auto& w : function_words()) {
        std::vector<double> center(config.embedding_dim);
        for (double& c : center) c = emb_rng.uniform(-0.1, 0.1);
        vec_line(w, center);
    }
    emb = std::to_string(count) + ' ' + std::to_string(config.embedding_dim) + '\n' + body;
    write_file(files.embeddings, emb);
    return files;
}

}  // namespace uawr::desk
