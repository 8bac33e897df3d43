#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "uawr/desk_data.hpp"
#include "uawr/error.hpp"
#include "uawr/hash.hpp"
#include "uawr/lab.hpp"

using namespace uawr;
using namespace uawr::lab;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "uawr_test_lab" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

/// Small desk corpus plus a config skeleton pointing at it.
std::filesystem::path toy_desk() {
    static const std::filesystem::path root = [] {
        const auto dir = scratch("desk");
        desk::DeskConfig c;
        c.train_documents = 1500;
        c.test_documents = 100;
        desk::generate(c, dir);
        return dir;
    }();
    return root;
}

std::string toy_yaml(const std::string& zoo, const std::string& extra = "") {
    return "data:\n"
           "  corpus: desk_mr\n"
           "  pos_lexicon: pos_lexicon.tsv\n"
           "  lexicon: lexicon.tsv\n"
           "  embeddings: embeddings.txt\n" +
           zoo +
           "training: {epochs: 20, learning_rate: 0.4, embedding_dim: 32, hidden_dim: 8}\n"
           "attack: {engines: [PWWS]}\n"
           "budget: {attacked: 30, transferred: 20}\n"
           "ensemble: {sizes: [1, 2], population: 6, generations: 5}\n"
           "rules: {rho: [0.1, 0.3], ensemble_size: 1}\n"
           "seed: 3\n" +
           extra;
}

}  // namespace

TEST_CASE("config parsing resolves paths and applies defaults") {
    const auto c = parse_config(toy_yaml("zoo: {architectures: [LINEAR_BOW], depths: [1]}\n"), toy_desk());
    CHECK(c.data.corpus == (toy_desk() / "desk_mr").lexically_normal());
    CHECK(c.zoo.grid.architectures == std::vector<Architecture>{Architecture::kLinearBow});
    CHECK(c.zoo.grid.input_forms.size() == 2);
    CHECK(c.training.epochs == 20);
    CHECK(c.budget.attacked == 30);
    CHECK(c.rules.rhos == std::vector<double>{0.1, 0.3});
    CHECK(c.seed == 3);
    CHECK_NOTHROW(c.validate());
    CHECK(c.digest() == parse_config(toy_yaml("zoo: {architectures: [LINEAR_BOW], depths: [1]}\n"), toy_desk()).digest());
}

TEST_CASE("config errors are ConfigError") {
    CHECK_THROWS_AS(parse_config(toy_yaml("zoo: {colour: blue}\n"), toy_desk()), ConfigError);
    CHECK_THROWS_AS(parse_config(toy_yaml("zoo: {architectures: [TRANSFORMER]}\n"), toy_desk()), ConfigError);
    CHECK_THROWS_AS(parse_config("seed: [", toy_desk()), ConfigError);
    CHECK_THROWS_AS(parse_config("seed: 1\n", toy_desk()), ConfigError);
    auto c = parse_config(toy_yaml(""), toy_desk());
    c.budget.transferred = 99;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    auto d = parse_config(toy_yaml(""), "/nonexistent");
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("set_seed changes every derived stream") {
    auto c = parse_config(toy_yaml(""), toy_desk());
    const auto before = c.digest();
    const auto budget = c.budget.seed;
    c.set_seed(4);
    CHECK(c.budget.seed != budget);
    CHECK(c.digest() != before);
}

TEST_CASE("emit_plot draws one marker per point and is deterministic") {
    const std::vector<Series> one{{"s", {1, 2, 3}, {0.1, 0.4, 0.2}}};
    const auto svg = emit_plot(one, {}, {"t", "x", "y"});
    CHECK(count(svg, "class=\"marker\"") == 3);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg == emit_plot(one, {}, {"t", "x", "y"}));

    const auto dir = scratch("plot");
    emit_plot(one, {}, {"t", "x", "y"}, dir / "a.svg");
    emit_plot(one, {}, {"t", "x", "y"}, dir / "b.svg");
    CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
}

TEST_CASE("emit_plot renders reference lines and rejects empty input") {
    const std::vector<Series> s{{"genetic", {2, 3}, {0.5, 0.6}}, {"greedy", {2, 3}, {0.4, 0.5}}};
    const auto svg = emit_plot(s, {{"base", 0.8}, {"all pairs", 0.3}}, {"t", "m", "rate"});
    CHECK(count(svg, "class=\"reference\"") == 2);
    CHECK(count(svg, "class=\"series\"") == 2);
    CHECK_THROWS_AS(emit_plot({}, {}, {"t", "x", "y"}), std::invalid_argument);
    CHECK_THROWS_AS(emit_plot({{"bad", {1}, {}}}, {}, {"t", "x", "y"}), std::invalid_argument);
    CHECK(count(emit_bar_chart({"a", "b"}, s, {"t", "x", "y"}), "class=\"bar\"") == 4);
}

TEST_CASE("write_report records every artifact with its hash") {
    const auto dir = scratch("report");
    Report r;
    r.add("b/x.csv", "1,2\n");
    r.add("a.txt", "hello");
    write_report(r, dir, "cfg");
    Report r2;
    r2.add("c.txt", "again");
    write_report(r2, dir, "cfg");
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    REQUIRE(manifest["artifacts"].size() == 3);
    CHECK(manifest["artifacts"][0]["name"] == "a.txt");
    for (const auto& e : manifest["artifacts"]) {
        CHECK(e["sha256"] == sha256_file(dir / e["name"].get<std::string>()));
        CHECK(e["config"] == "cfg");
    }
}

TEST_CASE("toy lab: zoo lacking an embedding contrast names the missing axis") {
    auto c = parse_config(toy_yaml("zoo: {architectures: [LINEAR_BOW, AVG_EMB_MLP], input_forms: [WORD, CHAR_NGRAM], "
                                   "embedding_inits: [RANDOM], depths: [1, 2], admission_floor: 0.0}\n"),
                          toy_desk());
    c.out = scratch("lab_missing");
    Lab lab(c);
    CHECK_THROWS_WITH_AS(lab.factor_study(), doctest::Contains("embedding"), ConfigError);
}

TEST_CASE("toy lab end to end is deterministic and cache-sound") {
    const std::string zoo =
        "zoo: {architectures: [LINEAR_BOW, AVG_EMB_MLP], input_forms: [WORD, CHAR_NGRAM], "
        "embedding_inits: [RANDOM, PRETRAINED_FILE], depths: [1, 2], admission_floor: 0.0}\n";
    auto c = parse_config(toy_yaml(zoo), toy_desk());
    c.out = scratch("lab_a");
    Report first;
    {
        Lab lab(c);
        first = lab.full_report();
        write_report(first, c.out, c.digest());
        CHECK(lab.zoo().size() == 12);
        const auto& m = lab.matrix(AttackKind::kPwws);
        CHECK(m.size() == 12);
        const auto table = first.find("factor/table1.csv");
        REQUIRE(table != nullptr);
        CHECK(count(table->content, "\n") == 5);
        const auto fig = first.find("ensemble/figure1.svg");
        REQUIRE(fig != nullptr);
        CHECK(count(fig->content, "class=\"reference\"") == 2);
        CHECK(count(fig->content, "class=\"marker\"") == 4);
        const auto t8 = first.find("rules/table8.csv");
        REQUIRE(t8 != nullptr);
        CHECK(t8->content.find("0.30,ALL") != std::string::npos);
    }
    // warm cache in the same root reproduces every artifact byte for byte
    {
        Lab lab(c);
        const auto again = lab.full_report();
        REQUIRE(again.artifacts.size() == first.artifacts.size());
        for (std::size_t i = 0; i < again.artifacts.size(); ++i) {
            CHECK_MESSAGE(again.artifacts[i].content == first.artifacts[i].content, again.artifacts[i].name);
        }
    }
    // a fresh root (cold cache) reproduces the tables too
    {
        auto cold = c;
        cold.out = scratch("lab_b");
        Lab lab(cold);
        const auto table = lab.factor_study();
        CHECK(table.find("factor/table1.csv")->content == first.find("factor/table1.csv")->content);
    }
    // changed hyperparameters miss the cache
    {
        auto changed = c;
        changed.training.epochs = 19;
        Lab lab(changed);
        lab.zoo();
        std::size_t bins = 0;
        for (const auto& e : std::filesystem::directory_iterator(c.out / "cache" / "models")) {
            bins += e.path().extension() == ".bin";
        }
        CHECK(bins == 24 + 12);  // zoo and twins at 20 epochs, zoo at 19
    }
}

TEST_CASE("cli exit codes") {
    const std::string exe = UAWR_LAB_EXE;
    const auto dir = scratch("cli");
    std::ofstream(dir / "bad.yaml") << "data: {corpus: nowhere, pos_lexicon: x, lexicon: y}\n";
    const auto run = [&](const std::string& args) {
        const int status = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("train-zoo --config " + (dir / "bad.yaml").string()) == 1);
    CHECK(run("train-zoo --config " + (dir / "missing.yaml").string()) == 1);
    std::ofstream(dir / "toy.yaml")
        << "data:\n  corpus: " << (toy_desk() / "desk_mr").string() << "\n  pos_lexicon: "
        << (toy_desk() / "pos_lexicon.tsv").string() << "\n  lexicon: " << (toy_desk() / "lexicon.tsv").string()
        << "\nzoo: {architectures: [LINEAR_BOW], input_forms: [WORD], embedding_inits: [RANDOM], depths: [1], "
           "admission_floor: 0.0}\ntraining: {epochs: 2, embedding_dim: 4, hidden_dim: 4}\n";
    CHECK(run("train-zoo --config " + (dir / "toy.yaml").string() + " --out " + (dir / "out").string()) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "manifest.json"));
    CHECK(std::filesystem::exists(dir / "out" / "zoo" / "models.csv"));
    // a single-model zoo has no contrasts: runtime stage, configuration cause
    CHECK(run("factor-study --config " + (dir / "toy.yaml").string() + " --out " + (dir / "out").string()) == 1);
}
