#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "uawr/error.hpp"
#include "uawr/hash.hpp"
#include "uawr/lab.hpp"
#include "uawr/rng.hpp"

namespace uawr::lab {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    if (!node) return;
    if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
    if (!node || !node[key]) return;
    try {
        out = node[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where + "." + key + ": bad value");
    }
}

template <typename T, typename Parse>
std::vector<T> read_enum_list(const YAML::Node& node, const char* key, const std::string& where, Parse parse,
                              std::vector<T> fallback) {
    if (!node || !node[key]) return fallback;
    std::vector<T> out;
    for (const auto& item : node[key]) {
        const auto text = item.as<std::string>();
        const auto v = parse(text);
        if (!v) throw ConfigError(where + "." + key + ": unknown value '" + text + "'");
        out.push_back(*v);
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    budget.seed = derive_seed(s, stream_id("budget"));
    ga.seed = derive_seed(s, stream_id("ga"));
    sweep.search.seed = derive_seed(s, stream_id("search"));
}

void ExperimentConfig::validate() const {
    auto must_exist = [](const std::filesystem::path& p, const char* what) {
        if (!std::filesystem::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
    };
    must_exist(data.corpus, "corpus");
    must_exist(data.pos_lexicon, "POS lexicon");
    must_exist(data.lexicon, "synonym lexicon");
    if (data.embeddings) must_exist(*data.embeddings, "embedding file");
    const auto& g = zoo.grid;
    if (g.architectures.empty() || g.input_forms.empty() || g.embedding_inits.empty() || g.depths.empty()) {
        throw ConfigError("zoo: every axis needs at least one level");
    }
    if (zoo.seeds.empty()) throw ConfigError("zoo: seeds must be non-empty");
    for (auto e : g.embedding_inits) {
        if (e == EmbeddingInit::kPretrainedFile && !data.embeddings) {
            throw ConfigError("zoo: PRETRAINED_FILE requires data.embeddings");
        }
    }
    if (attacks.empty()) throw ConfigError("attack.engines must be non-empty");
    if (budget.attacked == 0 || budget.transferred == 0) throw ConfigError("budget: sizes must be positive");
    if (budget.transferred > budget.attacked) throw ConfigError("budget: transferred exceeds attacked");
    if (ga.population < 2 || ga.generations < 1) throw ConfigError("attack.ga: population >= 2 and generations >= 1");
    if (training.batch_size == 0 || training.embedding_dim == 0 || training.hidden_dim == 0) {
        throw ConfigError("training: sizes must be positive");
    }
    if (!(training.learning_rate > 0.0)) throw ConfigError("training: learning_rate must be positive");
    for (double r : rules.rhos) {
        if (!(r > 0.0 && r <= 1.0)) throw ConfigError("rules.rho values must lie in (0, 1]");
    }
    if (rules.rhos.empty()) throw ConfigError("rules.rho must be non-empty");
    if (sweep.sizes.empty()) throw ConfigError("ensemble.sizes must be non-empty");
    if (workers == 0) throw ConfigError("workers must be positive");
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream o;
    o << "corpus=" << data.corpus.string() << '\n'
      << "format=" << (data.format == CorpusFormat::kSplitDirectory ? "split" : "single") << '\n'
      << "pos_lexicon=" << data.pos_lexicon.string() << '\n'
      << "lexicon=" << data.lexicon.string() << '\n'
      << "embeddings=" << (data.embeddings ? data.embeddings->string() : "") << '\n';
    o << "architectures=";
    for (auto a : zoo.grid.architectures) o << to_string(a) << ',';
    o << "\ninput_forms=";
    for (auto f : zoo.grid.input_forms) o << to_string(f) << ',';
    o << "\nembedding_inits=";
    for (auto e : zoo.grid.embedding_inits) o << to_string(e) << ',';
    o << "\ndepths=";
    for (int d : zoo.grid.depths) o << d << ',';
    o << "\nseeds=";
    for (auto s : zoo.seeds) o << s << ',';
    o << "\nadmission_floor=" << fmt(zoo.admission_floor) << '\n';
    o << "training=" << training.digest() << '\n';
    o << "attacks=";
    for (auto a : attacks) o << to_string(a) << ',';
    o << "\nga=" << ga.population << ',' << ga.generations << ',' << ga.seed << '\n';
    o << "budget=" << budget.attacked << ',' << budget.transferred << ',' << budget.seed << '\n';
    o << "sizes=";
    for (auto m : sweep.sizes) o << m << ',';
    const auto& s = sweep.search;
    o << "\nsearch=" << s.population << ',' << s.generations << ',' << fmt(s.mutation_probability) << ','
      << s.elitism << ',' << s.seed << ',' << s.exclude_members << '\n';
    o << "rho=";
    for (double r : rules.rhos) o << fmt(r) << ',';
    o << "\nmin_support=" << rules.min_support << "\nrule_ensemble=" << rules.ensemble_size << "\nmembers=";
    for (const auto& m : rules.members) o << m << ',';
    o << "\ntop_rules=" << rules.top_rules << "\nseed=" << seed << '\n';
    return o.str();
}

std::string ExperimentConfig::digest() const { return sha256_hex(canonical()).substr(0, 16); }

ExperimentConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
    check_keys(root, "config",
               {"data", "zoo", "training", "attack", "budget", "ensemble", "rules", "seed", "workers", "out"});

    ExperimentConfig c;
    const auto data = root["data"];
    if (!data) throw ConfigError("config: missing 'data' section");
    check_keys(data, "data", {"corpus", "format", "pos_lexicon", "lexicon", "embeddings"});
    for (const char* key : {"corpus", "pos_lexicon", "lexicon"}) {
        if (!data[key]) throw ConfigError(std::string("data.") + key + " is required");
    }
    c.data.corpus = resolve(base_dir, data["corpus"].as<std::string>());
    c.data.pos_lexicon = resolve(base_dir, data["pos_lexicon"].as<std::string>());
    c.data.lexicon = resolve(base_dir, data["lexicon"].as<std::string>());
    if (data["embeddings"]) c.data.embeddings = resolve(base_dir, data["embeddings"].as<std::string>());
    if (data["format"]) {
        const auto f = data["format"].as<std::string>();
        if (f == "split") {
            c.data.format = CorpusFormat::kSplitDirectory;
        } else if (f == "single") {
            c.data.format = CorpusFormat::kSingleFile;
        } else {
            throw ConfigError("data.format must be 'split' or 'single'");
        }
    }

    const auto zoo = root["zoo"];
    check_keys(zoo, "zoo", {"architectures", "input_forms", "embedding_inits", "depths", "seeds", "admission_floor"});
    auto& g = c.zoo.grid;
    g.architectures = read_enum_list(zoo, "architectures", "zoo", parse_architecture,
                                     std::vector<Architecture>{Architecture::kLinearBow, Architecture::kAvgEmbMlp,
                                                               Architecture::kConv1d, Architecture::kRecurrent});
    g.input_forms = read_enum_list(zoo, "input_forms", "zoo", parse_input_form,
                                   std::vector<InputForm>{InputForm::kWord, InputForm::kCharNgram});
    g.embedding_inits = read_enum_list(zoo, "embedding_inits", "zoo", parse_embedding_init,
                                       std::vector<EmbeddingInit>{EmbeddingInit::kRandom});
    g.depths = {1, 2};
    read(zoo, "depths", g.depths, "zoo");
    read(zoo, "seeds", c.zoo.seeds, "zoo");
    read(zoo, "admission_floor", c.zoo.admission_floor, "zoo");

    const auto tr = root["training"];
    check_keys(tr, "training",
               {"epochs", "batch_size", "learning_rate", "unk_rate", "embedding_dim", "hidden_dim", "clip_norm"});
    read(tr, "epochs", c.training.epochs, "training");
    read(tr, "batch_size", c.training.batch_size, "training");
    read(tr, "learning_rate", c.training.learning_rate, "training");
    read(tr, "unk_rate", c.training.unk_rate, "training");
    read(tr, "embedding_dim", c.training.embedding_dim, "training");
    read(tr, "hidden_dim", c.training.hidden_dim, "training");
    read(tr, "clip_norm", c.training.clip_norm, "training");

    const auto at = root["attack"];
    check_keys(at, "attack", {"engines", "ga"});
    c.attacks = read_enum_list(at, "engines", "attack", parse_attack_kind, c.attacks);
    if (at && at["ga"]) {
        check_keys(at["ga"], "attack.ga", {"population", "generations"});
        read(at["ga"], "population", c.ga.population, "attack.ga");
        read(at["ga"], "generations", c.ga.generations, "attack.ga");
    }

    const auto bu = root["budget"];
    check_keys(bu, "budget", {"attacked", "transferred"});
    read(bu, "attacked", c.budget.attacked, "budget");
    read(bu, "transferred", c.budget.transferred, "budget");

    const auto en = root["ensemble"];
    check_keys(en, "ensemble",
               {"sizes", "population", "generations", "mutation_probability", "elitism", "exclude_members"});
    read(en, "sizes", c.sweep.sizes, "ensemble");
    auto& s = c.sweep.search;
    read(en, "population", s.population, "ensemble");
    read(en, "generations", s.generations, "ensemble");
    read(en, "mutation_probability", s.mutation_probability, "ensemble");
    read(en, "elitism", s.elitism, "ensemble");
    read(en, "exclude_members", s.exclude_members, "ensemble");

    const auto ru = root["rules"];
    check_keys(ru, "rules", {"rho", "min_support", "ensemble_size", "members", "top_rules"});
    read(ru, "rho", c.rules.rhos, "rules");
    read(ru, "min_support", c.rules.min_support, "rules");
    read(ru, "ensemble_size", c.rules.ensemble_size, "rules");
    read(ru, "members", c.rules.members, "rules");
    read(ru, "top_rules", c.rules.top_rules, "rules");

    std::uint64_t seed = 0;
    read(root, "seed", seed, "config");
    c.set_seed(seed);
    read(root, "workers", c.workers, "config");
    if (root["out"]) c.out = root["out"].as<std::string>();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

}  // namespace uawr::lab
