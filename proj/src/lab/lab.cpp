#include "uawr/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "uawr/error.hpp"
#include "uawr/hash.hpp"
#include "uawr/parallel.hpp"

namespace uawr::lab {

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    // write-then-rename keeps a concurrent reader from seeing a partial file
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

std::string f6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string f2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string rho_tag(double rho) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(std::lround(rho * 100.0)));
    return buf;
}

Victim victim_of(const std::shared_ptr<const Classifier>& model) {
    return {model->id(), [model](const TokenSeq& t) { return model->logits(t); }};
}

std::string class_name(const ModelSpec& s, FactorAxis axis) {
    switch (axis) {
        case FactorAxis::kArchitecture: return std::string(to_string(s.architecture));
        case FactorAxis::kInputForm: return std::string(to_string(s.input_form));
        case FactorAxis::kEmbedding: return std::string(to_string(s.embedding_init));
        case FactorAxis::kCapacity: return "depth-" + std::to_string(s.depth);
    }
    return "?";
}

constexpr FactorAxis kAxes[] = {FactorAxis::kArchitecture, FactorAxis::kInputForm, FactorAxis::kEmbedding,
                                FactorAxis::kCapacity};

}  // namespace

std::map<std::string, std::string> group_by(const std::vector<ModelSpec>& specs, FactorAxis axis) {
    std::map<std::string, std::string> out;
    for (const auto& s : specs) out[s.id()] = class_name(s, axis);
    return out;
}

Lab::Lab(ExperimentConfig config) : config_(std::move(config)) { config_.validate(); }

std::filesystem::path Lab::cache_dir() const { return config_.out / "cache"; }

const Dataset& Lab::data() {
    if (!data_) {
        const Tokenizer tokenizer(PosLexicon::load(config_.data.pos_lexicon));
        data_ = load_dataset(config_.data.corpus, config_.data.format, tokenizer);
        if (data_->test.empty()) throw ConfigError("corpus has no test split");
        data_digest_ = dataset_digest(*data_);
    }
    return *data_;
}

const SynonymLexicon& Lab::lexicon() {
    if (!lexicon_) lexicon_ = SynonymLexicon::load(config_.data.lexicon);
    return *lexicon_;
}

const PretrainedEmbeddings* Lab::pretrained() {
    if (!pretrained_loaded_) {
        if (config_.data.embeddings) {
            pretrained_ = PretrainedEmbeddings::load(*config_.data.embeddings);
            pretrained_digest_ = sha256_file(*config_.data.embeddings);
        }
        pretrained_loaded_ = true;
    }
    return pretrained_ ? &*pretrained_ : nullptr;
}

std::string Lab::model_key(const ModelSpec& spec) {
    data();
    pretrained();
    Sha256 h;
    h.update(spec.id()).update("\n").update(data_digest_).update("\n").update(config_.training.digest());
    if (spec.embedding_init == EmbeddingInit::kPretrainedFile) h.update("\n").update(pretrained_digest_);
    return h.hex_digest().substr(0, 16);
}

std::shared_ptr<const Classifier> Lab::load_or_train(const ModelSpec& spec, TrainingReport* report) {
    const auto stem = cache_dir() / "models" / (spec.id() + "-" + model_key(spec));
    const auto bin = stem.string() + ".bin";
    const auto json = stem.string() + ".json";
    if (std::filesystem::exists(bin) && std::filesystem::exists(json)) {
        try {
            auto model = std::make_shared<const Classifier>(Classifier::load(bin));
            if (report != nullptr) {
                const auto j = nlohmann::json::parse(read_text(json));
                report->model_id = spec.id();
                report->train_accuracy = j.at("train_accuracy").get<double>();
                report->loss_curve = j.at("loss_curve").get<std::vector<double>>();
            }
            return model;
        } catch (const std::exception& e) {
            std::cerr << "cache: discarding " << bin << ": " << e.what() << '\n';
        }
    }
    TrainingReport local;
    auto model = std::make_shared<const Classifier>(train(spec, data(), config_.training, pretrained(), &local));
    std::filesystem::create_directories(stem.parent_path());
    model->save(bin + ".tmp", "key=" + model_key(spec));
    std::filesystem::rename(bin + ".tmp", bin);
    write_text(json, local.to_json());
    if (report != nullptr) *report = local;
    return model;
}

const std::vector<ZooEntry>& Lab::zoo() {
    if (zoo_) return *zoo_;
    data();
    pretrained();
    lexicon();
    const auto specs = build_zoo(config_.zoo.grid, config_.zoo.seeds);
    std::vector<ZooEntry> entries(specs.size());
    parallel_for(specs.size(), config_.workers, [&](std::size_t i) {
        auto& e = entries[i];
        e.spec = specs[i];
        e.model = load_or_train(specs[i], &e.report);
        e.test_accuracy = accuracy(*e.model, data_->test);
        e.report.test_accuracy = e.test_accuracy;
        e.admitted = e.test_accuracy >= config_.zoo.admission_floor;
    });
    for (const auto& e : entries) {
        if (!e.admitted) {
            std::cerr << "zoo: excluded " << e.spec.id() << " (test accuracy " << f6(e.test_accuracy) << " < "
                      << config_.zoo.admission_floor << ")\n";
        }
    }
    zoo_ = std::move(entries);
    return *zoo_;
}

std::vector<const ZooEntry*> Lab::admitted() {
    std::vector<const ZooEntry*> out;
    for (const auto& e : zoo()) {
        if (e.admitted) out.push_back(&e);
    }
    return out;
}

std::vector<Victim> Lab::victims() {
    std::vector<Victim> out;
    for (const auto* e : admitted()) out.push_back(victim_of(e->model));
    return out;
}

std::shared_ptr<const Classifier> Lab::twin(const ModelSpec& spec) {
    ModelSpec t = spec;
    t.seed = spec.seed + 1;
    auto it = twins_.find(t.id());
    if (it != twins_.end()) return it->second;
    for (const auto& e : zoo()) {
        if (e.spec == t) return twins_[t.id()] = e.model;
    }
    return twins_[t.id()] = load_or_train(t, nullptr);
}

AttackFn Lab::attack(AttackKind kind) { return make_attack({kind, config_.ga}, lexicon()); }

std::string Lab::stage_key(AttackKind kind) {
    Sha256 h;
    for (const auto* e : admitted()) h.update(e->spec.id()).update("=").update(model_key(e->spec)).update(";");
    h.update(to_string(kind)).update(";");
    if (kind == AttackKind::kGa) {
        h.update(std::to_string(config_.ga.population) + "," + std::to_string(config_.ga.generations) + "," +
                 std::to_string(config_.ga.seed) + ";");
    }
    h.update(std::to_string(config_.budget.attacked) + "," + std::to_string(config_.budget.transferred) + "," +
             std::to_string(config_.budget.seed));
    h.update(";").update(sha256_file(config_.data.lexicon));
    return h.hex_digest().substr(0, 16);
}

const TransferMatrix& Lab::matrix(AttackKind kind) {
    auto it = matrices_.find(kind);
    if (it != matrices_.end()) return it->second;
    const std::string stem = "matrix-" + std::string(to_string(kind)) + "-" + stage_key(kind);
    const auto rates = cache_dir() / (stem + ".csv");
    const auto sizes = cache_dir() / (stem + ".sizes.csv");
    TransferMatrix m;
    if (std::filesystem::exists(rates) && std::filesystem::exists(sizes)) {
        m = TransferMatrix::from_csv(read_text(rates), read_text(sizes));
    } else {
        const auto v = victims();
        if (v.empty()) throw ConfigError("zoo: no admitted models");
        m = build_transfer_matrix(v, attack(kind), data(), config_.budget, config_.workers);
        write_text(rates, m.to_csv());
        write_text(sizes, m.sizes_csv());
    }
    return matrices_[kind] = std::move(m);
}

const std::map<std::string, double>& Lab::base_rates(AttackKind kind) {
    auto it = base_rates_.find(kind);
    if (it != base_rates_.end()) return it->second;
    const auto path = cache_dir() / ("base-" + std::string(to_string(kind)) + "-" + stage_key(kind) + ".json");
    std::map<std::string, double> rates;
    if (std::filesystem::exists(path)) {
        rates = nlohmann::json::parse(read_text(path)).get<std::map<std::string, double>>();
    } else {
        const auto models = admitted();
        std::vector<std::shared_ptr<const Classifier>> twins(models.size());
        parallel_for(models.size(), config_.workers, [&](std::size_t i) {
            ModelSpec t = models[i]->spec;
            t.seed += 1;
            twins[i] = load_or_train(t, nullptr);
        });
        std::vector<std::optional<double>> out(models.size());
        const auto fn = attack(kind);
        parallel_for(models.size(), config_.workers, [&](std::size_t i) {
            out[i] = twin_transfer_rate(victim_of(models[i]->model), victim_of(twins[i]), fn, data(), config_.budget);
        });
        for (std::size_t i = 0; i < models.size(); ++i) {
            twins_[twins[i]->id()] = twins[i];
            if (out[i]) {
                rates[models[i]->spec.id()] = *out[i];
            } else {
                std::cerr << "base rate: twin of " << models[i]->spec.id() << " produced no adversary\n";
            }
        }
        write_text(path, nlohmann::json(rates).dump(2));
    }
    return base_rates_[kind] = std::move(rates);
}

FactorReport Lab::factor_report(AttackKind kind) {
    std::vector<ModelSpec> specs;
    for (const auto* e : admitted()) specs.push_back(e->spec);
    for (auto axis : kAxes) {
        bool contrast = false;
        for (std::size_t a = 0; a < specs.size() && !contrast; ++a) {
            for (std::size_t b = 0; b < specs.size() && !contrast; ++b) contrast = differs_only_in(specs[a], specs[b], axis);
        }
        if (!contrast) {
            throw ConfigError("factor study: the admitted zoo has no contrast on the " + std::string(to_string(axis)) +
                              " axis");
        }
    }
    const auto& m = matrix(kind);
    FactorReport report;
    report.base_rates = base_rates(kind);
    for (auto axis : kAxes) {
        try {
            report.scores.push_back(factor_significance(m, specs, report.base_rates, axis));
        } catch (const ConfigError&) {
            throw ConfigError("factor study: no scored pair on the " + std::string(to_string(axis)) +
                              " axis (missing rows or base rates)");
        }
    }
    return report;
}

std::vector<std::size_t> Lab::pool_indices(AttackKind kind) {
    const auto& m = matrix(kind);
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.row_missing(i)) pool.push_back(i);
    }
    if (pool.empty()) throw ConfigError("ensemble: no model produced adversaries");
    return pool;
}

double Lab::realized_transfer(const Victim& victim, const std::vector<std::string>& members, AttackKind kind) {
    const auto source = attack_source(victim, attack(kind), data(), config_.budget);
    if (source.transfer_set.empty()) return 0.0;
    const auto targets = victims();
    std::vector<double> rates(targets.size(), -1.0);
    parallel_for(targets.size(), config_.workers, [&](std::size_t i) {
        if (std::find(members.begin(), members.end(), targets[i].id) != members.end()) return;
        rates[i] = transfer_rate(source.transfer_set, targets[i].fn);
    });
    double sum = 0.0;
    std::size_t n = 0;
    for (double r : rates) {
        if (r < 0.0) continue;
        sum += r;
        ++n;
    }
    if (n == 0) throw ConfigError("realized transfer: no held-out model remains");
    return sum / static_cast<double>(n);
}

SweepResult Lab::sweep(AttackKind kind) {
    auto it = sweeps_.find(kind);
    if (it != sweeps_.end()) return it->second;
    const auto& m = matrix(kind);
    const auto pool = pool_indices(kind);
    std::vector<ModelSpec> specs;
    std::map<std::string, std::shared_ptr<const Classifier>> by_id;
    for (const auto* e : admitted()) {
        specs.push_back(e->spec);
        by_id[e->spec.id()] = e->model;
    }
    auto ensemble_victim = [&](const std::vector<std::string>& ids) {
        std::vector<Victim> members;
        for (const auto& id : ids) members.push_back(victim_of(by_id.at(id)));
        return EnsembleModel(std::move(members)).as_victim();
    };

    SweepResult r;
    r.attack = kind;
    // best single source: highest mean over every other model
    double best = -1.0;
    for (std::size_t s : pool) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t t = 0; t < m.size(); ++t) {
            if (t == s) continue;
            sum += m.at(s, t);
            ++n;
        }
        if (n > 0 && sum / static_cast<double>(n) > best + 1e-12) {
            best = sum / static_cast<double>(n);
            r.best_single = m.model_ids[s];
        }
    }
    r.best_single_realized = realized_transfer(victim_of(by_id.at(r.best_single)), {r.best_single}, kind);

    for (std::size_t size : config_.sweep.sizes) {
        if (size > pool.size()) {
            throw ConfigError("ensemble: size " + std::to_string(size) + " exceeds pool of " +
                              std::to_string(pool.size()));
        }
        SweepPoint p;
        p.m = size;
        SearchConfig sc = config_.sweep.search;
        sc.ensemble_size = size;
        p.genetic = genetic_search(m, pool, sc);
        p.greedy = greedy_expert_baseline(m, pool, specs, size, sc.exclude_members);
        const auto g_ids = p.genetic.member_ids(m);
        const auto b_ids = p.greedy.member_ids(m);
        p.genetic_realized = realized_transfer(ensemble_victim(g_ids), g_ids, kind);
        p.greedy_realized = g_ids == b_ids ? p.genetic_realized : realized_transfer(ensemble_victim(b_ids), b_ids, kind);
        r.points.push_back(std::move(p));
    }

    const auto& base = base_rates(kind);
    double bsum = 0.0;
    for (const auto& [id, v] : base) bsum += v;
    r.mean_base_rate = base.empty() ? 0.0 : bsum / static_cast<double>(base.size());
    double psum = 0.0;
    std::size_t pn = 0;
    for (std::size_t s : pool) {
        for (std::size_t t = 0; t < m.size(); ++t) {
            if (s == t) continue;
            psum += m.at(s, t);
            ++pn;
        }
    }
    r.mean_all_pairs = pn == 0 ? 0.0 : psum / static_cast<double>(pn);
    return sweeps_[kind] = r;
}

RuleResult Lab::rules() {
    if (rules_) return *rules_;
    const AttackKind kind = config_.attacks.front();
    RuleResult r;
    std::map<std::string, const ZooEntry*> by_id;
    for (const auto* e : admitted()) by_id[e->spec.id()] = e;
    if (!config_.rules.members.empty()) {
        r.members = config_.rules.members;
        for (const auto& id : r.members) {
            if (!by_id.count(id)) throw ConfigError("rules.members: unknown or excluded model " + id);
        }
    } else {
        SearchConfig sc = config_.sweep.search;
        sc.ensemble_size = config_.rules.ensemble_size;
        r.members = genetic_search(matrix(kind), pool_indices(kind), sc).member_ids(matrix(kind));
    }
    std::vector<Victim> members;
    Sha256 h;
    for (const auto& id : r.members) {
        members.push_back(victim_of(by_id.at(id)->model));
        h.update(id).update("=").update(model_key(by_id.at(id)->spec)).update(";");
    }
    h.update(std::to_string(config_.rules.min_support)).update(";").update(sha256_file(config_.data.lexicon));
    const auto key = h.hex_digest().substr(0, 16);
    const auto& d = data();

    const auto cached = cache_dir() / ("uawr-rules-" + key + ".tsv");
    if (std::filesystem::exists(cached)) {
        r.uawr = RuleSet::from_tsv(read_text(cached));
    } else {
        const EnsembleModel ensemble(std::move(members));
        r.uawr = mine_uawr(ensemble.as_logit_fn(), d.train, lexicon(),
                           {config_.rules.min_support, config_.workers});
        write_text(cached, r.uawr.to_tsv());
    }
    r.table = PmiTable::build(d.train, d.label_count());
    r.pmi = pmi_rules(r.table, d.train, lexicon(), config_.rules.min_support);
    if (r.uawr.size() == 0 || r.pmi.size() == 0) throw ConfigError("rules: empty rule set after support filtering");

    std::vector<Victim> victims;
    std::vector<InputForm> forms;
    for (const auto* e : admitted()) {
        if (std::find(r.members.begin(), r.members.end(), e->spec.id()) != r.members.end()) continue;
        victims.push_back(victim_of(e->model));
        forms.push_back(e->spec.input_form);
        r.victims.push_back(e->spec.id());
    }
    if (victims.empty()) throw ConfigError("rules: no victim outside the mining ensemble");
    for (double rho : config_.rules.rhos) {
        r.uawr_eval.push_back(evaluate_rules(r.uawr, victims, forms, d.test, rho, config_.workers));
        r.pmi_eval.push_back(evaluate_rules(r.pmi, victims, forms, d.test, rho, config_.workers));
    }
    rules_ = r;
    return r;
}

// ---------------------------------------------------------------------------
// Reports

Report Lab::train_zoo() {
    Report rep;
    std::string csv = "model,architecture,input_form,embedding_init,depth,seed,train_accuracy,test_accuracy,admitted\n";
    for (const auto& e : zoo()) {
        csv += e.spec.id() + "," + std::string(to_string(e.spec.architecture)) + "," +
               std::string(to_string(e.spec.input_form)) + "," + std::string(to_string(e.spec.embedding_init)) + "," +
               std::to_string(e.spec.depth) + "," + std::to_string(e.spec.seed) + "," +
               f6(e.report.train_accuracy) + "," + f6(e.test_accuracy) + "," + (e.admitted ? "1" : "0") + "\n";
        rep.add("zoo/" + e.spec.id() + ".json", e.report.to_json() + "\n");
    }
    rep.add("zoo/models.csv", csv);
    return rep;
}

Report Lab::attack_report() {
    Report rep;
    const auto v = victims();
    for (auto kind : config_.attacks) {
        const auto fn = attack(kind);
        std::vector<SourceAttack> sources(v.size());
        parallel_for(v.size(), config_.workers,
                     [&](std::size_t i) { sources[i] = attack_source(v[i], fn, data(), config_.budget); });
        const std::string dir = "attacks/" + std::string(to_string(kind)) + "/";
        std::string summary = "model,attacked,successes,vacuous,transferred,mean_queries,mean_word_pct\n";
        for (const auto& s : sources) {
            std::string lines;
            std::size_t ok = 0, queries = 0;
            double words = 0.0;
            for (const auto& r : s.results) {
                lines += r.to_json() + "\n";
                ok += r.success;
                queries += r.queries;
                words += r.word_modified_fraction;
            }
            const double n = s.results.empty() ? 1.0 : static_cast<double>(s.results.size());
            rep.add(dir + s.source_id + ".jsonl", lines);
            summary += s.source_id + "," + std::to_string(s.results.size()) + "," + std::to_string(ok) + "," +
                       std::to_string(s.vacuous) + "," + std::to_string(s.transfer_set.size()) + "," +
                       f2(static_cast<double>(queries) / n) + "," + f2(100.0 * words / n) + "\n";
        }
        rep.add(dir + "summary.csv", summary);
    }
    return rep;
}

Report Lab::transfer_report() {
    Report rep;
    std::vector<ModelSpec> specs;
    for (const auto* e : admitted()) specs.push_back(e->spec);
    for (auto kind : config_.attacks) {
        const auto& m = matrix(kind);
        const std::string tag(to_string(kind));
        rep.add("transfer/matrix_" + tag + ".csv", m.to_csv());
        rep.add("transfer/sizes_" + tag + ".csv", m.sizes_csv());
        for (auto axis : {FactorAxis::kArchitecture, FactorAxis::kInputForm}) {
            rep.add("transfer/class_" + tag + "_" + std::string(to_string(axis)) + ".csv",
                    class_level_matrix(m, group_by(specs, axis)).to_csv());
        }
    }
    return rep;
}

Report Lab::factor_study() {
    Report rep;
    std::vector<FactorReport> reports;
    for (auto kind : config_.attacks) {
        reports.push_back(factor_report(kind));
        const std::string tag(to_string(kind));
        rep.add("factor/report_" + tag + ".json", reports.back().to_json() + "\n");
        const auto& m = matrix(kind);
        std::string csv = "model,base_rate,mean_incoming\n";
        for (std::size_t t = 0; t < m.size(); ++t) {
            const auto b = reports.back().base_rates.find(m.model_ids[t]);
            const auto in = mean_incoming_rate(m, t);
            csv += m.model_ids[t] + "," + (b == reports.back().base_rates.end() ? "NA" : f6(b->second)) + "," +
                   (in ? f6(*in) : "NA") + "\n";
        }
        rep.add("factor/intra_inter_" + tag + ".csv", csv);
    }
    std::string table = "factor";
    for (auto kind : config_.attacks) table += "," + std::string(to_string(kind));
    for (auto kind : config_.attacks) table += ",pairs_" + std::string(to_string(kind));
    table += "\n";
    std::vector<std::string> categories;
    std::vector<Series> bars;
    for (auto kind : config_.attacks) bars.push_back({std::string(to_string(kind)), {}, {}});
    for (std::size_t a = 0; a < std::size(kAxes); ++a) {
        categories.emplace_back(to_string(kAxes[a]));
        table += std::string(to_string(kAxes[a]));
        for (std::size_t k = 0; k < reports.size(); ++k) {
            table += "," + f6(reports[k].scores[a].score);
            bars[k].y.push_back(reports[k].scores[a].score);
        }
        for (const auto& r : reports) table += "," + std::to_string(r.scores[a].pairs);
        table += "\n";
    }
    rep.add("factor/table1.csv", table);
    rep.add("factor/factor_study.svg",
            emit_bar_chart(categories, bars, {"Factor significance", "factor", "mean |r - base|"}));
    return rep;
}

Report Lab::ensemble_sweep() {
    Report rep;
    const AttackKind kind = config_.attacks.front();
    const auto r = sweep(kind);
    const auto& m = matrix(kind);
    auto join = [](const std::vector<std::string>& ids) {
        std::string out;
        for (const auto& id : ids) out += (out.empty() ? "" : " ") + id;
        return out;
    };
    std::string csv = "m,genetic_fitness,genetic_realized,greedy_fitness,greedy_realized,genetic_members,greedy_members\n";
    Series genetic{"genetic search", {}, {}}, greedy{"greedy expert", {}, {}};
    for (const auto& p : r.points) {
        csv += std::to_string(p.m) + "," + f6(p.genetic.fitness) + "," + f6(p.genetic_realized) + "," +
               f6(p.greedy.fitness) + "," + f6(p.greedy_realized) + "," + join(p.genetic.member_ids(m)) + "," +
               join(p.greedy.member_ids(m)) + "\n";
        genetic.x.push_back(static_cast<double>(p.m));
        genetic.y.push_back(p.genetic_realized);
        greedy.x.push_back(static_cast<double>(p.m));
        greedy.y.push_back(p.greedy_realized);

        SearchTrace trace;
        SearchConfig sc = config_.sweep.search;
        sc.ensemble_size = p.m;
        genetic_search(m, pool_indices(kind), sc, &trace);
        rep.add("ensemble/trace_m" + std::to_string(p.m) + ".csv", trace.to_csv());
        rep.add("ensemble/candidate_m" + std::to_string(p.m) + ".json", candidate_json(p.genetic, m, sc) + "\n");
    }
    rep.add("ensemble/figure1.csv", csv);
    nlohmann::ordered_json summary;
    summary["attack"] = std::string(to_string(kind));
    summary["best_single"] = r.best_single;
    summary["best_single_realized"] = r.best_single_realized;
    summary["mean_base_rate"] = r.mean_base_rate;
    summary["mean_all_pairs"] = r.mean_all_pairs;
    rep.add("ensemble/summary.json", summary.dump(2) + "\n");
    rep.add("ensemble/figure1.svg",
            emit_plot({genetic, greedy},
                      {{"mean base rate", r.mean_base_rate}, {"mean all-pairs rate", r.mean_all_pairs}},
                      {"Ensemble transfer by size", "ensemble size m", "transfer rate on held-out models"}));
    return rep;
}

Report Lab::mine_rules() {
    Report rep;
    const auto r = rules();
    const auto& d = data();
    rep.add("rules/uawr_rules.tsv", r.uawr.to_tsv());
    rep.add("rules/pmi_rules.tsv", r.pmi.to_tsv());
    rep.add("rules/pmi_table.tsv", r.table.to_tsv());
    std::string members;
    for (const auto& id : r.members) members += id + "\n";
    rep.add("rules/ensemble_members.txt", members);

    std::string top = "label,original,replacement,salience,support";
    for (const auto& l : d.labels) top += ",pmi_before_" + l + ",pmi_after_" + l;
    top += "\n";
    for (std::size_t z = 0; z < d.label_count(); ++z) {
        std::size_t shown = 0;
        for (const auto& rule : r.uawr.rules()) {
            if (rule.label != z || shown == config_.rules.top_rules) continue;
            ++shown;
            top += d.labels[z] + "," + rule.original + "," + rule.replacement + "," + f6(rule.salience) + "," +
                   std::to_string(rule.support);
            for (std::size_t y = 0; y < d.label_count(); ++y) {
                top += "," + f6(r.table.pmi(rule.original, y)) + "," + f6(r.table.pmi(rule.replacement, y));
            }
            top += "\n";
        }
    }
    rep.add("rules/table5.csv", top);
    return rep;
}

Report Lab::eval_rules() {
    Report rep;
    const auto r = rules();
    const auto& rhos = config_.rules.rhos;
    std::size_t main = rhos.size() - 1;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        if (std::abs(rhos[i] - 0.30) < 1e-9) main = i;
        rep.add("rules/eval_uawr_rho" + rho_tag(rhos[i]) + ".csv", r.uawr_eval[i].to_csv());
        rep.add("rules/eval_pmi_rho" + rho_tag(rhos[i]) + ".csv", r.pmi_eval[i].to_csv());
    }
    const auto& u = r.uawr_eval[main];
    const auto& p = r.pmi_eval[main];
    std::string t4 = "rho,scope,name,evaluated,uawr_succ_pct,uawr_word_pct,pmi_succ_pct,pmi_word_pct\n";
    for (std::size_t v = 0; v < u.victims.size(); ++v) {
        t4 += f2(u.rho) + ",victim," + u.victims[v].victim_id + "," + std::to_string(u.victims[v].evaluated) + "," +
              f2(100 * u.victims[v].success_rate) + "," + f2(100 * u.victims[v].word_fraction) + "," +
              f2(100 * p.victims[v].success_rate) + "," + f2(100 * p.victims[v].word_fraction) + "\n";
    }
    for (std::size_t g = 0; g < u.groups.size(); ++g) {
        t4 += f2(u.rho) + ",group," + u.groups[g].group + "," + std::to_string(u.groups[g].victims) + "," +
              f2(100 * u.groups[g].success_rate) + "," + f2(100 * u.groups[g].word_fraction) + "," +
              f2(100 * p.groups[g].success_rate) + "," + f2(100 * p.groups[g].word_fraction) + "\n";
    }
    rep.add("rules/table4.csv", t4);

    std::string t8 = "rho,group,uawr_succ_pct,pmi_succ_pct\n";
    std::map<std::string, Series> curves;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        for (std::size_t g = 0; g < r.uawr_eval[i].groups.size(); ++g) {
            const auto& ug = r.uawr_eval[i].groups[g];
            t8 += f2(rhos[i]) + "," + ug.group + "," + f2(100 * ug.success_rate) + "," +
                  f2(100 * r.pmi_eval[i].groups[g].success_rate) + "\n";
            auto& s = curves[ug.group];
            s.label = "UAWR " + ug.group;
            s.x.push_back(100 * rhos[i]);
            s.y.push_back(100 * ug.success_rate);
        }
    }
    rep.add("rules/table8.csv", t8);
    std::vector<Series> series;
    for (auto& [name, s] : curves) series.push_back(std::move(s));
    rep.add("rules/budget.svg", emit_plot(series, {}, {"Rule attack success by budget", "max modified words (%)",
                                                       "Succ%"}));
    return rep;
}

Report Lab::full_report() {
    Report rep;
    for (auto part : {train_zoo(), transfer_report(), factor_study(), ensemble_sweep(), mine_rules(), eval_rules()}) {
        for (auto& a : part.artifacts) rep.add(std::move(a.name), std::move(a.content));
    }
    return rep;
}

}  // namespace uawr::lab
