#pragma once

// Experiment orchestration: declarative config, cached zoo training,
// transfer matrices, factor study, ensemble sweep and rule pipeline.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uawr/attack.hpp"
#include "uawr/corpus.hpp"
#include "uawr/ensemble.hpp"
#include "uawr/lexicon.hpp"
#include "uawr/model.hpp"
#include "uawr/rules.hpp"
#include "uawr/transfer.hpp"

namespace uawr::lab {

struct DataPaths {
    std::filesystem::path corpus;
    CorpusFormat format = CorpusFormat::kSplitDirectory;
    std::filesystem::path pos_lexicon;
    std::filesystem::path lexicon;
    std::optional<std::filesystem::path> embeddings;
};

struct ZooConfig {
    FactorGrid grid;
    std::vector<std::uint64_t> seeds{1};
    /// Models below this test accuracy are excluded and logged.
    double admission_floor = 0.75;
};

struct SweepConfig {
    std::vector<std::size_t> sizes{2, 3, 4, 5, 6, 7};
    SearchConfig search;
};

struct RuleConfig {
    std::vector<double> rhos{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    std::size_t min_support = 1;
    /// Size of the searched mining ensemble when `members` is empty.
    std::size_t ensemble_size = 3;
    /// Fixed mining ensemble (model ids); overrides the search.
    std::vector<std::string> members;
    /// Rows in the top-rules listing.
    std::size_t top_rules = 20;
};

struct ExperimentConfig {
    DataPaths data;
    ZooConfig zoo;
    TrainingConfig training;
    std::vector<AttackKind> attacks{AttackKind::kPwws, AttackKind::kGa};
    GaConfig ga;
    TransferBudget budget;
    SweepConfig sweep;
    RuleConfig rules;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::filesystem::path out = "out";

    /// Applies the seed to every derived stream (budget, GA, search).
    void set_seed(std::uint64_t s);
    /// Throws ConfigError on missing files or inconsistent values.
    void validate() const;
    /// Canonical key=value dump; the basis of the config hash.
    std::string canonical() const;
    std::string digest() const;
};

/// YAML config; relative paths resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir);

struct Artifact {
    std::string name;  // relative path under the output root
    std::string content;
};

struct Report {
    std::vector<Artifact> artifacts;

    void add(std::string name, std::string content);
    const Artifact* find(const std::string& name) const;
};

/// Writes every artifact and merges them into `<out>/manifest.json` with
/// their SHA-256 and the config digest. Entries are sorted by name.
void write_report(const Report& report, const std::filesystem::path& out, const std::string& config_digest);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ReferenceLine {
    std::string label;
    double y = 0.0;
};

struct PlotLabels {
    std::string title;
    std::string x;
    std::string y;
};

/// Deterministic line plot; throws std::invalid_argument on no series or a
/// series with mismatched or empty coordinates.
std::string emit_plot(const std::vector<Series>& series, const std::vector<ReferenceLine>& references,
                      const PlotLabels& labels);
void emit_plot(const std::vector<Series>& series, const std::vector<ReferenceLine>& references,
               const PlotLabels& labels, const std::filesystem::path& path);

/// Grouped bars: one group per category, one bar per series (y aligned
/// with categories; x ignored).
std::string emit_bar_chart(const std::vector<std::string>& categories, const std::vector<Series>& series,
                           const PlotLabels& labels);

struct ZooEntry {
    ModelSpec spec;
    std::shared_ptr<const Classifier> model;
    TrainingReport report;
    double test_accuracy = 0.0;
    bool admitted = false;
};

struct SweepPoint {
    std::size_t m = 0;
    EnsembleCandidate genetic;
    EnsembleCandidate greedy;
    double genetic_realized = 0.0;
    double greedy_realized = 0.0;
};

struct SweepResult {
    AttackKind attack = AttackKind::kPwws;
    std::vector<SweepPoint> points;
    std::string best_single;
    double best_single_realized = 0.0;
    double mean_base_rate = 0.0;
    double mean_all_pairs = 0.0;
};

struct RuleResult {
    std::vector<std::string> members;
    std::vector<std::string> victims;
    RuleSet uawr;
    RuleSet pmi;
    PmiTable table;
    std::vector<RuleEvaluation> uawr_eval;  // aligned with config rhos
    std::vector<RuleEvaluation> pmi_eval;
};

/// Owns the experiment state; every stage is computed lazily once and
/// cached on disk under `<out>/cache` keyed by content hashes.
class Lab {
public:
    explicit Lab(ExperimentConfig config);

    const ExperimentConfig& config() const { return config_; }
    const Dataset& data();
    const SynonymLexicon& lexicon();
    const PretrainedEmbeddings* pretrained();

    /// Every grid model (admitted or not), trained or loaded from cache.
    const std::vector<ZooEntry>& zoo();
    std::vector<const ZooEntry*> admitted();
    std::vector<Victim> victims();
    /// Seed+1 twin of a zoo spec.
    std::shared_ptr<const Classifier> twin(const ModelSpec& spec);

    AttackFn attack(AttackKind kind);
    /// Matrix over admitted models.
    const TransferMatrix& matrix(AttackKind kind);
    /// Twin rates keyed by target id; targets whose twin yields no
    /// adversary are absent.
    const std::map<std::string, double>& base_rates(AttackKind kind);
    FactorReport factor_report(AttackKind kind);

    /// Realized transfer: attack the shared sample with `victim` and average
    /// the transfer rate over admitted models not listed in `members`.
    double realized_transfer(const Victim& victim, const std::vector<std::string>& members, AttackKind kind);
    SweepResult sweep(AttackKind kind);
    RuleResult rules();

    Report train_zoo();
    Report attack_report();
    Report transfer_report();
    Report factor_study();
    Report ensemble_sweep();
    Report mine_rules();
    Report eval_rules();
    Report full_report();

private:
    std::string model_key(const ModelSpec& spec);
    std::shared_ptr<const Classifier> load_or_train(const ModelSpec& spec, TrainingReport* report);
    std::filesystem::path cache_dir() const;
    std::string stage_key(AttackKind kind);
    std::vector<std::size_t> pool_indices(AttackKind kind);

    ExperimentConfig config_;
    std::optional<Dataset> data_;
    std::optional<SynonymLexicon> lexicon_;
    std::optional<PretrainedEmbeddings> pretrained_;
    bool pretrained_loaded_ = false;
    std::string data_digest_;
    std::string pretrained_digest_;
    std::optional<std::vector<ZooEntry>> zoo_;
    std::map<std::string, std::shared_ptr<const Classifier>> twins_;
    std::map<AttackKind, TransferMatrix> matrices_;
    std::map<AttackKind, std::map<std::string, double>> base_rates_;
    std::map<AttackKind, SweepResult> sweeps_;
    std::optional<RuleResult> rules_;
};

/// Model id -> class grouping on one factor axis (e.g. "CONV_1D").
std::map<std::string, std::string> group_by(const std::vector<ModelSpec>& specs, FactorAxis axis);

}  // namespace uawr::lab
