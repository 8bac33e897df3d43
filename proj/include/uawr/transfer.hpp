#pragma once

// Cross-model transfer of adversarial examples: pairwise rate matrices, twin
// base rates, single-axis factor significance and class-level aggregates.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uawr/attack.hpp"
#include "uawr/model.hpp"

namespace uawr {

struct AdversarialSample {
    std::size_t example_id = 0;
    TokenSeq tokens;
    std::size_t gold = 0;
};

/// Fraction of `set` the target misclassifies. Throws std::invalid_argument
/// on an empty set.
double transfer_rate(std::span<const AdversarialSample> set, const LogitFn& target);

struct TransferBudget {
    std::size_t attacked = 200;
    std::size_t transferred = 100;
    std::uint64_t seed = 0;
};

/// A named victim; `fn` must allow concurrent calls.
struct Victim {
    std::string id;
    LogitFn fn;
};

std::vector<Victim> victims_of(std::span<const Classifier> models);

/// Test-set indices attacked for every source (seed-sampled, sorted).
std::vector<std::size_t> attack_sample(std::size_t test_size, const TransferBudget& budget);

struct SourceAttack {
    std::string source_id;
    std::vector<AdversarialResult> results;
    /// Successful non-vacuous adversaries, sampled down to budget.transferred.
    std::vector<AdversarialSample> transfer_set;
    std::size_t vacuous = 0;  // clean input already misclassified
};

SourceAttack attack_source(const Victim& source, const AttackFn& attack, const Dataset& data,
                           const TransferBudget& budget);

/// Rates r(s,t) in row-major order (row = source). Rows of sources without a
/// single successful adversary are missing and hold NaN.
struct TransferMatrix {
    std::vector<std::string> model_ids;
    std::vector<double> rates;
    std::vector<std::size_t> sample_size;

    std::size_t size() const { return model_ids.size(); }
    double at(std::size_t s, std::size_t t) const { return rates[s * size() + t]; }
    std::size_t samples(std::size_t s, std::size_t t) const { return sample_size[s * size() + t]; }
    bool row_missing(std::size_t s) const;
    std::optional<std::size_t> index_of(const std::string& id) const;

    /// Sub-matrix over the given ids, in that order.
    TransferMatrix select(const std::vector<std::string>& ids) const;

    /// First row and column hold ids; cells have 6 decimals, missing rows "NA".
    std::string to_csv() const;
    std::string sizes_csv() const;
    static TransferMatrix from_csv(const std::string& rates_csv, const std::string& sizes_csv = {});
};

TransferMatrix evaluate_transfer(std::span<const SourceAttack> sources, std::span<const Victim> targets,
                                 std::size_t workers = 1);

TransferMatrix build_transfer_matrix(std::span<const Victim> models, const AttackFn& attack, const Dataset& data,
                                     const TransferBudget& budget, std::size_t workers = 1,
                                     std::vector<SourceAttack>* attacks = nullptr);

/// Rate of adversaries crafted on `twin` against `target`. Returns nullopt
/// when the twin yields no successful adversary.
std::optional<double> twin_transfer_rate(const Victim& target, const Victim& twin, const AttackFn& attack,
                                         const Dataset& data, const TransferBudget& budget);

/// Trains `spec` and its twin (seed + 1) and returns twin_transfer_rate.
std::optional<double> base_transfer_rate(const ModelSpec& spec, const Dataset& data, const TrainingConfig& config,
                                         const PretrainedEmbeddings* pretrained, const AttackFn& attack,
                                         const TransferBudget& budget);

/// Mean over (target, single-axis variant source) pairs of
/// |r(source, target) - base(target)|. `specs` aligns with matrix ids; base
/// rates are keyed by target id. Throws ConfigError when no pair qualifies.
struct FactorScore {
    FactorAxis axis;
    double score = 0.0;
    std::size_t pairs = 0;
};

FactorScore factor_significance(const TransferMatrix& matrix, std::span<const ModelSpec> specs,
                                const std::map<std::string, double>& base, FactorAxis axis);

struct FactorReport {
    std::vector<FactorScore> scores;
    std::map<std::string, double> base_rates;

    std::string to_json() const;
};

/// Mean rate over the incoming off-diagonal cells of target column t,
/// skipping missing rows; nullopt when none remain.
std::optional<double> mean_incoming_rate(const TransferMatrix& matrix, std::size_t t);

struct GroupedMatrix {
    std::vector<std::string> classes;
    std::vector<double> cells;  // NaN when no pair contributes

    double at(std::size_t i, std::size_t j) const { return cells[i * classes.size() + j]; }
    std::string to_csv() const;
};

/// cell(i,j) = mean r(s,t) over s in class i, t in class j, s != t. Classes
/// are ordered by name. Throws std::invalid_argument when a model has no
/// class or a listed class is empty.
GroupedMatrix class_level_matrix(const TransferMatrix& matrix, const std::map<std::string, std::string>& grouping);

}  // namespace uawr
