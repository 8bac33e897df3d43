#pragma once

// Logit-averaging ensembles and the search for a fixed-size member set that
// maximizes the best-member transfer rate averaged over a model pool.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uawr/model.hpp"
#include "uawr/transfer.hpp"

namespace uawr {

class EnsembleModel {
public:
    explicit EnsembleModel(std::vector<Victim> members);

    /// Elementwise mean of member logits.
    std::vector<double> logits(const TokenSeq& tokens) const;
    LogitFn as_logit_fn() const;
    Victim as_victim() const;

    const std::vector<Victim>& members() const { return members_; }
    std::string id() const;

private:
    std::vector<Victim> members_;
};

std::vector<double> ensemble_logits(std::span<const Victim> members, const TokenSeq& tokens);

/// Sorted, distinct matrix indices plus their fitness.
struct EnsembleCandidate {
    std::vector<std::size_t> members;
    double fitness = 0.0;

    std::vector<std::string> member_ids(const TransferMatrix& matrix) const;
};

/// Mean over t in `targets` of max over s in `members` of r(s,t). Targets in
/// `excluded` are skipped. Throws std::invalid_argument on a missing entry or
/// when no target remains.
double fitness(std::span<const std::size_t> members, const TransferMatrix& matrix,
               std::span<const std::size_t> targets, std::span<const std::size_t> excluded = {});

struct SearchConfig {
    std::size_t population = 20;
    std::size_t generations = 50;
    std::size_t ensemble_size = 3;
    double mutation_probability = 0.3;
    std::size_t elitism = 1;
    std::uint64_t seed = 0;
    /// Leave the candidate's own members out of the target average.
    bool exclude_members = false;

    /// Throws ConfigError on an invalid combination for a pool of `pool_size`.
    void validate(std::size_t pool_size) const;
};

/// Best-ever and mean fitness per generation (generation 0 = initial
/// population).
struct SearchTrace {
    std::vector<double> best;
    std::vector<double> mean;

    std::string to_csv() const;
};

/// `pool` lists matrix indices that may join the ensemble; it is also the
/// target set.
EnsembleCandidate genetic_search(const TransferMatrix& matrix, std::span<const std::size_t> pool,
                                 const SearchConfig& config, SearchTrace* trace = nullptr);

/// Starts from the best single model and adds the member with the largest
/// fitness gain; gain ties (1e-9) prefer a model that differs from every
/// current member in input form, then architecture, then embedding init.
/// `specs` aligns with matrix ids and may be empty (no diversity preference).
EnsembleCandidate greedy_expert_baseline(const TransferMatrix& matrix, std::span<const std::size_t> pool,
                                         std::span<const ModelSpec> specs, std::size_t m,
                                         bool exclude_members = false);

/// JSON record of a chosen candidate.
std::string candidate_json(const EnsembleCandidate& c, const TransferMatrix& matrix, const SearchConfig& config);

}  // namespace uawr
