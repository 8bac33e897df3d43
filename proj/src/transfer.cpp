#include "uawr/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "uawr/error.hpp"
#include "uawr/parallel.hpp"
#include "uawr/rng.hpp"

namespace uawr {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

double transfer_rate(std::span<const AdversarialSample> set, const LogitFn& target) {
    if (set.empty()) throw std::invalid_argument("transfer_rate: empty adversarial set");
    std::size_t fooled = 0;
    for (const auto& s : set) fooled += argmax(target(s.tokens)) != s.gold ? 1 : 0;
    return static_cast<double>(fooled) / static_cast<double>(set.size());
}

std::vector<Victim> victims_of(std::span<const Classifier> models) {
    std::vector<Victim> out;
    out.reserve(models.size());
    for (const auto& m : models) out.push_back({m.id(), m.as_logit_fn()});
    return out;
}

std::vector<std::size_t> attack_sample(std::size_t test_size, const TransferBudget& budget) {
    Rng rng(derive_seed(budget.seed, stream_id("attack-sample")));
    auto idx = rng.sample_indices(test_size, budget.attacked);
    std::sort(idx.begin(), idx.end());
    return idx;
}

SourceAttack attack_source(const Victim& source, const AttackFn& attack, const Dataset& data,
                           const TransferBudget& budget) {
    if (budget.transferred > budget.attacked) {
        throw ConfigError("budget: transferred must not exceed attacked");
    }
    SourceAttack out;
    out.source_id = source.id;
    std::vector<AdversarialSample> successes;
    for (std::size_t i : attack_sample(data.test.size(), budget)) {
        const Example& ex = data.test[i];
        auto r = attack(source.fn, ex);
        if (r.success) {
            if (r.substitutions.empty()) {
                ++out.vacuous;
            } else {
                successes.push_back({ex.id, r.perturbed, ex.label});
            }
        }
        out.results.push_back(std::move(r));
    }
    Rng rng(derive_seed(budget.seed, stream_id("transfer-sample")));
    auto pick = rng.sample_indices(successes.size(), budget.transferred);
    std::sort(pick.begin(), pick.end());
    for (std::size_t k : pick) out.transfer_set.push_back(std::move(successes[k]));
    return out;
}

bool TransferMatrix::row_missing(std::size_t s) const {
    for (std::size_t t = 0; t < size(); ++t) {
        if (!std::isnan(at(s, t))) return false;
    }
    return true;
}

std::optional<std::size_t> TransferMatrix::index_of(const std::string& id) const {
    const auto it = std::find(model_ids.begin(), model_ids.end(), id);
    if (it == model_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - model_ids.begin());
}

TransferMatrix TransferMatrix::select(const std::vector<std::string>& ids) const {
    std::vector<std::size_t> idx;
    for (const auto& id : ids) {
        const auto i = index_of(id);
        if (!i) throw std::invalid_argument("unknown model id " + id);
        idx.push_back(*i);
    }
    TransferMatrix out;
    out.model_ids = ids;
    for (std::size_t s : idx) {
        for (std::size_t t : idx) {
            out.rates.push_back(at(s, t));
            out.sample_size.push_back(samples(s, t));
        }
    }
    return out;
}

std::string TransferMatrix::to_csv() const {
    std::string out = "model";
    for (const auto& id : model_ids) out += "," + id;
    out += '\n';
    for (std::size_t s = 0; s < size(); ++s) {
        out += model_ids[s];
        for (std::size_t t = 0; t < size(); ++t) out += "," + (std::isnan(at(s, t)) ? "NA" : fixed6(at(s, t)));
        out += '\n';
    }
    return out;
}

std::string TransferMatrix::sizes_csv() const {
    std::string out = "model";
    for (const auto& id : model_ids) out += "," + id;
    out += '\n';
    for (std::size_t s = 0; s < size(); ++s) {
        out += model_ids[s];
        for (std::size_t t = 0; t < size(); ++t) out += "," + std::to_string(samples(s, t));
        out += '\n';
    }
    return out;
}

TransferMatrix TransferMatrix::from_csv(const std::string& rates_csv, const std::string& sizes_csv) {
    const auto rows = parse_csv(rates_csv);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "model") throw DataError("transfer matrix: bad header");
    TransferMatrix m;
    m.model_ids.assign(rows[0].begin() + 1, rows[0].end());
    const std::size_t n = m.size();
    if (rows.size() != n + 1) throw DataError("transfer matrix: row count mismatch");
    m.rates.resize(n * n);
    m.sample_size.assign(n * n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& row = rows[s + 1];
        if (row.size() != n + 1 || row[0] != m.model_ids[s]) throw DataError("transfer matrix: bad row " + row[0]);
        for (std::size_t t = 0; t < n; ++t) {
            m.rates[s * n + t] = row[t + 1] == "NA" ? kMissing : std::stod(row[t + 1]);
        }
    }
    if (!sizes_csv.empty()) {
        const auto srows = parse_csv(sizes_csv);
        if (srows.size() != n + 1) throw DataError("transfer sizes: row count mismatch");
        for (std::size_t s = 0; s < n; ++s) {
            if (srows[s + 1].size() != n + 1) throw DataError("transfer sizes: bad row");
            for (std::size_t t = 0; t < n; ++t) {
                const std::size_t size = std::stoul(srows[s + 1][t + 1]);
                m.sample_size[s * n + t] = size;
                // a rate within printing precision of a count ratio is restored to that ratio exactly
                double& r = m.rates[s * n + t];
                if (size > 0 && !std::isnan(r)) {
                    const double snapped =
                        static_cast<double>(std::llround(r * static_cast<double>(size))) / static_cast<double>(size);
                    if (std::abs(snapped - r) <= 5e-7 + 1e-12) r = snapped;
                }
            }
        }
    }
    return m;
}

TransferMatrix evaluate_transfer(std::span<const SourceAttack> sources, std::span<const Victim> targets,
                                 std::size_t workers) {
    if (sources.size() != targets.size()) throw std::invalid_argument("evaluate_transfer: size mismatch");
    TransferMatrix m;
    const std::size_t n = targets.size();
    for (const auto& t : targets) m.model_ids.push_back(t.id);
    m.rates.assign(n * n, kMissing);
    m.sample_size.assign(n * n, 0);
    parallel_for(n * n, workers, [&](std::size_t cell) {
        const std::size_t s = cell / n, t = cell % n;
        const auto& set = sources[s].transfer_set;
        if (set.empty()) return;
        m.rates[cell] = transfer_rate(set, targets[t].fn);
        m.sample_size[cell] = set.size();
    });
    return m;
}

TransferMatrix build_transfer_matrix(std::span<const Victim> models, const AttackFn& attack, const Dataset& data,
                                     const TransferBudget& budget, std::size_t workers,
                                     std::vector<SourceAttack>* attacks) {
    std::vector<SourceAttack> per_source(models.size());
    parallel_for(models.size(), workers,
                 [&](std::size_t s) { per_source[s] = attack_source(models[s], attack, data, budget); });
    auto m = evaluate_transfer(per_source, models, workers);
    if (attacks != nullptr) *attacks = std::move(per_source);
    return m;
}

std::optional<double> twin_transfer_rate(const Victim& target, const Victim& twin, const AttackFn& attack,
                                         const Dataset& data, const TransferBudget& budget) {
    const auto src = attack_source(twin, attack, data, budget);
    if (src.transfer_set.empty()) return std::nullopt;
    return transfer_rate(src.transfer_set, target.fn);
}

std::optional<double> base_transfer_rate(const ModelSpec& spec, const Dataset& data, const TrainingConfig& config,
                                         const PretrainedEmbeddings* pretrained, const AttackFn& attack,
                                         const TransferBudget& budget) {
    ModelSpec twin_spec = spec;
    twin_spec.seed = spec.seed + 1;
    const auto target = train(spec, data, config, pretrained);
    const auto twin = train(twin_spec, data, config, pretrained);
    return twin_transfer_rate({target.id(), target.as_logit_fn()}, {twin.id(), twin.as_logit_fn()}, attack, data,
                              budget);
}

FactorScore factor_significance(const TransferMatrix& matrix, std::span<const ModelSpec> specs,
                                const std::map<std::string, double>& base, FactorAxis axis) {
    if (specs.size() != matrix.size()) throw std::invalid_argument("factor_significance: specs/matrix mismatch");
    FactorScore out{axis, 0.0, 0};
    double sum = 0.0;
    for (std::size_t t = 0; t < matrix.size(); ++t) {
        const auto b = base.find(matrix.model_ids[t]);
        if (b == base.end()) continue;
        for (std::size_t s = 0; s < matrix.size(); ++s) {
            if (s == t || !differs_only_in(specs[s], specs[t], axis)) continue;
            const double r = matrix.at(s, t);
            if (std::isnan(r)) continue;
            sum += std::abs(r - b->second);
            ++out.pairs;
        }
    }
    if (out.pairs == 0) {
        throw ConfigError("no model pairs differ only in " + std::string(to_string(axis)));
    }
    out.score = sum / static_cast<double>(out.pairs);
    return out;
}

std::string FactorReport::to_json() const {
    nlohmann::ordered_json j;
    auto& rows = j["factors"] = nlohmann::ordered_json::array();
    for (const auto& s : scores) {
        rows.push_back({{"factor", std::string(to_string(s.axis))}, {"score", s.score}, {"pairs", s.pairs}});
    }
    auto& b = j["base_rates"] = nlohmann::ordered_json::object();
    for (const auto& [id, v] : base_rates) b[id] = v;
    return j.dump(2);
}

std::optional<double> mean_incoming_rate(const TransferMatrix& matrix, std::size_t t) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < matrix.size(); ++s) {
        if (s == t || std::isnan(matrix.at(s, t))) continue;
        sum += matrix.at(s, t);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::string GroupedMatrix::to_csv() const {
    std::string out = "class";
    for (const auto& c : classes) out += "," + c;
    out += '\n';
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out += classes[i];
        for (std::size_t j = 0; j < classes.size(); ++j) out += "," + (std::isnan(at(i, j)) ? "NA" : fixed6(at(i, j)));
        out += '\n';
    }
    return out;
}

GroupedMatrix class_level_matrix(const TransferMatrix& matrix, const std::map<std::string, std::string>& grouping) {
    std::set<std::string> names;
    for (const auto& [id, cls] : grouping) names.insert(cls);
    GroupedMatrix g;
    g.classes.assign(names.begin(), names.end());
    const std::size_t k = g.classes.size();
    std::vector<std::size_t> cls_of(matrix.size());
    std::vector<std::size_t> members(k, 0);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        const auto it = grouping.find(matrix.model_ids[i]);
        if (it == grouping.end()) throw std::invalid_argument("model without class: " + matrix.model_ids[i]);
        cls_of[i] = static_cast<std::size_t>(std::lower_bound(g.classes.begin(), g.classes.end(), it->second) -
                                             g.classes.begin());
        ++members[cls_of[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c] == 0) throw std::invalid_argument("empty class: " + g.classes[c]);
    }
    std::vector<double> sum(k * k, 0.0);
    std::vector<std::size_t> count(k * k, 0);
    for (std::size_t s = 0; s < matrix.size(); ++s) {
        for (std::size_t t = 0; t < matrix.size(); ++t) {
            if (s == t || std::isnan(matrix.at(s, t))) continue;
            const std::size_t cell = cls_of[s] * k + cls_of[t];
            sum[cell] += matrix.at(s, t);
            ++count[cell];
        }
    }
    g.cells.resize(k * k);
    for (std::size_t c = 0; c < k * k; ++c) g.cells[c] = count[c] == 0 ? kMissing : sum[c] / static_cast<double>(count[c]);
    return g;
}

}  // namespace uawr
