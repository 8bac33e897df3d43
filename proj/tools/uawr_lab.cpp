#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "uawr/error.hpp"
#include "uawr/lab.hpp"

namespace {

constexpr int kConfigFailure = 1;
constexpr int kRuntimeFailure = 2;

struct CommonFlags {
    std::string config;
    std::string out;
    std::size_t workers = 0;
    std::optional<std::uint64_t> seed;
};

}  // namespace

int main(int argc, char** argv) {
    using uawr::lab::Lab;
    using uawr::lab::Report;

    CLI::App app{"Adversarial transferability experiments: zoo training, transfer matrices, factor study, "
                 "ensemble search and universal replacement rules"};
    app.require_subcommand(1);
    CommonFlags flags;

    const std::map<std::string, std::pair<std::string, std::function<Report(Lab&)>>> commands{
        {"train-zoo", {"Train (or load cached) zoo models and report accuracies", &Lab::train_zoo}},
        {"attack", {"Attack the shared test sample with every admitted model", &Lab::attack_report}},
        {"transfer-matrix", {"Build pairwise transfer matrices and class-level tables", &Lab::transfer_report}},
        {"factor-study", {"Base rates and per-factor significance scores", &Lab::factor_study}},
        {"ensemble-sweep", {"Genetic vs greedy ensembles across sizes", &Lab::ensemble_sweep}},
        {"mine-rules", {"Mine UAWR and PMI replacement rules", &Lab::mine_rules}},
        {"eval-rules", {"Evaluate rule attacks across word budgets", &Lab::eval_rules}},
        {"report", {"Run every stage and write all tables and figures", &Lab::full_report}},
    };
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", flags.config, "YAML experiment config")->required();
        sub->add_option("--out", flags.out, "Output root (overrides UAWR_OUT and the config)");
        sub->add_option("--workers", flags.workers, "Parallel workers");
        sub->add_option("--seed", flags.seed, "Experiment seed (overrides the config)");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    std::optional<Lab> lab;
    try {
        auto config = uawr::lab::load_config(flags.config);
        if (const char* env = std::getenv("UAWR_OUT"); env != nullptr && *env != '\0') config.out = env;
        if (!flags.out.empty()) config.out = flags.out;
        if (flags.workers > 0) config.workers = flags.workers;
        if (flags.seed) config.set_seed(*flags.seed);
        lab.emplace(std::move(config));
    } catch (const uawr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigFailure;
    }

    try {
        const Report report = commands.at(name).second(*lab);
        uawr::lab::write_report(report, lab->config().out, lab->config().digest());
        for (const auto& a : report.artifacts) std::cout << (lab->config().out / a.name).string() << '\n';
    } catch (const uawr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return 0;
}
