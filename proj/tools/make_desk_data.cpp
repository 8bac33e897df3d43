#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "uawr/desk_data.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Writes the synthetic desk corpus, lexicons and word vectors"};
    uawr::desk::DeskConfig config;
    std::string out = "data";
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.add_option("--seed", config.seed, "Generator seed")->capture_default_str();
    app.add_option("--train", config.train_documents, "Training documents")->capture_default_str();
    app.add_option("--test", config.test_documents, "Test documents")->capture_default_str();
    app.add_option("--agreement", config.polarity_agreement, "Sentiment slot agreement")->capture_default_str();
    app.add_option("--corpus-members", config.corpus_members, "Synset members used in documents")->capture_default_str();
    app.add_option("--tail-weight", config.tail_weight, "Usage weight of the later synset members")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        const auto files = uawr::desk::generate(config, out);
        std::printf("wrote %s\n", files.corpus_dir.string().c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
