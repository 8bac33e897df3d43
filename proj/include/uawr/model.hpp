#pragma once

// Factor-structured classifier families: LINEAR_BOW, AVG_EMB_MLP, CONV_1D and
// RECURRENT over WORD or CHAR_NGRAM inputs, trained with plain mini-batch
// gradient descent on cross-entropy.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uawr/corpus.hpp"

namespace uawr {

/// Surface of the unknown-word symbol. The tokenizer can never produce it.
inline constexpr std::string_view kUnkSurface = "<unk>";

enum class Architecture : std::uint8_t { kLinearBow, kAvgEmbMlp, kConv1d, kRecurrent };
enum class InputForm : std::uint8_t { kWord, kCharNgram };
enum class EmbeddingInit : std::uint8_t { kRandom, kPretrainedFile };
enum class FactorAxis : std::uint8_t { kArchitecture, kInputForm, kEmbedding, kCapacity };

std::string_view to_string(Architecture a);
std::string_view to_string(InputForm f);
std::string_view to_string(EmbeddingInit e);
std::string_view to_string(FactorAxis a);
std::optional<Architecture> parse_architecture(std::string_view s);
std::optional<InputForm> parse_input_form(std::string_view s);
std::optional<EmbeddingInit> parse_embedding_init(std::string_view s);
std::optional<FactorAxis> parse_factor_axis(std::string_view s);

struct ModelSpec {
    Architecture architecture = Architecture::kLinearBow;
    InputForm input_form = InputForm::kWord;
    EmbeddingInit embedding_init = EmbeddingInit::kRandom;
    int depth = 1;
    std::uint64_t seed = 0;

    /// "ARCH-FORM-EMB-DEPTH-SEED", e.g. "CONV_1D-WORD-RANDOM-2-7".
    std::string id() const;
    /// id without the seed; identical for twins.
    std::string family_id() const;
    static ModelSpec parse(std::string_view id);

    /// CHAR_NGRAM inputs have no pretrained vectors; depth must be positive.
    bool valid() const;

    bool operator==(const ModelSpec&) const = default;
};

/// True when `a` and `b` agree on every factor except `axis` and differ on it.
/// Seeds are ignored.
bool differs_only_in(const ModelSpec& a, const ModelSpec& b, FactorAxis axis);

struct FactorGrid {
    std::vector<Architecture> architectures;
    std::vector<InputForm> input_forms;
    std::vector<EmbeddingInit> embedding_inits;
    std::vector<int> depths;
};

/// Valid factor combinations times seeds, in grid order (seed innermost).
std::vector<ModelSpec> build_zoo(const FactorGrid& grid, std::span<const std::uint64_t> seeds);

struct TrainingConfig {
    std::size_t epochs = 8;
    std::size_t batch_size = 32;
    double learning_rate = 0.1;
    double unk_rate = 0.01;
    std::size_t embedding_dim = 32;
    std::size_t hidden_dim = 32;
    /// Per-batch gradient norm cap; 0 disables clipping.
    double clip_norm = 0.0;

    std::string digest() const;
};

struct TrainingReport {
    std::string model_id;
    std::vector<double> loss_curve;
    double train_accuracy = 0.0;
    std::optional<double> test_accuracy;

    std::string to_json() const;
};

/// Text vectors, one `word v1 v2 ...` line each; an optional leading
/// `count dim` header line is accepted.
class PretrainedEmbeddings {
public:
    static PretrainedEmbeddings load(const std::filesystem::path& path);
    void add(std::string word, std::vector<double> vec);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    const std::vector<double>* find(const std::string& word) const;

private:
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// Victim interface shared by single models, ensembles and test doubles.
using LogitFn = std::function<std::vector<double>(const TokenSeq&)>;

/// Input-form vocabulary: words, or boundary-marked character trigrams.
/// Ids 0 and 1 are the padding and unknown symbols.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    Vocabulary() = default;
    Vocabulary(InputForm form, std::vector<std::string> entries);

    static Vocabulary build(InputForm form, const std::vector<Example>& train);

    InputForm form() const { return form_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<std::string>& entries() const { return entries_; }
    std::optional<int> find(std::string_view entry) const;

    /// Feature ids for one surface; never empty.
    void features(std::string_view surface, std::vector<int>& out) const;

    bool operator==(const Vocabulary& o) const { return form_ == o.form_ && entries_ == o.entries_; }

private:
    InputForm form_ = InputForm::kWord;
    std::vector<std::string> entries_;
    std::unordered_map<std::string, int> index_;
};

std::vector<std::string> char_trigrams(std::string_view word);

class Network;

/// A trained (or initialized) model. Immutable in normal use; the parameter
/// accessors exist for hand-built models and gradient checks.
class Classifier {
public:
    Classifier(ModelSpec spec, Vocabulary vocab, std::size_t label_count,
               const TrainingConfig& config);
    ~Classifier();
    Classifier(Classifier&&) noexcept;
    Classifier& operator=(Classifier&&) noexcept;
    Classifier(const Classifier&);
    Classifier& operator=(const Classifier&);

    const ModelSpec& spec() const { return spec_; }
    std::string id() const { return spec_.id(); }
    const Vocabulary& vocabulary() const { return vocab_; }
    std::size_t label_count() const { return label_count_; }
    std::size_t embedding_dim() const { return embedding_dim_; }
    std::size_t hidden_dim() const { return hidden_dim_; }

    /// Class scores; an empty sequence is read as a single padding token.
    std::vector<double> logits(const TokenSeq& tokens) const;
    std::size_t predict(const TokenSeq& tokens) const;
    LogitFn as_logit_fn() const;

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    /// Embedding row of one vocabulary entry (word or trigram).
    std::span<double> embedding_row(std::string_view entry);
    std::span<double> output_weight();
    std::span<double> output_bias();

    /// Mean cross-entropy over `batch` and its gradient w.r.t. parameters().
    double loss_and_gradient(std::span<const Example> batch, std::vector<double>& grad) const;

    void save(const std::filesystem::path& path, std::string_view provenance = {}) const;
    static Classifier load(const std::filesystem::path& path, std::string* provenance = nullptr);

    /// Cheap content fingerprint used by caches.
    std::string digest() const;

private:
    friend Classifier train(const ModelSpec&, const Dataset&, const TrainingConfig&,
                            const PretrainedEmbeddings*, TrainingReport*);
    void encode(const TokenSeq& tokens, std::vector<int>& ids, std::vector<int>& offsets) const;

    ModelSpec spec_;
    Vocabulary vocab_;
    std::size_t label_count_ = 0;
    std::size_t embedding_dim_ = 0;
    std::size_t hidden_dim_ = 0;
    std::vector<double> params_;
    std::unique_ptr<Network> net_;
};

/// Deterministic given (spec, data, config). Throws TrainingDiverged on a
/// non-finite loss.
Classifier train(const ModelSpec& spec, const Dataset& data, const TrainingConfig& config,
                 const PretrainedEmbeddings* pretrained = nullptr, TrainingReport* report = nullptr);

double accuracy(const Classifier& model, std::span<const Example> examples);

/// Numerically stable softmax / log-softmax.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
/// argmax with lowest-index tie-breaking.
std::size_t argmax(std::span<const double> v);

/// Per-position drop in gold log-probability when the token becomes <unk>.
std::vector<double> word_importance(const LogitFn& model, const Example& example);
/// Drop in gold log-probability when `substitute` replaces position `position`.
double substitute_importance(const LogitFn& model, const Example& example, std::size_t position,
                             const std::string& substitute);

}  // namespace uawr
