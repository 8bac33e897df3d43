#include "uawr/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "network.hpp"
#include "uawr/error.hpp"
#include "uawr/hash.hpp"
#include "uawr/rng.hpp"
#include "uawr/simd/kernels.hpp"

namespace uawr {

// ---------------------------------------------------------------------------
// factor names

std::string_view to_string(Architecture a) {
    switch (a) {
        case Architecture::kLinearBow: return "LINEAR_BOW";
        case Architecture::kAvgEmbMlp: return "AVG_EMB_MLP";
        case Architecture::kConv1d: return "CONV_1D";
        case Architecture::kRecurrent: return "RECURRENT";
    }
    return "?";
}

std::string_view to_string(InputForm f) { return f == InputForm::kWord ? "WORD" : "CHAR_NGRAM"; }

std::string_view to_string(EmbeddingInit e) {
    return e == EmbeddingInit::kRandom ? "RANDOM" : "PRETRAINED_FILE";
}

std::string_view to_string(FactorAxis a) {
    switch (a) {
        case FactorAxis::kArchitecture: return "architecture";
        case FactorAxis::kInputForm: return "input_form";
        case FactorAxis::kEmbedding: return "embedding";
        case FactorAxis::kCapacity: return "capacity";
    }
    return "?";
}

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const E (&all)[N]) {
    for (E e : all) {
        if (to_string(e) == s) return e;
    }
    return std::nullopt;
}

}  // namespace

std::optional<Architecture> parse_architecture(std::string_view s) {
    static constexpr Architecture kAll[] = {Architecture::kLinearBow, Architecture::kAvgEmbMlp,
                                            Architecture::kConv1d, Architecture::kRecurrent};
    return parse_enum(s, kAll);
}

std::optional<InputForm> parse_input_form(std::string_view s) {
    static constexpr InputForm kAll[] = {InputForm::kWord, InputForm::kCharNgram};
    return parse_enum(s, kAll);
}

std::optional<EmbeddingInit> parse_embedding_init(std::string_view s) {
    static constexpr EmbeddingInit kAll[] = {EmbeddingInit::kRandom, EmbeddingInit::kPretrainedFile};
    return parse_enum(s, kAll);
}

std::optional<FactorAxis> parse_factor_axis(std::string_view s) {
    static constexpr FactorAxis kAll[] = {FactorAxis::kArchitecture, FactorAxis::kInputForm,
                                          FactorAxis::kEmbedding, FactorAxis::kCapacity};
    return parse_enum(s, kAll);
}

// ---------------------------------------------------------------------------
// ModelSpec

std::string ModelSpec::family_id() const {
    std::string s(to_string(architecture));
    s += '-';
    s += to_string(input_form);
    s += '-';
    s += to_string(embedding_init);
    s += '-';
    s += std::to_string(depth);
    return s;
}

std::string ModelSpec::id() const { return family_id() + "-" + std::to_string(seed); }

ModelSpec ModelSpec::parse(std::string_view id) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto dash = id.find('-');
        parts.push_back(id.substr(0, dash));
        if (dash == std::string_view::npos) break;
        id.remove_prefix(dash + 1);
    }
    if (parts.size() != 5) throw ConfigError("bad model id: expected ARCH-FORM-EMB-DEPTH-SEED");
    ModelSpec spec;
    const auto arch = parse_architecture(parts[0]);
    const auto form = parse_input_form(parts[1]);
    const auto emb = parse_embedding_init(parts[2]);
    if (!arch || !form || !emb) throw ConfigError("bad model id factor in '" + std::string(parts[0]) + "-...'");
    spec.architecture = *arch;
    spec.input_form = *form;
    spec.embedding_init = *emb;
    auto r1 = std::from_chars(parts[3].data(), parts[3].data() + parts[3].size(), spec.depth);
    auto r2 = std::from_chars(parts[4].data(), parts[4].data() + parts[4].size(), spec.seed);
    if (r1.ec != std::errc{} || r2.ec != std::errc{}) throw ConfigError("bad model id depth/seed");
    if (!spec.valid()) throw ConfigError("invalid model spec " + spec.id());
    return spec;
}

bool ModelSpec::valid() const {
    if (depth < 1) return false;
    return !(input_form == InputForm::kCharNgram && embedding_init == EmbeddingInit::kPretrainedFile);
}

bool differs_only_in(const ModelSpec& a, const ModelSpec& b, FactorAxis axis) {
    const bool arch = a.architecture != b.architecture;
    const bool form = a.input_form != b.input_form;
    const bool emb = a.embedding_init != b.embedding_init;
    const bool cap = a.depth != b.depth;
    switch (axis) {
        case FactorAxis::kArchitecture: return arch && !form && !emb && !cap;
        case FactorAxis::kInputForm: return !arch && form && !emb && !cap;
        case FactorAxis::kEmbedding: return !arch && !form && emb && !cap;
        case FactorAxis::kCapacity: return !arch && !form && !emb && cap;
    }
    return false;
}

std::vector<ModelSpec> build_zoo(const FactorGrid& grid, std::span<const std::uint64_t> seeds) {
    if (grid.architectures.empty() || grid.input_forms.empty() || grid.embedding_inits.empty() ||
        grid.depths.empty() || seeds.empty()) {
        throw ConfigError("empty factor grid");
    }
    std::vector<ModelSpec> out;
    for (auto arch : grid.architectures) {
        for (auto form : grid.input_forms) {
            for (auto emb : grid.embedding_inits) {
                for (int depth : grid.depths) {
                    for (auto seed : seeds) {
                        ModelSpec spec{arch, form, emb, depth, seed};
                        if (spec.valid()) out.push_back(spec);
                    }
                }
            }
        }
    }
    return out;
}

std::string TrainingConfig::digest() const {
    std::ostringstream os;
    os.precision(17);
    os << "epochs=" << epochs << ";batch=" << batch_size << ";lr=" << learning_rate
       << ";unk=" << unk_rate << ";emb=" << embedding_dim << ";hidden=" << hidden_dim
       << ";clip=" << clip_norm;
    return sha256_hex(os.str()).substr(0, 16);
}

std::string TrainingReport::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model_id;
    j["train_accuracy"] = train_accuracy;
    if (test_accuracy) j["test_accuracy"] = *test_accuracy;
    j["loss_curve"] = loss_curve;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Pretrained vectors

PretrainedEmbeddings PretrainedEmbeddings::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    PretrainedEmbeddings emb;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        std::vector<double> vec;
        double v = 0.0;
        while (ls >> v) vec.push_back(v);
        if (!ls.eof()) throw DataError(path.string() + ":" + std::to_string(n) + ": bad number");
        if (n == 1 && vec.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) {
            continue;  // "count dim" header
        }
        if (vec.empty()) throw DataError(path.string() + ":" + std::to_string(n) + ": no values");
        if (emb.dim_ != 0 && vec.size() != emb.dim_) {
            throw DataError(path.string() + ":" + std::to_string(n) + ": dimension mismatch");
        }
        emb.add(std::move(word), std::move(vec));
    }
    return emb;
}

void PretrainedEmbeddings::add(std::string word, std::vector<double> vec) {
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_) throw DataError("pretrained vector dimension mismatch for " + word);
    vectors_[std::move(word)] = std::move(vec);
}

const std::vector<double>* PretrainedEmbeddings::find(const std::string& word) const {
    auto it = vectors_.find(word);
    return it == vectors_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Vocabulary

std::vector<std::string> char_trigrams(std::string_view word) {
    std::string padded;
    padded.reserve(word.size() + 2);
    padded.push_back('<');
    padded.append(word);
    padded.push_back('>');
    std::vector<std::string> out;
    if (padded.size() < 3) return out;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
    return out;
}

Vocabulary::Vocabulary(InputForm form, std::vector<std::string> entries)
    : form_(form), entries_(std::move(entries)) {
    if (entries_.size() < 2 || entries_[kPad] != "<pad>" || entries_[kUnk] != kUnkSurface) {
        throw DataError("vocabulary must start with <pad>, <unk>");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i], static_cast<int>(i));
}

Vocabulary Vocabulary::build(InputForm form, const std::vector<Example>& train) {
    std::set<std::string> seen;
    for (const auto& ex : train) {
        for (const auto& t : ex.tokens) {
            if (form == InputForm::kWord) {
                seen.insert(t.surface);
            } else {
                for (auto& g : char_trigrams(t.surface)) seen.insert(std::move(g));
            }
        }
    }
    std::vector<std::string> entries{"<pad>", std::string(kUnkSurface)};
    for (const auto& s : seen) {
        if (s != entries[0] && s != entries[1]) entries.push_back(s);
    }
    return Vocabulary(form, std::move(entries));
}

std::optional<int> Vocabulary::find(std::string_view entry) const {
    auto it = index_.find(std::string(entry));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void Vocabulary::features(std::string_view surface, std::vector<int>& out) const {
    if (surface == kUnkSurface) {
        out.push_back(kUnk);
        return;
    }
    if (form_ == InputForm::kWord) {
        const auto id = find(surface);
        out.push_back(id ? *id : kUnk);
        return;
    }
    const std::size_t before = out.size();
    for (const auto& g : char_trigrams(surface)) {
        if (const auto id = find(g)) out.push_back(*id);
    }
    if (out.size() == before) out.push_back(kUnk);
}

// ---------------------------------------------------------------------------
// Classifier

Classifier::Classifier(ModelSpec spec, Vocabulary vocab, std::size_t label_count,
                       const TrainingConfig& config)
    : spec_(spec),
      vocab_(std::move(vocab)),
      label_count_(label_count),
      embedding_dim_(config.embedding_dim),
      hidden_dim_(config.hidden_dim),
      net_(std::make_unique<Network>(spec.architecture, spec.depth, vocab_.size(),
                                     config.embedding_dim, config.hidden_dim, label_count)) {
    if (!spec_.valid()) throw ConfigError("invalid model spec " + spec_.id());
    if (label_count_ < 2) throw ConfigError("classifier needs at least 2 labels");
    params_.assign(net_->parameter_count(), 0.0);
}

Classifier::~Classifier() = default;
Classifier::Classifier(Classifier&&) noexcept = default;
Classifier& Classifier::operator=(Classifier&&) noexcept = default;

Classifier::Classifier(const Classifier& o)
    : spec_(o.spec_),
      vocab_(o.vocab_),
      label_count_(o.label_count_),
      embedding_dim_(o.embedding_dim_),
      hidden_dim_(o.hidden_dim_),
      params_(o.params_),
      net_(std::make_unique<Network>(*o.net_)) {}

Classifier& Classifier::operator=(const Classifier& o) {
    if (this != &o) *this = Classifier(o);
    return *this;
}

void Classifier::encode(const TokenSeq& tokens, std::vector<int>& ids, std::vector<int>& offsets) const {
    ids.clear();
    offsets.assign(1, 0);
    if (tokens.empty()) {
        ids.push_back(Vocabulary::kPad);
        offsets.push_back(1);
        return;
    }
    for (const auto& t : tokens) {
        vocab_.features(t.surface, ids);
        offsets.push_back(static_cast<int>(ids.size()));
    }
}

std::vector<double> Classifier::logits(const TokenSeq& tokens) const {
    thread_local Workspace ws;
    thread_local std::vector<int> ids, offsets;
    encode(tokens, ids, offsets);
    std::vector<double> out(label_count_);
    net_->forward(params_.data(), ids.data(), offsets.data(), offsets.size() - 1, ws, out.data());
    return out;
}

std::size_t Classifier::predict(const TokenSeq& tokens) const { return argmax(logits(tokens)); }

LogitFn Classifier::as_logit_fn() const {
    return [this](const TokenSeq& tokens) { return logits(tokens); };
}

std::span<double> Classifier::embedding_row(std::string_view entry) {
    const auto id = vocab_.find(entry);
    if (!id) throw std::out_of_range("not in vocabulary: " + std::string(entry));
    return std::span<double>(params_).subspan(static_cast<std::size_t>(*id) * embedding_dim_, embedding_dim_);
}

std::span<double> Classifier::output_weight() {
    return std::span<double>(params_).subspan(net_->output_weight_offset(), label_count_ * net_->output_in());
}

std::span<double> Classifier::output_bias() {
    return std::span<double>(params_).subspan(net_->output_bias_offset(), label_count_);
}

double Classifier::loss_and_gradient(std::span<const Example> batch, std::vector<double>& grad) const {
    grad.assign(params_.size(), 0.0);
    Workspace ws;
    std::vector<int> ids, offsets;
    std::vector<double> out(label_count_), d_logits(label_count_);
    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (const auto& ex : batch) {
        encode(ex.tokens, ids, offsets);
        const std::size_t len = offsets.size() - 1;
        net_->forward(params_.data(), ids.data(), offsets.data(), len, ws, out.data());
        const auto p = softmax(out);
        loss -= std::log(p[ex.label]) * inv;
        for (std::size_t z = 0; z < label_count_; ++z) {
            d_logits[z] = (p[z] - (z == ex.label ? 1.0 : 0.0)) * inv;
        }
        net_->backward(params_.data(), ids.data(), offsets.data(), len, ws, d_logits.data(), grad.data(), {});
    }
    return loss;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

constexpr char kMagic[8] = {'U', 'A', 'W', 'R', 'M', 'D', 'L', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& os, std::string_view s) {
    put(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError("truncated model file");
    return v;
}

std::string get_string(std::istream& is) {
    const auto n = get<std::uint32_t>(is);
    if (n > (1u << 24)) throw DataError("corrupt model file (string length)");
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw DataError("truncated model file");
    return s;
}

}  // namespace

void Classifier::save(const std::filesystem::path& path, std::string_view provenance) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os.write(kMagic, sizeof kMagic);
    put(os, kFormatVersion);
    put_string(os, spec_.id());
    put_string(os, provenance);
    put(os, static_cast<std::uint64_t>(label_count_));
    put(os, static_cast<std::uint64_t>(embedding_dim_));
    put(os, static_cast<std::uint64_t>(hidden_dim_));
    put(os, static_cast<std::uint8_t>(vocab_.form()));
    put(os, static_cast<std::uint64_t>(vocab_.size()));
    for (const auto& e : vocab_.entries()) put_string(os, e);
    put(os, static_cast<std::uint64_t>(params_.size()));
    os.write(reinterpret_cast<const char*>(params_.data()),
             static_cast<std::streamsize>(params_.size() * sizeof(double)));
    if (!os) throw DataError("write failed: " + path.string());
}

Classifier Classifier::load(const std::filesystem::path& path, std::string* provenance) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string());
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw DataError("not a model file: " + path.string());
    if (get<std::uint32_t>(is) != kFormatVersion) throw DataError("unsupported model file version");
    const auto spec = ModelSpec::parse(get_string(is));
    auto prov = get_string(is);
    if (provenance != nullptr) *provenance = std::move(prov);
    TrainingConfig cfg;
    const auto labels = get<std::uint64_t>(is);
    cfg.embedding_dim = get<std::uint64_t>(is);
    cfg.hidden_dim = get<std::uint64_t>(is);
    const auto form = static_cast<InputForm>(get<std::uint8_t>(is));
    const auto vsize = get<std::uint64_t>(is);
    std::vector<std::string> entries;
    entries.reserve(vsize);
    for (std::uint64_t i = 0; i < vsize; ++i) entries.push_back(get_string(is));
    Classifier model(spec, Vocabulary(form, std::move(entries)), labels, cfg);
    const auto count = get<std::uint64_t>(is);
    if (count != model.params_.size()) throw DataError("parameter count mismatch in " + path.string());
    is.read(reinterpret_cast<char*>(model.params_.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw DataError("truncated model file");
    return model;
}

std::string Classifier::digest() const {
    Sha256 h;
    h.update(spec_.id());
    for (const auto& e : vocab_.entries()) h.update(e).update("\n");
    h.update(std::string_view(reinterpret_cast<const char*>(params_.data()), params_.size() * sizeof(double)));
    return h.hex_digest();
}

// ---------------------------------------------------------------------------
// training

Classifier train(const ModelSpec& spec, const Dataset& data, const TrainingConfig& config,
                 const PretrainedEmbeddings* pretrained, TrainingReport* report) {
    if (data.label_count() < 2) throw ConfigError("training needs at least 2 classes");
    if (data.train.empty()) throw ConfigError("empty training set");
    if (config.batch_size == 0 || !(config.learning_rate > 0.0)) throw ConfigError("bad training config");

    Classifier model(spec, Vocabulary::build(spec.input_form, data.train), data.label_count(), config);
    Rng init_rng(derive_seed(spec.seed, stream_id("init")));
    model.net_->initialize(model.params_, init_rng);

    if (spec.embedding_init == EmbeddingInit::kPretrainedFile) {
        if (pretrained == nullptr) throw ConfigError(spec.id() + " needs a pretrained embedding file");
        if (pretrained->dim() != config.embedding_dim) {
            throw ConfigError("pretrained dimension " + std::to_string(pretrained->dim()) +
                              " != embedding_dim " + std::to_string(config.embedding_dim));
        }
        const auto& entries = model.vocab_.entries();
        for (std::size_t i = 2; i < entries.size(); ++i) {
            if (const auto* vec = pretrained->find(entries[i])) {
                std::copy(vec->begin(), vec->end(), model.params_.begin() + static_cast<std::ptrdiff_t>(i * config.embedding_dim));
            }
        }
    }

    Rng order_rng(derive_seed(spec.seed, stream_id("order")));
    Rng drop_rng(derive_seed(spec.seed, stream_id("unk-drop")));
    const Network& net = *model.net_;
    const std::size_t emb_size = net.embedding_size();
    const std::size_t dim = config.embedding_dim;
    std::vector<double> grad(model.params_.size(), 0.0);
    std::vector<int> touched;
    std::vector<char> touched_flag(model.vocab_.size(), 0);
    EmbeddingGradSink sink{grad.data(), &touched, &touched_flag};
    Workspace ws;
    std::vector<int> ids, offsets;
    std::vector<double> out(model.label_count_), d_logits(model.label_count_);
    std::vector<std::size_t> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const auto& k = simd::kernels();
    std::vector<double> loss_curve;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        order_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv = 1.0 / static_cast<double>(end - start);
            double batch_loss = 0.0;
            for (std::size_t b = start; b < end; ++b) {
                const Example& ex = data.train[order[b]];
                ids.clear();
                offsets.assign(1, 0);
                for (const auto& t : ex.tokens) {
                    if (config.unk_rate > 0.0 && drop_rng.bernoulli(config.unk_rate)) {
                        ids.push_back(Vocabulary::kUnk);
                    } else {
                        model.vocab_.features(t.surface, ids);
                    }
                    offsets.push_back(static_cast<int>(ids.size()));
                }
                const std::size_t len = offsets.size() - 1;
                net.forward(model.params_.data(), ids.data(), offsets.data(), len, ws, out.data());
                const auto logp = log_softmax(out);
                batch_loss -= logp[ex.label];
                for (std::size_t z = 0; z < model.label_count_; ++z) {
                    d_logits[z] = (std::exp(logp[z]) - (z == ex.label ? 1.0 : 0.0)) * inv;
                }
                net.backward(model.params_.data(), ids.data(), offsets.data(), len, ws, d_logits.data(),
                             grad.data(), sink);
            }
            if (!std::isfinite(batch_loss)) {
                throw TrainingDiverged(spec.id() + ": non-finite loss at epoch " + std::to_string(epoch) +
                                       ", batch starting at " + std::to_string(start) +
                                       " (learning_rate=" + std::to_string(config.learning_rate) + ")");
            }
            epoch_loss += batch_loss;

            double scale = config.learning_rate;
            if (config.clip_norm > 0.0) {
                double sq = k.dot(grad.data() + emb_size, grad.data() + emb_size, grad.size() - emb_size);
                for (int row : touched) {
                    const double* g = grad.data() + static_cast<std::size_t>(row) * dim;
                    sq += k.dot(g, g, dim);
                }
                const double norm = std::sqrt(sq);
                if (norm > config.clip_norm) scale *= config.clip_norm / norm;
            }
            k.axpy(-scale, grad.data() + emb_size, model.params_.data() + emb_size, grad.size() - emb_size);
            std::fill(grad.begin() + static_cast<std::ptrdiff_t>(emb_size), grad.end(), 0.0);
            std::sort(touched.begin(), touched.end());
            for (int row : touched) {
                const std::size_t off = static_cast<std::size_t>(row) * dim;
                k.axpy(-scale, grad.data() + off, model.params_.data() + off, dim);
                std::fill_n(grad.begin() + static_cast<std::ptrdiff_t>(off), dim, 0.0);
                touched_flag[static_cast<std::size_t>(row)] = 0;
            }
            touched.clear();
        }
        loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
    }

    if (report != nullptr) {
        report->model_id = spec.id();
        report->loss_curve = loss_curve;
        report->train_accuracy = accuracy(model, data.train);
        if (!data.test.empty()) report->test_accuracy = accuracy(model, data.test);
    }
    return model;
}

double accuracy(const Classifier& model, std::span<const Example> examples) {
    if (examples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& ex : examples) correct += model.predict(ex.tokens) == ex.label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

// ---------------------------------------------------------------------------
// probabilities and importance

std::vector<double> log_softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (double v : logits) s += std::exp(v - m);
    const double lse = m + std::log(s);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) s += out[i] = std::exp(logits[i] - m);
    for (double& v : out) v /= s;
    return out;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<double> word_importance(const LogitFn& model, const Example& example) {
    const double base = log_softmax(model(example.tokens))[example.label];
    std::vector<double> scores(example.tokens.size());
    TokenSeq probe = example.tokens;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const std::string saved = std::exchange(probe[i].surface, std::string(kUnkSurface));
        scores[i] = base - log_softmax(model(probe))[example.label];
        probe[i].surface = saved;
    }
    return scores;
}

double substitute_importance(const LogitFn& model, const Example& example, std::size_t position,
                             const std::string& substitute) {
    if (position >= example.tokens.size()) throw std::out_of_range("substitute_importance: position");
    const double base = log_softmax(model(example.tokens))[example.label];
    TokenSeq probe = example.tokens;
    probe[position].surface = substitute;
    return base - log_softmax(model(probe))[example.label];
}

}  // namespace uawr
