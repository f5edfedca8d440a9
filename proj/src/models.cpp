#include "kanids/models.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "kanids/error.hpp"
#include "kanids/json_io.hpp"
#include "kanids/kan.hpp"
#include "kanids/spline.hpp"

namespace kanids {

namespace {

struct KindNames {
    ModelKind kind;
    std::string_view token;
    std::string_view display;
};

constexpr KindNames kNames[] = {
    {ModelKind::CNN, "CNN", "CNN"},           {ModelKind::LSTM, "LSTM", "LSTM"},
    {ModelKind::MLP2, "MLP2", "MLP(2)"},      {ModelKind::MLP5, "MLP5", "MLP(5)"},
    {ModelKind::KAN2, "KAN2", "KANs(2)"},     {ModelKind::KAN5, "KAN5", "KANs(5)"},
    {ModelKind::ConvKAN, "ConvKAN", "ConvKAN"}, {ModelKind::KAN_LSTM, "KAN_LSTM", "KAN-LSTM"},
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

constexpr std::size_t kKernel = 3;
constexpr std::size_t kPad = 1;
constexpr std::size_t kPool = 2;

class Builder {
public:
    explicit Builder(const ModelSpec& spec) : spec_(spec), rng_(spec.seed) {
        shape_ = {1, spec.input_dim};
    }

    template <typename L, typename... Args>
    void add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        shape_ = layer->output_shape(shape_);
        layers_.push_back(std::move(layer));
    }

    std::size_t width() const { return shape_.back(); }
    std::size_t channels() const { return shape_.at(1); }
    std::size_t flat() const { return shape_size(shape_) / shape_[0]; }
    Rng& rng() { return rng_; }
    SplineGrid grid() const { return make_grid(spec_.grid_lo, spec_.grid_hi, spec_.grid_size, spec_.spline_degree); }

    void dense(std::size_t out, Activation act) { add<Dense>(width(), out, act, rng_); }
    void kan(std::size_t out) { add<KanLinear>(width(), out, grid(), rng_); }
    void conv(std::size_t out) {
        add<Conv2d>(Conv2dOptions{channels(), out, kKernel, kKernel, kPad, Activation::Relu}, rng_);
    }
    void conv_kan(std::size_t out) {
        add<ConvKan>(ConvKanOptions{channels(), out, kKernel, kKernel, kPad}, grid(), rng_);
    }

    std::vector<std::unique_ptr<Layer>> finish() {
        require(shape_.size() == 2 && shape_[1] == 1, ErrorKind::ShapeMismatch,
                "architecture does not end in a single logit: " + shape_string(shape_));
        return std::move(layers_);
    }

private:
    const ModelSpec& spec_;
    Rng rng_;
    Shape shape_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

std::vector<std::unique_ptr<Layer>> assemble(const ModelSpec& spec) {
    Builder b(spec);
    const std::size_t w = spec.hidden_width;
    switch (spec.kind) {
        case ModelKind::MLP2:
        case ModelKind::MLP5: {
            const int hidden = spec.kind == ModelKind::MLP2 ? 2 : 5;
            for (int i = 0; i < hidden; ++i) b.dense(w, Activation::Relu);
            b.dense(1, Activation::Identity);
            break;
        }
        case ModelKind::KAN2:
        case ModelKind::KAN5: {
            const int depth = spec.kind == ModelKind::KAN2 ? 2 : 5;
            for (int i = 0; i < depth - 1; ++i) b.kan(w);
            b.kan(1);
            break;
        }
        case ModelKind::CNN:
            b.add<SquareReshape>(spec.input_dim);
            for (std::size_t c : spec.cnn_channels) {
                b.conv(c);
                b.add<MaxPool2d>(kPool);
            }
            b.add<Flatten>();
            b.dense(w, Activation::Relu);
            b.dense(1, Activation::Identity);
            break;
        case ModelKind::LSTM:
            b.add<SquareReshape>(spec.input_dim);
            b.add<RowsAsSequence>();
            b.add<Lstm>(b.width(), spec.lstm_hidden, b.rng());
            b.dense(w, Activation::Relu);
            b.dense(1, Activation::Identity);
            break;
        case ModelKind::ConvKAN:
            b.add<SquareReshape>(spec.input_dim);
            for (std::size_t c : spec.convkan_channels) {
                b.conv_kan(c);
                b.add<MaxPool2d>(kPool);
            }
            b.add<Flatten>();
            b.kan(w);
            b.kan(w);
            b.kan(1);
            break;
        case ModelKind::KAN_LSTM:
            b.add<SquareReshape>(spec.input_dim);
            b.conv(spec.cnn_channels.at(0));
            b.conv(spec.cnn_channels.at(1));
            b.add<RowsAsSequence>();
            b.add<Lstm>(b.width(), spec.lstm_hidden, b.rng());
            b.kan(w);
            b.kan(w);
            b.dense(1, Activation::Identity);
            break;
        default:
            throw Error(ErrorKind::UnsupportedKind, "unknown model kind");
    }
    return b.finish();
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    require(static_cast<bool>(in), ErrorKind::IoFailure, "truncated model file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

constexpr char kModelMagic[8] = {'K', 'A', 'N', 'I', 'D', 'S', 'M', '1'};

}  // namespace

std::string_view to_token(ModelKind kind) {
    for (const auto& n : kNames)
        if (n.kind == kind) return n.token;
    return "?";
}

std::string_view display_name(ModelKind kind) {
    for (const auto& n : kNames)
        if (n.kind == kind) return n.display;
    return "?";
}

ModelKind parse_model_kind(std::string_view text) {
    const std::string key = lower(text);
    for (const auto& n : kNames)
        if (key == lower(n.token) || key == lower(n.display)) return n.kind;
    throw Error(ErrorKind::UnsupportedKind, "unknown model kind '" + std::string(text) + "'");
}

void validate(const ModelSpec& spec) {
    require(spec.input_dim >= 1, ErrorKind::InvalidSize, "input_dim must be at least 1");
    require(spec.hidden_width >= 1 && spec.lstm_hidden >= 1, ErrorKind::InvalidSize, "widths must be positive");
    require(spec.cnn_channels.size() == 3 && spec.convkan_channels.size() == 3, ErrorKind::InvalidSize,
            "cnn_channels and convkan_channels need three entries");
    make_grid(spec.grid_lo, spec.grid_hi, spec.grid_size, spec.spline_degree);
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    layers_ = assemble(spec_);
}

Model build(const ModelSpec& spec) { return Model(spec); }

Tensor Model::forward(const Tensor& batch) {
    require(batch.rank() == 2 && batch.dim(1) == spec_.input_dim, ErrorKind::ShapeMismatch,
            "model expects (batch, " + std::to_string(spec_.input_dim) + "), got " + shape_string(batch.shape()));
    Tensor x = batch;
    for (auto& layer : layers_) x = layer->forward(x);
    require(x.all_finite(), ErrorKind::NonFiniteLogit, name() + " produced a non-finite logit");
    return x;
}

void Model::backward(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

std::vector<std::uint8_t> labels_from_logits(const Tensor& logits, double threshold) {
    std::vector<std::uint8_t> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = sigmoid(logits[i]) >= threshold ? 1 : 0;
    return out;
}

std::vector<std::uint8_t> Model::predict(const Tensor& batch, double threshold) {
    return labels_from_logits(forward(batch), threshold);
}

std::vector<NamedParameter> Model::parameters() {
    std::vector<NamedParameter> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        LayerParams* p = layers_[i]->params();
        if (!p) continue;
        for (auto& entry : p->entries())
            out.push_back({std::to_string(i) + "." + layers_[i]->kind() + "." + entry.name, &entry});
    }
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_)
        if (const LayerParams* p = layer->params()) n += p->count();
    return n;
}

void Model::zero_grad() {
    for (auto& layer : layers_)
        if (LayerParams* p = layer->params()) p->zero_grad();
}

std::vector<double> Model::flat_parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& layer : layers_)
        if (const LayerParams* p = layer->params())
            for (const auto& e : p->entries()) out.insert(out.end(), e.value.values().begin(), e.value.values().end());
    return out;
}

void Model::load_flat_parameters(const std::vector<double>& values) {
    require(values.size() == parameter_count(), ErrorKind::ShapeMismatch, "flat parameter count mismatch");
    std::size_t at = 0;
    for (auto& layer : layers_)
        if (LayerParams* p = layer->params())
            for (auto& e : p->entries()) {
                std::copy_n(values.begin() + static_cast<long>(at), e.value.size(), e.value.data());
                at += e.value.size();
            }
}

std::vector<std::string> Model::layer_kinds() const {
    std::vector<std::string> out;
    for (const auto& layer : layers_) out.push_back(layer->kind());
    return out;
}

void save_model(Model& model, const std::filesystem::path& path) {
    nlohmann::json header;
    header["format"] = "kanids-model";
    header["version"] = 1;
    header["spec"] = to_json(model.spec());
    auto& manifest = header["parameters"] = nlohmann::json::array();
    for (const auto& p : model.parameters()) manifest.push_back({{"name", p.name}, {"shape", p.param->value.shape()}});
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::IoFailure, "cannot write " + path.string());
    out.write(kModelMagic, sizeof kModelMagic);
    put_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (double v : model.flat_parameters()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    require(static_cast<bool>(out), ErrorKind::IoFailure, "failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::MissingFile, path.string());
    char magic[8];
    in.read(magic, 8);
    require(in && std::equal(magic, magic + 8, kModelMagic), ErrorKind::SchemaMismatch, "not a model file: " + path.string());
    const std::uint64_t length = get_u64(in);
    std::string text(length, '\0');
    in.read(text.data(), static_cast<std::streamsize>(length));
    require(static_cast<bool>(in), ErrorKind::IoFailure, "truncated model header");
    const auto header = nlohmann::json::parse(text);

    Model model(model_spec_from_json(header.at("spec")));
    auto params = model.parameters();
    const auto& manifest = header.at("parameters");
    require(manifest.size() == params.size(), ErrorKind::SchemaMismatch, "parameter manifest does not match architecture");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(manifest[i].at("name").get<std::string>() == params[i].name &&
                    manifest[i].at("shape").get<Shape>() == params[i].param->value.shape(),
                ErrorKind::SchemaMismatch, "parameter manifest entry " + std::to_string(i) + " mismatch");
    }
    std::vector<double> values(model.parameter_count());
    for (double& v : values) v = std::bit_cast<double>(get_u64(in));
    model.load_flat_parameters(values);
    return model;
}

}  // namespace kanids
