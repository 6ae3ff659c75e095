#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <utility>

#include "core/binio.hpp"
#include "core/errors.hpp"
#include "core/resample.hpp"
#include "core/rng.hpp"

namespace bvoc {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'W', '1'};
constexpr double kPreluInitSlope = 0.25;
constexpr double kFinalLayerScale = 0.1;
constexpr size_t kNone = static_cast<size_t>(-1);

} // namespace

enum class OpKind : uint8_t {
    conv,          // weight + bias params
    act,           // slope param, or relu when slope == kNone
    pixel_shuffle, // factor r
    skip_begin,    // remembers its activation index
    skip_end,      // adds the remembered activation
    global_skip,   // adds the bicubic upsample of the model input
};

struct Model::Op {
    OpKind kind;
    size_t weight = kNone; // conv weight / act slope param index
    size_t bias = kNone;
    size_t r = 0;          // pixel shuffle factor
    size_t skip_from = 0;  // skip_end: activation index pushed by skip_begin
};

Model::Model(const Model&) = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(const Model&) = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

Arch arch_from_name(std::string_view name)
{
    if (name == "srcnn")
        return Arch::srcnn;
    if (name == "resnet")
        return Arch::resnet;
    throw ConfigError("unknown architecture: " + std::string(name));
}

std::string arch_name(Arch a)
{
    return a == Arch::srcnn ? "srcnn" : "resnet";
}

void validate_config(const ModelConfig& cfg)
{
    if (cfg.alpha != 2 && cfg.alpha != 4)
        throw ConfigError("alpha must be 2 or 4");
    for (uint32_t k : {cfg.k1, cfg.k2, cfg.k3})
        if (k < 1 || k % 2 == 0)
            throw ConfigError("srcnn kernel sizes must be odd");
    if (cfg.f1 < 1 || cfg.f2 < 1)
        throw ConfigError("srcnn widths must be at least 1");
    if (cfg.base_width < 1)
        throw ConfigError("base_width must be at least 1");
}

Model::Model(const ModelConfig& cfg) : config_(cfg)
{
    validate_config(cfg);

    auto add_param = [&](std::string name, size_t n, size_t c, size_t h, size_t w) {
        params_.push_back({std::move(name), Tensor4(n, c, h, w), Tensor4(n, c, h, w)});
        return params_.size() - 1;
    };
    const bool prelu = cfg.activation == Activation::prelu;

    auto add_conv = [&](const std::string& stem, size_t oc, size_t ic, size_t k) {
        const size_t w = add_param(stem + ".weight", oc, ic, k, k);
        const size_t b = add_param(stem + ".bias", 1, 1, 1, oc);
        ops_.push_back({OpKind::conv, w, b, 0, 0});
    };
    auto add_act = [&](const std::string& stem, size_t channels) {
        size_t s = kNone;
        if (prelu)
            s = add_param(stem + ".slope", 1, 1, 1, channels);
        ops_.push_back({OpKind::act, s, kNone, 0, 0});
    };

    if (cfg.arch == Arch::srcnn) {
        add_conv("conv1", cfg.f1, 1, cfg.k1);
        add_act("act1", cfg.f1);
        add_conv("conv2", cfg.f2, cfg.f1, cfg.k2);
        add_act("act2", cfg.f2);
        add_conv("conv3", 1, cfg.f2, cfg.k3);
    } else {
        const size_t w = cfg.base_width;
        add_conv("conv_first", w, 1, 3);
        add_act("act_first", w);
        for (uint32_t i = 0; i < cfg.n_blocks; ++i) {
            const std::string stem = "block" + std::to_string(i);
            ops_.push_back({OpKind::skip_begin, kNone, kNone, 0, 0});
            add_conv(stem + ".conv1", w, w, 3);
            add_act(stem + ".act", w);
            add_conv(stem + ".conv2", w, w, 3);
            ops_.push_back({OpKind::skip_end, kNone, kNone, 0, 0});
        }
        const uint32_t stages = cfg.alpha == 4 ? 2 : 1;
        for (uint32_t j = 0; j < stages; ++j) {
            const std::string stem = "up" + std::to_string(j);
            add_conv(stem + ".conv", 4 * w, w, 3);
            ops_.push_back({OpKind::pixel_shuffle, kNone, kNone, 2, 0});
            add_act(stem + ".act", w);
        }
        add_conv("conv_hr", w, w, 3);
        add_act("act_hr", w);
        add_conv("conv_last", 1, w, 3);
        ops_.push_back({OpKind::global_skip, kNone, kNone, 0, 0});
    }

    // Resolve each skip_end to the activation index its skip_begin produced.
    std::vector<size_t> stack;
    for (size_t k = 0; k < ops_.size(); ++k) {
        if (ops_[k].kind == OpKind::skip_begin)
            stack.push_back(k + 1);
        else if (ops_[k].kind == OpKind::skip_end) {
            ops_[k].skip_from = stack.back();
            stack.pop_back();
        }
    }

    // Fan-in-scaled normal init; the output layer is damped so early
    // predictions stay near the skip/bias map.
    Rng rng(cfg.init_seed);
    const std::string final_stem = cfg.arch == Arch::srcnn ? "conv3" : "conv_last";
    for (Param& p : params_) {
        if (p.name.ends_with(".bias"))
            continue; // stays zero
        if (p.name.ends_with(".slope")) {
            std::fill(p.value.v.begin(), p.value.v.end(), kPreluInitSlope);
            continue;
        }
        const size_t fan_in = p.value.c * p.value.h * p.value.w;
        double std = std::sqrt(2.0 / static_cast<double>(fan_in));
        if (p.name == final_stem + ".weight")
            std *= kFinalLayerScale;
        for (double& x : p.value.v)
            x = std * rng.normal();
    }
}

Param& Model::param(std::string_view name)
{
    for (Param& p : params_)
        if (p.name == name)
            return p;
    throw StateError("no such parameter: " + std::string(name));
}

const Param& Model::param(std::string_view name) const
{
    return const_cast<Model*>(this)->param(name);
}

void Model::zero_grad()
{
    for (Param& p : params_)
        std::fill(p.grad.v.begin(), p.grad.v.end(), 0.0);
}

size_t Model::n_scalars() const
{
    size_t n = 0;
    for (const Param& p : params_)
        n += p.value.size();
    return n;
}

Tensor4 Model::run(const Tensor4& input, ForwardCache* cache) const
{
    if (input.c != 1)
        throw ShapeError("model input must be single-channel");

    Tensor4 global_skip;
    if (config_.arch == Arch::resnet) {
        const ResampleSpec up{static_cast<double>(config_.alpha)};
        global_skip = Tensor4(input.n, 1, input.h * config_.alpha,
                              input.w * config_.alpha);
        for (size_t s = 0; s < input.n; ++s) {
            Mat m(input.h, input.w);
            std::copy(input.v.begin() + s * input.h * input.w,
                      input.v.begin() + (s + 1) * input.h * input.w, m.v.begin());
            const Mat u = bicubic_resample(m, up);
            std::copy(u.v.begin(), u.v.end(),
                      global_skip.v.begin() + s * u.size());
        }
    }

    std::vector<Tensor4> local;
    std::vector<Tensor4>& acts = cache ? cache->acts : local;
    acts.clear();
    acts.reserve(ops_.size() + 1);
    acts.push_back(input);

    for (const Op& op : ops_) {
        const Tensor4& x = acts.back();
        switch (op.kind) {
        case OpKind::conv:
            acts.push_back(conv2d_forward(x, params_[op.weight].value,
                                          params_[op.bias].value.v));
            break;
        case OpKind::act:
            acts.push_back(op.weight == kNone
                               ? relu_forward(x)
                               : prelu_forward(x, params_[op.weight].value.v));
            break;
        case OpKind::pixel_shuffle:
            acts.push_back(pixel_shuffle_forward(x, op.r));
            break;
        case OpKind::skip_begin:
            acts.push_back(x);
            break;
        case OpKind::skip_end:
            acts.push_back(add(x, acts[op.skip_from]));
            break;
        case OpKind::global_skip:
            acts.push_back(add(x, global_skip));
            break;
        }
    }
    return acts.back();
}

Tensor4 Model::forward(const Tensor4& input) const { return run(input, nullptr); }

double Model::activation_input_margin(const ForwardCache& cache) const
{
    if (cache.acts.size() != ops_.size() + 1)
        throw StateError("forward cache does not match this model");
    double margin = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < ops_.size(); ++k) {
        if (ops_[k].kind != OpKind::act)
            continue;
        for (const double v : cache.acts[k].v)
            margin = std::min(margin, std::fabs(v));
    }
    return margin;
}

Tensor4 Model::forward(const Tensor4& input, ForwardCache& cache) const
{
    return run(input, &cache);
}

void Model::backward(const ForwardCache& cache, const Tensor4& grad_out)
{
    if (cache.acts.size() != ops_.size() + 1)
        throw StateError("forward cache does not match this model");
    if (!cache.acts.back().same_shape(grad_out))
        throw ShapeError("grad_out shape does not match forward output");

    // pending[i]: extra gradient flowing into activation i through a skip.
    std::unordered_map<size_t, Tensor4> pending;
    Tensor4 g = grad_out;

    for (size_t k = ops_.size(); k-- > 0;) {
        if (auto it = pending.find(k + 1); it != pending.end()) {
            g = add(g, it->second);
            pending.erase(it);
        }
        const Op& op = ops_[k];
        const Tensor4& x = cache.acts[k];
        switch (op.kind) {
        case OpKind::conv: {
            Tensor4 gx, gw;
            std::vector<double> gb;
            conv2d_backward(x, params_[op.weight].value, g, gx, gw, gb);
            Param& pw = params_[op.weight];
            for (size_t i = 0; i < gw.size(); ++i)
                pw.grad.v[i] += gw.v[i];
            Param& pb = params_[op.bias];
            for (size_t i = 0; i < gb.size(); ++i)
                pb.grad.v[i] += gb[i];
            g = std::move(gx);
            break;
        }
        case OpKind::act:
            if (op.weight == kNone) {
                g = relu_backward(x, g);
            } else {
                Param& ps = params_[op.weight];
                g = prelu_backward(x, ps.value.v, g, ps.grad.v);
            }
            break;
        case OpKind::pixel_shuffle:
            g = pixel_shuffle_backward(g, op.r);
            break;
        case OpKind::skip_begin:
            break; // identity
        case OpKind::skip_end: {
            auto [it, fresh] = pending.try_emplace(op.skip_from, g);
            if (!fresh)
                it->second = add(it->second, g);
            break; // grad toward the block body passes through unchanged
        }
        case OpKind::global_skip:
            break; // the skip branch reads data, not parameters
        }
    }
}

Model read_model(const std::string& path)
{
    const auto bytes = binio::read_file(path);
    binio::Reader r(bytes.data(), bytes.size());
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic, not an EMW1 file");

    ModelConfig cfg;
    const uint8_t arch = r.u8();
    if (arch > 1)
        throw FormatError("unknown architecture code");
    cfg.arch = static_cast<Arch>(arch);
    cfg.alpha = r.u32();
    cfg.k1 = r.u32();
    cfg.k2 = r.u32();
    cfg.k3 = r.u32();
    cfg.f1 = r.u32();
    cfg.f2 = r.u32();
    cfg.n_blocks = r.u32();
    cfg.base_width = r.u32();
    const uint8_t act = r.u8();
    if (act > 1)
        throw FormatError("unknown activation code");
    cfg.activation = static_cast<Activation>(act);
    cfg.init_seed = r.u64();
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid stored config: ") + e.what());
    }

    Model m(cfg);
    const uint32_t n_tensors = r.u32();
    if (n_tensors != m.params().size())
        throw FormatError("parameter count does not match config");
    for (Param& p : m.params()) {
        const uint32_t name_len = r.u32();
        std::string name(name_len, '\0');
        r.bytes(name.data(), name_len);
        if (name != p.name)
            throw FormatError("unexpected parameter name: " + name);
        const size_t n = r.u32(), c = r.u32(), h = r.u32(), w = r.u32();
        if (n != p.value.n || c != p.value.c || h != p.value.h || w != p.value.w)
            throw FormatError("parameter shape does not match config: " + name);
        for (double& x : p.value.v)
            x = r.f64();
    }
    if (r.remaining() != 0)
        throw FormatError("trailing bytes after parameters");
    return m;
}

void write_model(const Model& m, const std::string& path)
{
    const ModelConfig& cfg = m.config();
    std::string out;
    out.append(kMagic, 4);
    binio::put_u8(out, static_cast<uint8_t>(cfg.arch));
    binio::put_u32(out, cfg.alpha);
    binio::put_u32(out, cfg.k1);
    binio::put_u32(out, cfg.k2);
    binio::put_u32(out, cfg.k3);
    binio::put_u32(out, cfg.f1);
    binio::put_u32(out, cfg.f2);
    binio::put_u32(out, cfg.n_blocks);
    binio::put_u32(out, cfg.base_width);
    binio::put_u8(out, static_cast<uint8_t>(cfg.activation));
    binio::put_u64(out, cfg.init_seed);

    binio::put_u32(out, static_cast<uint32_t>(m.params().size()));
    for (const Param& p : m.params()) {
        binio::put_u32(out, static_cast<uint32_t>(p.name.size()));
        out.append(p.name);
        binio::put_u32(out, static_cast<uint32_t>(p.value.n));
        binio::put_u32(out, static_cast<uint32_t>(p.value.c));
        binio::put_u32(out, static_cast<uint32_t>(p.value.h));
        binio::put_u32(out, static_cast<uint32_t>(p.value.w));
        for (double x : p.value.v)
            binio::put_f64(out, x);
    }
    binio::write_file(path, out);
}

} // namespace bvoc
