#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/tensor.hpp"

namespace bvoc {

enum class Arch : uint8_t { srcnn = 0, resnet = 1 };
enum class Activation : uint8_t { relu = 0, prelu = 1 };

Arch arch_from_name(std::string_view name);
std::string arch_name(Arch a);

/// srcnn is the pre-upsampling 3-layer net (input already at target dims);
/// resnet is the post-upsampling residual net with x2 pixel-shuffle stages
/// (two for alpha=4, one for alpha=2) and a global bicubic skip.
struct ModelConfig {
    Arch arch = Arch::resnet;
    uint32_t alpha = 4;
    uint32_t k1 = 9, k2 = 1, k3 = 5; // srcnn kernel sizes
    uint32_t f1 = 64, f2 = 32;       // srcnn widths
    uint32_t n_blocks = 4;           // resnet residual blocks
    uint32_t base_width = 32;        // resnet feature width
    Activation activation = Activation::prelu;
    uint64_t init_seed = 0;

    bool operator==(const ModelConfig&) const = default;
};

void validate_config(const ModelConfig& cfg);

struct Param {
    std::string name;
    Tensor4 value;
    Tensor4 grad;
};

/// Intermediate activations of one forward pass, consumed by backward().
struct ForwardCache {
    std::vector<Tensor4> acts;
};

class Model {
public:
    explicit Model(const ModelConfig& cfg);
    Model(const Model&);
    Model(Model&&) noexcept;
    Model& operator=(const Model&);
    Model& operator=(Model&&) noexcept;
    ~Model();

    const ModelConfig& config() const { return config_; }
    std::vector<Param>& params() { return params_; }
    const std::vector<Param>& params() const { return params_; }
    Param& param(std::string_view name);
    const Param& param(std::string_view name) const;
    void zero_grad();
    size_t n_scalars() const;

    /// Input is (n,1,h,w); output is (n,1,alpha*h,alpha*w) for resnet and
    /// (n,1,h,w) for srcnn (whose input is pre-upsampled by the caller).
    /// Values are unclamped; clamping happens at the pipeline level.
    Tensor4 forward(const Tensor4& input) const;
    Tensor4 forward(const Tensor4& input, ForwardCache& cache) const;

    /// Accumulates parameter gradients for dL/d(output) = grad_out.
    /// Call zero_grad() between optimization steps.
    void backward(const ForwardCache& cache, const Tensor4& grad_out);

    /// Smallest |x| feeding any activation in the cached pass. Finite
    /// difference gradient checks are only valid when this margin is
    /// much larger than the probe step.
    double activation_input_margin(const ForwardCache& cache) const;

private:
    struct Op; // sequential layer graph, defined in model.cpp
    Tensor4 run(const Tensor4& input, ForwardCache* cache) const;

    ModelConfig config_;
    std::vector<Param> params_;
    std::vector<Op> ops_;
};

/// EMW1 checkpoint: magic, config block, named parameter tensors.
/// Round-trips bit-exactly.
Model read_model(const std::string& path);
void write_model(const Model& m, const std::string& path);

} // namespace bvoc
