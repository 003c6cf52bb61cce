#pragma once

#include <cstdint>
#include <vector>

#include "xaibench/layers.hpp"
#include "xaibench/tensor.hpp"

namespace xaibench {

// Architecture description. Inputs are single-channel (rows x cols) maps;
// the output is a class distribution over `classes` bins.
struct ModelSpec {
    enum class Arch { mlp, cnn };
    Arch arch = Arch::mlp;
    std::size_t rows = 36, cols = 24, classes = 20;

    // mlp: widths of the hidden dense layers.
    std::vector<std::size_t> hidden = {64, 64};

    // cnn: one valid-padding conv block, then pooling, then dense readout.
    std::size_t conv_channels = 16, conv_kernel = 6, conv_stride = 2, pool = 2;
    std::size_t dense_width = 0; // optional hidden dense after flatten; 0 = none
    double dense_l2 = 0.0;       // weight decay on dense layers

    static ModelSpec mlp_default(std::size_t rows, std::size_t cols, std::size_t classes);
    static ModelSpec cnn_default(std::size_t rows, std::size_t cols, std::size_t classes);
};

struct ParamGrads {
    std::vector<Tensor> weight, bias; // indexed by layer; empty tensors for layers without params
};

// Feed-forward classifier with explicit forward, gradient, and relevance
// passes. Value semantics: copies are independent, so callers can perturb a
// copy's weights without touching the original.
class Network {
public:
    Network() = default;
    static Network build(const ModelSpec& spec);

    void init_params(std::uint64_t seed);

    const ModelSpec& spec() const { return spec_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    std::vector<std::size_t> param_layer_indices() const;

    // acts[l] is the input to layer l; acts.back() is the network output.
    struct Cache {
        std::vector<Tensor> acts;
    };

    // Inputs are [B, rows, cols]; outputs [B, classes].
    Tensor forward_probs(const Tensor& batch) const;
    Tensor forward_logits(const Tensor& batch) const;

    Cache forward_cached(const Tensor& prepared) const;
    Tensor prepare_input(const Tensor& batch) const;

    // Backpropagates `grad_logits` [B, classes] from just below the softmax.
    // Accumulates parameter gradients into `pg` when given; returns the
    // gradient w.r.t. the prepared input.
    Tensor backward_from_logits(const Cache& cache, const Tensor& grad_logits,
                                ParamGrads* pg) const;

    ParamGrads zero_grads() const;

    // d logit_cls / d input for each row of the batch; [B, rows, cols].
    Tensor logit_gradient(const Tensor& batch, std::size_t cls) const;

    // Relevance propagated from logit `cls` down to the input for a single
    // sample [rows, cols]. `rules` holds one entry per layer; entries for
    // parameter-free layers are ignored.
    Tensor relevance_map(const Tensor& x, std::size_t cls,
                         const std::vector<LrpRule>& rules) const;

    std::size_t logits_layer() const { return layers_.size() - 1; }

private:
    ModelSpec spec_;
    std::vector<Layer> layers_;
};

} // namespace xaibench
