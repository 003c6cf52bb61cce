#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xaibench/tensor.hpp"

namespace xaibench {

enum class LayerKind { dense, conv2d, maxpool2d, relu, softmax, flatten };

std::string layer_kind_name(LayerKind k);

// Relevance redistribution rule for one parameterized layer.
struct LrpRule {
    enum class Kind { z, alpha_beta, epsilon, gamma, z_bounds, none };
    Kind kind = Kind::none;
    double alpha = 1.0;   // alpha_beta; alpha + beta must equal 1
    double beta = 0.0;
    double epsilon = 0.0; // epsilon; added on top of the base stabilizer
    double gamma = 0.0;   // gamma; boost factor on positive weights
    double low = 0.0;     // z_bounds; smallest admissible input value
    double high = 0.0;    // z_bounds; largest admissible input value

    static LrpRule z();
    static LrpRule alpha_beta_rule(double alpha, double beta);
    static LrpRule epsilon_rule(double epsilon);
    static LrpRule gamma_rule(double gamma);
    static LrpRule z_bounds_rule(double low, double high);
};

// One layer of a feed-forward network. Plain value type: copying a Layer
// copies its parameters, which the model-randomization paths rely on.
//
// Batch conventions:
//   dense      [B, in]           -> [B, out]
//   conv2d     [B, C, H, W]      -> [B, OC, OH, OW], valid padding,
//                                   OH = (H - K) / S + 1
//   maxpool2d  [B, C, H, W]      -> [B, C, H/P, W/P], window P, stride P
//   relu       any               -> same shape
//   softmax    [B, n]            -> [B, n], normalized over the last axis
//   flatten    [B, ...]          -> [B, prod(...)]
struct Layer {
    LayerKind kind;

    std::size_t in_features = 0, out_features = 0; // dense
    std::size_t in_channels = 0, out_channels = 0; // conv2d
    std::size_t kernel = 0, stride = 1;            // conv2d
    std::size_t pool = 0;                          // maxpool2d
    double l2 = 0.0;                               // weight decay coefficient

    Tensor weight; // dense: (out, in); conv2d: (oc, ic, k, k)
    Tensor bias;   // dense: (out);     conv2d: (oc)

    bool has_params() const { return kind == LayerKind::dense || kind == LayerKind::conv2d; }

    Tensor forward(const Tensor& x) const;
    // Gradient of the loss w.r.t. this layer's input. `y` is the forward
    // output (used by softmax; others recompute what they need from `x`).
    Tensor backward_input(const Tensor& x, const Tensor& y, const Tensor& gout) const;
    // Accumulates parameter gradients over the batch into wgrad/bgrad.
    void backward_params(const Tensor& x, const Tensor& gout, Tensor& wgrad, Tensor& bgrad) const;
    // Redistributes relevance from this layer's output to its input for a
    // single sample (no batch axis). Parameter-free layers ignore `rule`.
    Tensor relevance(const Tensor& x, const Tensor& rout, const LrpRule& rule) const;

    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input_shape) const;
};

Layer make_dense(std::size_t in, std::size_t out, double l2 = 0.0);
Layer make_conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
                  double l2 = 0.0);
Layer make_maxpool2d(std::size_t pool);
Layer make_relu();
Layer make_softmax();
Layer make_flatten();

} // namespace xaibench
