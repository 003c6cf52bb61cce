#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xaibench/network.hpp"
#include "xaibench/tensor.hpp"

namespace xaibench {

enum class Method : std::uint32_t {
    gradient = 0,
    input_gradient = 1,
    integrated_gradients = 2,
    lrp_z = 3,
    lrp_ab = 4,
    lrp_composite = 5,
    smoothgrad = 6,
    noisegrad = 7,
    fusiongrad = 8,
    random_baseline = 9,
};

inline constexpr std::size_t kMethodCount = 10;

// Display name ("InputGradients") and config identifier ("input_gradient").
std::string method_name(Method m);
std::string method_id(Method m);
std::optional<Method> method_from_id(const std::string& id);
std::optional<Method> method_from_index(std::uint32_t index);

// The attribution methods benchmarked by default for an architecture. The
// composite relevance rule targets convolutional stacks, so it joins the
// list only for the cnn.
std::vector<Method> default_methods(ModelSpec::Arch arch);

struct XaiConfig {
    std::size_t sg_samples = 150;   // perturbed inputs M for smoothgrad
    double sg_sigma_scale = 0.5;    // sigma = scale * (x_max - x_min)
    std::size_t ng_samples = 20;    // perturbed models N for noisegrad
    double ng_sigma = 0.25;         // multiplicative weight noise N(1, sigma)
    std::size_t fg_model_samples = 20, fg_input_samples = 20;
    double fg_sigma_scale = 0.25, fg_ng_sigma = 0.125;
    std::size_t ig_steps = 64;
    double ig_baseline = 0.0;       // constant baseline map value
    double lrp_alpha = 1.0, lrp_beta = 0.0;
    double lrp_epsilon = 1e-6, lrp_gamma = 0.25;
    Method base_method = Method::gradient; // inner estimator for SG/NG/FG
};

struct Explanation {
    Method method;
    std::size_t target_class = 0;
    Tensor relevance;
    bool normalized = false;
};

// Everything an attribution needs besides the sample: the model and the
// admissible value range of the inputs (used for noise scales and the
// first-layer relevance rule).
struct ExplainContext {
    const Network* net = nullptr;
    double input_min = 0.0;
    double input_max = 1.0;
    XaiConfig cfg;
};

// Computes the attribution map of `x` for class `cls`. The explained output
// is the pre-softmax logit. `seed` drives the stochastic methods; the
// deterministic ones ignore it.
Explanation explain(const ExplainContext& ctx, Method m, const Tensor& x, std::size_t cls,
                    std::uint64_t seed);

// Same but against a substitute model (used when a metric perturbs the
// network); the context's model is ignored.
Explanation explain_with_model(const ExplainContext& ctx, const Network& net, Method m,
                               const Tensor& x, std::size_t cls, std::uint64_t seed);

// Positive entries divided by the largest positive value, negative entries
// by the magnitude of the most negative value; result lies in [-1, 1].
// All-zero maps are returned unchanged.
Tensor minmax_normalize(const Tensor& map);
Explanation minmax_normalize(Explanation e);

// I.i.d. U(0,1) map, the uninformative baseline explanation.
Tensor random_uniform_map(std::size_t rows, std::size_t cols, std::uint64_t seed);

// Returns a copy of `net` with every weight tensor scaled elementwise by
// N(1, sigma) draws; biases stay untouched.
Network perturb_weights(const Network& net, double sigma, std::uint64_t seed);

// Per-layer relevance rule assignment used by the lrp_* methods.
std::vector<LrpRule> lrp_rules(const Network& net, Method m, const ExplainContext& ctx);

} // namespace xaibench
