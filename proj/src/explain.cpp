#include "xaibench/explain.hpp"

#include <array>
#include <cmath>

#include "xaibench/error.hpp"
#include "xaibench/rng.hpp"

namespace xaibench {

namespace {

struct MethodNames {
    Method m;
    const char* id;
    const char* display;
};

constexpr std::array<MethodNames, 10> kMethods{{
    {Method::gradient, "gradient", "Gradient"},
    {Method::input_gradient, "input_gradient", "InputGradients"},
    {Method::integrated_gradients, "integrated_gradients", "Integrated Gradients"},
    {Method::lrp_z, "lrp_z", "LRP-z"},
    {Method::lrp_ab, "lrp_ab", "LRP-ab"},
    {Method::lrp_composite, "lrp_composite", "LRP-composite"},
    {Method::smoothgrad, "smoothgrad", "SmoothGrad"},
    {Method::noisegrad, "noisegrad", "NoiseGrad"},
    {Method::fusiongrad, "fusiongrad", "FusionGrad"},
    {Method::random_baseline, "random_baseline", "Random Baseline"},
}};

Tensor single_logit_gradient(const Network& net, const Tensor& x, std::size_t cls) {
    std::size_t rows = x.dim(0), cols = x.dim(1);
    return net.logit_gradient(x.reshaped({1, rows, cols}), cls).reshaped({rows, cols});
}

Tensor gradient_map(const Network& net, const Tensor& x, std::size_t cls) {
    return single_logit_gradient(net, x, cls);
}

Tensor input_gradient_map(const Network& net, const Tensor& x, std::size_t cls) {
    Tensor g = single_logit_gradient(net, x, cls);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= x[i];
    return g;
}

Tensor integrated_gradients_map(const ExplainContext& ctx, const Network& net, const Tensor& x,
                                std::size_t cls) {
    std::size_t steps = ctx.cfg.ig_steps;
    if (steps < 1) fail(ErrorCode::config, "integrated_gradients needs steps >= 1");
    std::size_t rows = x.dim(0), cols = x.dim(1), cells = rows * cols;
    double base = ctx.cfg.ig_baseline;
    // Midpoint Riemann sum along the straight path from the baseline to x.
    Tensor points({steps, rows, cols});
    for (std::size_t s = 0; s < steps; ++s) {
        double a = (static_cast<double>(s) + 0.5) / static_cast<double>(steps);
        double* row = points.data() + s * cells;
        for (std::size_t i = 0; i < cells; ++i) row[i] = base + a * (x[i] - base);
    }
    Tensor grads = net.logit_gradient(points, cls);
    Tensor out({rows, cols});
    for (std::size_t i = 0; i < cells; ++i) {
        double avg = 0.0;
        for (std::size_t s = 0; s < steps; ++s) avg += grads[s * cells + i];
        avg /= static_cast<double>(steps);
        out[i] = (x[i] - base) * avg;
    }
    return out;
}

Tensor base_map(const ExplainContext& ctx, const Network& net, Method m, const Tensor& x,
                std::size_t cls);

// Shared engine behind smoothgrad / noisegrad / fusiongrad: the average of
// base-method maps over (1 + n_model) models x (1 + m_input) inputs, with the
// unperturbed model and input always at index 0. Zero noise on an axis
// collapses that axis entirely, which makes the degenerate identities exact
// rather than approximate.
Tensor averaged_map(const ExplainContext& ctx, const Tensor& x, std::size_t cls,
                    std::uint64_t seed, std::size_t n_model, double sigma_model,
                    std::size_t m_input, double sigma_input) {
    if (sigma_model == 0.0) n_model = 0;
    if (sigma_input == 0.0) m_input = 0;
    std::size_t cells = x.size();

    Tensor inputs({m_input + 1, x.dim(0), x.dim(1)});
    inputs.set_row(0, x);
    for (std::size_t j = 1; j <= m_input; ++j) {
        Rng rng(derive_seed(seed, "input-noise", j));
        Tensor xj = x;
        for (std::size_t i = 0; i < cells; ++i) xj[i] += rng.normal(0.0, sigma_input);
        inputs.set_row(j, xj);
    }

    Tensor acc({x.dim(0), x.dim(1)});
    Method base = ctx.cfg.base_method;
    bool batched = base == Method::gradient || base == Method::input_gradient;
    for (std::size_t i = 0; i <= n_model; ++i) {
        Network perturbed;
        const Network* f = ctx.net;
        if (i > 0) {
            perturbed = perturb_weights(*ctx.net, sigma_model, derive_seed(seed, "model-noise", i));
            f = &perturbed;
        }
        if (batched) {
            Tensor grads = f->logit_gradient(inputs, cls);
            if (base == Method::input_gradient) {
                for (std::size_t e = 0; e < grads.size(); ++e) grads[e] *= inputs[e];
            }
            for (std::size_t j = 0; j <= m_input; ++j) {
                const double* g = grads.data() + j * cells;
                for (std::size_t e = 0; e < cells; ++e) acc[e] += g[e];
            }
        } else {
            for (std::size_t j = 0; j <= m_input; ++j) {
                Tensor map = base_map(ctx, *f, base, inputs.row(j), cls);
                for (std::size_t e = 0; e < cells; ++e) acc[e] += map[e];
            }
        }
    }
    double denom = static_cast<double>((n_model + 1) * (m_input + 1));
    for (std::size_t e = 0; e < cells; ++e) acc[e] /= denom;
    return acc;
}

// Dispatch for the deterministic methods, reused as the inner estimator of
// the averaging methods.
Tensor base_map(const ExplainContext& ctx, const Network& net, Method m, const Tensor& x,
                std::size_t cls) {
    switch (m) {
        case Method::gradient: return gradient_map(net, x, cls);
        case Method::input_gradient: return input_gradient_map(net, x, cls);
        case Method::integrated_gradients: return integrated_gradients_map(ctx, net, x, cls);
        case Method::lrp_z:
        case Method::lrp_ab:
        case Method::lrp_composite: return net.relevance_map(x, cls, lrp_rules(net, m, ctx));
        default:
            fail(ErrorCode::config,
                 "method " + method_id(m) + " cannot serve as a base estimator");
    }
}

} // namespace

std::string method_name(Method m) {
    for (const auto& e : kMethods) {
        if (e.m == m) return e.display;
    }
    fail(ErrorCode::invalid_argument, "unknown method id " + std::to_string(unsigned(m)));
}

std::string method_id(Method m) {
    for (const auto& e : kMethods) {
        if (e.m == m) return e.id;
    }
    fail(ErrorCode::invalid_argument, "unknown method id " + std::to_string(unsigned(m)));
}

std::optional<Method> method_from_id(const std::string& id) {
    for (const auto& e : kMethods) {
        if (id == e.id) return e.m;
    }
    return std::nullopt;
}

std::optional<Method> method_from_index(std::uint32_t index) {
    if (index >= kMethodCount) return std::nullopt;
    return static_cast<Method>(index);
}

std::vector<Method> default_methods(ModelSpec::Arch arch) {
    std::vector<Method> ms = {Method::gradient,      Method::input_gradient,
                              Method::integrated_gradients, Method::lrp_z,
                              Method::lrp_ab,        Method::smoothgrad,
                              Method::noisegrad,     Method::fusiongrad};
    if (arch == ModelSpec::Arch::cnn) ms.push_back(Method::lrp_composite);
    return ms;
}

std::vector<LrpRule> lrp_rules(const Network& net, Method m, const ExplainContext& ctx) {
    const XaiConfig& cfg = ctx.cfg;
    std::vector<LrpRule> rules(net.layers().size());
    if (m == Method::lrp_z) {
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (net.layers()[i].has_params()) rules[i] = LrpRule::z();
        }
        return rules;
    }
    if (m == Method::lrp_ab) {
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (net.layers()[i].has_params()) {
                rules[i] = LrpRule::alpha_beta_rule(cfg.lrp_alpha, cfg.lrp_beta);
            }
        }
        return rules;
    }
    if (m == Method::lrp_composite) {
        // First parameterized layer sees the raw input and uses the bounded
        // rule over the admissible value box; other convolutions boost
        // positive weights; dense layers get the stabilized share.
        bool first = true;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const Layer& l = net.layers()[i];
            if (!l.has_params()) continue;
            if (first) {
                rules[i] = LrpRule::z_bounds_rule(ctx.input_min, ctx.input_max);
                first = false;
            } else if (l.kind == LayerKind::conv2d) {
                rules[i] = LrpRule::gamma_rule(cfg.lrp_gamma);
            } else {
                rules[i] = LrpRule::epsilon_rule(cfg.lrp_epsilon);
            }
        }
        return rules;
    }
    fail(ErrorCode::invalid_argument, method_id(m) + " is not a relevance-rule method");
}

Network perturb_weights(const Network& net, double sigma, std::uint64_t seed) {
    Network out = net;
    Rng rng(seed);
    for (Layer& l : out.layers()) {
        if (!l.has_params()) continue;
        double* w = l.weight.data();
        for (std::size_t i = 0; i < l.weight.size(); ++i) w[i] *= rng.normal(1.0, sigma);
    }
    return out;
}

Tensor random_uniform_map(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Tensor map({rows, cols});
    Rng rng(seed);
    rng.fill_uniform(map.data(), map.size(), 0.0, 1.0);
    return map;
}

Explanation explain_with_model(const ExplainContext& ctx, const Network& net, Method m,
                               const Tensor& x, std::size_t cls, std::uint64_t seed) {
    if (x.rank() != 2) {
        fail(ErrorCode::shape, "explanation input must be (rows, cols), got " +
                                   shape_string(x.shape()));
    }
    ExplainContext local = ctx;
    local.net = &net;
    const XaiConfig& cfg = ctx.cfg;
    double data_range = ctx.input_max - ctx.input_min;
    Explanation e;
    e.method = m;
    e.target_class = cls;
    switch (m) {
        case Method::smoothgrad:
            e.relevance = averaged_map(local, x, cls, seed, 0, 0.0, cfg.sg_samples,
                                       cfg.sg_sigma_scale * data_range);
            break;
        case Method::noisegrad:
            e.relevance = averaged_map(local, x, cls, seed, cfg.ng_samples, cfg.ng_sigma, 0, 0.0);
            break;
        case Method::fusiongrad:
            e.relevance = averaged_map(local, x, cls, seed, cfg.fg_model_samples, cfg.fg_ng_sigma,
                                       cfg.fg_input_samples, cfg.fg_sigma_scale * data_range);
            break;
        case Method::random_baseline:
            e.relevance = random_uniform_map(x.dim(0), x.dim(1), seed);
            break;
        default: e.relevance = base_map(local, net, m, x, cls);
    }
    if (!e.relevance.all_finite()) {
        fail(ErrorCode::numeric, "non-finite values in " + method_id(m) + " map");
    }
    return e;
}

Explanation explain(const ExplainContext& ctx, Method m, const Tensor& x, std::size_t cls,
                    std::uint64_t seed) {
    if (ctx.net == nullptr) fail(ErrorCode::invalid_argument, "explain context has no model");
    return explain_with_model(ctx, *ctx.net, m, x, cls, seed);
}

Tensor minmax_normalize(const Tensor& map) {
    double pos_max = 0.0, neg_min = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        pos_max = std::max(pos_max, map[i]);
        neg_min = std::min(neg_min, map[i]);
    }
    Tensor out = map;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] > 0.0 && pos_max > 0.0) out[i] /= pos_max;
        else if (out[i] < 0.0 && neg_min < 0.0) out[i] /= -neg_min;
    }
    return out;
}

Explanation minmax_normalize(Explanation e) {
    e.relevance = minmax_normalize(e.relevance);
    e.normalized = true;
    return e;
}

} // namespace xaibench
