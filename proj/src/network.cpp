#include "xaibench/network.hpp"

#include <cmath>

#include "xaibench/error.hpp"
#include "xaibench/rng.hpp"

namespace xaibench {

ModelSpec ModelSpec::mlp_default(std::size_t rows, std::size_t cols, std::size_t classes) {
    ModelSpec s;
    s.arch = Arch::mlp;
    s.rows = rows;
    s.cols = cols;
    s.classes = classes;
    s.hidden = {64, 64};
    return s;
}

ModelSpec ModelSpec::cnn_default(std::size_t rows, std::size_t cols, std::size_t classes) {
    ModelSpec s;
    s.arch = Arch::cnn;
    s.rows = rows;
    s.cols = cols;
    s.classes = classes;
    s.conv_channels = 16;
    s.conv_kernel = 6;
    s.conv_stride = 2;
    s.pool = 2;
    s.dense_width = 0;
    s.dense_l2 = 1e-4;
    return s;
}

Network Network::build(const ModelSpec& spec) {
    if (spec.rows == 0 || spec.cols == 0 || spec.classes < 2) {
        fail(ErrorCode::invalid_argument, "model spec needs rows, cols and >= 2 classes");
    }
    Network net;
    net.spec_ = spec;
    auto& ls = net.layers_;
    if (spec.arch == ModelSpec::Arch::mlp) {
        if (spec.hidden.empty()) {
            fail(ErrorCode::invalid_argument, "mlp spec needs at least one hidden width");
        }
        ls.push_back(make_flatten());
        std::size_t prev = spec.rows * spec.cols;
        for (std::size_t width : spec.hidden) {
            ls.push_back(make_dense(prev, width, spec.dense_l2));
            ls.push_back(make_relu());
            prev = width;
        }
        ls.push_back(make_dense(prev, spec.classes, spec.dense_l2));
        ls.push_back(make_softmax());
    } else {
        ls.push_back(make_conv2d(1, spec.conv_channels, spec.conv_kernel, spec.conv_stride));
        ls.push_back(make_relu());
        ls.push_back(make_maxpool2d(spec.pool));
        ls.push_back(make_flatten());
        std::size_t oh = (spec.rows - spec.conv_kernel) / spec.conv_stride + 1;
        std::size_t ow = (spec.cols - spec.conv_kernel) / spec.conv_stride + 1;
        std::size_t prev = spec.conv_channels * (oh / spec.pool) * (ow / spec.pool);
        if (spec.dense_width > 0) {
            ls.push_back(make_dense(prev, spec.dense_width, spec.dense_l2));
            ls.push_back(make_relu());
            prev = spec.dense_width;
        }
        ls.push_back(make_dense(prev, spec.classes, spec.dense_l2));
        ls.push_back(make_softmax());
    }
    // Validate that shapes flow through the stack.
    std::vector<std::size_t> shape =
        spec.arch == ModelSpec::Arch::cnn
            ? std::vector<std::size_t>{1, 1, spec.rows, spec.cols}
            : std::vector<std::size_t>{1, spec.rows, spec.cols};
    for (const Layer& l : ls) shape = l.output_shape(shape);
    if (shape != std::vector<std::size_t>{1, spec.classes}) {
        fail(ErrorCode::internal, "model stack produces " + shape_string(shape) +
                                      " instead of (1, " + std::to_string(spec.classes) + ")");
    }
    return net;
}

void Network::init_params(std::uint64_t seed) {
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        Layer& l = layers_[li];
        if (!l.has_params()) continue;
        std::size_t fan_in = l.kind == LayerKind::dense
                                 ? l.in_features
                                 : l.in_channels * l.kernel * l.kernel;
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Rng rng(derive_seed(seed, "layer-init", li));
        rng.fill_uniform(l.weight.data(), l.weight.size(), -bound, bound);
        rng.fill_uniform(l.bias.data(), l.bias.size(), -bound, bound);
    }
}

std::vector<std::size_t> Network::param_layer_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].has_params()) idx.push_back(i);
    }
    return idx;
}

Tensor Network::prepare_input(const Tensor& batch) const {
    if (batch.rank() != 3 || batch.dim(1) != spec_.rows || batch.dim(2) != spec_.cols) {
        fail(ErrorCode::shape, "model input: expected (B, " + std::to_string(spec_.rows) + ", " +
                                   std::to_string(spec_.cols) + "), got " +
                                   shape_string(batch.shape()));
    }
    if (spec_.arch == ModelSpec::Arch::cnn) {
        return batch.reshaped({batch.dim(0), 1, spec_.rows, spec_.cols});
    }
    return batch;
}

Network::Cache Network::forward_cached(const Tensor& prepared) const {
    Cache cache;
    cache.acts.reserve(layers_.size() + 1);
    cache.acts.push_back(prepared);
    for (const Layer& l : layers_) {
        cache.acts.push_back(l.forward(cache.acts.back()));
    }
    return cache;
}

Tensor Network::forward_probs(const Tensor& batch) const {
    Tensor x = prepare_input(batch);
    for (const Layer& l : layers_) x = l.forward(x);
    return x;
}

Tensor Network::forward_logits(const Tensor& batch) const {
    Tensor x = prepare_input(batch);
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) x = layers_[i].forward(x);
    return x;
}

ParamGrads Network::zero_grads() const {
    ParamGrads pg;
    pg.weight.resize(layers_.size());
    pg.bias.resize(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].has_params()) {
            pg.weight[i] = Tensor(layers_[i].weight.shape());
            pg.bias[i] = Tensor(layers_[i].bias.shape());
        }
    }
    return pg;
}

Tensor Network::backward_from_logits(const Cache& cache, const Tensor& grad_logits,
                                     ParamGrads* pg) const {
    if (layers_.empty() || layers_.back().kind != LayerKind::softmax) {
        fail(ErrorCode::internal, "network must end in softmax");
    }
    Tensor g = grad_logits;
    for (std::size_t li = layers_.size() - 1; li-- > 0;) {
        const Layer& l = layers_[li];
        if (pg && l.has_params()) {
            l.backward_params(cache.acts[li], g, pg->weight[li], pg->bias[li]);
        }
        g = l.backward_input(cache.acts[li], cache.acts[li + 1], g);
    }
    return g;
}

Tensor Network::logit_gradient(const Tensor& batch, std::size_t cls) const {
    if (cls >= spec_.classes) {
        fail(ErrorCode::invalid_argument, "class " + std::to_string(cls) + " out of range");
    }
    Tensor prepared = prepare_input(batch);
    Cache cache = forward_cached(prepared);
    std::size_t bsz = batch.dim(0);
    Tensor seed({bsz, spec_.classes});
    for (std::size_t b = 0; b < bsz; ++b) seed[b * spec_.classes + cls] = 1.0;
    Tensor g = backward_from_logits(cache, seed, nullptr);
    return g.reshaped({bsz, spec_.rows, spec_.cols});
}

Tensor Network::relevance_map(const Tensor& x, std::size_t cls,
                              const std::vector<LrpRule>& rules) const {
    if (cls >= spec_.classes) {
        fail(ErrorCode::invalid_argument, "class " + std::to_string(cls) + " out of range");
    }
    if (rules.size() != layers_.size()) {
        fail(ErrorCode::invalid_argument,
             "rule list has " + std::to_string(rules.size()) + " entries for " +
                 std::to_string(layers_.size()) + " layers");
    }
    require_shape(x, {spec_.rows, spec_.cols}, "relevance input");
    Tensor prepared = prepare_input(x.reshaped({1, spec_.rows, spec_.cols}));
    Cache cache = forward_cached(prepared);
    // Start from the logit itself: relevance at the output layer is the
    // pre-softmax score of the explained class, everything else zero.
    const Tensor& logits = cache.acts[layers_.size() - 1];
    Tensor r({spec_.classes});
    r[cls] = logits[cls];
    for (std::size_t li = layers_.size() - 1; li-- > 0;) {
        r = layers_[li].relevance(cache.acts[li].row(0), r, rules[li]);
    }
    return r.reshaped({spec_.rows, spec_.cols});
}

} // namespace xaibench
