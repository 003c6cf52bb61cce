#include "xaibench/layers.hpp"

#include <algorithm>
#include <cmath>

#include "xaibench/error.hpp"

namespace xaibench {

namespace {

// Signed stabilizer keeps tiny denominators away from zero without moving
// their sign.
inline double stab(double d, double extra = 0.0) {
    return d + std::copysign(1e-9 + extra, d);
}

[[noreturn]] void shape_fail(const Layer& l, const std::string& what, const std::string& expected,
                             const std::vector<std::size_t>& got) {
    fail(ErrorCode::shape, layer_kind_name(l.kind) + " " + what + ": expected " + expected +
                               ", got " + shape_string(got));
}

} // namespace

std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::maxpool2d: return "maxpool2d";
        case LayerKind::relu: return "relu";
        case LayerKind::softmax: return "softmax";
        case LayerKind::flatten: return "flatten";
    }
    return "?";
}

LrpRule LrpRule::z() {
    LrpRule r;
    r.kind = Kind::z;
    return r;
}

LrpRule LrpRule::alpha_beta_rule(double alpha, double beta) {
    LrpRule r;
    r.kind = Kind::alpha_beta;
    r.alpha = alpha;
    r.beta = beta;
    return r;
}

LrpRule LrpRule::epsilon_rule(double epsilon) {
    LrpRule r;
    r.kind = Kind::epsilon;
    r.epsilon = epsilon;
    return r;
}

LrpRule LrpRule::gamma_rule(double gamma) {
    LrpRule r;
    r.kind = Kind::gamma;
    r.gamma = gamma;
    return r;
}

LrpRule LrpRule::z_bounds_rule(double low, double high) {
    LrpRule r;
    r.kind = Kind::z_bounds;
    r.low = low;
    r.high = high;
    return r;
}

Layer make_dense(std::size_t in, std::size_t out, double l2) {
    Layer l;
    l.kind = LayerKind::dense;
    l.in_features = in;
    l.out_features = out;
    l.l2 = l2;
    l.weight = Tensor({out, in});
    l.bias = Tensor({out});
    return l;
}

Layer make_conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
                  double l2) {
    Layer l;
    l.kind = LayerKind::conv2d;
    l.in_channels = in_ch;
    l.out_channels = out_ch;
    l.kernel = kernel;
    l.stride = stride;
    l.l2 = l2;
    l.weight = Tensor({out_ch, in_ch, kernel, kernel});
    l.bias = Tensor({out_ch});
    return l;
}

Layer make_maxpool2d(std::size_t pool) {
    Layer l;
    l.kind = LayerKind::maxpool2d;
    l.pool = pool;
    return l;
}

Layer make_relu() {
    Layer l;
    l.kind = LayerKind::relu;
    return l;
}

Layer make_softmax() {
    Layer l;
    l.kind = LayerKind::softmax;
    return l;
}

Layer make_flatten() {
    Layer l;
    l.kind = LayerKind::flatten;
    return l;
}

std::vector<std::size_t> Layer::output_shape(const std::vector<std::size_t>& in) const {
    switch (kind) {
        case LayerKind::dense:
            if (in.size() != 2 || in[1] != in_features) {
                fail(ErrorCode::shape, "dense: expected (B, " + std::to_string(in_features) +
                                           "), got " + shape_string(in));
            }
            return {in[0], out_features};
        case LayerKind::conv2d: {
            if (in.size() != 4 || in[1] != in_channels || in[2] < kernel || in[3] < kernel) {
                fail(ErrorCode::shape, "conv2d: expected (B, " + std::to_string(in_channels) +
                                           ", >=" + std::to_string(kernel) +
                                           ", >=" + std::to_string(kernel) + "), got " +
                                           shape_string(in));
            }
            std::size_t oh = (in[2] - kernel) / stride + 1;
            std::size_t ow = (in[3] - kernel) / stride + 1;
            return {in[0], out_channels, oh, ow};
        }
        case LayerKind::maxpool2d: {
            if (in.size() != 4 || in[2] < pool || in[3] < pool) {
                fail(ErrorCode::shape, "maxpool2d: expected (B, C, >=" + std::to_string(pool) +
                                           ", >=" + std::to_string(pool) + "), got " +
                                           shape_string(in));
            }
            return {in[0], in[1], in[2] / pool, in[3] / pool};
        }
        case LayerKind::relu: return in;
        case LayerKind::softmax:
            if (in.size() < 2) {
                fail(ErrorCode::shape, "softmax: expected (B, n), got " + shape_string(in));
            }
            return in;
        case LayerKind::flatten: {
            if (in.empty()) fail(ErrorCode::shape, "flatten: got scalar input");
            std::size_t n = 1;
            for (std::size_t i = 1; i < in.size(); ++i) n *= in[i];
            return {in[0], n};
        }
    }
    fail(ErrorCode::internal, "unknown layer kind");
}

Tensor Layer::forward(const Tensor& x) const {
    switch (kind) {
        case LayerKind::dense: {
            if (x.rank() != 2 || x.dim(1) != in_features) {
                shape_fail(*this, "forward", "(B, " + std::to_string(in_features) + ")", x.shape());
            }
            std::size_t bsz = x.dim(0);
            Tensor y({bsz, out_features});
            const double* w = weight.data();
            for (std::size_t b = 0; b < bsz; ++b) {
                const double* xb = x.data() + b * in_features;
                double* yb = y.data() + b * out_features;
                for (std::size_t o = 0; o < out_features; ++o) {
                    const double* wo = w + o * in_features;
                    double acc = bias[o];
                    for (std::size_t i = 0; i < in_features; ++i) acc += wo[i] * xb[i];
                    yb[o] = acc;
                }
            }
            return y;
        }
        case LayerKind::conv2d: {
            auto oshape = output_shape(x.shape());
            std::size_t bsz = x.dim(0), h = x.dim(2), w = x.dim(3);
            std::size_t oh = oshape[2], ow = oshape[3];
            Tensor y(oshape);
            for (std::size_t b = 0; b < bsz; ++b) {
                for (std::size_t oc = 0; oc < out_channels; ++oc) {
                    double* yp = y.data() + ((b * out_channels + oc) * oh) * ow;
                    for (std::size_t r = 0; r < oh; ++r) {
                        for (std::size_t c = 0; c < ow; ++c) {
                            double acc = bias[oc];
                            for (std::size_t ic = 0; ic < in_channels; ++ic) {
                                const double* xp = x.data() + ((b * in_channels + ic) * h) * w;
                                const double* wp =
                                    weight.data() + ((oc * in_channels + ic) * kernel) * kernel;
                                for (std::size_t kr = 0; kr < kernel; ++kr) {
                                    const double* xrow = xp + (r * stride + kr) * w + c * stride;
                                    const double* wrow = wp + kr * kernel;
                                    for (std::size_t kc = 0; kc < kernel; ++kc)
                                        acc += wrow[kc] * xrow[kc];
                                }
                            }
                            yp[r * ow + c] = acc;
                        }
                    }
                }
            }
            return y;
        }
        case LayerKind::maxpool2d: {
            auto oshape = output_shape(x.shape());
            std::size_t bsz = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
            std::size_t oh = oshape[2], ow = oshape[3];
            Tensor y(oshape);
            for (std::size_t b = 0; b < bsz; ++b) {
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* xp = x.data() + ((b * ch + c) * h) * w;
                    double* yp = y.data() + ((b * ch + c) * oh) * ow;
                    for (std::size_t r = 0; r < oh; ++r) {
                        for (std::size_t q = 0; q < ow; ++q) {
                            // Row-major scan with strict > keeps the first
                            // (lowest index) element on ties.
                            double best = xp[(r * pool) * w + q * pool];
                            for (std::size_t pr = 0; pr < pool; ++pr) {
                                for (std::size_t pc = 0; pc < pool; ++pc) {
                                    double v = xp[(r * pool + pr) * w + q * pool + pc];
                                    if (v > best) best = v;
                                }
                            }
                            yp[r * ow + q] = best;
                        }
                    }
                }
            }
            return y;
        }
        case LayerKind::relu: {
            Tensor y = x;
            double* p = y.data();
            for (std::size_t i = 0; i < y.size(); ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
            return y;
        }
        case LayerKind::softmax: {
            if (x.rank() < 2) shape_fail(*this, "forward", "(B, n)", x.shape());
            std::size_t n = x.dim(x.rank() - 1);
            std::size_t rows = x.size() / n;
            Tensor y = x;
            for (std::size_t r = 0; r < rows; ++r) {
                double* p = y.data() + r * n;
                double m = p[0];
                for (std::size_t i = 1; i < n; ++i) m = std::max(m, p[i]);
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    p[i] = std::exp(p[i] - m);
                    sum += p[i];
                }
                for (std::size_t i = 0; i < n; ++i) p[i] /= sum;
            }
            return y;
        }
        case LayerKind::flatten: return x.reshaped(output_shape(x.shape()));
    }
    fail(ErrorCode::internal, "unknown layer kind");
}

Tensor Layer::backward_input(const Tensor& x, const Tensor& y, const Tensor& gout) const {
    switch (kind) {
        case LayerKind::dense: {
            std::size_t bsz = x.dim(0);
            Tensor gin({bsz, in_features});
            const double* w = weight.data();
            for (std::size_t b = 0; b < bsz; ++b) {
                const double* gb = gout.data() + b * out_features;
                double* gi = gin.data() + b * in_features;
                for (std::size_t o = 0; o < out_features; ++o) {
                    double g = gb[o];
                    if (g == 0.0) continue;
                    const double* wo = w + o * in_features;
                    for (std::size_t i = 0; i < in_features; ++i) gi[i] += g * wo[i];
                }
            }
            return gin;
        }
        case LayerKind::conv2d: {
            auto oshape = output_shape(x.shape());
            std::size_t bsz = x.dim(0), h = x.dim(2), w = x.dim(3);
            std::size_t oh = oshape[2], ow = oshape[3];
            Tensor gin(x.shape());
            for (std::size_t b = 0; b < bsz; ++b) {
                for (std::size_t oc = 0; oc < out_channels; ++oc) {
                    const double* gp = gout.data() + ((b * out_channels + oc) * oh) * ow;
                    for (std::size_t r = 0; r < oh; ++r) {
                        for (std::size_t c = 0; c < ow; ++c) {
                            double g = gp[r * ow + c];
                            if (g == 0.0) continue;
                            for (std::size_t ic = 0; ic < in_channels; ++ic) {
                                double* ip = gin.data() + ((b * in_channels + ic) * h) * w;
                                const double* wp =
                                    weight.data() + ((oc * in_channels + ic) * kernel) * kernel;
                                for (std::size_t kr = 0; kr < kernel; ++kr) {
                                    double* irow = ip + (r * stride + kr) * w + c * stride;
                                    const double* wrow = wp + kr * kernel;
                                    for (std::size_t kc = 0; kc < kernel; ++kc)
                                        irow[kc] += g * wrow[kc];
                                }
                            }
                        }
                    }
                }
            }
            return gin;
        }
        case LayerKind::maxpool2d: {
            auto oshape = output_shape(x.shape());
            std::size_t bsz = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
            std::size_t oh = oshape[2], ow = oshape[3];
            Tensor gin(x.shape());
            for (std::size_t b = 0; b < bsz; ++b) {
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* xp = x.data() + ((b * ch + c) * h) * w;
                    double* ip = gin.data() + ((b * ch + c) * h) * w;
                    const double* gp = gout.data() + ((b * ch + c) * oh) * ow;
                    for (std::size_t r = 0; r < oh; ++r) {
                        for (std::size_t q = 0; q < ow; ++q) {
                            std::size_t bi = (r * pool) * w + q * pool;
                            double best = xp[bi];
                            for (std::size_t pr = 0; pr < pool; ++pr) {
                                for (std::size_t pc = 0; pc < pool; ++pc) {
                                    std::size_t idx = (r * pool + pr) * w + q * pool + pc;
                                    if (xp[idx] > best) {
                                        best = xp[idx];
                                        bi = idx;
                                    }
                                }
                            }
                            ip[bi] += gp[r * ow + q];
                        }
                    }
                }
            }
            return gin;
        }
        case LayerKind::relu: {
            Tensor gin = gout;
            const double* xp = x.data();
            double* gp = gin.data();
            for (std::size_t i = 0; i < gin.size(); ++i) {
                if (xp[i] <= 0.0) gp[i] = 0.0;
            }
            return gin;
        }
        case LayerKind::softmax: {
            std::size_t n = x.dim(x.rank() - 1);
            std::size_t rows = x.size() / n;
            Tensor gin(x.shape());
            for (std::size_t r = 0; r < rows; ++r) {
                const double* yp = y.data() + r * n;
                const double* gp = gout.data() + r * n;
                double* ip = gin.data() + r * n;
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += gp[i] * yp[i];
                for (std::size_t i = 0; i < n; ++i) ip[i] = yp[i] * (gp[i] - dot);
            }
            return gin;
        }
        case LayerKind::flatten: return gout.reshaped(x.shape());
    }
    fail(ErrorCode::internal, "unknown layer kind");
}

void Layer::backward_params(const Tensor& x, const Tensor& gout, Tensor& wgrad,
                            Tensor& bgrad) const {
    if (kind == LayerKind::dense) {
        std::size_t bsz = x.dim(0);
        for (std::size_t b = 0; b < bsz; ++b) {
            const double* xb = x.data() + b * in_features;
            const double* gb = gout.data() + b * out_features;
            for (std::size_t o = 0; o < out_features; ++o) {
                double g = gb[o];
                bgrad[o] += g;
                if (g == 0.0) continue;
                double* wo = wgrad.data() + o * in_features;
                for (std::size_t i = 0; i < in_features; ++i) wo[i] += g * xb[i];
            }
        }
        return;
    }
    if (kind == LayerKind::conv2d) {
        auto oshape = output_shape(x.shape());
        std::size_t bsz = x.dim(0), h = x.dim(2), w = x.dim(3);
        std::size_t oh = oshape[2], ow = oshape[3];
        for (std::size_t b = 0; b < bsz; ++b) {
            for (std::size_t oc = 0; oc < out_channels; ++oc) {
                const double* gp = gout.data() + ((b * out_channels + oc) * oh) * ow;
                for (std::size_t r = 0; r < oh; ++r) {
                    for (std::size_t c = 0; c < ow; ++c) {
                        double g = gp[r * ow + c];
                        bgrad[oc] += g;
                        if (g == 0.0) continue;
                        for (std::size_t ic = 0; ic < in_channels; ++ic) {
                            const double* xp = x.data() + ((b * in_channels + ic) * h) * w;
                            double* wp =
                                wgrad.data() + ((oc * in_channels + ic) * kernel) * kernel;
                            for (std::size_t kr = 0; kr < kernel; ++kr) {
                                const double* xrow = xp + (r * stride + kr) * w + c * stride;
                                double* wrow = wp + kr * kernel;
                                for (std::size_t kc = 0; kc < kernel; ++kc)
                                    wrow[kc] += g * xrow[kc];
                            }
                        }
                    }
                }
            }
        }
        return;
    }
    fail(ErrorCode::unsupported, layer_kind_name(kind) + " has no parameters to differentiate");
}

namespace {

// Rule-modified contribution of one connection. Bias terms stay out of both
// numerator and denominator, so each rule conserves relevance layer to layer
// up to the stabilizer.
inline double conn_value(const LrpRule& r, double x, double w) {
    switch (r.kind) {
        case LrpRule::Kind::gamma: return x * (w + r.gamma * std::max(w, 0.0));
        case LrpRule::Kind::z_bounds:
            return x * w - r.low * std::max(w, 0.0) - r.high * std::min(w, 0.0);
        default: return x * w;
    }
}

} // namespace

Tensor Layer::relevance(const Tensor& x, const Tensor& rout, const LrpRule& rule) const {
    if (rule.kind == LrpRule::Kind::alpha_beta && std::fabs(rule.alpha + rule.beta - 1.0) > 1e-9) {
        fail(ErrorCode::invalid_argument, "alpha_beta rule requires alpha + beta = 1, got alpha=" +
                                              std::to_string(rule.alpha) +
                                              " beta=" + std::to_string(rule.beta));
    }
    switch (kind) {
        case LayerKind::relu:
        case LayerKind::softmax: return rout;
        case LayerKind::flatten: return rout.reshaped(x.shape());
        case LayerKind::maxpool2d: {
            // Winner takes all: each window's relevance lands on the input
            // that produced the forward maximum (first on ties).
            std::size_t ch = x.dim(0), h = x.dim(1), w = x.dim(2);
            std::size_t oh = h / pool, ow = w / pool;
            Tensor rin(x.shape());
            for (std::size_t c = 0; c < ch; ++c) {
                const double* xp = x.data() + (c * h) * w;
                double* ip = rin.data() + (c * h) * w;
                const double* rp = rout.data() + (c * oh) * ow;
                for (std::size_t r = 0; r < oh; ++r) {
                    for (std::size_t q = 0; q < ow; ++q) {
                        std::size_t bi = (r * pool) * w + q * pool;
                        double best = xp[bi];
                        for (std::size_t pr = 0; pr < pool; ++pr) {
                            for (std::size_t pc = 0; pc < pool; ++pc) {
                                std::size_t idx = (r * pool + pr) * w + q * pool + pc;
                                if (xp[idx] > best) {
                                    best = xp[idx];
                                    bi = idx;
                                }
                            }
                        }
                        ip[bi] += rp[r * ow + q];
                    }
                }
            }
            return rin;
        }
        case LayerKind::dense: {
            if (x.rank() != 1 || x.dim(0) != in_features) {
                shape_fail(*this, "relevance", "(" + std::to_string(in_features) + ")", x.shape());
            }
            Tensor rin({in_features});
            if (rule.kind == LrpRule::Kind::alpha_beta) {
                for (std::size_t o = 0; o < out_features; ++o) {
                    const double* wo = weight.data() + o * in_features;
                    double dpos = 0.0, dneg = 0.0;
                    for (std::size_t i = 0; i < in_features; ++i) {
                        double z = x[i] * wo[i];
                        if (z > 0.0) dpos += z;
                        else dneg += z;
                    }
                    double fpos = rule.alpha * rout[o] / stab(dpos);
                    double fneg = rule.beta * rout[o] / stab(dneg);
                    for (std::size_t i = 0; i < in_features; ++i) {
                        double z = x[i] * wo[i];
                        rin[i] += z > 0.0 ? z * fpos : z * fneg;
                    }
                }
                return rin;
            }
            double extra = rule.kind == LrpRule::Kind::epsilon ? rule.epsilon : 0.0;
            for (std::size_t o = 0; o < out_features; ++o) {
                const double* wo = weight.data() + o * in_features;
                double denom = 0.0;
                for (std::size_t i = 0; i < in_features; ++i)
                    denom += conn_value(rule, x[i], wo[i]);
                double f = rout[o] / stab(denom, extra);
                for (std::size_t i = 0; i < in_features; ++i)
                    rin[i] += conn_value(rule, x[i], wo[i]) * f;
            }
            return rin;
        }
        case LayerKind::conv2d: {
            if (x.rank() != 3 || x.dim(0) != in_channels) {
                shape_fail(*this, "relevance", "(" + std::to_string(in_channels) + ", H, W)",
                           x.shape());
            }
            std::size_t h = x.dim(1), w = x.dim(2);
            std::size_t oh = (h - kernel) / stride + 1, ow = (w - kernel) / stride + 1;
            Tensor rin(x.shape());
            bool ab = rule.kind == LrpRule::Kind::alpha_beta;
            double extra = rule.kind == LrpRule::Kind::epsilon ? rule.epsilon : 0.0;
            for (std::size_t oc = 0; oc < out_channels; ++oc) {
                const double* rp = rout.data() + (oc * oh) * ow;
                for (std::size_t r = 0; r < oh; ++r) {
                    for (std::size_t c = 0; c < ow; ++c) {
                        double dpos = 0.0, dneg = 0.0, denom = 0.0;
                        for (std::size_t ic = 0; ic < in_channels; ++ic) {
                            const double* xp = x.data() + (ic * h) * w;
                            const double* wp =
                                weight.data() + ((oc * in_channels + ic) * kernel) * kernel;
                            for (std::size_t kr = 0; kr < kernel; ++kr) {
                                for (std::size_t kc = 0; kc < kernel; ++kc) {
                                    double xv = xp[(r * stride + kr) * w + c * stride + kc];
                                    double wv = wp[kr * kernel + kc];
                                    if (ab) {
                                        double z = xv * wv;
                                        if (z > 0.0) dpos += z;
                                        else dneg += z;
                                    } else {
                                        denom += conn_value(rule, xv, wv);
                                    }
                                }
                            }
                        }
                        double f = 0.0, fpos = 0.0, fneg = 0.0;
                        if (ab) {
                            fpos = rule.alpha * rp[r * ow + c] / stab(dpos);
                            fneg = rule.beta * rp[r * ow + c] / stab(dneg);
                        } else {
                            f = rp[r * ow + c] / stab(denom, extra);
                        }
                        for (std::size_t ic = 0; ic < in_channels; ++ic) {
                            const double* xp = x.data() + (ic * h) * w;
                            double* ip = rin.data() + (ic * h) * w;
                            const double* wp =
                                weight.data() + ((oc * in_channels + ic) * kernel) * kernel;
                            for (std::size_t kr = 0; kr < kernel; ++kr) {
                                for (std::size_t kc = 0; kc < kernel; ++kc) {
                                    std::size_t xi = (r * stride + kr) * w + c * stride + kc;
                                    double wv = wp[kr * kernel + kc];
                                    if (ab) {
                                        double z = xp[xi] * wv;
                                        ip[xi] += z > 0.0 ? z * fpos : z * fneg;
                                    } else {
                                        ip[xi] += conn_value(rule, xp[xi], wv) * f;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            return rin;
        }
    }
    fail(ErrorCode::internal, "unknown layer kind");
}

} // namespace xaibench
