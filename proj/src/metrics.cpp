#include "xaibench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "xaibench/error.hpp"
#include "xaibench/explain.hpp"

namespace xaibench {

namespace {

struct MetricInfo {
    MetricId id;
    const char* key;
    const char* name;
    Property property;
    bool inverse_norm;
};

constexpr MetricInfo kMetrics[] = {
    {MetricId::avg_sensitivity, "avg_sensitivity", "Average Sensitivity", Property::robustness, true},
    {MetricId::local_lipschitz, "local_lipschitz", "Local Lipschitz Estimate", Property::robustness, true},
    {MetricId::road, "road", "ROAD", Property::faithfulness, true},
    {MetricId::faithfulness_correlation, "faithfulness_correlation", "Faithfulness Correlation", Property::faithfulness, false},
    {MetricId::model_parameter_test, "model_parameter_test", "Model Parameter Test", Property::randomization, true},
    {MetricId::random_logit, "random_logit", "Random Logit", Property::randomization, true},
    {MetricId::complexity, "complexity", "Complexity", Property::complexity, true},
    {MetricId::sparseness, "sparseness", "Sparseness", Property::complexity, false},
    {MetricId::top_k, "top_k", "Top-K Intersection", Property::localization, false},
    {MetricId::relevance_rank_accuracy, "relevance_rank_accuracy", "Relevance Rank Accuracy", Property::localization, false},
};

const MetricInfo& info(MetricId id) {
    for (const auto& m : kMetrics) {
        if (m.id == id) return m;
    }
    fail(ErrorCode::invalid_argument, "unknown metric id");
}

} // namespace

std::string metric_id_string(MetricId id) { return info(id).key; }
std::string metric_name(MetricId id) { return info(id).name; }
Property metric_property(MetricId id) { return info(id).property; }
bool metric_uses_inverse_normalization(MetricId id) { return info(id).inverse_norm; }

std::optional<MetricId> metric_from_id(const std::string& id) {
    for (const auto& m : kMetrics) {
        if (id == m.key) return m.id;
    }
    return std::nullopt;
}

std::vector<MetricId> all_metrics() {
    std::vector<MetricId> out;
    for (const auto& m : kMetrics) out.push_back(m.id);
    return out;
}

std::string property_name(Property p) {
    switch (p) {
    case Property::robustness: return "robustness";
    case Property::faithfulness: return "faithfulness";
    case Property::randomization: return "randomization";
    case Property::complexity: return "complexity";
    case Property::localization: return "localization";
    }
    fail(ErrorCode::internal, "bad property");
}

std::string similarity_id(Similarity s) {
    switch (s) {
    case Similarity::pearson: return "pearson";
    case Similarity::spearman: return "spearman";
    case Similarity::ssim: return "ssim";
    }
    fail(ErrorCode::internal, "bad similarity");
}

std::optional<Similarity> similarity_from_id(const std::string& id) {
    if (id == "pearson") return Similarity::pearson;
    if (id == "spearman") return Similarity::spearman;
    if (id == "ssim") return Similarity::ssim;
    return std::nullopt;
}

std::vector<double> MetricConfig::default_road_percentages() {
    std::vector<double> out(50);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.01 * static_cast<double>(i + 1);
    return out;
}

void MetricConfig::validate() const {
    if (perturb_sigma <= 0.0) fail(ErrorCode::config, "perturbation sigma must be positive");
    if (perturb_draws == 0) fail(ErrorCode::config, "perturbation draw count must be positive");
    if (fc_runs < 2) fail(ErrorCode::config, "faithfulness correlation needs at least 2 runs");
    if (fc_subset == 0) fail(ErrorCode::config, "faithfulness subset size must be positive");
    const auto& pct = road_percentages.empty() ? default_road_percentages() : road_percentages;
    if (pct.size() < 2) fail(ErrorCode::config, "masking grid needs at least 2 percentages");
    for (std::size_t i = 0; i < pct.size(); ++i) {
        if (pct[i] <= 0.0 || pct[i] > 1.0)
            fail(ErrorCode::config, "masking percentages must lie in (0, 1]");
        if (i > 0 && pct[i] <= pct[i - 1])
            fail(ErrorCode::config, "masking percentages must increase strictly");
    }
    if (road_noise_sigma < 0.0) fail(ErrorCode::config, "imputation noise sigma must be non-negative");
    if (road_draws == 0 || road_draw_size == 0) fail(ErrorCode::config, "retention draws must be positive");
    if (mpt_sigma <= 0.0) fail(ErrorCode::config, "parameter noise sigma must be positive");
    if (rl_classes < 2) fail(ErrorCode::config, "class randomization needs at least 2 classes");
    if (topk_fraction <= 0.0 || topk_fraction > 1.0)
        fail(ErrorCode::config, "top-k fraction must lie in (0, 1]");
    if (samples == 0) fail(ErrorCode::config, "metric sample count must be positive");
}

namespace {

void require_same_size(const Tensor& a, const Tensor& b, const char* where) {
    if (a.size() != b.size())
        fail(ErrorCode::shape, std::string(where) + ": size mismatch " +
                                   std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double frobenius(const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * t[i];
    return std::sqrt(s);
}

double pearson_spans(const double* a, const double* b, std::size_t n) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    const double denom = std::sqrt(va) * std::sqrt(vb);
    if (!(denom > 0.0)) {
        return std::memcmp(a, b, n * sizeof(double)) == 0 ? 1.0 : 0.0;
    }
    return cov / denom;
}

std::vector<double> average_ranks(const double* v, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        if (v[l] != v[r]) return v[l] < v[r];
        return l < r;
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double pearson(const Tensor& a, const Tensor& b) {
    require_same_size(a, b, "pearson");
    if (a.size() < 2) fail(ErrorCode::invalid_argument, "pearson needs at least 2 values");
    return pearson_spans(a.data(), b.data(), a.size());
}

double spearman(const Tensor& a, const Tensor& b) {
    require_same_size(a, b, "spearman");
    if (a.size() < 2) fail(ErrorCode::invalid_argument, "spearman needs at least 2 values");
    auto ra = average_ranks(a.data(), a.size());
    auto rb = average_ranks(b.data(), b.size());
    return pearson_spans(ra.data(), rb.data(), ra.size());
}

double ssim_global(const Tensor& a, const Tensor& b) {
    require_same_size(a, b, "ssim");
    if (a.size() == 0) fail(ErrorCode::invalid_argument, "ssim of empty maps");
    if (bitwise_equal(a, b)) return 1.0;
    const std::size_t n = a.size();
    double lo = a[0], hi = a[0];
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min({lo, a[i], b[i]});
        hi = std::max({hi, a[i], b[i]});
    }
    const double range = hi - lo;
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    va /= static_cast<double>(n);
    vb /= static_cast<double>(n);
    cov /= static_cast<double>(n);
    const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
    const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
    if (den == 0.0) return 0.0;
    return num / den;
}

double similarity(Similarity s, const Tensor& a, const Tensor& b) {
    switch (s) {
    case Similarity::pearson: return pearson(a, b);
    case Similarity::spearman: return spearman(a, b);
    case Similarity::ssim: return ssim_global(a, b);
    }
    fail(ErrorCode::internal, "bad similarity");
}

std::vector<std::size_t> ranked_indices_desc(const Tensor& map) {
    std::vector<std::size_t> order(map.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return map[l] > map[r]; });
    return order;
}

Tensor noisy_linear_imputation(const Tensor& x, const std::vector<std::uint8_t>& masked,
                               double noise_sigma, Rng& rng) {
    if (x.shape().size() != 2)
        fail(ErrorCode::shape, "imputation expects a rank-2 grid");
    const std::size_t rows = x.shape()[0];
    const std::size_t cols = x.shape()[1];
    if (masked.size() != x.size())
        fail(ErrorCode::shape, "mask size does not match the grid");

    Tensor out = x;
    std::vector<std::uint8_t> known(x.size());
    std::size_t pending = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        known[i] = masked[i] ? 0 : 1;
        if (masked[i]) ++pending;
    }
    if (pending == x.size())
        fail(ErrorCode::invalid_argument, "imputation needs at least one unmasked cell");

    std::vector<std::size_t> frontier;
    std::vector<std::uint8_t> next_known = known;
    while (pending > 0) {
        frontier.clear();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const std::size_t idx = r * cols + c;
                if (known[idx]) continue;
                double sum = 0.0;
                std::size_t cnt = 0;
                if (r > 0 && known[idx - cols]) { sum += out[idx - cols]; ++cnt; }
                if (r + 1 < rows && known[idx + cols]) { sum += out[idx + cols]; ++cnt; }
                if (c > 0 && known[idx - 1]) { sum += out[idx - 1]; ++cnt; }
                if (c + 1 < cols && known[idx + 1]) { sum += out[idx + 1]; ++cnt; }
                if (cnt == 0) continue;
                out[idx] = sum / static_cast<double>(cnt) + noise_sigma * rng.normal();
                next_known[idx] = 1;
                frontier.push_back(idx);
            }
        }
        if (frontier.empty())
            fail(ErrorCode::internal, "imputation failed to reach every masked cell");
        known = next_known;
        pending -= frontier.size();
    }
    return out;
}

namespace {

Tensor maybe_normalized(const Tensor& map, const MetricConfig& cfg) {
    return cfg.normalize_maps ? minmax_normalize(map) : map;
}

Tensor as_batch(const Network& net, const Tensor& x) {
    return x.reshaped({std::size_t{1}, net.spec().rows, net.spec().cols});
}

} // namespace

double avg_sensitivity(ExplanationSource& src, const Tensor& x, std::size_t cls,
                       const MetricConfig& cfg, std::uint64_t seed) {
    const double xnorm = frobenius(x);
    if (xnorm == 0.0)
        fail(ErrorCode::invalid_argument, "sensitivity is undefined for an all-zero input");
    const Tensor base = maybe_normalized(src.original(), cfg);
    Rng rng(seed);
    double total = 0.0;
    Tensor noisy(x.shape());
    for (std::size_t j = 0; j < cfg.perturb_draws; ++j) {
        for (std::size_t i = 0; i < x.size(); ++i)
            noisy[i] = x[i] + cfg.perturb_sigma * rng.normal();
        const Tensor alt = maybe_normalized(src.explain(noisy, cls), cfg);
        require_same_size(base, alt, "avg_sensitivity");
        Tensor diff(base.shape());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = base[i] - alt[i];
        total += frobenius(diff) / xnorm;
    }
    return total / static_cast<double>(cfg.perturb_draws);
}

double local_lipschitz(ExplanationSource& src, const Tensor& x, std::size_t cls,
                       const MetricConfig& cfg, std::uint64_t seed) {
    const Tensor base = maybe_normalized(src.original(), cfg);
    Rng rng(seed);
    double worst = 0.0;
    Tensor noisy(x.shape());
    for (std::size_t j = 0; j < cfg.perturb_draws; ++j) {
        double dnorm = 0.0;
        do {
            dnorm = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double delta = cfg.perturb_sigma * rng.normal();
                noisy[i] = x[i] + delta;
                dnorm += delta * delta;
            }
            dnorm = std::sqrt(dnorm);
        } while (dnorm == 0.0);
        const Tensor alt = maybe_normalized(src.explain(noisy, cls), cfg);
        require_same_size(base, alt, "local_lipschitz");
        double mnorm = 0.0;
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double d = base[i] - alt[i];
            mnorm += d * d;
        }
        worst = std::max(worst, std::sqrt(mnorm) / dnorm);
    }
    return worst;
}

double faithfulness_correlation(const Network& net, const Tensor& map, const Tensor& x,
                                std::size_t cls, const MetricConfig& cfg, std::uint64_t seed,
                                bool* degenerate) {
    require_same_size(map, x, "faithfulness_correlation");
    if (cfg.fc_subset > x.size())
        fail(ErrorCode::config, "faithfulness subset exceeds the number of cells");
    const Tensor scored = maybe_normalized(map, cfg);
    const double fx = net.forward_logits(as_batch(net, x)).at({0, cls});
    Rng rng(seed);
    std::vector<std::size_t> cells(x.size());
    std::vector<double> attr_sums(cfg.fc_runs);
    std::vector<double> drops(cfg.fc_runs);
    Tensor patched = x;
    for (std::size_t run = 0; run < cfg.fc_runs; ++run) {
        std::iota(cells.begin(), cells.end(), std::size_t{0});
        rng.shuffle(cells);
        std::copy(x.data(), x.data() + x.size(), patched.data());
        double asum = 0.0;
        for (std::size_t k = 0; k < cfg.fc_subset; ++k) {
            const std::size_t idx = cells[k];
            asum += scored[idx];
            patched[idx] = cfg.fc_uniform_baseline ? rng.uniform() : cfg.fc_baseline_value;
        }
        attr_sums[run] = asum;
        drops[run] = fx - net.forward_logits(as_batch(net, patched)).at({0, cls});
    }
    // A series without variation (a constant map, or a model ignoring the
    // patched cells) has no defined correlation; flag it instead. Checked as
    // min == max because the variance of bitwise-equal values can still come
    // out slightly above zero once the mean rounds.
    const auto [amin, amax] = std::minmax_element(attr_sums.begin(), attr_sums.end());
    const auto [bmin, bmax] = std::minmax_element(drops.begin(), drops.end());
    if (*amin == *amax || *bmin == *bmax) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return pearson_spans(attr_sums.data(), drops.data(), cfg.fc_runs);
}

std::vector<double> road_retention_curve(const Network& net, const Tensor& map, const Tensor& x,
                                         const MetricConfig& cfg, std::uint64_t seed) {
    require_same_size(map, x, "road");
    const auto pct =
        cfg.road_percentages.empty() ? MetricConfig::default_road_percentages() : cfg.road_percentages;
    const Tensor scored = maybe_normalized(map, cfg);
    const auto order = ranked_indices_desc(scored);
    const Tensor probs = net.forward_probs(as_batch(net, x));
    std::size_t original = 0;
    for (std::size_t k = 1; k < probs.size(); ++k)
        if (probs[k] > probs[original]) original = k;

    Rng rng(seed);
    std::vector<double> curve(pct.size());
    std::vector<std::uint8_t> masked(x.size());
    for (std::size_t pi = 0; pi < pct.size(); ++pi) {
        const auto cut = static_cast<std::size_t>(
            std::llround(pct[pi] * static_cast<double>(x.size())));
        const std::size_t take = std::min(cut, x.size() - 1);
        std::fill(masked.begin(), masked.end(), std::uint8_t{0});
        for (std::size_t k = 0; k < take; ++k) masked[order[k]] = 1;
        const Tensor filled = noisy_linear_imputation(x, masked, cfg.road_noise_sigma, rng);
        const Tensor p2 = net.forward_probs(as_batch(net, filled));
        std::size_t now = 0;
        for (std::size_t k = 1; k < p2.size(); ++k)
            if (p2[k] > p2[now]) now = k;
        curve[pi] = (now == original) ? 1.0 : 0.0;
    }
    return curve;
}

double trapezoid_auc(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        fail(ErrorCode::invalid_argument, "trapezoid: grid and values differ in length");
    if (xs.size() < 2)
        fail(ErrorCode::invalid_argument, "trapezoid needs at least 2 points");
    double auc = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] <= xs[i - 1])
            fail(ErrorCode::invalid_argument, "trapezoid grid must increase strictly");
        auc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
    }
    return auc;
}

double model_parameter_test(const Network& net, ExplanationSource& src, const Tensor& x,
                            std::size_t cls, const MetricConfig& cfg, std::uint64_t seed) {
    const Tensor base = maybe_normalized(src.original(), cfg);
    auto param_layers = net.param_layer_indices();
    if (param_layers.empty())
        fail(ErrorCode::invalid_argument, "model has no parameterized layers");
    if (cfg.mpt_bottom_up) std::reverse(param_layers.begin(), param_layers.end());

    double total = 0.0;
    for (std::size_t step = 0; step < param_layers.size(); ++step) {
        const std::size_t li = param_layers[step];
        Network probe = net;
        Rng rng(derive_seed(seed, "layer-noise", step));
        Tensor& w = probe.layers()[li].weight;
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] *= 1.0 + cfg.mpt_sigma * rng.normal();
        Tensor& b = probe.layers()[li].bias;
        for (std::size_t i = 0; i < b.size(); ++i)
            b[i] *= 1.0 + cfg.mpt_sigma * rng.normal();
        const Tensor alt = maybe_normalized(src.explain_model(probe, x, cls), cfg);
        total += similarity(cfg.mpt_similarity, base, alt);
    }
    return total / static_cast<double>(param_layers.size());
}

double random_logit(const Network& net, ExplanationSource& src, const Tensor& x, std::size_t cls,
                    const MetricConfig& cfg, std::uint64_t seed) {
    const std::size_t classes = net.spec().classes;
    if (cls >= classes) fail(ErrorCode::invalid_argument, "explained class out of range");
    if (classes < 2) fail(ErrorCode::invalid_argument, "class randomization needs at least 2 classes");
    const Tensor base = maybe_normalized(src.original(), cfg);

    std::vector<std::size_t> others;
    others.reserve(classes - 1);
    for (std::size_t k = 0; k < classes; ++k)
        if (k != cls) others.push_back(k);
    std::size_t budget = std::min(cfg.rl_classes, classes);
    if (budget < 2) budget = 2;
    const std::size_t take = budget - 1;
    if (take < others.size()) {
        Rng rng(derive_seed(seed, "class-pick"));
        rng.shuffle(others);
        others.resize(take);
        std::sort(others.begin(), others.end());
    }

    double total = 0.0;
    for (std::size_t k : others) {
        const Tensor alt = maybe_normalized(src.explain(x, k), cfg);
        total += similarity(cfg.rl_similarity, base, alt);
    }
    return total / static_cast<double>(others.size());
}

double complexity_entropy(const Tensor& map) {
    double total = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) total += std::fabs(map[i]);
    if (total == 0.0)
        fail(ErrorCode::invalid_argument, "entropy is undefined for an all-zero map");
    double h = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double p = std::fabs(map[i]) / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double sparseness_gini(const Tensor& map) {
    const std::size_t n = map.size();
    if (n == 0) fail(ErrorCode::invalid_argument, "sparseness of an empty map");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::fabs(map[i]);
    std::sort(v.begin(), v.end());
    double total = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += v[i];
        weighted += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * v[i];
    }
    if (total == 0.0)
        fail(ErrorCode::invalid_argument, "sparseness is undefined for an all-zero map");
    return weighted / (static_cast<double>(n) * total);
}

double top_k(const Tensor& map, const std::vector<std::uint8_t>& roi, std::size_t k) {
    if (roi.size() != map.size())
        fail(ErrorCode::shape, "region mask size does not match the map");
    if (k == 0 || k > map.size())
        fail(ErrorCode::invalid_argument, "top-k size must lie in [1, cell count]");
    const auto order = ranked_indices_desc(map);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (roi[order[i]]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

double relevance_rank_accuracy(const Tensor& map, const std::vector<std::uint8_t>& roi) {
    if (roi.size() != map.size())
        fail(ErrorCode::shape, "region mask size does not match the map");
    std::size_t roi_count = 0;
    for (auto m : roi)
        if (m) ++roi_count;
    if (roi_count == 0)
        fail(ErrorCode::invalid_argument, "rank accuracy is undefined for an empty region");
    const auto order = ranked_indices_desc(map);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < roi_count; ++i)
        if (roi[order[i]]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(roi_count);
}

std::vector<double> normalize_inverse(const std::vector<double>& raw) {
    if (raw.empty()) fail(ErrorCode::invalid_argument, "nothing to normalize");
    std::vector<double> adj(raw);
    bool clamped = false;
    for (double& q : adj) {
        if (!(q > 0.0)) {
            q = 1e-12;
            clamped = true;
        }
    }
    if (clamped)
        log_warning("non-positive score clamped to 1e-12 before inverse normalization");
    const double qmin = *std::min_element(adj.begin(), adj.end());
    std::vector<double> out(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) out[i] = qmin / adj[i];
    return out;
}

std::vector<double> normalize_max(const std::vector<double>& raw) {
    if (raw.empty()) fail(ErrorCode::invalid_argument, "nothing to normalize");
    const double top = *std::max_element(raw.begin(), raw.end());
    if (top <= 0.0)
        fail(ErrorCode::numeric, "max normalization needs a positive maximum score");
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / top;
    return out;
}

MeanSem aggregate(const std::vector<double>& scores) {
    if (scores.size() < 2)
        fail(ErrorCode::invalid_argument, "aggregation needs at least 2 scores");
    const double n = static_cast<double>(scores.size());
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= n;
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, sd / std::sqrt(n)};
}

} // namespace xaibench
