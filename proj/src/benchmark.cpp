#include "xaibench/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "xaibench/error.hpp"
#include "xaibench/parallel.hpp"

namespace xaibench {

namespace {

// Re-runs a method's explanation procedure on demand. Every fresh request
// advances a private counter, so stochastic families draw new noise while
// the task as a whole stays seeded.
class MethodSource final : public ExplanationSource {
public:
    MethodSource(const ExplainContext& ctx, Method m, Tensor original, std::uint64_t task_seed)
        : ctx_(ctx), method_(m), original_(std::move(original)), seed_(task_seed) {}

    Tensor original() override { return original_; }

    Tensor explain(const Tensor& x, std::size_t cls) override {
        return xaibench::explain(ctx_, method_, x, cls, next_seed()).relevance;
    }

    Tensor explain_model(const Network& net, const Tensor& x, std::size_t cls) override {
        return xaibench::explain_with_model(ctx_, net, method_, x, cls, next_seed()).relevance;
    }

private:
    std::uint64_t next_seed() { return derive_seed(seed_, "redraw", counter_++); }

    const ExplainContext& ctx_;
    Method method_;
    Tensor original_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// The uniform-random baseline redraws a fresh map whenever a metric re-runs
// the explanation procedure. Randomization metrics are the exception: they
// compare against the very same map, which pins the baseline at the worst
// possible (perfect-similarity) score.
class BaselineSource final : public ExplanationSource {
public:
    BaselineSource(Tensor original, bool frozen, std::uint64_t task_seed)
        : original_(std::move(original)), frozen_(frozen), seed_(task_seed) {}

    Tensor original() override { return original_; }

    Tensor explain(const Tensor&, std::size_t) override { return redraw(); }

    Tensor explain_model(const Network&, const Tensor&, std::size_t) override { return redraw(); }

private:
    Tensor redraw() {
        if (frozen_) return original_;
        return random_uniform_map(original_.dim(0), original_.dim(1),
                                  derive_seed(seed_, "redraw", counter_++));
    }

    Tensor original_;
    bool frozen_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

struct Column {
    Method method = Method::gradient;
    const io::ExplanationBatch* batch = nullptr;
    bool is_baseline = false;
};

const io::ExplanationBatch& batch_for(const std::vector<io::ExplanationBatch>& batches,
                                      Method m) {
    for (const auto& b : batches) {
        if (b.method == m) return b;
    }
    fail(ErrorCode::invalid_argument,
         "no explanation batch for method " + method_id(m));
}

std::vector<std::size_t> pick_positions(std::size_t pool, std::size_t want, std::uint64_t seed) {
    std::vector<std::size_t> order(pool);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(want);
    return order;
}

std::vector<std::uint8_t> roi_mask(const DatasetConfig& cfg) {
    std::vector<std::uint8_t> mask(cfg.grid_rows * cfg.grid_cols, 0);
    for (std::size_t r = 0; r < cfg.grid_rows; ++r)
        for (std::size_t c = 0; c < cfg.grid_cols; ++c)
            if (cfg.roi.contains(r, c)) mask[r * cfg.grid_cols + c] = 1;
    return mask;
}

double evaluate_one(MetricId metric, const Network& net, const Column& col, const Tensor& map,
                    const Tensor& x, std::size_t cls, const BenchmarkConfig& cfg,
                    const ExplainContext& ctx, const std::vector<std::uint8_t>& roi,
                    std::size_t k, std::uint64_t task_seed, bool* degenerate) {
    const bool frozen = metric_property(metric) == Property::randomization;
    const auto make_source = [&]() -> std::unique_ptr<ExplanationSource> {
        if (col.is_baseline)
            return std::make_unique<BaselineSource>(map, frozen, task_seed);
        return std::make_unique<MethodSource>(ctx, col.method, map, task_seed);
    };
    switch (metric) {
    case MetricId::avg_sensitivity: {
        auto src = make_source();
        return avg_sensitivity(*src, x, cls, cfg.metric, derive_seed(task_seed, "noise"));
    }
    case MetricId::local_lipschitz: {
        auto src = make_source();
        return local_lipschitz(*src, x, cls, cfg.metric, derive_seed(task_seed, "noise"));
    }
    case MetricId::faithfulness_correlation:
        return faithfulness_correlation(net, map, x, cls, cfg.metric,
                                        derive_seed(task_seed, "subsets"), degenerate);
    case MetricId::model_parameter_test: {
        auto src = make_source();
        return model_parameter_test(net, *src, x, cls, cfg.metric, task_seed);
    }
    case MetricId::random_logit: {
        auto src = make_source();
        return random_logit(net, *src, x, cls, cfg.metric, task_seed);
    }
    case MetricId::complexity:
        return complexity_entropy(cfg.metric.normalize_maps ? minmax_normalize(map) : map);
    case MetricId::sparseness:
        return sparseness_gini(cfg.metric.normalize_maps ? minmax_normalize(map) : map);
    case MetricId::top_k:
        return top_k(cfg.metric.normalize_maps ? minmax_normalize(map) : map, roi, k);
    case MetricId::relevance_rank_accuracy:
        return relevance_rank_accuracy(cfg.metric.normalize_maps ? minmax_normalize(map) : map,
                                       roi);
    case MetricId::road:
        fail(ErrorCode::internal, "retention metric follows the draw path");
    }
    fail(ErrorCode::internal, "unhandled metric");
}

} // namespace

std::vector<std::size_t> rank_methods(const std::vector<MeanSem>& stats, bool higher_is_better) {
    if (stats.empty()) fail(ErrorCode::invalid_argument, "nothing to rank");
    std::vector<std::size_t> order(stats.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return higher_is_better ? stats[l].mean > stats[r].mean : stats[l].mean < stats[r].mean;
    });
    std::vector<std::size_t> ranks(stats.size(), 0);
    std::size_t rank = 1;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        // Chain: the next method joins the tie group while it sits within the
        // tolerance of the previous one.
        while (j + 1 < order.size()) {
            const auto& a = stats[order[j]];
            const auto& b = stats[order[j + 1]];
            if (std::fabs(a.mean - b.mean) <= std::max(a.sem, b.sem)) ++j;
            else break;
        }
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        ++rank;
        i = j + 1;
    }
    return ranks;
}

bool baseline_separated(const MeanSem& baseline, const std::vector<MeanSem>& methods) {
    if (methods.empty()) return false;
    std::size_t low = 0;
    for (std::size_t i = 1; i < methods.size(); ++i)
        if (methods[i].mean < methods[low].mean) low = i;
    const MeanSem& next = methods[low];
    if (!(baseline.mean < next.mean)) return false;
    return next.mean - baseline.mean > std::max(baseline.sem, next.sem);
}

BenchmarkResult run_benchmark(const Network& net, const Dataset& ds,
                              const std::vector<io::ExplanationBatch>& batches,
                              const BenchmarkConfig& cfg) {
    if (cfg.methods.empty()) fail(ErrorCode::config, "no methods selected");
    if (cfg.metrics.empty()) fail(ErrorCode::config, "no metrics selected");
    cfg.metric.validate();
    for (Method m : cfg.methods) {
        if (m == Method::random_baseline)
            fail(ErrorCode::config, "the random baseline is always included; do not list it");
    }

    std::vector<Column> cols;
    for (Method m : cfg.methods) cols.push_back({m, &batch_for(batches, m), false});
    cols.push_back({Method::random_baseline, &batch_for(batches, Method::random_baseline), true});

    const auto& pool_ids = cols.front().batch->sample_ids;
    const std::size_t pool = pool_ids.size();
    for (const auto& col : cols) {
        if (col.batch->sample_ids != pool_ids || col.batch->target_class != cols.front().batch->target_class)
            fail(ErrorCode::invalid_argument,
                 "explanation batches cover different sample pools; re-run the explain stage");
        if (col.batch->maps.rank() != 3 || col.batch->maps.dim(1) != ds.config.grid_rows ||
            col.batch->maps.dim(2) != ds.config.grid_cols)
            fail(ErrorCode::shape, "explanation batch shape does not match the dataset grid");
        if (col.batch->normalized)
            fail(ErrorCode::invalid_argument,
                 "expected raw (unnormalized) explanation batches; metrics normalize internally");
    }

    ExplainContext ctx;
    ctx.net = &net;
    ctx.input_min = ds.input_min;
    ctx.input_max = ds.input_max;
    ctx.cfg = cfg.xai;

    const auto roi = roi_mask(ds.config);
    const std::size_t d = ds.config.grid_rows * ds.config.grid_cols;
    const auto k = static_cast<std::size_t>(std::max<long long>(
        1, std::llround(cfg.metric.topk_fraction * static_cast<double>(d))));

    BenchmarkResult result;
    for (MetricId metric : cfg.metrics) {
        const auto metric_seed =
            derive_seed(cfg.master_seed, "metric", static_cast<std::uint64_t>(metric));
        MetricReport report;
        report.metric = metric;
        report.property = metric_property(metric);

        const bool is_road = metric == MetricId::road;
        const std::size_t per_col = is_road ? cfg.metric.road_draws : cfg.metric.samples;
        const std::size_t need = is_road ? cfg.metric.road_draw_size : cfg.metric.samples;
        if (pool < need)
            fail(ErrorCode::sample_shortfall,
                 metric_id_string(metric) + " needs " + std::to_string(need) +
                     " correctly predicted samples, pool has " + std::to_string(pool));

        std::vector<std::vector<double>> raw(cols.size(), std::vector<double>(per_col, 0.0));
        std::vector<std::vector<std::uint8_t>> degen(cols.size(),
                                                     std::vector<std::uint8_t>(per_col, 0));

        if (is_road) {
            // Each draw scores a fresh subset; the curve AUCs are normalized
            // within the draw and aggregated across draws.
            std::vector<std::vector<std::size_t>> draw_pos(cfg.metric.road_draws);
            for (std::size_t v = 0; v < cfg.metric.road_draws; ++v) {
                draw_pos[v] = pick_positions(pool, cfg.metric.road_draw_size,
                                             derive_seed(metric_seed, "draw-samples", v));
                std::vector<std::uint32_t> ids;
                ids.reserve(draw_pos[v].size());
                for (auto p : draw_pos[v]) ids.push_back(pool_ids[p]);
                report.draw_sample_ids.push_back(std::move(ids));
            }
            const auto grid = cfg.metric.road_percentages.empty()
                                  ? MetricConfig::default_road_percentages()
                                  : cfg.metric.road_percentages;
            const std::size_t tasks = cols.size() * cfg.metric.road_draws;
            parallel_for(tasks, cfg.workers, [&](std::size_t t) {
                const std::size_t ci = t / cfg.metric.road_draws;
                const std::size_t v = t % cfg.metric.road_draws;
                const Column& col = cols[ci];
                const auto method_u64 = static_cast<std::uint64_t>(col.method);
                std::vector<double> curve(grid.size(), 0.0);
                for (std::size_t s = 0; s < draw_pos[v].size(); ++s) {
                    const std::size_t pos = draw_pos[v][s];
                    const Tensor x = ds.inputs.row(pool_ids[pos]);
                    const Tensor map = col.batch->maps.row(pos);
                    const auto impute_seed = derive_seed(
                        derive_seed(metric_seed, "draw", v), "impute", method_u64, s);
                    const auto sample_curve =
                        road_retention_curve(net, map, x, cfg.metric, impute_seed);
                    for (std::size_t g = 0; g < grid.size(); ++g) curve[g] += sample_curve[g];
                }
                for (double& c : curve) c /= static_cast<double>(draw_pos[v].size());
                raw[ci][v] = trapezoid_auc(grid, curve);
            });
        } else {
            const auto positions =
                pick_positions(pool, cfg.metric.samples, derive_seed(metric_seed, "samples"));
            for (auto p : positions) report.sample_ids.push_back(pool_ids[p]);
            const std::size_t tasks = cols.size() * positions.size();
            parallel_for(tasks, cfg.workers, [&](std::size_t t) {
                const std::size_t ci = t / positions.size();
                const std::size_t si = t % positions.size();
                const Column& col = cols[ci];
                const std::size_t pos = positions[si];
                const Tensor x = ds.inputs.row(pool_ids[pos]);
                const Tensor map = col.batch->maps.row(pos);
                const std::size_t cls = col.batch->target_class[pos];
                const auto task_seed = derive_seed(
                    metric_seed, "task", static_cast<std::uint64_t>(col.method), si);
                bool dg = false;
                raw[ci][si] = evaluate_one(metric, net, col, map, x, cls, cfg, ctx, roi, k,
                                           task_seed, &dg);
                degen[ci][si] = dg ? 1 : 0;
            });
        }

        // Cross-method normalization per evaluation slot, baseline included.
        std::vector<std::vector<double>> norm(cols.size(), std::vector<double>(per_col, 0.0));
        const bool inverse = metric_uses_inverse_normalization(metric);
        for (std::size_t s = 0; s < per_col; ++s) {
            std::vector<double> slot(cols.size());
            for (std::size_t ci = 0; ci < cols.size(); ++ci) slot[ci] = raw[ci][s];
            const auto scaled = inverse ? normalize_inverse(slot) : normalize_max(slot);
            for (std::size_t ci = 0; ci < cols.size(); ++ci) norm[ci][s] = scaled[ci];
        }

        std::vector<MeanSem> method_stats;
        for (std::size_t ci = 0; ci < cols.size(); ++ci) {
            MethodScore score;
            score.method = cols[ci].method;
            score.raw = std::move(raw[ci]);
            score.normalized = norm[ci];
            score.stats = aggregate(score.normalized);
            score.degenerate =
                std::any_of(degen[ci].begin(), degen[ci].end(), [](std::uint8_t f) { return f; });
            if (cols[ci].is_baseline) {
                report.baseline = std::move(score);
            } else {
                method_stats.push_back(score.stats);
                report.methods.push_back(std::move(score));
            }
        }
        const auto ranks = rank_methods(method_stats);
        for (std::size_t i = 0; i < ranks.size(); ++i) report.methods[i].rank = ranks[i];
        report.baseline_passed = baseline_separated(report.baseline.stats, method_stats);
        result.reports.push_back(std::move(report));
    }
    return result;
}

} // namespace xaibench
