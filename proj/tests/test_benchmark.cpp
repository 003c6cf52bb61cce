#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "json.hpp"
#include "xaibench/benchmark.hpp"
#include "xaibench/pipeline.hpp"
#include "xaibench/report.hpp"
#include "xaibench/rng.hpp"
#include "xaibench/train.hpp"

using namespace xaibench;
using testutil::thrown_code;
using testutil::train_small;

namespace {

using Ranks = std::vector<std::size_t>;

const testutil::TrainedFixture& bench_mlp() {
    static const testutil::TrainedFixture fx = train_small(ModelSpec::Arch::mlp);
    return fx;
}

ExplainContext context_for(const testutil::TrainedFixture& fx) {
    ExplainContext ctx;
    ctx.net = &fx.net;
    ctx.input_min = fx.ds.input_min;
    ctx.input_max = fx.ds.input_max;
    return ctx;
}

std::vector<std::uint32_t> fuzzy_pool(const testutil::TrainedFixture& fx, std::size_t want) {
    const auto idx = correct_prediction_indices(fx.net, fx.ds, Split::test, 2.0);
    REQUIRE(idx.size() >= want);
    return std::vector<std::uint32_t>(idx.begin(), idx.begin() + want);
}

io::ExplanationBatch method_batch(const testutil::TrainedFixture& fx, Method m,
                                  const std::vector<std::uint32_t>& ids) {
    const ExplainContext ctx = context_for(fx);
    io::ExplanationBatch b;
    b.method = m;
    b.seed = derive_seed(900, "explain", static_cast<std::uint64_t>(m));
    b.sample_ids = ids;
    b.maps = Tensor({ids.size(), fx.ds.config.grid_rows, fx.ds.config.grid_cols});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t cls = fx.ds.label[ids[i]];
        b.target_class.push_back(static_cast<std::uint32_t>(cls));
        b.maps.set_row(i, explain(ctx, m, fx.ds.inputs.row(ids[i]), cls,
                                  derive_seed(b.seed, "sample", i))
                              .relevance);
    }
    return b;
}

MetricConfig quick_metric() {
    MetricConfig m;
    m.samples = 6;
    m.perturb_draws = 3;
    m.fc_runs = 12;
    m.fc_subset = 10;
    m.road_draws = 2;
    m.road_draw_size = 5;
    m.road_percentages = {0.1, 0.3};
    m.rl_classes = 4;
    m.topk_fraction = 0.2;
    return m;
}

// One full evaluation over the trained net: two real methods, all ten
// metrics on a shrunk sample budget. Shared across the integration cases.
struct FullRun {
    std::vector<std::uint32_t> ids;
    std::vector<io::ExplanationBatch> batches;
    BenchmarkConfig cfg;
    BenchmarkResult result;
};

const FullRun& full_run() {
    static const FullRun run = [] {
        FullRun r;
        const auto& fx = bench_mlp();
        r.ids = fuzzy_pool(fx, 10);
        r.batches.push_back(method_batch(fx, Method::gradient, r.ids));
        r.batches.push_back(method_batch(fx, Method::input_gradient, r.ids));
        r.batches.push_back(method_batch(fx, Method::random_baseline, r.ids));
        r.cfg.methods = {Method::gradient, Method::input_gradient};
        r.cfg.metrics = all_metrics();
        r.cfg.metric = quick_metric();
        r.cfg.master_seed = 99;
        r.result = run_benchmark(fx.net, fx.ds, r.batches, r.cfg);
        return r;
    }();
    return run;
}

const MetricReport* find_report(const BenchmarkResult& r, MetricId id) {
    for (const auto& rep : r.reports)
        if (rep.metric == id) return &rep;
    return nullptr;
}

bool same_scores(const MethodScore& a, const MethodScore& b) {
    return a.method == b.method && a.raw == b.raw && a.normalized == b.normalized &&
           a.stats.mean == b.stats.mean && a.stats.sem == b.stats.sem && a.rank == b.rank &&
           a.degenerate == b.degenerate;
}

bool same_results(const BenchmarkResult& a, const BenchmarkResult& b) {
    if (a.reports.size() != b.reports.size()) return false;
    for (std::size_t r = 0; r < a.reports.size(); ++r) {
        const auto& x = a.reports[r];
        const auto& y = b.reports[r];
        if (x.metric != y.metric || x.property != y.property) return false;
        if (x.sample_ids != y.sample_ids || x.draw_sample_ids != y.draw_sample_ids) return false;
        if (x.baseline_passed != y.baseline_passed) return false;
        if (x.methods.size() != y.methods.size()) return false;
        for (std::size_t m = 0; m < x.methods.size(); ++m)
            if (!same_scores(x.methods[m], y.methods[m])) return false;
        if (!same_scores(x.baseline, y.baseline)) return false;
    }
    return true;
}

// The relu net from the explainer suite driven deep into its positive
// region, so every forward pass is exactly affine. With a zero patch value,
// the logit drop for any masked subset equals the input*gradient mass on
// that subset, which pins faithfulness correlation at 1. The gradient slot
// carries constant maps instead (a degenerate, zero-signal column).
struct AffineBench {
    Network net;
    Dataset ds;
    std::vector<io::ExplanationBatch> batches;
    BenchmarkConfig cfg;
};

AffineBench make_affine_bench() {
    AffineBench ab;
    ModelSpec spec = ModelSpec::mlp_default(3, 2, 3);
    spec.hidden = {4};
    ab.net = Network::build(spec);
    ab.net.init_params(1);
    Layer& d1 = ab.net.layers()[1];
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < 6; ++i)
            d1.weight[j * 6 + i] = 0.02 * double(j + 1) + 0.01 * double(i) - 0.04;
        d1.bias[j] = 50.0;
    }
    Layer& d2 = ab.net.layers()[3];
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t j = 0; j < 4; ++j)
            d2.weight[c * 4 + j] = 0.1 * double(c + 1) - 0.07 * double(j);
        d2.bias[c] = 0.2 * double(c);
    }

    ab.ds.config.grid_rows = 3;
    ab.ds.config.grid_cols = 2;
    ab.ds.config.years = 8;
    ab.ds.config.members = 1;
    ab.ds.config.classes = 3;
    ab.ds.config.roi = {0, 0, 2, 2};
    ab.ds.inputs = Tensor({8, 3, 2});
    Rng rng(5);
    for (std::size_t i = 0; i < ab.ds.inputs.size(); ++i)
        ab.ds.inputs[i] = rng.uniform(-0.9, 0.9);
    for (std::uint32_t i = 0; i < 8; ++i) {
        ab.ds.year.push_back(i);
        ab.ds.label.push_back(i % 3);
        ab.ds.member.push_back(0);
        ab.ds.split.push_back(Split::test);
    }
    ab.ds.central_year = {0.0, 1.0, 2.0};
    ab.ds.input_min = -1.0;
    ab.ds.input_max = 1.0;

    ExplainContext ctx;
    ctx.net = &ab.net;
    ctx.input_min = -1.0;
    ctx.input_max = 1.0;

    const std::vector<std::uint32_t> ids = {0, 1, 2, 3, 4};
    io::ExplanationBatch real;
    real.method = Method::input_gradient;
    io::ExplanationBatch flat;
    flat.method = Method::gradient;
    io::ExplanationBatch noise;
    noise.method = Method::random_baseline;
    for (auto* b : {&real, &flat, &noise}) {
        b->sample_ids = ids;
        b->maps = Tensor({ids.size(), 3, 2});
    }
    Tensor constant({3, 2});
    for (std::size_t e = 0; e < constant.size(); ++e) constant[e] = 0.5;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t cls = ab.ds.label[i];
        real.maps.set_row(
            i, explain(ctx, Method::input_gradient, ab.ds.inputs.row(i), cls, 1).relevance);
        flat.maps.set_row(i, constant);
        noise.maps.set_row(i, random_uniform_map(3, 2, derive_seed(77, "rb", i)));
        for (auto* b : {&real, &flat, &noise})
            b->target_class.push_back(static_cast<std::uint32_t>(cls));
    }
    // lookup is by method, not by position
    ab.batches = {noise, real, flat};

    ab.cfg.methods = {Method::input_gradient, Method::gradient};
    ab.cfg.metrics = {MetricId::faithfulness_correlation};
    ab.cfg.metric.samples = 5;
    ab.cfg.metric.fc_runs = 12;
    ab.cfg.metric.fc_subset = 2;
    ab.cfg.metric.fc_uniform_baseline = false;
    ab.cfg.metric.fc_baseline_value = 0.0;
    ab.cfg.metric.normalize_maps = false;
    ab.cfg.master_seed = 123;
    return ab;
}

const AffineBench& affine_bench() {
    static const AffineBench ab = make_affine_bench();
    return ab;
}

std::size_t count_occurrences(const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + 1))
        ++n;
    return n;
}

std::filesystem::path artifact_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "xaibench_test_benchmark";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("tie chaining merges scores whose gap fits in the larger error bar") {
    CHECK(rank_methods({{0.99, 0.02}, {0.99, 0.02}, {0.85, 0.03}}) == Ranks{1, 1, 2});
    CHECK(rank_methods({{0.42, 0.1}}) == Ranks{1});
    CHECK(rank_methods({{0.9, 0.01}, {0.5, 0.01}, {0.1, 0.01}}) == Ranks{1, 2, 3});
    CHECK(rank_methods({{0.5, 0.0}, {0.5, 0.0}, {0.5, 0.0}, {0.5, 0.0}}) == Ranks{1, 1, 1, 1});
    // ranks follow the entries, not the sorted order
    CHECK(rank_methods({{0.1, 0.01}, {0.9, 0.01}, {0.5, 0.01}}) == Ranks{3, 1, 2});
    // lower-is-better flips the sort direction only
    CHECK(rank_methods({{0.1, 0.01}, {0.5, 0.01}, {0.9, 0.01}}, false) == Ranks{1, 2, 3});
    // a gap equal to the larger sem still ties (dyadic values keep the
    // comparison exact in floating point)
    CHECK(rank_methods({{0.75, 0.25}, {0.5, 0.125}}) == Ranks{1, 1});
    CHECK(rank_methods({{0.75, 0.125}, {0.5, 0.25}}) == Ranks{1, 1});
    CHECK(rank_methods({{0.75, 0.125}, {0.5, 0.0625}}) == Ranks{1, 2});
    // ties chain transitively: the ends sit two sems apart yet share a rank
    CHECK(rank_methods({{1.0, 0.25}, {0.75, 0.25}, {0.5, 0.25}}) == Ranks{1, 1, 1});
    CHECK(rank_methods({{1.0, 0.25}, {0.5, 0.25}}) == Ranks{1, 2});
    // ranks stay dense after a merged group
    CHECK(rank_methods({{0.9, 0.05}, {0.88, 0.05}, {0.5, 0.01}, {0.3, 0.01}}) ==
          Ranks{1, 1, 2, 3});
    CHECK(thrown_code([] { (void)rank_methods({}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("eight-method score columns rank into hand-computed tie groups") {
    // Entry order everywhere: fusiongrad, input_gradient, lrp_z,
    // integrated_gradients, smoothgrad, lrp_ab, gradient, noisegrad.
    // Expected groups worked out by hand with the chain rule. Note the
    // fourth/fifth entries of the first column: 0.65 - 0.61 lands a hair
    // above 0.04 in floating point, so they do not tie.
    CHECK(rank_methods({{0.61, 0.04},
                        {0.99, 0.02},
                        {0.99, 0.02},
                        {1.000, 0.02},
                        {0.65, 0.04},
                        {0.91, 0.02},
                        {0.66, 0.04},
                        {0.61, 0.03}}) == Ranks{4, 1, 1, 1, 3, 2, 3, 4});
    CHECK(rank_methods({{0.059, 0.009},
                        {0.57, 0.04},
                        {0.57, 0.04},
                        {0.58, 0.04},
                        {0.43, 0.05},
                        {0.88, 0.03},
                        {0.45, 0.05},
                        {0.06, 0.01}}) == Ranks{4, 2, 2, 2, 3, 1, 3, 4});
    CHECK(rank_methods({{0.35, 0.04},
                        {0.87, 0.03},
                        {0.85, 0.03},
                        {0.86, 0.03},
                        {0.67, 0.03},
                        {0.36, 0.03},
                        {0.77, 0.04},
                        {0.51, 0.03}}) == Ranks{5, 1, 1, 1, 3, 5, 2, 4});
    CHECK(rank_methods({{0.40, 0.03},
                        {0.0096, 0.0008},
                        {0.0096, 0.0008},
                        {0.0091, 0.0007},
                        {0.52, 0.03},
                        {0.0071, 0.0005},
                        {0.53, 0.03},
                        {0.60, 0.03}}) == Ranks{3, 4, 4, 4, 2, 5, 2, 1});
    CHECK(rank_methods({{0.770, 0.006},
                        {0.968, 0.004},
                        {0.968, 0.004},
                        {0.950, 0.003},
                        {0.749, 0.006},
                        {0.95, 0.01},
                        {0.768, 0.007},
                        {0.821, 0.006}}) == Ranks{4, 1, 1, 2, 5, 2, 4, 3});
}

TEST_CASE("rank vectors stay dense and order-consistent on random stats") {
    Rng rng(171);
    for (int draw = 0; draw < 200; ++draw) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.below(8));
        std::vector<MeanSem> stats(n);
        for (auto& s : stats) {
            s.mean = rng.uniform();
            s.sem = rng.uniform(0.0, 0.1);
        }
        const Ranks ranks = rank_methods(stats);
        REQUIRE(ranks.size() == n);
        const std::size_t top = *std::max_element(ranks.begin(), ranks.end());
        const std::set<std::size_t> seen(ranks.begin(), ranks.end());
        CHECK(*seen.begin() == 1);
        CHECK(seen.size() == top);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (stats[i].mean > stats[j].mean) CHECK(ranks[i] <= ranks[j]);
                if (stats[i].mean == stats[j].mean) CHECK(ranks[i] == ranks[j]);
            }
    }
}

TEST_CASE("baseline separation needs a strictly lower mean beyond the tie tolerance") {
    CHECK(baseline_separated({0.05, 0.01}, {{0.5, 0.03}, {0.9, 0.02}}));
    // a gap equal to the tolerance is not separation
    CHECK(!baseline_separated({0.5, 0.25}, {{0.75, 0.125}, {0.9, 0.02}}));
    CHECK(baseline_separated({0.5, 0.125}, {{0.75, 0.1}, {0.9, 0.02}}));
    // the weakest method is the comparison target, not the strongest
    CHECK(!baseline_separated({0.30, 0.01}, {{0.9, 0.01}, {0.31, 0.2}}));
    CHECK(!baseline_separated({0.5, 0.01}, {{0.4, 0.01}}));
    CHECK(!baseline_separated({0.4, 0.0}, {{0.4, 0.0}}));
    CHECK(!baseline_separated({0.1, 0.01}, {}));
}

TEST_CASE("full evaluation emits complete per-metric reports") {
    const auto& run = full_run();
    const auto& res = run.result;
    REQUIRE(res.reports.size() == run.cfg.metrics.size());
    const std::set<std::uint32_t> pool(run.ids.begin(), run.ids.end());
    for (std::size_t r = 0; r < res.reports.size(); ++r) {
        const MetricReport& rep = res.reports[r];
        const std::string label = metric_id_string(rep.metric);
        CAPTURE(label);
        CHECK(rep.metric == run.cfg.metrics[r]);
        CHECK(rep.property == metric_property(rep.metric));
        REQUIRE(rep.methods.size() == 2);
        CHECK(rep.methods[0].method == Method::gradient);
        CHECK(rep.methods[1].method == Method::input_gradient);
        CHECK(rep.baseline.method == Method::random_baseline);
        CHECK(rep.baseline.rank == 0);

        const bool is_road = rep.metric == MetricId::road;
        const std::size_t per_col =
            is_road ? run.cfg.metric.road_draws : run.cfg.metric.samples;
        if (is_road) {
            CHECK(rep.sample_ids.empty());
            REQUIRE(rep.draw_sample_ids.size() == run.cfg.metric.road_draws);
            for (const auto& draw : rep.draw_sample_ids) {
                REQUIRE(draw.size() == run.cfg.metric.road_draw_size);
                const std::set<std::uint32_t> uniq(draw.begin(), draw.end());
                CHECK(uniq.size() == draw.size());
                for (auto id : draw) CHECK(pool.count(id) == 1);
            }
            CHECK(rep.draw_sample_ids[0] != rep.draw_sample_ids[1]);
        } else {
            CHECK(rep.draw_sample_ids.empty());
            REQUIRE(rep.sample_ids.size() == run.cfg.metric.samples);
            const std::set<std::uint32_t> uniq(rep.sample_ids.begin(), rep.sample_ids.end());
            CHECK(uniq.size() == rep.sample_ids.size());
            for (auto id : rep.sample_ids) CHECK(pool.count(id) == 1);
        }
        for (const MethodScore* score : {&rep.methods[0], &rep.methods[1], &rep.baseline}) {
            CHECK(score->raw.size() == per_col);
            CHECK(score->normalized.size() == per_col);
            for (double v : score->raw) CHECK(std::isfinite(v));
            for (double v : score->normalized) CHECK(std::isfinite(v));
        }
        CHECK(std::min(rep.methods[0].rank, rep.methods[1].rank) == 1);
        CHECK(rep.methods[0].rank <= 2);
        CHECK(rep.methods[1].rank <= 2);
    }
}

TEST_CASE("per-slot normalization spans the methods and the baseline") {
    const auto& run = full_run();
    for (const MetricReport& rep : run.result.reports) {
        const std::string label = metric_id_string(rep.metric);
        CAPTURE(label);
        const bool inverse = metric_uses_inverse_normalization(rep.metric);
        for (std::size_t s = 0; s < rep.baseline.raw.size(); ++s) {
            const std::vector<double> slot = {rep.methods[0].raw[s], rep.methods[1].raw[s],
                                              rep.baseline.raw[s]};
            const auto scaled = inverse ? normalize_inverse(slot) : normalize_max(slot);
            CHECK(rep.methods[0].normalized[s] == scaled[0]);
            CHECK(rep.methods[1].normalized[s] == scaled[1]);
            CHECK(rep.baseline.normalized[s] == scaled[2]);
            CHECK(*std::max_element(scaled.begin(), scaled.end()) == 1.0);
        }
    }
}

TEST_CASE("report stats, ranks, and baseline verdicts recompute from the scores") {
    const auto& run = full_run();
    for (const MetricReport& rep : run.result.reports) {
        const std::string label = metric_id_string(rep.metric);
        CAPTURE(label);
        for (const MethodScore* score : {&rep.methods[0], &rep.methods[1], &rep.baseline}) {
            const MeanSem agg = aggregate(score->normalized);
            CHECK(score->stats.mean == agg.mean);
            CHECK(score->stats.sem == agg.sem);
        }
        const std::vector<MeanSem> stats = {rep.methods[0].stats, rep.methods[1].stats};
        const Ranks expect = rank_methods(stats);
        CHECK(rep.methods[0].rank == expect[0]);
        CHECK(rep.methods[1].rank == expect[1]);
        CHECK(rep.baseline_passed == baseline_separated(rep.baseline.stats, stats));
    }
}

TEST_CASE("randomization metrics hold the frozen baseline at perfect similarity") {
    const auto& run = full_run();
    // Randomization compares against the very map under test, so the
    // baseline cannot escape a perfect-similarity (worst possible) score.
    for (MetricId id : {MetricId::model_parameter_test, MetricId::random_logit}) {
        const MetricReport* rep = find_report(run.result, id);
        REQUIRE(rep != nullptr);
        for (double v : rep->baseline.raw) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Robustness redraws the baseline map on every perturbation instead.
    for (MetricId id : {MetricId::avg_sensitivity, MetricId::local_lipschitz}) {
        const MetricReport* rep = find_report(run.result, id);
        REQUIRE(rep != nullptr);
        for (double v : rep->baseline.raw) CHECK(v > 0.0);
    }
}

TEST_CASE("evaluation repeats bitwise and ignores the worker count") {
    const auto& run = full_run();
    const auto& fx = bench_mlp();
    const BenchmarkResult again = run_benchmark(fx.net, fx.ds, run.batches, run.cfg);
    CHECK(same_results(run.result, again));
    BenchmarkConfig threaded = run.cfg;
    threaded.workers = 4;
    const BenchmarkResult parallel = run_benchmark(fx.net, fx.ds, run.batches, threaded);
    CHECK(same_results(run.result, parallel));
}

TEST_CASE("raw scores are independent of the evaluated method subset") {
    const auto& run = full_run();
    const auto& fx = bench_mlp();
    BenchmarkConfig cfg = run.cfg;
    cfg.methods = {Method::input_gradient};
    cfg.metrics = {MetricId::avg_sensitivity, MetricId::road, MetricId::random_logit};
    const BenchmarkResult sub = run_benchmark(fx.net, fx.ds, run.batches, cfg);
    REQUIRE(sub.reports.size() == 3);
    for (const MetricReport& rep : sub.reports) {
        const MetricReport* full = find_report(run.result, rep.metric);
        REQUIRE(full != nullptr);
        REQUIRE(rep.methods.size() == 1);
        CHECK(rep.methods[0].raw == full->methods[1].raw);
        CHECK(rep.baseline.raw == full->baseline.raw);
        CHECK(rep.sample_ids == full->sample_ids);
        CHECK(rep.draw_sample_ids == full->draw_sample_ids);
    }
}

TEST_CASE("affine fixture pins faithfulness scores and degenerate flags") {
    const auto& ab = affine_bench();
    const BenchmarkResult res = run_benchmark(ab.net, ab.ds, ab.batches, ab.cfg);
    REQUIRE(res.reports.size() == 1);
    const MetricReport& rep = res.reports.front();
    CHECK(rep.metric == MetricId::faithfulness_correlation);
    CHECK(rep.property == Property::faithfulness);
    REQUIRE(rep.methods.size() == 2);
    const MethodScore& exact = rep.methods[0];
    const MethodScore& flat = rep.methods[1];
    CHECK(exact.method == Method::input_gradient);
    CHECK(flat.method == Method::gradient);
    REQUIRE(exact.raw.size() == 5);

    for (double v : exact.raw) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : exact.normalized) CHECK(v == 1.0);
    CHECK(exact.stats.mean == 1.0);
    CHECK(exact.stats.sem == 0.0);
    CHECK(!exact.degenerate);

    for (double v : flat.raw) CHECK(v == 0.0);
    for (double v : flat.normalized) CHECK(v == 0.0);
    CHECK(flat.degenerate);

    CHECK(!rep.baseline.degenerate);
    for (double v : rep.baseline.raw) {
        CHECK(v <= 1.0);
        CHECK(v >= -1.0);
    }

    CHECK(exact.rank == 1);
    CHECK(flat.rank == 2);
    CHECK(rep.baseline.rank == 0);
    CHECK(rep.baseline_passed ==
          baseline_separated(rep.baseline.stats, {exact.stats, flat.stats}));
}

TEST_CASE("run_benchmark rejects inconsistent inputs") {
    const auto& ab = affine_bench();
    // batches: [0] baseline, [1] input_gradient, [2] gradient
    auto code_with = [&](auto mutate) {
        auto batches = ab.batches;
        auto cfg = ab.cfg;
        mutate(batches, cfg);
        return thrown_code([&] { (void)run_benchmark(ab.net, ab.ds, batches, cfg); });
    };

    CHECK(code_with([](auto&, auto& cfg) {
              cfg.methods.push_back(Method::random_baseline);
          }) == ErrorCode::config);
    CHECK(code_with([](auto&, auto& cfg) { cfg.methods.clear(); }) == ErrorCode::config);
    CHECK(code_with([](auto&, auto& cfg) { cfg.metrics.clear(); }) == ErrorCode::config);
    CHECK(code_with([](auto&, auto& cfg) { cfg.metric.samples = 0; }) == ErrorCode::config);
    CHECK(code_with([](auto& b, auto&) { b[1].normalized = true; }) ==
          ErrorCode::invalid_argument);
    CHECK(code_with([](auto& b, auto&) { b[2].sample_ids[0] = 9; }) ==
          ErrorCode::invalid_argument);
    CHECK(code_with([](auto& b, auto&) { b[2].target_class[1] ^= 1u; }) ==
          ErrorCode::invalid_argument);
    CHECK(code_with([](auto& b, auto&) { b[2].maps = Tensor({5, 3, 3}); }) == ErrorCode::shape);
    CHECK(code_with([](auto& b, auto&) { b.erase(b.begin()); }) == ErrorCode::invalid_argument);
    CHECK(code_with([](auto& b, auto&) { b.pop_back(); }) == ErrorCode::invalid_argument);
    CHECK(code_with([](auto&, auto& cfg) { cfg.metric.samples = 50; }) ==
          ErrorCode::sample_shortfall);
    CHECK(code_with([](auto&, auto& cfg) {
              cfg.metrics = {MetricId::road};
              cfg.metric.road_draw_size = 50;
          }) == ErrorCode::sample_shortfall);
}

TEST_CASE("evaluation results round-trip through the stage artifact") {
    const auto& run = full_run();
    const std::string hash = "0123456789abcdef";
    const std::string stamp = "config=" + hash + " seed=99 version=test";
    const std::string text = serialize_result(run.result, stamp, hash);
    const BenchmarkResult back = deserialize_result(text, hash);
    CHECK(same_results(run.result, back));
    CHECK(serialize_result(back, stamp, hash) == text);

    CHECK(thrown_code([&] { (void)deserialize_result(text, "feedfacefeedface"); }) ==
          ErrorCode::config);
    CHECK(thrown_code([&] { (void)deserialize_result("{\"cut", hash); }) == ErrorCode::format);

    auto tampered = nlohmann::json::parse(text);
    tampered["reports"][0]["metric"] = "not_a_metric";
    CHECK(thrown_code([&] { (void)deserialize_result(tampered.dump(), hash); }) ==
          ErrorCode::format);
    tampered = nlohmann::json::parse(text);
    tampered["reports"][0]["methods"][0]["method"] = "not_a_method";
    CHECK(thrown_code([&] { (void)deserialize_result(tampered.dump(), hash); }) ==
          ErrorCode::format);
}

TEST_CASE("report artifacts are deterministic and complete") {
    const auto& run = full_run();
    const auto& ab = affine_bench();
    const BenchmarkResult small = run_benchmark(ab.net, ab.ds, ab.batches, ab.cfg);
    const auto dir = artifact_dir();
    const std::string stamp = "config=00ff00ff00ff00ff seed=7 version=0.0.0";

    write_scores_csv(dir / "scores_a.csv", small, stamp);
    write_scores_csv(dir / "scores_b.csv", small, stamp);
    const std::string scores = io::read_bytes(dir / "scores_a.csv");
    CHECK(scores == io::read_bytes(dir / "scores_b.csv"));
    CHECK(scores.rfind("# " + stamp + "\n", 0) == 0);
    CHECK(scores.find("metric,method,sample_id,raw,normalized\n") != std::string::npos);
    CHECK(scores.find("faithfulness_correlation,input_gradient,") != std::string::npos);
    CHECK(scores.find(",random_baseline,") != std::string::npos);
    CHECK(count_occurrences(scores, "\n") == 2 + 3 * 5);

    // retention rows carry draw labels instead of sample ids
    write_scores_csv(dir / "scores_full.csv", run.result, stamp);
    const std::string fullcsv = io::read_bytes(dir / "scores_full.csv");
    CHECK(fullcsv.find("road,gradient,d0,") != std::string::npos);
    CHECK(fullcsv.find("road,random_baseline,d1,") != std::string::npos);
    CHECK(count_occurrences(fullcsv, "\n") == 2 + 9 * 3 * 6 + 3 * 2);

    write_ranks_csv(dir / "ranks.csv", small, stamp);
    const std::string ranks = io::read_bytes(dir / "ranks.csv");
    CHECK(ranks.find("metric,property,method,mean,sem,rank,baseline_passed\n") !=
          std::string::npos);
    CHECK(ranks.find("faithfulness_correlation,faithfulness,input_gradient,1,0,1,") !=
          std::string::npos);
    // only the baseline row leaves the rank column blank
    CHECK(count_occurrences(ranks, ",,") == 1);
    CHECK(count_occurrences(ranks, "\n") == 2 + 3);

    write_property_csv(dir / "property.csv", run.result, run.cfg.property_metrics, stamp);
    const std::string prop = io::read_bytes(dir / "property.csv");
    CHECK(prop.find("property,metric,method,mean,sem,rank\n") != std::string::npos);
    CHECK(prop.find("robustness,local_lipschitz,") != std::string::npos);
    CHECK(count_occurrences(prop, "\n") == 2 + 5 * 2);
    CHECK(thrown_code([&] {
              write_property_csv(dir / "property_bad.csv", small,
                                 {MetricId::sparseness, MetricId::complexity, MetricId::top_k},
                                 stamp);
          }) == ErrorCode::invalid_argument);

    write_spyder_svg(dir / "spyder_a.svg", run.result, run.cfg.property_metrics, stamp);
    write_spyder_svg(dir / "spyder_b.svg", run.result, run.cfg.property_metrics, stamp);
    const std::string svg = io::read_bytes(dir / "spyder_a.svg");
    CHECK(svg == io::read_bytes(dir / "spyder_b.svg"));
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(svg, "<polygon") == 3);
    CHECK(count_occurrences(svg, "stroke-dasharray") == 1);
    for (const char* name :
         {"robustness", "faithfulness", "randomization", "complexity", "localization"})
        CHECK(svg.find(name) != std::string::npos);
    CHECK(thrown_code([&] {
              write_spyder_svg(dir / "spyder_bad.svg", run.result,
                               {MetricId::local_lipschitz, MetricId::faithfulness_correlation},
                               stamp);
          }) == ErrorCode::invalid_argument);

    const std::string table = ranking_table(run.result);
    CHECK(table.find("method") == 0);
    CHECK(table.find("Gradient") != std::string::npos);
    CHECK(table.find("InputGradients") != std::string::npos);
    CHECK(table.find("Random Baseline") != std::string::npos);
    CHECK(table.find("±") != std::string::npos);
    CHECK(table.find("- (") != std::string::npos);
    CHECK(count_occurrences(table, "\n") == 1 + 3);

    write_summary_json(dir / "summary.json", run.result, 99, "0123456789abcdef", "9.9.9");
    const auto sj = nlohmann::json::parse(io::read_bytes(dir / "summary.json"));
    CHECK(sj.at("seed").get<std::uint64_t>() == 99);
    CHECK(sj.at("config_hash").get<std::string>() == "0123456789abcdef");
    CHECK(sj.at("version").get<std::string>() == "9.9.9");
    REQUIRE(sj.at("metrics").size() == run.result.reports.size());
    const auto& m0 = sj.at("metrics").at(0);
    CHECK(m0.at("metric").get<std::string>() ==
          metric_id_string(run.result.reports[0].metric));
    CHECK(m0.at("methods").size() == 2);
    CHECK(m0.at("methods").at(0).at("mean").get<double>() ==
          run.result.reports[0].methods[0].stats.mean);
    CHECK(m0.at("baseline").at("mean").get<double>() ==
          run.result.reports[0].baseline.stats.mean);
    CHECK(m0.at("baseline_passed").is_boolean());
}

TEST_CASE("format_double emits shortest forms that parse back exactly") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5) == "-2.5");
    Rng rng(404);
    for (int i = 0; i < 200; ++i) {
        double v = 0.0;
        switch (i % 3) {
        case 0: v = rng.uniform(-1e6, 1e6); break;
        case 1: v = rng.normal(0.0, 1e-9); break;
        default: v = rng.uniform(); break;
        }
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}
