#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cctype>
#include <filesystem>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "json.hpp"
#include "xaibench/config.hpp"
#include "xaibench/pipeline.hpp"

using namespace xaibench;
using testutil::thrown_code;

namespace {

// Message of the config error raised while parsing, empty when none.
std::string parse_error(const std::string& text) {
    try {
        (void)config_from_json_text(text);
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::config);
        return e.what();
    }
    return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

PipelineConfig custom_config() {
    PipelineConfig cfg;
    cfg.seed = 42;
    cfg.workers = 3;
    cfg.arch = ModelSpec::Arch::cnn;
    cfg.dataset.grid_rows = 16;
    cfg.dataset.grid_cols = 14;
    cfg.dataset.years = 80;
    cfg.dataset.classes = 8;
    cfg.dataset.roi = {2, 3, 5, 4};
    cfg.dataset.noise_smoothing = 2;
    cfg.hidden = {10, 20};
    cfg.conv_channels = 4;
    cfg.dense_width = 16;
    cfg.train.learning_rate = 0.005;
    cfg.train.max_epochs = 7;
    cfg.xai.sg_samples = 10;
    cfg.xai.base_method = Method::input_gradient;
    cfg.xai.lrp_alpha = 2.0;
    cfg.xai.lrp_beta = -1.0;
    cfg.metric.road_percentages = {0.1, 0.2, 0.5};
    cfg.metric.normalize_maps = false;
    cfg.metric.mpt_similarity = Similarity::ssim;
    cfg.metric.rl_similarity = Similarity::spearman;
    cfg.metric.samples = 12;
    cfg.methods = {Method::gradient, Method::lrp_ab};
    cfg.metrics = {MetricId::complexity, MetricId::sparseness};
    cfg.property_metrics = {MetricId::complexity};
    return cfg;
}

} // namespace

TEST_CASE("defaults match the documented configuration") {
    const PipelineConfig cfg;
    CHECK(cfg.seed == 0);
    CHECK(cfg.workers == 1);
    CHECK(cfg.arch == ModelSpec::Arch::mlp);

    CHECK(cfg.dataset.grid_rows == 36);
    CHECK(cfg.dataset.grid_cols == 24);
    CHECK(cfg.dataset.years == 160);
    CHECK(cfg.dataset.members == 10);
    CHECK(cfg.dataset.classes == 20);
    CHECK(cfg.dataset.trend_amplitude == 1.0);
    CHECK(cfg.dataset.roi.row0 == 24);
    CHECK(cfg.dataset.roi.col0 == 6);
    CHECK(cfg.dataset.roi.rows == 9);
    CHECK(cfg.dataset.roi.cols == 10);
    CHECK(cfg.dataset.roi_signal == 2.5);
    CHECK(cfg.dataset.noise_sigma == 0.8);
    CHECK(cfg.dataset.noise_smoothing == 0);
    CHECK(cfg.dataset.test_fraction == 0.20);
    CHECK(cfg.dataset.val_fraction == 0.16);

    CHECK(cfg.hidden == std::vector<std::size_t>{64, 64});
    CHECK(cfg.conv_channels == 16);
    CHECK(cfg.conv_kernel == 6);
    CHECK(cfg.conv_stride == 2);
    CHECK(cfg.pool == 2);
    CHECK(cfg.dense_width == 0);
    CHECK(cfg.dense_l2 == 1e-4);

    CHECK(cfg.train.learning_rate == 0.001);
    CHECK(cfg.train.momentum == 0.9);
    CHECK(cfg.train.batch_size == 32);
    CHECK(cfg.train.max_epochs == 60);
    CHECK(cfg.train.patience == 8);
    CHECK(cfg.train.tolerance_years == 2.0);

    CHECK(cfg.xai.sg_samples == 150);
    CHECK(cfg.xai.sg_sigma_scale == 0.5);
    CHECK(cfg.xai.ng_samples == 20);
    CHECK(cfg.xai.ng_sigma == 0.25);
    CHECK(cfg.xai.fg_model_samples == 20);
    CHECK(cfg.xai.fg_input_samples == 20);
    CHECK(cfg.xai.fg_sigma_scale == 0.25);
    CHECK(cfg.xai.fg_ng_sigma == 0.125);
    CHECK(cfg.xai.ig_steps == 64);
    CHECK(cfg.xai.ig_baseline == 0.0);
    CHECK(cfg.xai.lrp_alpha == 1.0);
    CHECK(cfg.xai.lrp_beta == 0.0);
    CHECK(cfg.xai.lrp_epsilon == 1e-6);
    CHECK(cfg.xai.lrp_gamma == 0.25);
    CHECK(cfg.xai.base_method == Method::gradient);

    CHECK(cfg.metric.perturb_sigma == 0.1);
    CHECK(cfg.metric.perturb_draws == 10);
    CHECK(cfg.metric.fc_runs == 50);
    CHECK(cfg.metric.fc_subset == 40);
    CHECK(cfg.metric.fc_uniform_baseline);
    CHECK(cfg.metric.fc_baseline_value == 0.0);
    CHECK(cfg.metric.road_percentages.empty());
    CHECK(cfg.metric.road_noise_sigma == 0.01);
    CHECK(cfg.metric.road_draws == 10);
    CHECK(cfg.metric.road_draw_size == 50);
    CHECK(cfg.metric.mpt_sigma == 0.25);
    CHECK(cfg.metric.mpt_bottom_up);
    CHECK(cfg.metric.mpt_similarity == Similarity::pearson);
    CHECK(cfg.metric.rl_similarity == Similarity::pearson);
    CHECK(cfg.metric.rl_classes == 20);
    CHECK(cfg.metric.topk_fraction == 0.1);
    CHECK(cfg.metric.normalize_maps);
    CHECK(cfg.metric.samples == 50);

    const auto grid = MetricConfig::default_road_percentages();
    REQUIRE(grid.size() == 50);
    CHECK(grid.front() == doctest::Approx(0.01));
    CHECK(grid.back() == doctest::Approx(0.50));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(grid[i] > grid[i - 1]);
        CHECK(grid[i] - grid[i - 1] == doctest::Approx(0.01));
    }
}

TEST_CASE("effective method and metric lists fill in the defaults") {
    PipelineConfig cfg;
    const std::vector<Method> mlp = {Method::gradient,   Method::input_gradient,
                                     Method::integrated_gradients, Method::lrp_z,
                                     Method::lrp_ab,     Method::smoothgrad,
                                     Method::noisegrad,  Method::fusiongrad};
    CHECK(default_methods(ModelSpec::Arch::mlp) == mlp);
    std::vector<Method> cnn = mlp;
    cnn.push_back(Method::lrp_composite);
    CHECK(default_methods(ModelSpec::Arch::cnn) == cnn);

    CHECK(cfg.effective_methods() == mlp);
    cfg.arch = ModelSpec::Arch::cnn;
    CHECK(cfg.effective_methods() == cnn);
    cfg.methods = {Method::lrp_z};
    CHECK(cfg.effective_methods() == std::vector<Method>{Method::lrp_z});

    CHECK(all_metrics().size() == 10);
    for (std::size_t i = 0; i < all_metrics().size(); ++i)
        CHECK(static_cast<std::uint32_t>(all_metrics()[i]) == i);
    CHECK(cfg.effective_metrics() == all_metrics());
    cfg.metrics = {MetricId::road};
    CHECK(cfg.effective_metrics() == std::vector<MetricId>{MetricId::road});

    const std::vector<MetricId> chart = {MetricId::local_lipschitz,
                                         MetricId::faithfulness_correlation,
                                         MetricId::model_parameter_test, MetricId::sparseness,
                                         MetricId::relevance_rank_accuracy};
    CHECK(PipelineConfig{}.effective_property_metrics() == chart);
    cfg.property_metrics = {MetricId::road};
    CHECK(cfg.effective_property_metrics() == std::vector<MetricId>{MetricId::road});
}

TEST_CASE("model_spec mirrors the dataset dimensions and architecture knobs") {
    PipelineConfig cfg = custom_config();
    const ModelSpec spec = cfg.model_spec();
    CHECK(spec.arch == ModelSpec::Arch::cnn);
    CHECK(spec.rows == cfg.dataset.grid_rows);
    CHECK(spec.cols == cfg.dataset.grid_cols);
    CHECK(spec.classes == cfg.dataset.classes);
    CHECK(spec.hidden == cfg.hidden);
    CHECK(spec.conv_channels == 4);
    CHECK(spec.conv_kernel == 6);
    CHECK(spec.conv_stride == 2);
    CHECK(spec.pool == 2);
    CHECK(spec.dense_width == 16);
    CHECK(spec.dense_l2 == 1e-4);
}

TEST_CASE("an empty JSON object parses to the default configuration") {
    const PipelineConfig parsed = config_from_json_text("{}");
    CHECK(config_to_json_text(parsed) == config_to_json_text(PipelineConfig{}));
    CHECK(config_hash(parsed) == config_hash(PipelineConfig{}));
}

TEST_CASE("the canonical serialization round-trips unchanged") {
    const PipelineConfig cfg = custom_config();
    const std::string text = config_to_json_text(cfg);
    const PipelineConfig parsed = config_from_json_text(text);
    CHECK(config_to_json_text(parsed) == text);
    CHECK(config_hash(parsed) == config_hash(cfg));

    CHECK(parsed.seed == 42);
    CHECK(parsed.workers == 3);
    CHECK(parsed.arch == ModelSpec::Arch::cnn);
    CHECK(parsed.dataset.grid_rows == 16);
    CHECK(parsed.dataset.roi.col0 == 3);
    CHECK(parsed.dataset.noise_smoothing == 2);
    CHECK(parsed.hidden == std::vector<std::size_t>{10, 20});
    CHECK(parsed.dense_width == 16);
    CHECK(parsed.train.learning_rate == 0.005);
    CHECK(parsed.train.max_epochs == 7);
    CHECK(parsed.xai.sg_samples == 10);
    CHECK(parsed.xai.base_method == Method::input_gradient);
    CHECK(parsed.xai.lrp_alpha == 2.0);
    CHECK(parsed.xai.lrp_beta == -1.0);
    CHECK(parsed.metric.road_percentages == std::vector<double>{0.1, 0.2, 0.5});
    CHECK(!parsed.metric.normalize_maps);
    CHECK(parsed.metric.mpt_similarity == Similarity::ssim);
    CHECK(parsed.metric.rl_similarity == Similarity::spearman);
    CHECK(parsed.metric.samples == 12);
    CHECK(parsed.methods == cfg.methods);
    CHECK(parsed.metrics == cfg.metrics);
    CHECK(parsed.property_metrics == cfg.property_metrics);

    // the canonical text spells lists out even when the input left them empty
    const std::string defaults = config_to_json_text(PipelineConfig{});
    CHECK(contains(defaults, "\"methods\""));
    CHECK(contains(defaults, "\"fusiongrad\""));
    CHECK(contains(defaults, "\"evaluate_metrics\""));
    CHECK(contains(defaults, "\"relevance_rank_accuracy\""));
    CHECK(contains(defaults, "\"normalize_explanations\""));
    CHECK(contains(defaults, "\"road_percentages\""));
}

TEST_CASE("unknown keys are rejected by name and location") {
    std::string msg = parse_error(R"({"sed": 1})");
    CHECK(contains(msg, "sed"));
    CHECK(contains(msg, "config"));

    msg = parse_error(R"({"dataset": {"rows": 5}})");
    CHECK(contains(msg, "rows"));
    CHECK(contains(msg, "dataset"));

    msg = parse_error(R"({"dataset": {"roi": {"r0": 1}}})");
    CHECK(contains(msg, "r0"));
    CHECK(contains(msg, "dataset.roi"));

    CHECK(contains(parse_error(R"({"model": {"widths": [3]}})"), "model"));
    CHECK(contains(parse_error(R"({"train": {"lr": 0.1}})"), "train"));
    CHECK(contains(parse_error(R"({"xai": {"steps": 4}})"), "xai"));
    CHECK(contains(parse_error(R"({"metrics": {"sample": 2}})"), "metrics"));
}

TEST_CASE("malformed values are rejected as config errors") {
    CHECK(!parse_error("{nope").empty());
    CHECK(!parse_error("[]").empty());
    CHECK(!parse_error(R"({"seed": "x"})").empty());
    CHECK(!parse_error(R"({"seed": -1})").empty());
    CHECK(!parse_error(R"({"seed": 1.5})").empty());
    CHECK(!parse_error(R"({"workers": 0})").empty());
    CHECK(!parse_error(R"({"arch": "transformer"})").empty());
    CHECK(!parse_error(R"({"arch": 3})").empty());
    CHECK(!parse_error(R"({"model": {"hidden": "wide"}})").empty());
    CHECK(!parse_error(R"({"model": {"hidden": [0]}})").empty());
    CHECK(!parse_error(R"({"model": {"hidden": [3.5]}})").empty());
    CHECK(!parse_error(R"({"dataset": {"trend_amplitude": "big"}})").empty());
    CHECK(!parse_error(R"({"xai": {"base_method": "grad"}})").empty());
    CHECK(!parse_error(R"({"xai": {"base_method": 7}})").empty());
    CHECK(!parse_error(R"({"metrics": {"road_percentages": "all"}})").empty());
    CHECK(!parse_error(R"({"metrics": {"road_percentages": ["a"]}})").empty());
    CHECK(!parse_error(R"({"metrics": {"mpt_similarity": "cosine"}})").empty());
    CHECK(!parse_error(R"({"metrics": {"rl_similarity": 1}})").empty());
    CHECK(!parse_error(R"({"metrics": {"fc_uniform_baseline": 1}})").empty());
    CHECK(!parse_error(R"({"methods": "gradient"})").empty());
    CHECK(!parse_error(R"({"methods": []})").empty());
    CHECK(!parse_error(R"({"methods": [3]})").empty());
    CHECK(!parse_error(R"({"methods": ["gradient", "nope"]})").empty());
    CHECK(!parse_error(R"({"evaluate_metrics": []})").empty());
    CHECK(!parse_error(R"({"evaluate_metrics": ["complexity", "nope"]})").empty());
    CHECK(!parse_error(R"({"property_metrics": ["nope"]})").empty());
}

TEST_CASE("property metrics must be among the evaluated metrics") {
    const std::string msg = parse_error(R"({"evaluate_metrics": ["complexity"]})");
    CHECK(contains(msg, "property metric"));

    const PipelineConfig ok = config_from_json_text(
        R"({"evaluate_metrics": ["complexity"], "property_metrics": ["complexity"]})");
    CHECK(ok.effective_property_metrics() == std::vector<MetricId>{MetricId::complexity});
    CHECK(parse_error(R"({"property_metrics": ["road"]})").empty());
}

TEST_CASE("the normalize_explanations key drives the map normalization switch") {
    const PipelineConfig cfg =
        config_from_json_text(R"({"metrics": {"normalize_explanations": false}})");
    CHECK(!cfg.metric.normalize_maps);
    CHECK(contains(config_to_json_text(cfg), "\"normalize_explanations\": false"));
}

TEST_CASE("the config hash is fixed-width hex and ignores the worker count") {
    const PipelineConfig cfg;
    const std::string h = config_hash(cfg);
    REQUIRE(h.size() == 16);
    for (char c : h) CHECK((std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f')));
    CHECK(config_hash(cfg) == h);

    PipelineConfig threaded = cfg;
    threaded.workers = 8;
    CHECK(config_hash(threaded) == h);

    PipelineConfig reseeded = cfg;
    reseeded.seed = 1;
    CHECK(config_hash(reseeded) != h);

    PipelineConfig conv = cfg;
    conv.arch = ModelSpec::Arch::cnn;
    CHECK(config_hash(conv) != h);
}

TEST_CASE("stage runners demand their upstream artifacts in order") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "xaibench_test_config_stages";
    fs::remove_all(dir);
    fs::create_directories(dir);

    PipelineConfig cfg;
    cfg.seed = 7;
    cfg.dataset = testutil::small_data_config();
    cfg.dataset.members = 2;
    cfg.hidden = {8};
    cfg.train.max_epochs = 1;

    const Pipeline p(cfg, dir);
    CHECK(library_version() == std::string("0.1.0"));
    CHECK(p.stamp() == "config=" + config_hash(cfg) + " seed=7 version=" + library_version());

    CHECK(thrown_code([&] { p.train_model(); }) == ErrorCode::stage_order);
    CHECK(thrown_code([&] { p.explain_all(); }) == ErrorCode::stage_order);
    CHECK(thrown_code([&] { p.evaluate(); }) == ErrorCode::stage_order);
    CHECK(thrown_code([&] { p.rank(); }) == ErrorCode::stage_order);
    CHECK(thrown_code([&] { p.report(); }) == ErrorCode::stage_order);
    try {
        p.train_model();
        CHECK(false);
    } catch (const Error& e) {
        CHECK(contains(e.what(), "generate"));
    }

    p.generate();
    CHECK(fs::exists(p.dataset_bin()));
    CHECK(fs::exists(p.dataset_json()));
    // the dataset alone does not unlock the later stages
    CHECK(thrown_code([&] { p.explain_all(); }) == ErrorCode::stage_order);
    try {
        p.explain_all();
        CHECK(false);
    } catch (const Error& e) {
        CHECK(contains(e.what(), "train"));
    }
    CHECK(thrown_code([&] { p.evaluate(); }) == ErrorCode::stage_order);

    fs::remove_all(dir);
}
