#include "xaibench/pipeline.hpp"

#include <chrono>
#include <exception>

#include "json.hpp"
#include "xaibench/error.hpp"
#include "xaibench/io.hpp"
#include "xaibench/parallel.hpp"
#include "xaibench/report.hpp"
#include "xaibench/train.hpp"

namespace xaibench {

namespace {

using nlohmann::json;

class StageTimer {
public:
    explicit StageTimer(std::string stage, std::uint64_t seed)
        : stage_(std::move(stage)), seed_(seed), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        if (std::uncaught_exceptions()) return;
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
        log_info("stage=" + stage_ + " seed=" + std::to_string(seed_) +
                 " wall_ms=" + std::to_string(ms));
    }

private:
    std::string stage_;
    std::uint64_t seed_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace

std::string library_version() { return XAIBENCH_VERSION_STR; }

Pipeline::Pipeline(PipelineConfig cfg, std::filesystem::path out_dir)
    : cfg_(std::move(cfg)), out_(std::move(out_dir)), hash_(config_hash(cfg_)) {}

std::filesystem::path Pipeline::explanations_bin(Method m) const {
    return explanations_dir() / (method_id(m) + ".bin");
}

std::filesystem::path Pipeline::explanations_json(Method m) const {
    return explanations_dir() / (method_id(m) + ".json");
}

std::string Pipeline::stamp() const {
    return "config=" + hash_ + " seed=" + std::to_string(cfg_.seed) +
           " version=" + library_version();
}

void Pipeline::require_artifact(const std::filesystem::path& path,
                                const std::string& missing_stage) const {
    if (!std::filesystem::exists(path))
        fail(ErrorCode::stage_order,
             "missing " + path.string() + "; run the " + missing_stage + " stage first");
}

void Pipeline::generate() const {
    StageTimer timer("generate", cfg_.seed);
    std::filesystem::create_directories(out_);
    DatasetConfig dcfg = cfg_.dataset;
    dcfg.seed = derive_seed(cfg_.seed, "data");
    const Dataset ds = generate_dataset(dcfg);
    io::save_dataset(dataset_bin(), dataset_json(), ds);
}

void Pipeline::train_model() const {
    StageTimer timer("train", cfg_.seed);
    require_artifact(dataset_bin(), "generate");
    const Dataset ds = io::load_dataset(dataset_bin(), dataset_json());

    TrainConfig tcfg = cfg_.train;
    tcfg.seed = derive_seed(cfg_.seed, "train");
    const TrainResult trained = train(cfg_.model_spec(), ds, tcfg);

    io::ModelMeta meta;
    meta.train_seed = tcfg.seed;
    meta.data_seed = ds.config.seed;
    meta.best_epoch = trained.best_epoch;
    meta.epochs_run = trained.log.size();
    if (!trained.log.empty()) {
        const auto& best = trained.log[trained.best_epoch];
        meta.val_loss = best.val_loss;
        meta.val_accuracy = best.val_accuracy;
    }
    const Performance perf =
        evaluate_performance(trained.net, ds, Split::test, cfg_.train.tolerance_years);
    meta.test_accuracy = perf.accuracy;
    meta.test_fuzzy_accuracy = perf.fuzzy_accuracy;
    meta.test_rmse_years = perf.rmse_years;
    io::save_model(model_bin(), model_json(), trained.net, meta);
    log_info("trained arch=" + std::string(cfg_.arch == ModelSpec::Arch::mlp ? "mlp" : "cnn") +
             " test_accuracy=" + format_double(perf.accuracy) +
             " fuzzy_accuracy=" + format_double(perf.fuzzy_accuracy));
}

void Pipeline::explain_all() const {
    StageTimer timer("explain", cfg_.seed);
    require_artifact(dataset_bin(), "generate");
    require_artifact(model_bin(), "train");
    const Dataset ds = io::load_dataset(dataset_bin(), dataset_json());
    const Network net = io::load_model(model_bin(), model_json()).net;

    const auto pool =
        correct_prediction_indices(net, ds, Split::test, cfg_.train.tolerance_years);
    if (pool.empty())
        fail(ErrorCode::sample_shortfall,
             "the model has no correctly predicted test samples to explain");
    log_info("explaining pool=" + std::to_string(pool.size()) + " test samples");

    // Explained class = the model's own prediction for the sample.
    std::vector<std::uint32_t> targets(pool.size());
    {
        const Tensor probs = net.forward_probs(gather_inputs(ds, pool));
        const std::size_t classes = ds.config.classes;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < classes; ++k)
                if (probs[i * classes + k] > probs[i * classes + best]) best = k;
            targets[i] = static_cast<std::uint32_t>(best);
        }
    }

    ExplainContext ctx;
    ctx.net = &net;
    ctx.input_min = ds.input_min;
    ctx.input_max = ds.input_max;
    ctx.cfg = cfg_.xai;

    std::filesystem::create_directories(explanations_dir());
    auto methods = cfg_.effective_methods();
    methods.push_back(Method::random_baseline);
    for (Method m : methods) {
        io::ExplanationBatch batch;
        batch.method = m;
        batch.seed = derive_seed(cfg_.seed, "explain", static_cast<std::uint64_t>(m));
        batch.normalized = false;
        batch.maps = Tensor({pool.size(), ds.config.grid_rows, ds.config.grid_cols});
        batch.sample_ids.resize(pool.size());
        batch.target_class = targets;
        parallel_for(pool.size(), cfg_.workers, [&](std::size_t i) {
            const std::size_t row = pool[i];
            batch.sample_ids[i] = static_cast<std::uint32_t>(row);
            const Tensor x = ds.inputs.row(row);
            const auto seed = derive_seed(batch.seed, "sample", row);
            batch.maps.set_row(i, explain(ctx, m, x, targets[i], seed).relevance);
        });
        io::save_explanations(explanations_bin(m), explanations_json(m), batch, cfg_.xai);
        log_info("explained method=" + method_id(m));
    }
}

void Pipeline::evaluate() const {
    StageTimer timer("evaluate", cfg_.seed);
    require_artifact(dataset_bin(), "generate");
    require_artifact(model_bin(), "train");
    const Dataset ds = io::load_dataset(dataset_bin(), dataset_json());
    const Network net = io::load_model(model_bin(), model_json()).net;

    BenchmarkConfig bcfg;
    bcfg.methods = cfg_.effective_methods();
    bcfg.metrics = cfg_.effective_metrics();
    bcfg.property_metrics = cfg_.effective_property_metrics();
    bcfg.metric = cfg_.metric;
    bcfg.xai = cfg_.xai;
    bcfg.master_seed = derive_seed(cfg_.seed, "evaluate");
    bcfg.workers = cfg_.workers;

    std::vector<io::ExplanationBatch> batches;
    auto wanted = bcfg.methods;
    wanted.push_back(Method::random_baseline);
    for (Method m : wanted) {
        require_artifact(explanations_bin(m), "explain");
        batches.push_back(io::load_explanations(explanations_bin(m), explanations_json(m)));
    }

    const BenchmarkResult result = run_benchmark(net, ds, batches, bcfg);
    std::filesystem::create_directories(report_dir());
    write_scores_csv(scores_csv(), result, stamp());
    io::atomic_write_text(evaluation_json(), serialize_result(result, stamp(), hash_));
}

void Pipeline::rank() const {
    StageTimer timer("rank", cfg_.seed);
    require_artifact(evaluation_json(), "evaluate");
    const BenchmarkResult result =
        deserialize_result(io::read_bytes(evaluation_json()), hash_);
    std::filesystem::create_directories(report_dir());
    write_ranks_csv(ranks_csv(), result, stamp());
}

void Pipeline::report() const {
    StageTimer timer("report", cfg_.seed);
    require_artifact(evaluation_json(), "evaluate");
    const BenchmarkResult result =
        deserialize_result(io::read_bytes(evaluation_json()), hash_);
    std::filesystem::create_directories(report_dir());
    const auto props = cfg_.effective_property_metrics();
    write_property_csv(property_csv(), result, props, stamp());
    write_spyder_svg(spyder_svg(), result, props, stamp());
    io::atomic_write_text(ranking_txt(), "# " + stamp() + "\n" + ranking_table(result));
    write_summary_json(summary_json(), result, cfg_.seed, hash_, library_version());
}

void Pipeline::run_all() const {
    generate();
    train_model();
    explain_all();
    evaluate();
    rank();
    report();
}

namespace {

json score_to_json(const MethodScore& s) {
    return json{{"method", method_id(s.method)}, {"raw", s.raw},
                {"normalized", s.normalized},   {"mean", s.stats.mean},
                {"sem", s.stats.sem},           {"rank", s.rank},
                {"degenerate", s.degenerate}};
}

MethodScore score_from_json(const json& j) {
    MethodScore s;
    auto m = method_from_id(j.at("method").get<std::string>());
    if (!m) fail(ErrorCode::format, "evaluation result: unknown method");
    s.method = *m;
    s.raw = j.at("raw").get<std::vector<double>>();
    s.normalized = j.at("normalized").get<std::vector<double>>();
    s.stats.mean = j.at("mean").get<double>();
    s.stats.sem = j.at("sem").get<double>();
    s.rank = j.at("rank").get<std::size_t>();
    s.degenerate = j.at("degenerate").get<bool>();
    return s;
}

} // namespace

std::string serialize_result(const BenchmarkResult& result, const std::string& stamp,
                             const std::string& config_hash) {
    json j;
    j["stamp"] = stamp;
    j["config_hash"] = config_hash;
    json reports = json::array();
    for (const auto& rep : result.reports) {
        json r;
        r["metric"] = metric_id_string(rep.metric);
        r["property"] = property_name(rep.property);
        r["sample_ids"] = rep.sample_ids;
        r["draw_sample_ids"] = rep.draw_sample_ids;
        r["baseline_passed"] = rep.baseline_passed;
        json methods = json::array();
        for (const auto& s : rep.methods) methods.push_back(score_to_json(s));
        r["methods"] = std::move(methods);
        r["baseline"] = score_to_json(rep.baseline);
        reports.push_back(std::move(r));
    }
    j["reports"] = std::move(reports);
    return j.dump(2) + "\n";
}

BenchmarkResult deserialize_result(const std::string& text, const std::string& expected_hash) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::format, "evaluation result is not valid JSON");
    if (j.at("config_hash").get<std::string>() != expected_hash)
        fail(ErrorCode::config,
             "configuration changed since the evaluate stage; re-run evaluate");
    BenchmarkResult result;
    for (const auto& r : j.at("reports")) {
        MetricReport rep;
        auto metric = metric_from_id(r.at("metric").get<std::string>());
        if (!metric) fail(ErrorCode::format, "evaluation result: unknown metric");
        rep.metric = *metric;
        rep.property = metric_property(rep.metric);
        rep.sample_ids = r.at("sample_ids").get<std::vector<std::uint32_t>>();
        rep.draw_sample_ids =
            r.at("draw_sample_ids").get<std::vector<std::vector<std::uint32_t>>>();
        rep.baseline_passed = r.at("baseline_passed").get<bool>();
        for (const auto& s : r.at("methods")) rep.methods.push_back(score_from_json(s));
        rep.baseline = score_from_json(r.at("baseline"));
        result.reports.push_back(std::move(rep));
    }
    return result;
}

} // namespace xaibench
