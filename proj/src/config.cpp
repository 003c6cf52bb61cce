#include "xaibench/config.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "xaibench/error.hpp"

namespace xaibench {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& msg) { fail(ErrorCode::config, msg); }

// Consumes `key` from `pending` so leftovers can be reported as unknown.
class StrictObject {
public:
    StrictObject(const json& j, std::string where) : where_(std::move(where)) {
        if (!j.is_object()) bad_config(where_ + " must be a JSON object");
        for (const auto& [key, value] : j.items()) pending_[key] = &value;
    }

    const json* take(const char* key) {
        auto it = pending_.find(key);
        if (it == pending_.end()) return nullptr;
        const json* v = it->second;
        pending_.erase(it);
        return v;
    }

    void finish() const {
        if (!pending_.empty())
            bad_config("unknown key \"" + pending_.begin()->first + "\" in " + where_);
    }

    const std::string& where() const { return where_; }

private:
    std::string where_;
    std::map<std::string, const json*> pending_;
};

template <typename T>
void load_uint(StrictObject& obj, const char* key, T& out) {
    if (const json* v = obj.take(key)) {
        if (!v->is_number_unsigned())
            bad_config(std::string(key) + " in " + obj.where() + " must be a non-negative integer");
        out = v->get<T>();
    }
}

void load_double(StrictObject& obj, const char* key, double& out) {
    if (const json* v = obj.take(key)) {
        if (!v->is_number())
            bad_config(std::string(key) + " in " + obj.where() + " must be a number");
        out = v->get<double>();
    }
}

void load_bool(StrictObject& obj, const char* key, bool& out) {
    if (const json* v = obj.take(key)) {
        if (!v->is_boolean())
            bad_config(std::string(key) + " in " + obj.where() + " must be a boolean");
        out = v->get<bool>();
    }
}

void load_similarity(StrictObject& obj, const char* key, Similarity& out) {
    if (const json* v = obj.take(key)) {
        if (!v->is_string()) bad_config(std::string(key) + " must be a string");
        auto s = similarity_from_id(v->get<std::string>());
        if (!s) bad_config("unknown similarity \"" + v->get<std::string>() + "\" for " + key);
        out = *s;
    }
}

void parse_dataset(const json& j, DatasetConfig& cfg) {
    StrictObject obj(j, "dataset");
    load_uint(obj, "grid_rows", cfg.grid_rows);
    load_uint(obj, "grid_cols", cfg.grid_cols);
    load_uint(obj, "years", cfg.years);
    load_uint(obj, "members", cfg.members);
    load_uint(obj, "classes", cfg.classes);
    load_double(obj, "trend_amplitude", cfg.trend_amplitude);
    if (const json* r = obj.take("roi")) {
        StrictObject roi(*r, "dataset.roi");
        load_uint(roi, "row0", cfg.roi.row0);
        load_uint(roi, "col0", cfg.roi.col0);
        load_uint(roi, "rows", cfg.roi.rows);
        load_uint(roi, "cols", cfg.roi.cols);
        roi.finish();
    }
    load_double(obj, "roi_signal", cfg.roi_signal);
    load_double(obj, "noise_sigma", cfg.noise_sigma);
    load_uint(obj, "noise_smoothing", cfg.noise_smoothing);
    load_double(obj, "test_fraction", cfg.test_fraction);
    load_double(obj, "val_fraction", cfg.val_fraction);
    obj.finish();
}

void parse_model(const json& j, PipelineConfig& cfg) {
    StrictObject obj(j, "model");
    if (const json* v = obj.take("hidden")) {
        if (!v->is_array()) bad_config("model.hidden must be an array of widths");
        cfg.hidden.clear();
        for (const auto& h : *v) {
            if (!h.is_number_unsigned() || h.get<std::size_t>() == 0)
                bad_config("model.hidden entries must be positive integers");
            cfg.hidden.push_back(h.get<std::size_t>());
        }
    }
    load_uint(obj, "conv_channels", cfg.conv_channels);
    load_uint(obj, "conv_kernel", cfg.conv_kernel);
    load_uint(obj, "conv_stride", cfg.conv_stride);
    load_uint(obj, "pool", cfg.pool);
    load_uint(obj, "dense_width", cfg.dense_width);
    load_double(obj, "dense_l2", cfg.dense_l2);
    obj.finish();
}

void parse_train(const json& j, TrainConfig& cfg) {
    StrictObject obj(j, "train");
    load_double(obj, "learning_rate", cfg.learning_rate);
    load_double(obj, "momentum", cfg.momentum);
    load_uint(obj, "batch_size", cfg.batch_size);
    load_uint(obj, "max_epochs", cfg.max_epochs);
    load_uint(obj, "patience", cfg.patience);
    load_double(obj, "tolerance_years", cfg.tolerance_years);
    obj.finish();
}

void parse_xai(const json& j, XaiConfig& cfg) {
    StrictObject obj(j, "xai");
    load_uint(obj, "sg_samples", cfg.sg_samples);
    load_double(obj, "sg_sigma_scale", cfg.sg_sigma_scale);
    load_uint(obj, "ng_samples", cfg.ng_samples);
    load_double(obj, "ng_sigma", cfg.ng_sigma);
    load_uint(obj, "fg_model_samples", cfg.fg_model_samples);
    load_uint(obj, "fg_input_samples", cfg.fg_input_samples);
    load_double(obj, "fg_sigma_scale", cfg.fg_sigma_scale);
    load_double(obj, "fg_ng_sigma", cfg.fg_ng_sigma);
    load_uint(obj, "ig_steps", cfg.ig_steps);
    load_double(obj, "ig_baseline", cfg.ig_baseline);
    load_double(obj, "lrp_alpha", cfg.lrp_alpha);
    load_double(obj, "lrp_beta", cfg.lrp_beta);
    load_double(obj, "lrp_epsilon", cfg.lrp_epsilon);
    load_double(obj, "lrp_gamma", cfg.lrp_gamma);
    if (const json* v = obj.take("base_method")) {
        if (!v->is_string()) bad_config("xai.base_method must be a string");
        auto m = method_from_id(v->get<std::string>());
        if (!m) bad_config("unknown method \"" + v->get<std::string>() + "\" for xai.base_method");
        cfg.base_method = *m;
    }
    obj.finish();
}

void parse_metric(const json& j, MetricConfig& cfg) {
    StrictObject obj(j, "metrics");
    load_double(obj, "perturb_sigma", cfg.perturb_sigma);
    load_uint(obj, "perturb_draws", cfg.perturb_draws);
    load_uint(obj, "fc_runs", cfg.fc_runs);
    load_uint(obj, "fc_subset", cfg.fc_subset);
    load_bool(obj, "fc_uniform_baseline", cfg.fc_uniform_baseline);
    load_double(obj, "fc_baseline_value", cfg.fc_baseline_value);
    if (const json* v = obj.take("road_percentages")) {
        if (!v->is_array()) bad_config("metrics.road_percentages must be an array");
        cfg.road_percentages.clear();
        for (const auto& p : *v) {
            if (!p.is_number()) bad_config("metrics.road_percentages entries must be numbers");
            cfg.road_percentages.push_back(p.get<double>());
        }
    }
    load_double(obj, "road_noise_sigma", cfg.road_noise_sigma);
    load_uint(obj, "road_draws", cfg.road_draws);
    load_uint(obj, "road_draw_size", cfg.road_draw_size);
    load_double(obj, "mpt_sigma", cfg.mpt_sigma);
    load_bool(obj, "mpt_bottom_up", cfg.mpt_bottom_up);
    load_similarity(obj, "mpt_similarity", cfg.mpt_similarity);
    load_similarity(obj, "rl_similarity", cfg.rl_similarity);
    load_uint(obj, "rl_classes", cfg.rl_classes);
    load_double(obj, "topk_fraction", cfg.topk_fraction);
    load_bool(obj, "normalize_explanations", cfg.normalize_maps);
    load_uint(obj, "samples", cfg.samples);
    obj.finish();
}

std::vector<Method> parse_methods(const json& v) {
    if (!v.is_array()) bad_config("methods must be an array of method ids");
    std::vector<Method> out;
    for (const auto& e : v) {
        if (!e.is_string()) bad_config("methods entries must be strings");
        auto m = method_from_id(e.get<std::string>());
        if (!m) bad_config("unknown method \"" + e.get<std::string>() + "\"");
        out.push_back(*m);
    }
    if (out.empty()) bad_config("methods must not be empty");
    return out;
}

std::vector<MetricId> parse_metric_list(const json& v, const char* key) {
    if (!v.is_array()) bad_config(std::string(key) + " must be an array of metric ids");
    std::vector<MetricId> out;
    for (const auto& e : v) {
        if (!e.is_string()) bad_config(std::string(key) + " entries must be strings");
        auto m = metric_from_id(e.get<std::string>());
        if (!m) bad_config("unknown metric \"" + e.get<std::string>() + "\" in " + key);
        out.push_back(*m);
    }
    if (out.empty()) bad_config(std::string(key) + " must not be empty");
    return out;
}

} // namespace

ModelSpec PipelineConfig::model_spec() const {
    ModelSpec spec;
    spec.arch = arch;
    spec.rows = dataset.grid_rows;
    spec.cols = dataset.grid_cols;
    spec.classes = dataset.classes;
    spec.hidden = hidden;
    spec.conv_channels = conv_channels;
    spec.conv_kernel = conv_kernel;
    spec.conv_stride = conv_stride;
    spec.pool = pool;
    spec.dense_width = dense_width;
    spec.dense_l2 = dense_l2;
    return spec;
}

std::vector<Method> PipelineConfig::effective_methods() const {
    return methods.empty() ? default_methods(arch) : methods;
}

std::vector<MetricId> PipelineConfig::effective_metrics() const {
    return metrics.empty() ? all_metrics() : metrics;
}

std::vector<MetricId> PipelineConfig::effective_property_metrics() const {
    if (!property_metrics.empty()) return property_metrics;
    return {MetricId::local_lipschitz, MetricId::faithfulness_correlation,
            MetricId::model_parameter_test, MetricId::sparseness,
            MetricId::relevance_rank_accuracy};
}

PipelineConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) bad_config("configuration is not valid JSON");

    PipelineConfig cfg;
    StrictObject obj(j, "config");
    load_uint(obj, "seed", cfg.seed);
    load_uint(obj, "workers", cfg.workers);
    if (const json* v = obj.take("arch")) {
        if (!v->is_string()) bad_config("arch must be a string");
        const auto s = v->get<std::string>();
        if (s == "mlp") cfg.arch = ModelSpec::Arch::mlp;
        else if (s == "cnn") cfg.arch = ModelSpec::Arch::cnn;
        else bad_config("arch must be \"mlp\" or \"cnn\", got \"" + s + "\"");
    }
    if (const json* v = obj.take("dataset")) parse_dataset(*v, cfg.dataset);
    if (const json* v = obj.take("model")) parse_model(*v, cfg);
    if (const json* v = obj.take("train")) parse_train(*v, cfg.train);
    if (const json* v = obj.take("xai")) parse_xai(*v, cfg.xai);
    if (const json* v = obj.take("metrics")) parse_metric(*v, cfg.metric);
    if (const json* v = obj.take("methods")) cfg.methods = parse_methods(*v);
    if (const json* v = obj.take("evaluate_metrics"))
        cfg.metrics = parse_metric_list(*v, "evaluate_metrics");
    if (const json* v = obj.take("property_metrics"))
        cfg.property_metrics = parse_metric_list(*v, "property_metrics");
    obj.finish();

    if (cfg.workers == 0) bad_config("workers must be at least 1");
    for (MetricId id : cfg.effective_property_metrics()) {
        const auto& pool = cfg.effective_metrics();
        if (std::find(pool.begin(), pool.end(), id) == pool.end())
            bad_config("property metric " + metric_id_string(id) +
                       " is not among the evaluated metrics");
    }
    return cfg;
}

std::string config_to_json_text(const PipelineConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["arch"] = cfg.arch == ModelSpec::Arch::mlp ? "mlp" : "cnn";
    j["dataset"] = {
        {"grid_rows", cfg.dataset.grid_rows},
        {"grid_cols", cfg.dataset.grid_cols},
        {"years", cfg.dataset.years},
        {"members", cfg.dataset.members},
        {"classes", cfg.dataset.classes},
        {"trend_amplitude", cfg.dataset.trend_amplitude},
        {"roi",
         {{"row0", cfg.dataset.roi.row0},
          {"col0", cfg.dataset.roi.col0},
          {"rows", cfg.dataset.roi.rows},
          {"cols", cfg.dataset.roi.cols}}},
        {"roi_signal", cfg.dataset.roi_signal},
        {"noise_sigma", cfg.dataset.noise_sigma},
        {"noise_smoothing", cfg.dataset.noise_smoothing},
        {"test_fraction", cfg.dataset.test_fraction},
        {"val_fraction", cfg.dataset.val_fraction},
    };
    j["model"] = {
        {"hidden", cfg.hidden},
        {"conv_channels", cfg.conv_channels},
        {"conv_kernel", cfg.conv_kernel},
        {"conv_stride", cfg.conv_stride},
        {"pool", cfg.pool},
        {"dense_width", cfg.dense_width},
        {"dense_l2", cfg.dense_l2},
    };
    j["train"] = {
        {"learning_rate", cfg.train.learning_rate},
        {"momentum", cfg.train.momentum},
        {"batch_size", cfg.train.batch_size},
        {"max_epochs", cfg.train.max_epochs},
        {"patience", cfg.train.patience},
        {"tolerance_years", cfg.train.tolerance_years},
    };
    j["xai"] = {
        {"sg_samples", cfg.xai.sg_samples},
        {"sg_sigma_scale", cfg.xai.sg_sigma_scale},
        {"ng_samples", cfg.xai.ng_samples},
        {"ng_sigma", cfg.xai.ng_sigma},
        {"fg_model_samples", cfg.xai.fg_model_samples},
        {"fg_input_samples", cfg.xai.fg_input_samples},
        {"fg_sigma_scale", cfg.xai.fg_sigma_scale},
        {"fg_ng_sigma", cfg.xai.fg_ng_sigma},
        {"ig_steps", cfg.xai.ig_steps},
        {"ig_baseline", cfg.xai.ig_baseline},
        {"lrp_alpha", cfg.xai.lrp_alpha},
        {"lrp_beta", cfg.xai.lrp_beta},
        {"lrp_epsilon", cfg.xai.lrp_epsilon},
        {"lrp_gamma", cfg.xai.lrp_gamma},
        {"base_method", method_id(cfg.xai.base_method)},
    };
    j["metrics"] = {
        {"perturb_sigma", cfg.metric.perturb_sigma},
        {"perturb_draws", cfg.metric.perturb_draws},
        {"fc_runs", cfg.metric.fc_runs},
        {"fc_subset", cfg.metric.fc_subset},
        {"fc_uniform_baseline", cfg.metric.fc_uniform_baseline},
        {"fc_baseline_value", cfg.metric.fc_baseline_value},
        {"road_percentages", cfg.metric.road_percentages.empty()
                                 ? MetricConfig::default_road_percentages()
                                 : cfg.metric.road_percentages},
        {"road_noise_sigma", cfg.metric.road_noise_sigma},
        {"road_draws", cfg.metric.road_draws},
        {"road_draw_size", cfg.metric.road_draw_size},
        {"mpt_sigma", cfg.metric.mpt_sigma},
        {"mpt_bottom_up", cfg.metric.mpt_bottom_up},
        {"mpt_similarity", similarity_id(cfg.metric.mpt_similarity)},
        {"rl_similarity", similarity_id(cfg.metric.rl_similarity)},
        {"rl_classes", cfg.metric.rl_classes},
        {"topk_fraction", cfg.metric.topk_fraction},
        {"normalize_explanations", cfg.metric.normalize_maps},
        {"samples", cfg.metric.samples},
    };
    json methods = json::array();
    for (Method m : cfg.effective_methods()) methods.push_back(method_id(m));
    j["methods"] = std::move(methods);
    json metric_list = json::array();
    for (MetricId m : cfg.effective_metrics()) metric_list.push_back(metric_id_string(m));
    j["evaluate_metrics"] = std::move(metric_list);
    json prop_list = json::array();
    for (MetricId m : cfg.effective_property_metrics()) prop_list.push_back(metric_id_string(m));
    j["property_metrics"] = std::move(prop_list);
    return j.dump(2) + "\n";
}

std::string config_hash(const PipelineConfig& cfg) {
    // Worker count only schedules work; it must not change what the run means,
    // so it is pinned before hashing.
    PipelineConfig canonical = cfg;
    canonical.workers = 1;
    const std::string text = config_to_json_text(canonical);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

} // namespace xaibench
