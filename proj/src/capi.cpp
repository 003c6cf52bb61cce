#include "xaibench.h"

#include <cstring>
#include <new>
#include <string>

#include "xaibench/config.hpp"
#include "xaibench/error.hpp"
#include "xaibench/io.hpp"
#include "xaibench/pipeline.hpp"

struct xb_pipeline {
    xaibench::PipelineConfig cfg;
    std::filesystem::path out = "out";
    std::string last_error;
};

namespace {

static_assert(static_cast<int>(xaibench::ErrorCode::ok) == XB_OK);
static_assert(static_cast<int>(xaibench::ErrorCode::invalid_argument) == XB_ERR_INVALID_ARGUMENT);
static_assert(static_cast<int>(xaibench::ErrorCode::config) == XB_ERR_CONFIG);
static_assert(static_cast<int>(xaibench::ErrorCode::io) == XB_ERR_IO);
static_assert(static_cast<int>(xaibench::ErrorCode::format) == XB_ERR_FORMAT);
static_assert(static_cast<int>(xaibench::ErrorCode::stage_order) == XB_ERR_STAGE_ORDER);
static_assert(static_cast<int>(xaibench::ErrorCode::shape) == XB_ERR_SHAPE);
static_assert(static_cast<int>(xaibench::ErrorCode::unsupported) == XB_ERR_UNSUPPORTED);
static_assert(static_cast<int>(xaibench::ErrorCode::training) == XB_ERR_TRAINING);
static_assert(static_cast<int>(xaibench::ErrorCode::sample_shortfall) == XB_ERR_SAMPLE_SHORTFALL);
static_assert(static_cast<int>(xaibench::ErrorCode::numeric) == XB_ERR_NUMERIC);
static_assert(static_cast<int>(xaibench::ErrorCode::internal) == XB_ERR_INTERNAL);

template <typename Fn>
xb_status guarded(xb_pipeline* p, Fn&& fn) {
    if (!p) return XB_ERR_INVALID_ARGUMENT;
    try {
        fn();
        p->last_error.clear();
        return XB_OK;
    } catch (const xaibench::Error& e) {
        p->last_error = e.what();
        return static_cast<xb_status>(static_cast<int>(e.code()));
    } catch (const std::exception& e) {
        p->last_error = e.what();
        return XB_ERR_INTERNAL;
    } catch (...) {
        p->last_error = "unknown error";
        return XB_ERR_INTERNAL;
    }
}

std::vector<std::string> split_list(const char* comma_list) {
    std::vector<std::string> out;
    if (!comma_list) return out;
    std::string item;
    for (const char* c = comma_list;; ++c) {
        if (*c == ',' || *c == '\0') {
            while (!item.empty() && item.front() == ' ') item.erase(item.begin());
            while (!item.empty() && item.back() == ' ') item.pop_back();
            if (!item.empty()) out.push_back(item);
            item.clear();
            if (*c == '\0') break;
        } else {
            item += *c;
        }
    }
    return out;
}

char* dup_string(const std::string& s) {
    char* out = new (std::nothrow) char[s.size() + 1];
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

xb_status string_out(const xb_pipeline* p, char** out, const std::string& value) {
    return guarded(const_cast<xb_pipeline*>(p), [&]() {
        if (!out) xaibench::fail(xaibench::ErrorCode::invalid_argument, "null output pointer");
        *out = dup_string(value);
        if (!*out) xaibench::fail(xaibench::ErrorCode::internal, "allocation failed");
    });
}

xb_status run_stage(xb_pipeline* p, void (xaibench::Pipeline::*stage)() const) {
    return guarded(p, [&]() {
        xaibench::Pipeline pipeline(p->cfg, p->out);
        (pipeline.*stage)();
    });
}

} // namespace

extern "C" {

const char* xb_version(void) {
    static const std::string version = xaibench::library_version();
    return version.c_str();
}

xb_pipeline* xb_pipeline_new(void) { return new (std::nothrow) xb_pipeline(); }

void xb_pipeline_destroy(xb_pipeline* p) { delete p; }

const char* xb_last_error(const xb_pipeline* p) {
    if (!p) return "null pipeline handle";
    return p->last_error.c_str();
}

xb_status xb_load_config(xb_pipeline* p, const char* json_text) {
    return guarded(p, [&]() {
        if (!json_text)
            xaibench::fail(xaibench::ErrorCode::invalid_argument, "null config text");
        p->cfg = xaibench::config_from_json_text(json_text);
    });
}

xb_status xb_load_config_file(xb_pipeline* p, const char* path) {
    return guarded(p, [&]() {
        if (!path) xaibench::fail(xaibench::ErrorCode::invalid_argument, "null config path");
        p->cfg = xaibench::config_from_json_text(xaibench::io::read_bytes(path));
    });
}

xb_status xb_set_out_dir(xb_pipeline* p, const char* path) {
    return guarded(p, [&]() {
        if (!path || !*path)
            xaibench::fail(xaibench::ErrorCode::invalid_argument, "empty output directory");
        p->out = path;
    });
}

xb_status xb_set_seed(xb_pipeline* p, uint64_t seed) {
    return guarded(p, [&]() { p->cfg.seed = seed; });
}

xb_status xb_set_workers(xb_pipeline* p, size_t workers) {
    return guarded(p, [&]() {
        if (workers == 0)
            xaibench::fail(xaibench::ErrorCode::invalid_argument, "workers must be at least 1");
        p->cfg.workers = workers;
    });
}

xb_status xb_set_arch(xb_pipeline* p, const char* arch) {
    return guarded(p, [&]() {
        const std::string a = arch ? arch : "";
        if (a == "mlp") p->cfg.arch = xaibench::ModelSpec::Arch::mlp;
        else if (a == "cnn") p->cfg.arch = xaibench::ModelSpec::Arch::cnn;
        else
            xaibench::fail(xaibench::ErrorCode::invalid_argument,
                           "arch must be \"mlp\" or \"cnn\"");
    });
}

xb_status xb_set_methods(xb_pipeline* p, const char* comma_list) {
    return guarded(p, [&]() {
        std::vector<xaibench::Method> methods;
        for (const auto& id : split_list(comma_list)) {
            auto m = xaibench::method_from_id(id);
            if (!m)
                xaibench::fail(xaibench::ErrorCode::invalid_argument,
                               "unknown method \"" + id + "\"");
            methods.push_back(*m);
        }
        if (methods.empty())
            xaibench::fail(xaibench::ErrorCode::invalid_argument, "empty method list");
        p->cfg.methods = std::move(methods);
    });
}

xb_status xb_set_metrics(xb_pipeline* p, const char* comma_list) {
    return guarded(p, [&]() {
        std::vector<xaibench::MetricId> metrics;
        for (const auto& id : split_list(comma_list)) {
            auto m = xaibench::metric_from_id(id);
            if (!m)
                xaibench::fail(xaibench::ErrorCode::invalid_argument,
                               "unknown metric \"" + id + "\"");
            metrics.push_back(*m);
        }
        if (metrics.empty())
            xaibench::fail(xaibench::ErrorCode::invalid_argument, "empty metric list");
        p->cfg.metrics = std::move(metrics);
    });
}

xb_status xb_run_generate(xb_pipeline* p) { return run_stage(p, &xaibench::Pipeline::generate); }
xb_status xb_run_train(xb_pipeline* p) { return run_stage(p, &xaibench::Pipeline::train_model); }
xb_status xb_run_explain(xb_pipeline* p) { return run_stage(p, &xaibench::Pipeline::explain_all); }
xb_status xb_run_evaluate(xb_pipeline* p) { return run_stage(p, &xaibench::Pipeline::evaluate); }
xb_status xb_run_rank(xb_pipeline* p) { return run_stage(p, &xaibench::Pipeline::rank); }
xb_status xb_run_report(xb_pipeline* p) { return run_stage(p, &xaibench::Pipeline::report); }
xb_status xb_run_all(xb_pipeline* p) { return run_stage(p, &xaibench::Pipeline::run_all); }

xb_status xb_config_json(const xb_pipeline* p, char** out) {
    if (!p) return XB_ERR_INVALID_ARGUMENT;
    return string_out(p, out, xaibench::config_to_json_text(p->cfg));
}

xb_status xb_config_hash(const xb_pipeline* p, char** out) {
    if (!p) return XB_ERR_INVALID_ARGUMENT;
    return string_out(p, out, xaibench::config_hash(p->cfg));
}

void xb_string_free(char* s) { delete[] s; }

} // extern "C"
