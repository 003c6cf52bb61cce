// Command line front end. Talks to the library exclusively through the C
// interface so it doubles as a smoke test of the shared-library surface.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xaibench.h"

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::string arch;
    std::string methods;
    std::string metrics;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
};

void add_common_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "JSON configuration file");
    cmd->add_option("--out", o.out, "output directory for pipeline artifacts");
    cmd->add_option("--seed", o.seed, "master seed driving every stage");
    cmd->add_option("--workers", o.workers, "parallel workers for heavy stages");
    cmd->add_option("--arch", o.arch, "model architecture: mlp or cnn")
        ->check(CLI::IsMember({"mlp", "cnn"}));
    cmd->add_option("--methods", o.methods, "comma-separated attribution method ids");
    cmd->add_option("--metrics", o.metrics, "comma-separated metric ids to evaluate");
}

std::string escaped(const char* msg) {
    std::string out;
    for (const char* c = msg; *c; ++c) {
        if (*c == '"' || *c == '\\') out += '\\';
        out += *c;
    }
    return out;
}

int fail_stage(xb_pipeline* p, const char* stage, xb_status status) {
    std::fprintf(stderr, "error code=%d stage=%s msg=\"%s\"\n", static_cast<int>(status), stage,
                 escaped(xb_last_error(p)).c_str());
    xb_pipeline_destroy(p);
    return static_cast<int>(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trains small classifiers on synthetic ensemble temperature maps, explains "
                 "their predictions with attribution methods, and benchmarks the explanations "
                 "across robustness, faithfulness, randomization, complexity, and localization."};
    app.set_version_flag("--version", xb_version());
    app.require_subcommand(1);

    Options o;
    struct Stage {
        const char* name;
        const char* help;
        xb_status (*run)(xb_pipeline*);
    };
    const std::vector<Stage> stages = {
        {"generate", "synthesize the ensemble dataset", xb_run_generate},
        {"train", "train the classifier on the generated dataset", xb_run_train},
        {"explain", "compute attribution maps for the test pool", xb_run_explain},
        {"evaluate", "score every method with the configured metrics", xb_run_evaluate},
        {"rank", "derive SEM-aware ranks from the evaluation", xb_run_rank},
        {"report", "emit comparison chart, tables, and summary", xb_run_report},
        {"run-all", "run every stage in order", xb_run_all},
    };
    for (const auto& stage : stages) add_common_flags(app.add_subcommand(stage.name, stage.help), o);

    CLI11_PARSE(app, argc, argv);

    CLI::App* chosen = app.get_subcommands().front();
    const Stage* stage = nullptr;
    for (const auto& s : stages)
        if (chosen->get_name() == s.name) stage = &s;

    xb_pipeline* p = xb_pipeline_new();
    if (!p) {
        std::fprintf(stderr, "error code=%d stage=%s msg=\"allocation failed\"\n",
                     XB_ERR_INTERNAL, stage->name);
        return XB_ERR_INTERNAL;
    }

    if (chosen->count("--config")) {
        const xb_status st = xb_load_config_file(p, o.config.c_str());
        if (st != XB_OK) return fail_stage(p, stage->name, st);
    }
    if (chosen->count("--seed")) {
        const xb_status st = xb_set_seed(p, o.seed);
        if (st != XB_OK) return fail_stage(p, stage->name, st);
    }
    if (chosen->count("--workers")) {
        const xb_status st = xb_set_workers(p, o.workers);
        if (st != XB_OK) return fail_stage(p, stage->name, st);
    }
    if (chosen->count("--arch")) {
        const xb_status st = xb_set_arch(p, o.arch.c_str());
        if (st != XB_OK) return fail_stage(p, stage->name, st);
    }
    if (chosen->count("--methods")) {
        const xb_status st = xb_set_methods(p, o.methods.c_str());
        if (st != XB_OK) return fail_stage(p, stage->name, st);
    }
    if (chosen->count("--metrics")) {
        const xb_status st = xb_set_metrics(p, o.metrics.c_str());
        if (st != XB_OK) return fail_stage(p, stage->name, st);
    }
    {
        const xb_status st = xb_set_out_dir(p, o.out.c_str());
        if (st != XB_OK) return fail_stage(p, stage->name, st);
    }

    const xb_status st = stage->run(p);
    if (st != XB_OK) return fail_stage(p, stage->name, st);
    xb_pipeline_destroy(p);
    return 0;
}
