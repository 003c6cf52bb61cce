#pragma once

#include <filesystem>
#include <string>

#include "xaibench/benchmark.hpp"
#include "xaibench/config.hpp"

namespace xaibench {

std::string library_version();

// Stage runner over an output directory. Every stage reads its upstream
// artifacts from disk, so stages can run in separate processes; a missing
// upstream artifact is a stage-order error.
class Pipeline {
public:
    Pipeline(PipelineConfig cfg, std::filesystem::path out_dir);

    const PipelineConfig& config() const { return cfg_; }
    const std::filesystem::path& out_dir() const { return out_; }

    std::filesystem::path dataset_bin() const { return out_ / "dataset.bin"; }
    std::filesystem::path dataset_json() const { return out_ / "dataset.json"; }
    std::filesystem::path model_bin() const { return out_ / "model.bin"; }
    std::filesystem::path model_json() const { return out_ / "model.json"; }
    std::filesystem::path explanations_dir() const { return out_ / "explanations"; }
    std::filesystem::path explanations_bin(Method m) const;
    std::filesystem::path explanations_json(Method m) const;
    std::filesystem::path evaluation_json() const { return out_ / "evaluation.json"; }
    std::filesystem::path report_dir() const { return out_ / "report"; }
    std::filesystem::path scores_csv() const { return report_dir() / "scores.csv"; }
    std::filesystem::path ranks_csv() const { return report_dir() / "ranks.csv"; }
    std::filesystem::path property_csv() const { return report_dir() / "property_scores.csv"; }
    std::filesystem::path spyder_svg() const { return report_dir() / "spyder.svg"; }
    std::filesystem::path ranking_txt() const { return report_dir() / "ranking.txt"; }
    std::filesystem::path summary_json() const { return report_dir() / "summary.json"; }

    void generate() const;
    void train_model() const;
    void explain_all() const;
    void evaluate() const;
    void rank() const;
    void report() const;
    void run_all() const;

    // "config=<hash> seed=<n> version=<v>", embedded in artifacts.
    std::string stamp() const;

private:
    void require_artifact(const std::filesystem::path& path, const std::string& missing_stage) const;

    PipelineConfig cfg_;
    std::filesystem::path out_;
    std::string hash_;
};

// Round-trips the full evaluation result through the internal JSON artifact.
std::string serialize_result(const BenchmarkResult& result, const std::string& stamp,
                             const std::string& config_hash);
BenchmarkResult deserialize_result(const std::string& text, const std::string& expected_hash);

} // namespace xaibench
