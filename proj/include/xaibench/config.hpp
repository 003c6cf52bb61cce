#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xaibench/benchmark.hpp"
#include "xaibench/datagen.hpp"
#include "xaibench/explain.hpp"
#include "xaibench/metrics.hpp"
#include "xaibench/network.hpp"
#include "xaibench/train.hpp"

namespace xaibench {

// Everything the pipeline needs, in one serializable bundle. The master seed
// drives every stage (data generation, parameter init, batching, explanation
// draws, metric draws) through labeled child seeds.
struct PipelineConfig {
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    ModelSpec::Arch arch = ModelSpec::Arch::mlp;

    DatasetConfig dataset;
    // Architecture knobs; rows/cols/classes always follow the dataset.
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t conv_channels = 16, conv_kernel = 6, conv_stride = 2, pool = 2;
    std::size_t dense_width = 0;
    double dense_l2 = 1e-4;

    TrainConfig train;
    XaiConfig xai;
    MetricConfig metric;

    std::vector<Method> methods;               // empty = architecture default
    std::vector<MetricId> metrics;             // empty = all ten
    std::vector<MetricId> property_metrics;    // empty = chart default

    ModelSpec model_spec() const;
    std::vector<Method> effective_methods() const;
    std::vector<MetricId> effective_metrics() const;
    std::vector<MetricId> effective_property_metrics() const;
};

// Strict parse: unknown keys anywhere are a config error, and every value
// must have the right type. Missing keys keep their defaults.
PipelineConfig config_from_json_text(const std::string& text);

// Canonical serialization of the effective config (defaults filled in);
// parsing it back yields an identical config.
std::string config_to_json_text(const PipelineConfig& cfg);

// FNV-1a fingerprint of the canonical serialization, as fixed-width hex.
std::string config_hash(const PipelineConfig& cfg);

} // namespace xaibench
