#pragma once

#include <cstdint>
#include <vector>

#include "xaibench/datagen.hpp"
#include "xaibench/explain.hpp"
#include "xaibench/io.hpp"
#include "xaibench/metrics.hpp"
#include "xaibench/network.hpp"

namespace xaibench {

struct BenchmarkConfig {
    std::vector<Method> methods;   // ranked methods; the random baseline is implicit
    std::vector<MetricId> metrics; // metrics to evaluate
    // Metric per property used for the final comparison chart: LLE, FC, MPT,
    // Sparseness, RRA unless overridden.
    std::vector<MetricId> property_metrics = {
        MetricId::local_lipschitz, MetricId::faithfulness_correlation,
        MetricId::model_parameter_test, MetricId::sparseness,
        MetricId::relevance_rank_accuracy};
    MetricConfig metric;
    XaiConfig xai;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
};

struct MethodScore {
    Method method = Method::gradient;
    std::vector<double> raw;        // one entry per evaluated sample (per draw for ROAD)
    std::vector<double> normalized; // raw after the cross-method normalization
    MeanSem stats;
    std::size_t rank = 0; // dense rank among ranked methods; 0 on the baseline
    bool degenerate = false;
};

struct MetricReport {
    MetricId metric = MetricId::avg_sensitivity;
    Property property = Property::robustness;
    std::vector<std::uint32_t> sample_ids; // dataset rows scored, in slot order
    std::vector<std::vector<std::uint32_t>> draw_sample_ids; // per draw (ROAD only)
    std::vector<MethodScore> methods;
    MethodScore baseline;
    bool baseline_passed = false;
};

struct BenchmarkResult {
    std::vector<MetricReport> reports;
};

// Dense ranks (1 = best) aligned with the input order. Methods sort by mean
// and adjacent entries chain into one rank while their means differ by at
// most max(sem_i, sem_j).
std::vector<std::size_t> rank_methods(const std::vector<MeanSem>& stats,
                                      bool higher_is_better = true);

// Strictly lowest mean, and separated from the closest method by more than
// the tie tolerance.
bool baseline_separated(const MeanSem& baseline, const std::vector<MeanSem>& methods);

// Runs every configured metric over every configured method plus the random
// baseline on the precomputed explanation batches. `batches` must hold one
// entry per configured method and one for the baseline, all over the same
// sample pool.
BenchmarkResult run_benchmark(const Network& net, const Dataset& ds,
                              const std::vector<io::ExplanationBatch>& batches,
                              const BenchmarkConfig& cfg);

} // namespace xaibench
