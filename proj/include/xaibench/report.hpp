#pragma once

#include <filesystem>
#include <string>

#include "xaibench/benchmark.hpp"

namespace xaibench {

// Shortest decimal string that parses back to the same double; keeps every
// emitted file byte-stable across runs.
std::string format_double(double v);

// `stamp` identifies the producing run (config hash + seed + version); it is
// embedded as a leading comment so every artifact is traceable.
void write_scores_csv(const std::filesystem::path& path, const BenchmarkResult& result,
                      const std::string& stamp);
void write_ranks_csv(const std::filesystem::path& path, const BenchmarkResult& result,
                     const std::string& stamp);

// Per-property comparison: one row per (method, property), using the
// configured property -> metric selection.
void write_property_csv(const std::filesystem::path& path, const BenchmarkResult& result,
                        const std::vector<MetricId>& property_metrics, const std::string& stamp);

// Radar chart of normalized means over the selected properties, one polygon
// per method, radial axis 0 at the center to 1 at the rim.
void write_spyder_svg(const std::filesystem::path& path, const BenchmarkResult& result,
                      const std::vector<MetricId>& property_metrics, const std::string& stamp);

// Plain-text ranking table: metrics as columns, methods as rows, dense ranks.
std::string ranking_table(const BenchmarkResult& result);

void write_summary_json(const std::filesystem::path& path, const BenchmarkResult& result,
                        std::uint64_t master_seed, const std::string& config_hash,
                        const std::string& version);

} // namespace xaibench
