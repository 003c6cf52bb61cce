#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xaibench/datagen.hpp"
#include "xaibench/explain.hpp"
#include "xaibench/network.hpp"
#include "xaibench/tensor.hpp"

namespace xaibench::io {

// Writes to a temp file in the target directory and renames over the
// destination, so readers never observe a partial file.
void atomic_write_bytes(const std::filesystem::path& path, const std::string& bytes);
void atomic_write_text(const std::filesystem::path& path, const std::string& text);
std::string read_bytes(const std::filesystem::path& path);

// --- Dataset ------------------------------------------------------------

void save_dataset(const std::filesystem::path& bin_path, const std::filesystem::path& json_path,
                  const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& bin_path,
                     const std::filesystem::path& json_path);

// --- Model checkpoint ----------------------------------------------------

struct ModelMeta {
    std::uint64_t train_seed = 0;
    std::uint64_t data_seed = 0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double test_fuzzy_accuracy = 0.0;
    double test_rmse_years = 0.0;
};

void save_model(const std::filesystem::path& bin_path, const std::filesystem::path& json_path,
                const Network& net, const ModelMeta& meta);

struct LoadedModel {
    Network net;
    ModelMeta meta;
};
LoadedModel load_model(const std::filesystem::path& bin_path,
                       const std::filesystem::path& json_path);

// --- Explanation batches ---------------------------------------------------

// Precomputed relevance maps of one method over a pool of dataset samples.
struct ExplanationBatch {
    Method method = Method::gradient;
    std::uint64_t seed = 0; // stochastic-draw seed recorded for reproducibility
    bool normalized = false;
    std::vector<std::uint32_t> sample_ids;   // indices into the dataset
    std::vector<std::uint32_t> target_class; // explained class per sample
    Tensor maps;                             // (N, rows, cols)
};

void save_explanations(const std::filesystem::path& bin_path,
                       const std::filesystem::path& json_path, const ExplanationBatch& batch,
                       const XaiConfig& cfg);
ExplanationBatch load_explanations(const std::filesystem::path& bin_path,
                                   const std::filesystem::path& json_path,
                                   XaiConfig* cfg_out = nullptr);

} // namespace xaibench::io
