#pragma once

#include <cstdint>
#include <vector>

#include "xaibench/datagen.hpp"
#include "xaibench/network.hpp"

namespace xaibench {

struct TrainConfig {
    double learning_rate = 0.001;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 60;
    std::size_t patience = 8;            // epochs without val-loss improvement
    double tolerance_years = 2.0;        // regression error treated as correct
    std::uint64_t seed = 0;
};

struct EpochStats {
    std::size_t epoch;
    double train_loss;
    double val_loss;
    double val_accuracy;
};

struct TrainResult {
    Network net;
    std::vector<EpochStats> log;
    std::size_t best_epoch = 0;
};

struct Performance {
    double accuracy = 0.0;       // argmax class == label
    double fuzzy_accuracy = 0.0; // |predicted year - true year| <= tolerance
    double rmse_years = 0.0;
    std::size_t count = 0;
};

TrainResult train(const ModelSpec& spec, const Dataset& ds, const TrainConfig& cfg);

// Probability-weighted regression over the class-representative years.
double predict_year(const Tensor& probs, const std::vector<double>& central_years);

Performance evaluate_performance(const Network& net, const Dataset& ds, Split split,
                                 double tolerance_years = 2.0);

// Sample indices of `split` whose regressed year lands within the tolerance.
std::vector<std::size_t> correct_prediction_indices(const Network& net, const Dataset& ds,
                                                    Split split, double tolerance_years);

// Batch of dataset rows gathered into one (n, rows, cols) tensor.
Tensor gather_inputs(const Dataset& ds, const std::vector<std::size_t>& indices);

} // namespace xaibench
