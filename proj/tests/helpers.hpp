#pragma once

#include <utility>

#include "xaibench/datagen.hpp"
#include "xaibench/error.hpp"
#include "xaibench/network.hpp"
#include "xaibench/rng.hpp"
#include "xaibench/train.hpp"

namespace testutil {

// Runs f and reports which error code it threw; ok means "did not throw".
template <typename F>
xaibench::ErrorCode thrown_code(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const xaibench::Error& e) {
        return e.code();
    }
    return xaibench::ErrorCode::ok;
}

// Dataset small enough to regenerate in every test binary, but with enough
// signal that a few epochs already beat chance clearly.
inline xaibench::DatasetConfig small_data_config(std::uint64_t seed = 11) {
    xaibench::DatasetConfig cfg;
    cfg.grid_rows = 12;
    cfg.grid_cols = 10;
    cfg.years = 60;
    cfg.members = 10;
    cfg.classes = 10;
    cfg.trend_amplitude = 1.0;
    cfg.roi = {6, 2, 4, 5};
    cfg.roi_signal = 2.5;
    cfg.noise_sigma = 0.5;
    cfg.test_fraction = 0.20;
    cfg.val_fraction = 0.16;
    cfg.seed = seed;
    return cfg;
}

struct TrainedFixture {
    xaibench::Dataset ds;
    xaibench::Network net;
};

inline TrainedFixture train_small(xaibench::ModelSpec::Arch arch, std::size_t epochs = 40,
                                  std::uint64_t seed = 11) {
    using namespace xaibench;
    TrainedFixture fx;
    fx.ds = generate_dataset(small_data_config(seed));
    ModelSpec spec = arch == ModelSpec::Arch::mlp
                         ? ModelSpec::mlp_default(12, 10, 10)
                         : ModelSpec::cnn_default(12, 10, 10);
    if (arch == ModelSpec::Arch::mlp) spec.hidden = {32, 32};
    else {
        spec.conv_kernel = 4;
        spec.conv_stride = 2;
        spec.conv_channels = 8;
    }
    TrainConfig tc;
    tc.max_epochs = epochs;
    tc.learning_rate = 0.01;
    tc.seed = derive_seed(seed, "train");
    fx.net = train(spec, fx.ds, tc).net;
    return fx;
}

} // namespace testutil
