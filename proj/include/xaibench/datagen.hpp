#pragma once

#include <cstdint>
#include <vector>

#include "xaibench/tensor.hpp"

namespace xaibench {

// Rectangular region of grid cells carrying the class-discriminative signal.
struct RoiRect {
    std::size_t row0 = 0, col0 = 0, rows = 0, cols = 0;

    bool contains(std::size_t r, std::size_t c) const {
        return r >= row0 && r < row0 + rows && c >= col0 && c < col0 + cols;
    }
    std::size_t cell_count() const { return rows * cols; }
};

struct DatasetConfig {
    std::size_t grid_rows = 36, grid_cols = 24;
    std::size_t years = 160;   // simulated span; one sample per member-year
    std::size_t members = 10;  // ensemble members
    std::size_t classes = 20;  // contiguous equal-width year bins

    double trend_amplitude = 1.0; // strength of the grid-wide drift pattern
    RoiRect roi{24, 6, 9, 10};    // region carrying the localized signal
    double roi_signal = 2.5;      // strength of the localized drift
    double noise_sigma = 0.8;     // i.i.d. noise on every cell
    // Optional spatial smoothing of the noise field: number of 4-neighbour
    // averaging sweeps. 0 keeps the noise white.
    std::size_t noise_smoothing = 0;

    double test_fraction = 0.20, val_fraction = 0.16;

    std::uint64_t seed = 0;

    std::size_t sample_count() const { return years * members; }
};

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

struct Dataset {
    DatasetConfig config;

    Tensor inputs; // (N, rows, cols), standardized per cell
    std::vector<std::uint32_t> year;   // 0-based simulation year per sample
    std::vector<std::uint32_t> label;  // class bin per sample
    std::vector<std::uint32_t> member; // ensemble member per sample
    std::vector<Split> split;

    // Representative (fractional) year of each class bin.
    std::vector<double> central_year;

    // Range of the standardized inputs, used as the admissible value box by
    // several explanation and perturbation routines.
    double input_min = 0.0, input_max = 0.0;

    std::size_t samples() const { return year.size(); }
    std::vector<std::size_t> split_indices(Split s) const;
};

// Class bin of a simulation year: bins partition [0, years) into `classes`
// equal-width contiguous ranges.
std::size_t class_of_year(std::size_t year, const DatasetConfig& cfg);
std::vector<double> class_central_years(const DatasetConfig& cfg);

// Raw (unstandardized) field of one member-year, exactly as the generator
// builds it. Exposed so tests can check the construction directly.
Tensor synthetic_field(const DatasetConfig& cfg, std::size_t member, std::size_t year);

Dataset generate_dataset(const DatasetConfig& cfg);

} // namespace xaibench
