#include "xaibench/datagen.hpp"

#include <cmath>

#include "xaibench/error.hpp"
#include "xaibench/rng.hpp"

namespace xaibench {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

void validate(const DatasetConfig& cfg) {
    if (cfg.grid_rows == 0 || cfg.grid_cols == 0) {
        fail(ErrorCode::config, "dataset grid must be non-empty");
    }
    if (cfg.classes < 2 || cfg.members == 0 || cfg.years == 0 || cfg.years % cfg.classes != 0) {
        fail(ErrorCode::config,
             "dataset needs members >= 1 and years a positive multiple of classes >= 2");
    }
    if (cfg.roi.rows == 0 || cfg.roi.cols == 0 ||
        cfg.roi.row0 + cfg.roi.rows > cfg.grid_rows ||
        cfg.roi.col0 + cfg.roi.cols > cfg.grid_cols) {
        fail(ErrorCode::config, "roi rectangle does not fit the grid");
    }
    if (cfg.test_fraction < 0.0 || cfg.val_fraction < 0.0 ||
        cfg.test_fraction + cfg.val_fraction >= 1.0) {
        fail(ErrorCode::config, "split fractions must be >= 0 and sum below 1");
    }
    if (cfg.noise_sigma <= 0.0 || cfg.trend_amplitude < 0.0 || cfg.roi_signal < 0.0) {
        fail(ErrorCode::config, "dataset needs noise_sigma > 0 and amplitudes >= 0");
    }
}

// Grid-wide drift pattern: sum of two seeded cosine plane waves, scaled so
// the largest magnitude over the grid is 1.
Tensor drift_pattern(const DatasetConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, "drift-pattern"));
    double fr1 = rng.uniform(0.5, 2.0), fc1 = rng.uniform(0.5, 2.0), p1 = rng.uniform(0.0, kTau);
    double fr2 = rng.uniform(0.5, 2.0), fc2 = rng.uniform(0.5, 2.0), p2 = rng.uniform(0.0, kTau);
    Tensor pat({cfg.grid_rows, cfg.grid_cols});
    double peak = 0.0;
    for (std::size_t r = 0; r < cfg.grid_rows; ++r) {
        for (std::size_t c = 0; c < cfg.grid_cols; ++c) {
            double u = static_cast<double>(r) / static_cast<double>(cfg.grid_rows);
            double v = static_cast<double>(c) / static_cast<double>(cfg.grid_cols);
            double val = std::cos(kTau * (fr1 * u + fc1 * v) + p1) +
                         std::cos(kTau * (fr2 * u + fc2 * v) + p2);
            pat.at({r, c}) = val;
            peak = std::max(peak, std::fabs(val));
        }
    }
    if (peak > 0.0) {
        for (std::size_t i = 0; i < pat.size(); ++i) pat[i] /= peak;
    }
    return pat;
}

// One 4-neighbour averaging sweep with edge clamping.
void smooth_once(Tensor& field, std::size_t rows, std::size_t cols) {
    Tensor src = field;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double sum = src.at({r, c});
            double cnt = 1.0;
            if (r > 0) { sum += src.at({r - 1, c}); cnt += 1.0; }
            if (r + 1 < rows) { sum += src.at({r + 1, c}); cnt += 1.0; }
            if (c > 0) { sum += src.at({r, c - 1}); cnt += 1.0; }
            if (c + 1 < cols) { sum += src.at({r, c + 1}); cnt += 1.0; }
            field.at({r, c}) = sum / cnt;
        }
    }
}

Tensor field_for(const DatasetConfig& cfg, const Tensor& pattern, std::size_t member,
                 std::size_t year) {
    double progress = static_cast<double>(year) / static_cast<double>(cfg.years - 1);
    Tensor noise({cfg.grid_rows, cfg.grid_cols});
    if (cfg.noise_sigma > 0.0) {
        Rng rng(derive_seed(cfg.seed, "noise", member, year));
        rng.fill_normal(noise.data(), noise.size(), 0.0, cfg.noise_sigma);
        for (std::size_t s = 0; s < cfg.noise_smoothing; ++s) {
            smooth_once(noise, cfg.grid_rows, cfg.grid_cols);
        }
    }
    Tensor out({cfg.grid_rows, cfg.grid_cols});
    for (std::size_t r = 0; r < cfg.grid_rows; ++r) {
        for (std::size_t c = 0; c < cfg.grid_cols; ++c) {
            double v = cfg.trend_amplitude * progress * pattern.at({r, c});
            if (cfg.roi.contains(r, c)) v += cfg.roi_signal * progress;
            out.at({r, c}) = v + noise.at({r, c});
        }
    }
    return out;
}

} // namespace

std::size_t class_of_year(std::size_t year, const DatasetConfig& cfg) {
    if (year >= cfg.years) {
        fail(ErrorCode::invalid_argument, "year " + std::to_string(year) + " outside span");
    }
    return year / (cfg.years / cfg.classes);
}

std::vector<double> class_central_years(const DatasetConfig& cfg) {
    double width = static_cast<double>(cfg.years) / static_cast<double>(cfg.classes);
    std::vector<double> centers(cfg.classes);
    for (std::size_t k = 0; k < cfg.classes; ++k) {
        centers[k] = (static_cast<double>(k) + 0.5) * width - 0.5;
    }
    return centers;
}

Tensor synthetic_field(const DatasetConfig& cfg, std::size_t member, std::size_t year) {
    validate(cfg);
    if (member >= cfg.members || year >= cfg.years) {
        fail(ErrorCode::invalid_argument, "member/year outside dataset config");
    }
    return field_for(cfg, drift_pattern(cfg), member, year);
}

std::vector<std::size_t> Dataset::split_indices(Split s) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == s) idx.push_back(i);
    }
    return idx;
}

Dataset generate_dataset(const DatasetConfig& cfg) {
    validate(cfg);
    Dataset ds;
    ds.config = cfg;
    std::size_t n = cfg.sample_count();
    std::size_t cells = cfg.grid_rows * cfg.grid_cols;
    ds.inputs = Tensor({n, cfg.grid_rows, cfg.grid_cols});
    ds.year.resize(n);
    ds.label.resize(n);
    ds.member.resize(n);
    ds.central_year = class_central_years(cfg);

    Tensor pattern = drift_pattern(cfg);
    std::size_t i = 0;
    for (std::size_t m = 0; m < cfg.members; ++m) {
        for (std::size_t y = 0; y < cfg.years; ++y, ++i) {
            ds.inputs.set_row(i, field_for(cfg, pattern, m, y));
            ds.year[i] = static_cast<std::uint32_t>(y);
            ds.label[i] = static_cast<std::uint32_t>(class_of_year(y, cfg));
            ds.member[i] = static_cast<std::uint32_t>(m);
        }
    }

    // Standardize each grid cell over the whole sample set. Cells with
    // (near-)constant values map to zero rather than blowing up.
    double* data = ds.inputs.data();
    for (std::size_t c = 0; c < cells; ++c) {
        double mean = 0.0;
        for (std::size_t s = 0; s < n; ++s) mean += data[s * cells + c];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            double d = data[s * cells + c] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        double denom = std::max(std::sqrt(var), 1e-12);
        for (std::size_t s = 0; s < n; ++s) {
            data[s * cells + c] = (data[s * cells + c] - mean) / denom;
        }
    }
    ds.input_min = ds.inputs.min();
    ds.input_max = ds.inputs.max();

    // Fixed-quota random split.
    auto quota = [n](double f) {
        return static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
    };
    std::size_t n_test = quota(cfg.test_fraction);
    std::size_t n_val = quota(cfg.val_fraction);
    std::vector<std::size_t> order(n);
    for (std::size_t s = 0; s < n; ++s) order[s] = s;
    Rng rng(derive_seed(cfg.seed, "split"));
    rng.shuffle(order);
    ds.split.assign(n, Split::train);
    for (std::size_t s = 0; s < n_test; ++s) ds.split[order[s]] = Split::test;
    for (std::size_t s = n_test; s < n_test + n_val; ++s) ds.split[order[s]] = Split::val;
    return ds;
}

} // namespace xaibench
