#include "xaibench/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "xaibench/error.hpp"
#include "xaibench/rng.hpp"

namespace xaibench {

namespace {

// Mean cross-entropy of the true classes under the row-wise softmax of
// `logits`, computed through log-sum-exp.
double cross_entropy(const Tensor& logits, const std::vector<std::uint32_t>& labels,
                     const std::vector<std::size_t>& idx) {
    std::size_t n = idx.size();
    std::size_t c = logits.dim(1);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = logits.data() + r * c;
        double m = row[0];
        for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - m);
        total += m + std::log(sum) - row[labels[idx[r]]];
    }
    return total / static_cast<double>(n);
}

struct Snapshot {
    std::vector<Tensor> weight, bias;
};

Snapshot take_snapshot(const Network& net) {
    Snapshot s;
    for (const Layer& l : net.layers()) {
        if (l.has_params()) {
            s.weight.push_back(l.weight);
            s.bias.push_back(l.bias);
        }
    }
    return s;
}

void restore_snapshot(Network& net, const Snapshot& s) {
    std::size_t k = 0;
    for (Layer& l : net.layers()) {
        if (l.has_params()) {
            l.weight = s.weight[k];
            l.bias = s.bias[k];
            ++k;
        }
    }
}

} // namespace

Tensor gather_inputs(const Dataset& ds, const std::vector<std::size_t>& indices) {
    std::size_t rows = ds.config.grid_rows, cols = ds.config.grid_cols;
    std::size_t cells = rows * cols;
    Tensor out({indices.size(), rows, cols});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::memcpy(out.data() + i * cells, ds.inputs.data() + indices[i] * cells,
                    cells * sizeof(double));
    }
    return out;
}

double predict_year(const Tensor& probs, const std::vector<double>& central_years) {
    if (probs.size() != central_years.size()) {
        fail(ErrorCode::shape, "probability vector length " + std::to_string(probs.size()) +
                                   " vs " + std::to_string(central_years.size()) + " classes");
    }
    double y = 0.0;
    for (std::size_t i = 0; i < central_years.size(); ++i) y += probs[i] * central_years[i];
    return y;
}

TrainResult train(const ModelSpec& spec, const Dataset& ds, const TrainConfig& cfg) {
    TrainResult result;
    result.net = Network::build(spec);
    result.net.init_params(derive_seed(cfg.seed, "init"));
    Network& net = result.net;

    std::vector<std::size_t> train_idx = ds.split_indices(Split::train);
    std::vector<std::size_t> val_idx = ds.split_indices(Split::val);
    if (train_idx.empty() || val_idx.empty()) {
        fail(ErrorCode::invalid_argument, "dataset is missing train or val samples");
    }

    std::size_t classes = spec.classes;
    ParamGrads velocity = net.zero_grads();
    Snapshot best = take_snapshot(net);
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;

    auto validate = [&]() {
        Tensor logits = net.forward_logits(gather_inputs(ds, val_idx));
        double loss = cross_entropy(logits, ds.label, val_idx);
        std::size_t hits = 0;
        for (std::size_t r = 0; r < val_idx.size(); ++r) {
            const double* row = logits.data() + r * classes;
            std::size_t arg = 0;
            for (std::size_t j = 1; j < classes; ++j) {
                if (row[j] > row[arg]) arg = j;
            }
            if (arg == ds.label[val_idx[r]]) ++hits;
        }
        return std::pair<double, double>(loss,
                                         static_cast<double>(hits) /
                                             static_cast<double>(val_idx.size()));
    };

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, "epoch", epoch));
        shuffle_rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(start + cfg.batch_size, train_idx.size());
            std::vector<std::size_t> batch_idx(train_idx.begin() + start,
                                               train_idx.begin() + stop);
            std::size_t bsz = batch_idx.size();

            Tensor batch = gather_inputs(ds, batch_idx);
            Tensor prepared = net.prepare_input(batch);
            Network::Cache cache = net.forward_cached(prepared);
            const Tensor& logits = cache.acts[net.logits_layer()];
            const Tensor& probs = cache.acts.back();

            double loss = 0.0;
            Tensor dlogits({bsz, classes});
            for (std::size_t r = 0; r < bsz; ++r) {
                std::uint32_t label = ds.label[batch_idx[r]];
                const double* lrow = logits.data() + r * classes;
                double m = lrow[0];
                for (std::size_t j = 1; j < classes; ++j) m = std::max(m, lrow[j]);
                double sum = 0.0;
                for (std::size_t j = 0; j < classes; ++j) sum += std::exp(lrow[j] - m);
                loss += m + std::log(sum) - lrow[label];
                const double* prow = probs.data() + r * classes;
                double* drow = dlogits.data() + r * classes;
                for (std::size_t j = 0; j < classes; ++j) {
                    drow[j] = (prow[j] - (j == label ? 1.0 : 0.0)) / static_cast<double>(bsz);
                }
            }
            loss /= static_cast<double>(bsz);
            if (!std::isfinite(loss)) {
                fail(ErrorCode::training,
                     "training loss diverged at epoch " + std::to_string(epoch));
            }
            epoch_loss += loss;
            ++batches;

            ParamGrads grads = net.zero_grads();
            net.backward_from_logits(cache, dlogits, &grads);

            for (std::size_t li = 0; li < net.layers().size(); ++li) {
                Layer& l = net.layers()[li];
                if (!l.has_params()) continue;
                double* w = l.weight.data();
                double* gw = grads.weight[li].data();
                double* vw = velocity.weight[li].data();
                double l2 = l.l2;
                for (std::size_t i = 0; i < l.weight.size(); ++i) {
                    double g = gw[i] + 2.0 * l2 * w[i];
                    vw[i] = cfg.momentum * vw[i] - cfg.learning_rate * g;
                    w[i] += vw[i];
                }
                double* b = l.bias.data();
                double* gb = grads.bias[li].data();
                double* vb = velocity.bias[li].data();
                for (std::size_t i = 0; i < l.bias.size(); ++i) {
                    vb[i] = cfg.momentum * vb[i] - cfg.learning_rate * gb[i];
                    b[i] += vb[i];
                }
            }
        }

        auto [val_loss, val_acc] = validate();
        result.log.push_back({epoch, epoch_loss / static_cast<double>(batches), val_loss,
                              val_acc});
        if (val_loss < best_val - 1e-12) {
            best_val = val_loss;
            best = take_snapshot(net);
            result.best_epoch = epoch;
            stall = 0;
        } else if (++stall > cfg.patience) {
            break;
        }
    }
    if (cfg.max_epochs > 0) restore_snapshot(net, best);
    return result;
}

Performance evaluate_performance(const Network& net, const Dataset& ds, Split split,
                                 double tolerance_years) {
    std::vector<std::size_t> idx = ds.split_indices(split);
    Performance perf;
    perf.count = idx.size();
    if (idx.empty()) return perf;
    std::size_t classes = net.spec().classes;
    std::size_t hits = 0, fuzzy_hits = 0;
    double sq_err = 0.0;
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < idx.size(); start += chunk) {
        std::size_t stop = std::min(start + chunk, idx.size());
        std::vector<std::size_t> part(idx.begin() + start, idx.begin() + stop);
        Tensor probs = net.forward_probs(gather_inputs(ds, part));
        for (std::size_t r = 0; r < part.size(); ++r) {
            const double* row = probs.data() + r * classes;
            std::size_t arg = 0;
            double year_hat = 0.0;
            for (std::size_t j = 0; j < classes; ++j) {
                if (row[j] > row[arg]) arg = j;
                year_hat += row[j] * ds.central_year[j];
            }
            if (arg == ds.label[part[r]]) ++hits;
            double err = year_hat - static_cast<double>(ds.year[part[r]]);
            if (std::fabs(err) <= tolerance_years) ++fuzzy_hits;
            sq_err += err * err;
        }
    }
    perf.accuracy = static_cast<double>(hits) / static_cast<double>(idx.size());
    perf.fuzzy_accuracy = static_cast<double>(fuzzy_hits) / static_cast<double>(idx.size());
    perf.rmse_years = std::sqrt(sq_err / static_cast<double>(idx.size()));
    return perf;
}

std::vector<std::size_t> correct_prediction_indices(const Network& net, const Dataset& ds,
                                                    Split split, double tolerance_years) {
    std::vector<std::size_t> idx = ds.split_indices(split);
    std::vector<std::size_t> keep;
    std::size_t classes = net.spec().classes;
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < idx.size(); start += chunk) {
        std::size_t stop = std::min(start + chunk, idx.size());
        std::vector<std::size_t> part(idx.begin() + start, idx.begin() + stop);
        Tensor probs = net.forward_probs(gather_inputs(ds, part));
        for (std::size_t r = 0; r < part.size(); ++r) {
            const double* row = probs.data() + r * classes;
            double year_hat = 0.0;
            for (std::size_t j = 0; j < classes; ++j) year_hat += row[j] * ds.central_year[j];
            if (std::fabs(year_hat - static_cast<double>(ds.year[part[r]])) <= tolerance_years) {
                keep.push_back(part[r]);
            }
        }
    }
    return keep;
}

} // namespace xaibench
