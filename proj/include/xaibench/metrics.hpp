#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xaibench/network.hpp"
#include "xaibench/rng.hpp"
#include "xaibench/tensor.hpp"

namespace xaibench {

enum class Property { robustness, faithfulness, randomization, complexity, localization };

enum class MetricId : std::uint32_t {
    avg_sensitivity = 0,
    local_lipschitz = 1,
    road = 2,
    faithfulness_correlation = 3,
    model_parameter_test = 4,
    random_logit = 5,
    complexity = 6,
    sparseness = 7,
    top_k = 8,
    relevance_rank_accuracy = 9,
};

std::string metric_id_string(MetricId id);
std::string metric_name(MetricId id);
std::optional<MetricId> metric_from_id(const std::string& id);
Property metric_property(MetricId id);
std::string property_name(Property p);
// True when lower raw scores are better and normalization divides the
// minimum by each score; false for the divide-by-maximum family.
bool metric_uses_inverse_normalization(MetricId id);
std::vector<MetricId> all_metrics();

enum class Similarity { pearson, spearman, ssim };
std::string similarity_id(Similarity s);
std::optional<Similarity> similarity_from_id(const std::string& id);

struct MetricConfig {
    // Robustness: draws of additive input noise.
    double perturb_sigma = 0.1;
    std::size_t perturb_draws = 10;

    // Faithfulness correlation.
    std::size_t fc_runs = 50;
    std::size_t fc_subset = 40;
    bool fc_uniform_baseline = true;  // subset replacement values ~ U(0,1)
    double fc_baseline_value = 0.0;   // used when fc_uniform_baseline is false

    // ROAD.
    std::vector<double> road_percentages; // default 0.01..0.50 step 0.01
    double road_noise_sigma = 0.01;
    std::size_t road_draws = 10;
    std::size_t road_draw_size = 50;

    // Randomization.
    double mpt_sigma = 0.25;
    bool mpt_bottom_up = true;
    Similarity mpt_similarity = Similarity::pearson;
    Similarity rl_similarity = Similarity::pearson;
    std::size_t rl_classes = 20; // class budget including the explained one

    // Localization.
    double topk_fraction = 0.1;

    // Apply min-max map normalization before scoring.
    bool normalize_maps = true;

    // Explanation samples per metric.
    std::size_t samples = 50;

    static std::vector<double> default_road_percentages();
    void validate() const;
};

// Supplies explanation maps to the metrics that re-run the explanation
// procedure. An instance is scoped to one (metric, method, sample) task and
// seeds its own draws, so evaluations are order-independent.
class ExplanationSource {
public:
    virtual ~ExplanationSource() = default;
    // The precomputed map under the unmodified model.
    virtual Tensor original() = 0;
    // Fresh explanation of (x, cls) under the unmodified model.
    virtual Tensor explain(const Tensor& x, std::size_t cls) = 0;
    // Fresh explanation under a substitute model.
    virtual Tensor explain_model(const Network& net, const Tensor& x, std::size_t cls) = 0;
};

// Similarity helpers. Pearson/Spearman return 1 for identical inputs and 0
// when either series is (numerically) constant; SSIM uses a single global
// window with C1=(0.01 r)^2, C2=(0.03 r)^2 over the joint value range r.
double pearson(const Tensor& a, const Tensor& b);
double spearman(const Tensor& a, const Tensor& b);
double ssim_global(const Tensor& a, const Tensor& b);
double similarity(Similarity s, const Tensor& a, const Tensor& b);

// Indices of the map sorted by decreasing value; equal values keep their
// lowest-index-first order.
std::vector<std::size_t> ranked_indices_desc(const Tensor& map);

// Replaces masked cells by the mean of the already-known 4-neighbours,
// sweeping outward from the unmasked region, plus N(0, noise_sigma) noise.
Tensor noisy_linear_imputation(const Tensor& x, const std::vector<std::uint8_t>& masked,
                               double noise_sigma, Rng& rng);

// --- Metric raw scores -------------------------------------------------

double avg_sensitivity(ExplanationSource& src, const Tensor& x, std::size_t cls,
                       const MetricConfig& cfg, std::uint64_t seed);

double local_lipschitz(ExplanationSource& src, const Tensor& x, std::size_t cls,
                       const MetricConfig& cfg, std::uint64_t seed);

double faithfulness_correlation(const Network& net, const Tensor& map, const Tensor& x,
                                std::size_t cls, const MetricConfig& cfg, std::uint64_t seed,
                                bool* degenerate = nullptr);

// Retention of the originally predicted class while masking increasing
// percentages of the most relevant cells; one curve value per percentage.
std::vector<double> road_retention_curve(const Network& net, const Tensor& map, const Tensor& x,
                                         const MetricConfig& cfg, std::uint64_t seed);

double trapezoid_auc(const std::vector<double>& xs, const std::vector<double>& ys);

double model_parameter_test(const Network& net, ExplanationSource& src, const Tensor& x,
                            std::size_t cls, const MetricConfig& cfg, std::uint64_t seed);

double random_logit(const Network& net, ExplanationSource& src, const Tensor& x, std::size_t cls,
                    const MetricConfig& cfg, std::uint64_t seed);

double complexity_entropy(const Tensor& map);
double sparseness_gini(const Tensor& map);
double top_k(const Tensor& map, const std::vector<std::uint8_t>& roi, std::size_t k);
double relevance_rank_accuracy(const Tensor& map, const std::vector<std::uint8_t>& roi);

// --- Score normalization and aggregation --------------------------------

// q_min / q per method; the smallest raw score maps to exactly 1.
std::vector<double> normalize_inverse(const std::vector<double>& raw);
// q / q_max per method; the largest raw score maps to exactly 1.
std::vector<double> normalize_max(const std::vector<double>& raw);

struct MeanSem {
    double mean = 0.0;
    double sem = 0.0;
};

// Mean and standard error (sample std over sqrt(count)).
MeanSem aggregate(const std::vector<double>& scores);

} // namespace xaibench
