#pragma once

// Closed-form bounds and parameter schedules.

#include <cmath>
#include <map>
#include <span>
#include <string>

#include "crowdgraph/errors.hpp"
#include "json.hpp"

namespace crowdgraph {

struct BoundReport {
    std::map<std::string, double> inputs;
    double probability_lower_bound = 0.0;
    double mse_lower_bound = 0.0;
};

inline nlohmann::json to_json(const BoundReport& r) {
    return {{"inputs", r.inputs},
            {"probability_lower_bound", r.probability_lower_bound},
            {"mse_lower_bound", r.mse_lower_bound}};
}

/// Chernoff bound on the majority-vote error of one task,
///   exp(-(n/2) * (sum(2F - 1) / n)^2),  n = number of responding workers.
/// Requires a strictly positive margin sum(2F - 1).
inline double mv_chernoff_bound(std::span<const double> skills) {
    detail::require(!skills.empty(), "mv_chernoff_bound: no workers");
    double margin = 0.0;
    for (double f : skills) {
        detail::require(detail::is_probability(f), "mv_chernoff_bound: skill outside [0,1]");
        margin += 2.0 * f - 1.0;
    }
    detail::require(margin > 0.0, "mv_chernoff_bound: margin sum(2F-1) must be positive");
    const double n = static_cast<double>(skills.size());
    const double mean = margin / n;
    return std::exp(-(n / 2.0) * mean * mean);
}

/// Workers per task majority vote needs on the d-type model,
///   2 d^2 ln(1/alpha) / (2p - 1)^2.
inline double mv_queries_needed(int d, double p, double alpha) {
    detail::require(d >= 1, "mv_queries_needed: d must be positive");
    detail::require(p > 0.5 && p <= 1.0, "mv_queries_needed: p must lie in (1/2, 1]");
    detail::require(alpha > 0.0 && alpha <= 1.0, "mv_queries_needed: alpha must lie in (0, 1]");
    const double gap = 2.0 * p - 1.0;
    return 2.0 * d * d * std::log(1.0 / alpha) / (gap * gap);
}

/// Probability two same-type workers agree on a random task,
///   (p^2 + (1-p)^2)/d + (d-1)/(2d).
inline double same_type_match_prob_expanded(double p, int d) {
    detail::require(detail::is_probability(p) && d >= 1, "same_type_match_prob: invalid p or d");
    return (p * p + (1.0 - p) * (1.0 - p)) / d + (d - 1.0) / (2.0 * d);
}

/// Same quantity in closed form, 1/2 + (2p - 1)^2 / (2d).
inline double same_type_match_prob(double p, int d) {
    detail::require(detail::is_probability(p) && d >= 1, "same_type_match_prob: invalid p or d");
    const double gap = 2.0 * p - 1.0;
    return 0.5 + gap * gap / (2.0 * d);
}

/// Parameter schedule of the two-stage algorithm for a target error alpha.
struct TheoremOneParams {
    int d = 1;
    double p = 1.0;
    double alpha = 0.5;
    std::size_t workers = 0;  // W supplied by the caller
    std::size_t tasks = 0;    // T supplied by the caller

    double xi = 0.75;  // 1/2 + (2p-1)^2/(4d)

    double r_real = 0.0;  // 8 d^2/(2p-1)^4 ln(3W(W-1)/(2 alpha))
    double l_real = 0.0;  // 8/(2p-1)^2 ln(6d/alpha)
    double w_min_real = 0.0;  // 16 d/(2p-1)^2 ln(6d/alpha)
    std::size_t r = 0;
    std::size_t l = 0;
    std::size_t w_min = 0;

    double budget = 0.0;  // 16 d/(2p-1)^2 ln(6d/alpha); equals w_min_real

    // Average queries per task is bounded by l*d + W*r/T; both terms are kept.
    double budget_ld = 0.0;
    double budget_wr_over_t = 0.0;

    bool workers_sufficient = false;  // W >= w_min
    bool tasks_sufficient = false;    // T >= r

    // Terms of the error bound: C(W,2) exp(-R(2p-1)^4/(8d^2)) for clustering,
    // d exp(-2(1/d - L/W)^2 W) for a type holding fewer than L workers (only
    // meaningful when L/W < 1/d, otherwise reported as 1), and
    // 2d exp(-(2p-1)^2 L/8) for the per-cluster concentration.
    double recovery_failure_bound = 1.0;
    double cluster_size_failure_bound = 1.0;
    double concentration_failure_bound = 1.0;

    double error_bound() const {
        return recovery_failure_bound + cluster_size_failure_bound + concentration_failure_bound;
    }
};

inline TheoremOneParams theorem1_params(int d, double p, double alpha, std::size_t workers, std::size_t tasks) {
    detail::require(d >= 1, "theorem1_params: d must be positive");
    detail::require(p > 0.5 && p <= 1.0, "theorem1_params: p must lie in (1/2, 1]");
    detail::require(alpha > 0.0 && alpha < 1.0, "theorem1_params: alpha must lie in (0, 1)");
    detail::require(workers >= 2, "theorem1_params: need at least two workers");

    TheoremOneParams out;
    out.d = d;
    out.p = p;
    out.alpha = alpha;
    out.workers = workers;
    out.tasks = tasks;

    const double gap2 = (2.0 * p - 1.0) * (2.0 * p - 1.0);
    const double w = static_cast<double>(workers);
    const double log_types = std::log(6.0 * d / alpha);

    out.xi = 0.5 + gap2 / (4.0 * d);
    out.r_real = 8.0 * d * d / (gap2 * gap2) * std::log(3.0 * w * (w - 1.0) / (2.0 * alpha));
    out.l_real = 8.0 / gap2 * log_types;
    out.w_min_real = 16.0 * d / gap2 * log_types;
    out.r = static_cast<std::size_t>(std::ceil(out.r_real));
    out.l = static_cast<std::size_t>(std::ceil(out.l_real));
    out.w_min = static_cast<std::size_t>(std::ceil(out.w_min_real));
    out.budget = out.w_min_real;

    out.budget_ld = static_cast<double>(out.l) * d;
    out.budget_wr_over_t = tasks > 0 ? w * static_cast<double>(out.r) / static_cast<double>(tasks) : INFINITY;
    out.workers_sufficient = workers >= out.w_min;
    out.tasks_sufficient = tasks >= out.r;

    const double pairs = w * (w - 1.0) / 2.0;
    out.recovery_failure_bound = pairs * std::exp(-static_cast<double>(out.r) * gap2 * gap2 / (8.0 * d * d));
    const double slack = 1.0 / d - static_cast<double>(out.l) / w;
    out.cluster_size_failure_bound = slack > 0.0 ? d * std::exp(-2.0 * slack * slack * w) : 1.0;
    out.concentration_failure_bound = 2.0 * d * std::exp(-gap2 * static_cast<double>(out.l) / 8.0);
    return out;
}

inline nlohmann::json to_json(const TheoremOneParams& t) {
    return {{"d", t.d},
            {"p", t.p},
            {"alpha", t.alpha},
            {"W", t.workers},
            {"T", t.tasks},
            {"xi", t.xi},
            {"R", t.r},
            {"R_real", t.r_real},
            {"L", t.l},
            {"L_real", t.l_real},
            {"W_min", t.w_min},
            {"W_min_real", t.w_min_real},
            {"budget", t.budget},
            {"budget_Ld", t.budget_ld},
            {"budget_WR_over_T", t.budget_wr_over_t},
            {"workers_sufficient", t.workers_sufficient},
            {"tasks_sufficient", t.tasks_sufficient},
            {"recovery_failure_bound", t.recovery_failure_bound},
            {"cluster_size_failure_bound", t.cluster_size_failure_bound},
            {"concentration_failure_bound", t.concentration_failure_bound}};
}

/// Lower bounds for the spammer-hammer model with hammer fraction sigma2,
/// sampling density p and W workers (W may be fractional when it stands for
/// a proportion of n):
///   probability >= 1/2 exp(-(sigma2 + sigma2^2) p W),
///   MSE         >= 1/(8W) exp(-(sigma2 + sigma2^2) p W).
/// The bound relies on 1 - x >= exp(-x - x^2), valid for x <= 2/3.
inline BoundReport ds_mse_lower_bound(double sigma2, double p, double workers) {
    detail::require(sigma2 >= 0.0 && sigma2 <= 2.0 / 3.0, "ds_mse_lower_bound: sigma2 must lie in [0, 2/3]");
    detail::require(detail::is_probability(p), "ds_mse_lower_bound: p outside [0,1]");
    detail::require(workers >= 1.0, "ds_mse_lower_bound: W must be at least 1");
    const double e = std::exp(-(sigma2 + sigma2 * sigma2) * p * workers);
    return {{{"sigma2", sigma2}, {"p", p}, {"W", workers}}, 0.5 * e, e / (8.0 * workers)};
}

/// Minimax bounds over kernels whose eigenfunction amplitude is B >= 1:
///   probability >= 1/2 exp(-pn/(2B^2 - 1)),
///   MSE         >= B^2 exp(-pn/(2B^2 - 1)) / (4 (2B^2 - 1) n).
inline BoundReport thm2_lower_bounds(double b, double p, double n) {
    detail::require(b >= 1.0, "thm2_lower_bounds: B must be at least 1");
    detail::require(detail::is_probability(p), "thm2_lower_bounds: p outside [0,1]");
    detail::require(n >= 1.0, "thm2_lower_bounds: n must be at least 1");
    const double k = 2.0 * b * b - 1.0;
    const double e = std::exp(-p * n / k);
    return {{{"B", b}, {"p", p}, {"n", n}}, 0.5 * e, b * b * e / (4.0 * k * n)};
}

/// Minimax bounds over kernels whose smallest nonzero |eigenvalue| is lambda in [0, 1/2]:
///   probability >= 1/2 exp(-2 lambda^2 (4 lambda^2 + 1) p n),
///   MSE         >= 1/(4n) exp(-2 lambda^2 (4 lambda^2 + 1) p n).
inline BoundReport thm3_lower_bounds(double lambda, double p, double n) {
    detail::require(lambda >= 0.0 && lambda <= 0.5, "thm3_lower_bounds: lambda must lie in [0, 1/2]");
    detail::require(detail::is_probability(p), "thm3_lower_bounds: p outside [0,1]");
    detail::require(n >= 1.0, "thm3_lower_bounds: n must be at least 1");
    const double l2 = lambda * lambda;
    const double e = std::exp(-2.0 * l2 * (4.0 * l2 + 1.0) * p * n);
    return {{{"lambda", lambda}, {"p", p}, {"n", n}}, 0.5 * e, e / (4.0 * n)};
}

}  // namespace crowdgraph
