#pragma once

// The spammer-hammer crowdsourcing model seen as a centered graphon.
//
// [0,1] is split into four intervals
//   I1 = [0, ab)              tasks whose answer is +1
//   I2 = [ab, b)              tasks whose answer is -1
//   I3 = [b, 1 - s(1-b))      spammers
//   I4 = [1 - s(1-b), 1]      hammers
// with a = alpha, b = beta, s = sigma2. The kernel f is the task's answer on
// task x hammer pairs (both orders) and 0 elsewhere. It has rank 2 with
// eigenvalues +-sqrt(s b (1-b)).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "crowdgraph/errors.hpp"
#include "crowdgraph/model.hpp"
#include "crowdgraph/rng.hpp"
#include "json.hpp"

namespace crowdgraph {

enum class Region : int { PositiveTask = 0, NegativeTask = 1, Spammer = 2, Hammer = 3 };

class GraphonSpec {
public:
    /// alpha in (0, 1], beta and sigma2 in (0, 1).
    GraphonSpec(double alpha, double beta, double sigma2) : alpha_(alpha), beta_(beta), sigma2_(sigma2) {
        detail::require(alpha > 0.0 && alpha <= 1.0, "GraphonSpec: alpha must lie in (0, 1]");
        detail::require(beta > 0.0 && beta < 1.0, "GraphonSpec: beta must lie in (0, 1)");
        detail::require(sigma2 > 0.0 && sigma2 < 1.0, "GraphonSpec: sigma2 must lie in (0, 1)");
        bounds_ = {0.0, alpha * beta, beta, 1.0 - sigma2 * (1.0 - beta), 1.0};
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double sigma2() const noexcept { return sigma2_; }

    /// Endpoints 0, ab, b, 1 - s(1-b), 1.
    const std::array<double, 5>& boundaries() const noexcept { return bounds_; }

    double lower(Region r) const noexcept { return bounds_[static_cast<int>(r)]; }
    double upper(Region r) const noexcept { return bounds_[static_cast<int>(r) + 1]; }
    double length(Region r) const noexcept { return upper(r) - lower(r); }

    /// Half-open membership; theta == 1 belongs to the hammer interval.
    Region region(double theta) const {
        if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("GraphonSpec: coordinate outside [0,1]");
        if (theta < bounds_[1]) return Region::PositiveTask;
        if (theta < bounds_[2]) return Region::NegativeTask;
        if (theta < bounds_[3]) return Region::Spammer;
        return Region::Hammer;
    }

private:
    double alpha_;
    double beta_;
    double sigma2_;
    std::array<double, 5> bounds_{};
};

inline GraphonSpec build_graphon(double alpha, double beta, double sigma2) { return {alpha, beta, sigma2}; }

inline bool is_task(Region r) noexcept { return r == Region::PositiveTask || r == Region::NegativeTask; }

inline int task_sign(Region r) noexcept { return r == Region::PositiveTask ? 1 : -1; }

/// f on region pairs.
inline int kernel_value(Region a, Region b) noexcept {
    if (is_task(a) && b == Region::Hammer) return task_sign(a);
    if (a == Region::Hammer && is_task(b)) return task_sign(b);
    return 0;
}

inline int eval_f(const GraphonSpec& spec, double x, double y) {
    return kernel_value(spec.region(x), spec.region(y));
}

struct EigenSystem {
    double lambda1 = 0.0;  // +sqrt(s b (1-b))
    double lambda2 = 0.0;  // -sqrt(s b (1-b))
    double task_amplitude = 0.0;    // 1/sqrt(2b)
    double hammer_amplitude = 0.0;  // 1/sqrt(2 s (1-b))
    double amplitude_bound = 0.0;   // B = (2 min(b, s(1-b)))^{-1/2}

    /// q_k on a region, k in {1, 2}. Both share the task part; they differ in
    /// the sign on hammers.
    double q(int k, Region r) const {
        switch (r) {
            case Region::PositiveTask: return task_amplitude;
            case Region::NegativeTask: return -task_amplitude;
            case Region::Spammer: return 0.0;
            case Region::Hammer: return k == 1 ? hammer_amplitude : -hammer_amplitude;
        }
        return 0.0;
    }

    double lambda(int k) const { return k == 1 ? lambda1 : lambda2; }
};

inline EigenSystem eigensystem(const GraphonSpec& spec) {
    const double b = spec.beta(), s = spec.sigma2();
    const double prod = s * b * (1.0 - b);
    if (!(prod > 0.0)) throw DegenerateSpectrum("eigensystem: sigma2 * beta * (1 - beta) is zero");
    EigenSystem e;
    e.lambda1 = std::sqrt(prod);
    e.lambda2 = -e.lambda1;
    e.task_amplitude = 1.0 / std::sqrt(2.0 * b);
    e.hammer_amplitude = 1.0 / std::sqrt(2.0 * s * (1.0 - b));
    e.amplitude_bound = 1.0 / std::sqrt(2.0 * std::min(b, s * (1.0 - b)));
    return e;
}

struct SpectralReport {
    double max_pointwise_residual = 0.0;  // max |f - sum_k lambda_k q_k q_k| on the grid
    double gram_residual = 0.0;           // max of |<q1,q1>-1|, |<q2,q2>-1|, |<q1,q2>|
    double eigen_equation_residual = 0.0; // max_k,x |(F q_k)(x) - lambda_k q_k(x)|
    double rayleigh_residual = 0.0;       // max_k |<q_k, F q_k> - lambda_k|
    double amplitude_residual = 0.0;      // |max over grid of |q_k| - B|
    std::size_t grid_points = 0;
};

inline nlohmann::json to_json(const SpectralReport& r) {
    return {{"max_pointwise_residual", r.max_pointwise_residual},
            {"gram_residual", r.gram_residual},
            {"eigen_equation_residual", r.eigen_equation_residual},
            {"rayleigh_residual", r.rayleigh_residual},
            {"amplitude_residual", r.amplitude_residual},
            {"grid_points", r.grid_points}};
}

/// Checks the closed-form eigensystem against the kernel definition.
///
/// Pointwise and amplitude checks run on the grid (k + 1/2)/resolution plus
/// the midpoint of every non-empty interval, skipping points within 1e-12 of
/// an interval endpoint. Inner products and the integral operator are computed
/// exactly: every function involved is constant on each interval, so an
/// integral is a sum of interval length x value.
inline SpectralReport verify_spectral(const GraphonSpec& spec, std::size_t resolution) {
    const auto eig = eigensystem(spec);
    constexpr std::array<Region, 4> regions{Region::PositiveTask, Region::NegativeTask, Region::Spammer,
                                            Region::Hammer};
    SpectralReport rep;

    std::vector<double> grid;
    for (std::size_t k = 0; k < resolution; ++k) grid.push_back((k + 0.5) / static_cast<double>(resolution));
    for (auto r : regions) {
        if (spec.length(r) > 0.0) grid.push_back(0.5 * (spec.lower(r) + spec.upper(r)));
    }
    const auto& b = spec.boundaries();
    std::erase_if(grid, [&](double x) {
        return std::any_of(b.begin() + 1, b.end() - 1, [&](double e) { return std::abs(x - e) < 1e-12; });
    });
    rep.grid_points = grid.size();

    double sup_q = 0.0;
    for (double x : grid) {
        const auto rx = spec.region(x);
        sup_q = std::max({sup_q, std::abs(eig.q(1, rx)), std::abs(eig.q(2, rx))});
        for (double y : grid) {
            const auto ry = spec.region(y);
            const double recon = eig.lambda1 * eig.q(1, rx) * eig.q(1, ry) + eig.lambda2 * eig.q(2, rx) * eig.q(2, ry);
            rep.max_pointwise_residual =
                std::max(rep.max_pointwise_residual, std::abs(eval_f(spec, x, y) - recon));
        }
    }
    rep.amplitude_residual = std::abs(sup_q - eig.amplitude_bound);

    auto inner = [&](auto&& g, auto&& h) {
        double s = 0.0;
        for (auto r : regions) s += spec.length(r) * g(r) * h(r);
        return s;
    };
    auto q1 = [&](Region r) { return eig.q(1, r); };
    auto q2 = [&](Region r) { return eig.q(2, r); };
    rep.gram_residual = std::max({std::abs(inner(q1, q1) - 1.0), std::abs(inner(q2, q2) - 1.0), std::abs(inner(q1, q2))});

    for (int k = 1; k <= 2; ++k) {
        auto qk = [&](Region r) { return eig.q(k, r); };
        std::array<double, 4> applied{};
        for (auto rx : regions) {
            double s = 0.0;
            for (auto ry : regions) s += spec.length(ry) * kernel_value(rx, ry) * qk(ry);
            applied[static_cast<int>(rx)] = s;
            if (spec.length(rx) > 0.0) {
                rep.eigen_equation_residual =
                    std::max(rep.eigen_equation_residual, std::abs(s - eig.lambda(k) * qk(rx)));
            }
        }
        const double rayleigh = inner(qk, [&](Region r) { return applied[static_cast<int>(r)]; });
        rep.rayleigh_residual = std::max(rep.rayleigh_residual, std::abs(rayleigh - eig.lambda(k)));
    }
    return rep;
}

struct GraphonEntry {
    std::uint32_t i;
    std::uint32_t j;  // i <= j
    int value;
};

/// Partially observed symmetric centered data matrix. Only entries with
/// i <= j are stored; lookups are symmetric.
struct GraphonSample {
    std::size_t n = 0;
    std::vector<double> theta;
    std::vector<GraphonEntry> observed;  // sorted by (i, j)

    std::optional<int> value(std::size_t a, std::size_t b) const {
        const auto i = static_cast<std::uint32_t>(std::min(a, b));
        const auto j = static_cast<std::uint32_t>(std::max(a, b));
        auto it = std::lower_bound(observed.begin(), observed.end(), std::pair{i, j},
                                   [](const GraphonEntry& e, std::pair<std::uint32_t, std::uint32_t> k) {
                                       return e.i != k.first ? e.i < k.first : e.j < k.second;
                                   });
        if (it == observed.end() || it->i != i || it->j != j) return std::nullopt;
        return it->value;
    }

    /// Edge list `i,j,value`, both orientations of every off-diagonal entry.
    void write_csv(std::ostream& os) const {
        os << "i,j,value\n";
        for (const auto& e : observed) {
            os << e.i << ',' << e.j << ',' << e.value << '\n';
            if (e.i != e.j) os << e.j << ',' << e.i << ',' << e.value << '\n';
        }
    }
};

/// Draws theta_i ~ U(0,1), observes each unordered pair (diagonal included)
/// with probability `density`, and sets Y_ij = +1 with probability (1 + f)/2.
/// Latent positions use stream 0 of `seed`; row i uses stream i + 1, so rows
/// can be generated independently.
inline GraphonSample sample_graphon_matrix(const GraphonSpec& spec, std::size_t n, double density,
                                           std::uint64_t seed) {
    detail::require(n >= 1, "sample_graphon_matrix: n must be positive");
    detail::require(detail::is_probability(density), "sample_graphon_matrix: density outside [0,1]");
    GraphonSample out;
    out.n = n;
    out.theta.resize(n);
    Rng latent(derive_seed(seed, 0));
    for (auto& t : out.theta) t = latent.uniform01();
    std::vector<Region> region(n);
    for (std::size_t i = 0; i < n; ++i) region[i] = spec.region(out.theta[i]);

    for (std::uint32_t i = 0; i < n; ++i) {
        Rng row(derive_seed(seed, i + 1));
        for (std::uint32_t j = i; j < n; ++j) {
            if (!row.bernoulli(density)) continue;
            const double f = kernel_value(region[i], region[j]);
            out.observed.push_back({i, j, row.sign_with_probability(0.5 * (1.0 + f))});
        }
    }
    return out;
}

/// Block matrix [[Q, M], [M^T, Q']] of size (T+W) for a fully observed response
/// matrix; Q and Q' are symmetric with independent fair +/-1 entries.
inline Eigen::MatrixXd embed_crowd_matrix(const ResponseMatrix& m, std::uint64_t seed) {
    if (!m.fully_observed()) throw InvalidArgument("embed_crowd_matrix: response matrix must be fully observed");
    const auto t = static_cast<Eigen::Index>(m.task_count());
    const auto w = static_cast<Eigen::Index>(m.worker_count());
    const Eigen::Index n = t + w;
    Eigen::MatrixXd y(n, n);
    Rng rng(seed);
    auto fill_coin_block = [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index i = lo; i < hi; ++i) {
            for (Eigen::Index j = i; j < hi; ++j) {
                const double v = rng.bernoulli(0.5) ? 1.0 : -1.0;
                y(i, j) = v;
                y(j, i) = v;
            }
        }
    };
    fill_coin_block(0, t);
    fill_coin_block(t, n);
    for (const auto& r : m.entries()) {
        y(r.task, t + r.worker) = r.value;
        y(t + r.worker, r.task) = r.value;
    }
    return y;
}

/// (1/(rows*cols)) * sum of squared deviations.
inline double mse(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& expected) {
    if (estimate.rows() != expected.rows() || estimate.cols() != expected.cols()) {
        throw InvalidArgument("mse: dimension mismatch");
    }
    if (estimate.size() == 0) return 0.0;
    return (estimate - expected).squaredNorm() / static_cast<double>(estimate.size());
}

/// Centered {-1,+1} <-> {0,1}.
inline int to_binary(int centered) { return (centered + 1) / 2; }
inline int to_centered(int binary) { return 2 * binary - 1; }

inline nlohmann::json to_json(const GraphonSpec& s) {
    return {{"alpha", s.alpha()}, {"beta", s.beta()}, {"sigma2", s.sigma2()}};
}

inline GraphonSpec graphon_from_json(const nlohmann::json& j) {
    try {
        return GraphonSpec(j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("sigma2").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("graphon_from_json: ") + e.what());
    }
}

inline nlohmann::json to_json(const EigenSystem& e) {
    return {{"lambda1", e.lambda1},
            {"lambda2", e.lambda2},
            {"q_task", e.task_amplitude},
            {"q_hammer", e.hammer_amplitude},
            {"B", e.amplitude_bound}};
}

}  // namespace crowdgraph
