#pragma once

// Answer estimators: majority vote, the maximum-likelihood oracle, the
// cluster-then-vote two-stage estimator, and plug-in rules on a matrix
// estimate of E[M].
//
// Tie rules: a sum that is exactly zero is resolved by a fair coin drawn from
// the caller's tie seed; argmax ties (clusters, columns) go to the lowest index.
// Bulk estimators use derive_seed(tie_seed, i) as the tie seed of task i.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <span>
#include <vector>

#include "crowdgraph/cluster_partition.hpp"
#include "crowdgraph/errors.hpp"
#include "crowdgraph/model.hpp"
#include "crowdgraph/rational.hpp"
#include "crowdgraph/rng.hpp"

namespace crowdgraph {

class EstimateVector {
public:
    explicit EstimateVector(std::vector<int> values) : values_(std::move(values)) {
        for (int v : values_) detail::require(v == 1 || v == -1, "EstimateVector: entries must be +1 or -1");
    }

    std::size_t size() const noexcept { return values_.size(); }
    int operator[](std::size_t i) const { return values_[i]; }
    std::span<const int> values() const noexcept { return values_; }

    friend bool operator==(const EstimateVector&, const EstimateVector&) = default;

private:
    std::vector<int> values_;
};

/// sign(x) for an integer sum; zero goes to the coin.
inline int sign_or_coin(long long x, std::uint64_t tie_seed) {
    if (x > 0) return 1;
    if (x < 0) return -1;
    return coin_flip(tie_seed);
}

inline int sign_or_coin(double x, std::uint64_t tie_seed) {
    if (x > 0.0) return 1;
    if (x < 0.0) return -1;
    return coin_flip(tie_seed);
}

/// Majority of a list of +/-1 responses.
inline int majority_of(std::span<const int> responses, std::uint64_t tie_seed) {
    if (responses.empty()) throw MissingResponses("majority vote over an empty response list");
    long long sum = 0;
    for (int v : responses) sum += v;
    return sign_or_coin(sum, tie_seed);
}

inline int majority_vote(const ResponseMatrix& m, std::size_t task, std::uint64_t tie_seed) {
    const auto row = m.task(task);
    if (row.empty()) throw MissingResponses("majority_vote: task " + std::to_string(task) + " has no responses");
    long long sum = 0;
    for (const auto& r : row) sum += r.value;
    return sign_or_coin(sum, tie_seed);
}

/// Weighted vote with log-odds weights ln(F/(1-F)). Workers with F in {0,1}
/// carry infinite weight: if any responded, only they vote (F = 0 votes flipped).
/// Weighted sums within 1e-12 of the total weight of zero count as ties.
inline int ml_oracle(const ResponseMatrix& m, std::size_t task, std::span<const double> skill_row,
                     std::uint64_t tie_seed) {
    detail::require(skill_row.size() == m.worker_count(), "ml_oracle: skill row length differs from W");
    const auto row = m.task(task);
    if (row.empty()) throw MissingResponses("ml_oracle: task " + std::to_string(task) + " has no responses");
    long long decisive = 0;
    bool any_decisive = false;
    double weighted = 0.0;
    double total = 0.0;
    for (const auto& r : row) {
        const double f = skill_row[r.worker];
        if (f == 1.0 || f == 0.0) {
            any_decisive = true;
            decisive += f == 1.0 ? r.value : -r.value;
        } else {
            const double w = std::log(f / (1.0 - f));
            weighted += w * r.value;
            total += std::abs(w);
        }
    }
    if (any_decisive) return sign_or_coin(decisive, tie_seed);
    // a sum that cancels up to rounding is a tie
    if (std::abs(weighted) <= 1e-12 * total) weighted = 0.0;
    return sign_or_coin(weighted, tie_seed);
}

/// Stage-1 clustering. Workers are visited in index order; worker j joins the
/// lowest-index cluster whose every current member agrees with j on strictly
/// more than a fraction `xi` of the stage-1 tasks, else opens a new cluster.
/// With no stage-1 tasks every worker ends up alone.
inline ClusterPartition cluster_workers(const ResponseMatrix& m, std::span<const std::uint32_t> stage1_tasks,
                                        double xi) {
    detail::require(xi > 0.5 && xi < 1.0, "cluster_workers: xi must lie in (1/2, 1)");
    const std::size_t workers = m.worker_count();
    const std::size_t r = stage1_tasks.size();
    const std::size_t words = (r + 63) / 64;

    // bits[j] holds worker j's answers on S, bit set for +1.
    std::vector<std::vector<std::uint64_t>> bits(workers, std::vector<std::uint64_t>(words, 0));
    for (std::size_t k = 0; k < r; ++k) {
        const auto row = m.task(stage1_tasks[k]);
        if (row.size() != workers) {
            throw MissingResponses("cluster_workers: stage-1 task " + std::to_string(stage1_tasks[k]) +
                                   " lacks responses from some workers");
        }
        for (const auto& resp : row) {
            if (resp.value == 1) bits[resp.worker][k / 64] |= std::uint64_t{1} << (k % 64);
        }
    }

    auto agrees = [&](std::size_t a, std::size_t b) {
        std::size_t differ = 0;
        for (std::size_t w = 0; w < words; ++w) differ += std::popcount(bits[a][w] ^ bits[b][w]);
        return static_cast<double>(r - differ) / static_cast<double>(r) > xi;
    };

    std::vector<std::vector<std::uint32_t>> clusters;
    for (std::uint32_t j = 0; j < workers; ++j) {
        bool placed = false;
        if (r > 0) {
            for (auto& q : clusters) {
                bool all = true;
                for (auto member : q) {
                    if (!agrees(j, member)) {
                        all = false;
                        break;
                    }
                }
                if (all) {
                    q.push_back(j);
                    placed = true;
                    break;
                }
            }
        }
        if (!placed) clusters.push_back({j});
    }
    return ClusterPartition(workers, std::move(clusters));
}

/// Stage-2 estimate: pick the cluster whose response sum on this task has the
/// largest magnitude (lowest index on ties) and return the sign of that sum.
inline int two_stage_estimate(const ResponseMatrix& m, const ClusterPartition& partition, std::size_t task,
                              std::uint64_t tie_seed) {
    detail::require(partition.worker_count() == m.worker_count(), "two_stage_estimate: partition size differs from W");
    const auto row = m.task(task);
    if (row.empty()) throw MissingResponses("two_stage_estimate: task " + std::to_string(task) + " has no responses");
    std::vector<long long> sums(partition.cluster_count(), 0);
    std::vector<bool> present(partition.cluster_count(), false);
    for (const auto& r : row) {
        const auto z = partition.cluster_of(r.worker);
        sums[z] += r.value;
        present[z] = true;
    }
    std::size_t best = sums.size();
    for (std::size_t z = 0; z < sums.size(); ++z) {
        if (!present[z]) continue;
        if (best == sums.size() || std::llabs(sums[z]) > std::llabs(sums[best])) best = z;
    }
    return sign_or_coin(sums[best], tie_seed);
}

/// sign of the i-th row sum of a matrix estimate of E[M].
inline int plugin_column_sum(const Eigen::MatrixXd& mhat, std::size_t task, std::uint64_t tie_seed) {
    if (task >= static_cast<std::size_t>(mhat.rows())) throw IndexOutOfRange("plugin_column_sum: task out of range");
    return sign_or_coin(mhat.row(static_cast<Eigen::Index>(task)).sum(), tie_seed);
}

/// sign of the largest-magnitude entry of row i (lowest column on ties).
inline int plugin_max_entry(const Eigen::MatrixXd& mhat, std::size_t task, std::uint64_t tie_seed) {
    if (task >= static_cast<std::size_t>(mhat.rows())) throw IndexOutOfRange("plugin_max_entry: task out of range");
    const auto i = static_cast<Eigen::Index>(task);
    if (mhat.cols() == 0) return coin_flip(tie_seed);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < mhat.cols(); ++j) {
        if (std::abs(mhat(i, j)) > std::abs(mhat(i, best))) best = j;
    }
    return sign_or_coin(mhat(i, best), tie_seed);
}

/// Observed entries scaled by 1/density, unobserved entries zero.
inline Eigen::MatrixXd zero_imputed_estimate(const ResponseMatrix& m, double density) {
    detail::require(density > 0.0 && density <= 1.0, "zero_imputed_estimate: density must be in (0,1]");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.task_count()),
                                                static_cast<Eigen::Index>(m.worker_count()));
    for (const auto& r : m.entries()) out(r.task, r.worker) = r.value / density;
    return out;
}

inline EstimateVector estimate_majority(const ResponseMatrix& m, std::uint64_t tie_seed) {
    std::vector<int> out(m.task_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = majority_vote(m, i, derive_seed(tie_seed, i));
    return EstimateVector(std::move(out));
}

inline EstimateVector estimate_two_stage(const ResponseMatrix& m, const ClusterPartition& partition,
                                         std::uint64_t tie_seed) {
    std::vector<int> out(m.task_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = two_stage_estimate(m, partition, i, derive_seed(tie_seed, i));
    return EstimateVector(std::move(out));
}

/// Fraction of tasks answered incorrectly, exactly.
inline Rational error_rate(const EstimateVector& estimate, const TrueAnswers& truth) {
    detail::require(estimate.size() == truth.size(), "error_rate: length mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += estimate[i] != truth[i];
    return Rational(wrong, truth.size());
}

/// Header `task,estimate,truth,correct`.
inline void write_estimates_csv(std::ostream& os, const EstimateVector& estimate, const TrueAnswers& truth) {
    detail::require(estimate.size() == truth.size(), "write_estimates_csv: length mismatch");
    os << "task,estimate,truth,correct\n";
    for (std::size_t i = 0; i < truth.size(); ++i) {
        os << i << ',' << estimate[i] << ',' << truth[i] << ',' << (estimate[i] == truth[i] ? 1 : 0) << '\n';
    }
}

}  // namespace crowdgraph
