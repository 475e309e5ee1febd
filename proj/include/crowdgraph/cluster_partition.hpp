#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "crowdgraph/errors.hpp"

namespace crowdgraph {

/// Disjoint, covering partition of the workers [0, W) into non-empty clusters.
///
/// Cluster order is meaningful: estimators break argmax ties toward the lower
/// cluster index. Members inside a cluster are kept sorted.
class ClusterPartition {
public:
    ClusterPartition() = default;

    ClusterPartition(std::size_t worker_count, std::vector<std::vector<std::uint32_t>> clusters)
        : clusters_(std::move(clusters)), cluster_of_(worker_count, kUnassigned) {
        for (std::size_t z = 0; z < clusters_.size(); ++z) {
            auto& members = clusters_[z];
            detail::require(!members.empty(), "ClusterPartition: empty cluster");
            std::sort(members.begin(), members.end());
            for (auto j : members) {
                if (j >= worker_count) throw IndexOutOfRange("ClusterPartition: worker index out of range");
                detail::require(cluster_of_[j] == kUnassigned, "ClusterPartition: clusters overlap");
                cluster_of_[j] = static_cast<std::uint32_t>(z);
            }
        }
        for (auto z : cluster_of_) {
            detail::require(z != kUnassigned, "ClusterPartition: clusters do not cover all workers");
        }
    }

    /// Groups workers by label; clusters are ordered by their lowest member.
    static ClusterPartition from_labels(std::span<const int> labels) {
        std::vector<std::vector<std::uint32_t>> clusters;
        std::vector<std::pair<int, std::size_t>> seen;  // label -> cluster index
        for (std::uint32_t j = 0; j < labels.size(); ++j) {
            auto it = std::find_if(seen.begin(), seen.end(), [&](auto& s) { return s.first == labels[j]; });
            if (it == seen.end()) {
                seen.emplace_back(labels[j], clusters.size());
                clusters.push_back({j});
            } else {
                clusters[it->second].push_back(j);
            }
        }
        return ClusterPartition(labels.size(), std::move(clusters));
    }

    std::size_t worker_count() const noexcept { return cluster_of_.size(); }
    std::size_t cluster_count() const noexcept { return clusters_.size(); }
    const std::vector<std::uint32_t>& cluster(std::size_t z) const { return clusters_.at(z); }
    const std::vector<std::vector<std::uint32_t>>& clusters() const noexcept { return clusters_; }
    std::uint32_t cluster_of(std::size_t worker) const { return cluster_of_.at(worker); }

    std::size_t smallest_cluster_size() const {
        std::size_t m = clusters_.empty() ? 0 : clusters_.front().size();
        for (const auto& c : clusters_) m = std::min(m, c.size());
        return m;
    }

    /// True iff both partitions group the workers identically, ignoring labels.
    bool same_grouping(const ClusterPartition& other) const {
        if (worker_count() != other.worker_count() || cluster_count() != other.cluster_count()) return false;
        auto canonical = [](const ClusterPartition& p) {
            auto c = p.clusters_;
            std::sort(c.begin(), c.end());
            return c;
        };
        return canonical(*this) == canonical(other);
    }

private:
    static constexpr std::uint32_t kUnassigned = UINT32_MAX;

    std::vector<std::vector<std::uint32_t>> clusters_;
    std::vector<std::uint32_t> cluster_of_;
};

}  // namespace crowdgraph
