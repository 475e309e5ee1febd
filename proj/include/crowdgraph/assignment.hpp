#pragma once

// Query designs: which worker answers which task.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "crowdgraph/cluster_partition.hpp"
#include "crowdgraph/errors.hpp"
#include "crowdgraph/rational.hpp"
#include "crowdgraph/rng.hpp"

namespace crowdgraph {

struct TaskWorker {
    std::uint32_t task;
    std::uint32_t worker;

    friend auto operator<=>(const TaskWorker&, const TaskWorker&) = default;
};

/// A set of (task, worker) pairs inside [0, T) x [0, W), kept sorted and unique.
class Assignment {
public:
    Assignment(std::size_t tasks, std::size_t workers) : tasks_(tasks), workers_(workers) {}

    Assignment(std::size_t tasks, std::size_t workers, std::vector<TaskWorker> pairs)
        : tasks_(tasks), workers_(workers), pairs_(std::move(pairs)) {
        for (const auto& p : pairs_) {
            if (p.task >= tasks_ || p.worker >= workers_) {
                throw IndexOutOfRange("Assignment: pair outside [T] x [W]");
            }
        }
        std::sort(pairs_.begin(), pairs_.end());
        detail::require(std::adjacent_find(pairs_.begin(), pairs_.end()) == pairs_.end(),
                        "Assignment: duplicate pair");
    }

    std::size_t task_count() const noexcept { return tasks_; }
    std::size_t worker_count() const noexcept { return workers_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    std::span<const TaskWorker> pairs() const noexcept { return pairs_; }

    bool contains(std::uint32_t task, std::uint32_t worker) const {
        return std::binary_search(pairs_.begin(), pairs_.end(), TaskWorker{task, worker});
    }

    std::vector<std::size_t> task_degrees() const {
        std::vector<std::size_t> deg(tasks_, 0);
        for (const auto& p : pairs_) ++deg[p.task];
        return deg;
    }

    std::vector<std::size_t> worker_loads() const {
        std::vector<std::size_t> load(workers_, 0);
        for (const auto& p : pairs_) ++load[p.worker];
        return load;
    }

    /// Audit export: header `task,worker`, one sorted pair per line.
    void write_csv(std::ostream& os) const {
        os << "task,worker\n";
        for (const auto& p : pairs_) os << p.task << ',' << p.worker << '\n';
    }

private:
    std::size_t tasks_;
    std::size_t workers_;
    std::vector<TaskWorker> pairs_;
};

/// Union of two assignments over the same dimensions.
inline Assignment merge(const Assignment& a, const Assignment& b) {
    detail::require(a.task_count() == b.task_count() && a.worker_count() == b.worker_count(),
                    "merge: dimension mismatch");
    std::vector<TaskWorker> pairs;
    pairs.reserve(a.size() + b.size());
    std::set_union(a.pairs().begin(), a.pairs().end(), b.pairs().begin(), b.pairs().end(),
                   std::back_inserter(pairs));
    return Assignment(a.task_count(), a.worker_count(), std::move(pairs));
}

/// Parameters of the cluster-then-vote design.
struct TwoStageDesign {
    std::vector<std::uint32_t> stage1_tasks;  // S, sorted
    std::size_t per_cluster_workers = 1;      // L
    double threshold = 0.5;                   // xi

    std::size_t stage1_count() const noexcept { return stage1_tasks.size(); }
};

/// Every task gets `k` distinct workers drawn uniformly without replacement,
/// independently across tasks.
inline Assignment uniform_assignment(std::size_t tasks, std::size_t workers, std::size_t k,
                                     std::uint64_t seed) {
    if (k > workers) throw InvalidArgument("uniform_assignment: k exceeds the worker count");
    std::vector<TaskWorker> pairs;
    pairs.reserve(tasks * k);
    Rng rng(seed);
    for (std::uint32_t i = 0; i < tasks; ++i) {
        for (auto j : rng.sample_without_replacement(static_cast<std::uint32_t>(workers),
                                                     static_cast<std::uint32_t>(k))) {
            pairs.push_back({i, j});
        }
    }
    return Assignment(tasks, workers, std::move(pairs));
}

struct Stage1Assignment {
    std::vector<std::uint32_t> tasks;  // S, sorted
    Assignment assignment;             // S x [W]
};

/// A uniformly random R-subset S of the tasks, answered by all workers.
inline Stage1Assignment stage1_assignment(std::size_t tasks, std::size_t workers, std::size_t r,
                                          std::uint64_t seed) {
    if (r > tasks) throw InvalidArgument("stage1_assignment: R exceeds the task count");
    Rng rng(seed);
    auto s = rng.sample_without_replacement(static_cast<std::uint32_t>(tasks), static_cast<std::uint32_t>(r));
    std::sort(s.begin(), s.end());
    std::vector<TaskWorker> pairs;
    pairs.reserve(r * workers);
    for (auto i : s) {
        for (std::uint32_t j = 0; j < workers; ++j) pairs.push_back({i, j});
    }
    return {std::move(s), Assignment(tasks, workers, std::move(pairs))};
}

/// Each listed task gets `l` distinct workers from every cluster, sampled
/// uniformly without replacement inside the cluster.
inline Assignment stage2_assignment(std::size_t tasks, std::span<const std::uint32_t> stage2_tasks,
                                    const ClusterPartition& partition, std::size_t l, std::uint64_t seed) {
    for (std::size_t z = 0; z < partition.cluster_count(); ++z) {
        if (partition.cluster(z).size() < l) throw InsufficientCluster(z, partition.cluster(z).size(), l);
    }
    std::vector<TaskWorker> pairs;
    pairs.reserve(stage2_tasks.size() * l * partition.cluster_count());
    Rng rng(seed);
    for (auto i : stage2_tasks) {
        if (i >= tasks) throw IndexOutOfRange("stage2_assignment: task index out of range");
        for (const auto& members : partition.clusters()) {
            const auto n = static_cast<std::uint32_t>(members.size());
            for (auto k : rng.sample_without_replacement(n, static_cast<std::uint32_t>(l))) {
                pairs.push_back({i, members[k]});
            }
        }
    }
    return Assignment(tasks, partition.worker_count(), std::move(pairs));
}

/// Tasks of [0, T) not in the sorted set `s`.
inline std::vector<std::uint32_t> complement_tasks(std::size_t tasks, std::span<const std::uint32_t> s) {
    std::vector<std::uint32_t> out;
    out.reserve(tasks - std::min(tasks, s.size()));
    std::size_t k = 0;
    for (std::uint32_t i = 0; i < tasks; ++i) {
        if (k < s.size() && s[k] == i) {
            ++k;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

/// Exact average number of queries per task, (|stage 1| + |stage 2|) / T.
inline Rational queries_per_task(const Assignment& stage1, const Assignment& stage2, std::size_t tasks) {
    if (tasks == 0) throw InvalidArgument("queries_per_task: T must be positive");
    detail::require(stage1.task_count() == tasks && stage2.task_count() == tasks &&
                        stage1.worker_count() == stage2.worker_count(),
                    "queries_per_task: assignments disagree on dimensions");
    return Rational(stage1.size() + stage2.size(), tasks);
}

}  // namespace crowdgraph
