#pragma once

// Monte Carlo harness for the two-stage algorithm versus majority vote, and
// for stage-1 clustering recovery.
//
// Trial i of an experiment with master seed m runs entirely on
// derive_seed(m, i) (clustering sweeps use derive_seed(derive_seed(m, g), i)
// for grid point g). Within a trial, fixed sub-streams of that seed drive the
// model, each assignment, each response draw and the tie coins. Trials are
// independent and may run on several threads; records are ordered by trial.

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "crowdgraph/assignment.hpp"
#include "crowdgraph/estimators.hpp"
#include "crowdgraph/model.hpp"
#include "crowdgraph/theory.hpp"
#include "json.hpp"

namespace crowdgraph {

enum class ExperimentKind { Tradeoff, Clustering };
enum class PartitionSource { Stage1, Oracle };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Tradeoff;
    int d = 2;
    double p = 0.9;
    double alpha = 0.1;  // target error; drives the theorem schedule
    std::size_t tasks = 5000;
    std::size_t workers = 240;
    std::size_t trials = 200;
    std::uint64_t seed = 1;

    bool theorem_schedule = true;  // otherwise r, l, xi below are used
    std::size_t r = 0;
    std::size_t l = 1;
    double xi = 0.75;

    PartitionSource partition = PartitionSource::Stage1;
    std::size_t mv_budget = 0;  // 0: match the two-stage design's per-task budget

    std::vector<std::size_t> r_grid;  // clustering sweep; empty means {theorem R}
    unsigned threads = 0;             // 0: hardware concurrency
};

/// The schedule actually used by a trial.
struct ResolvedSchedule {
    std::size_t r = 0;
    std::size_t l = 1;
    double xi = 0.75;
};

inline ResolvedSchedule resolve_schedule(const ExperimentConfig& c) {
    if (!c.theorem_schedule) return {c.r, c.l, c.xi};
    const auto t = theorem1_params(c.d, c.p, c.alpha, c.workers, c.tasks);
    return {t.r, t.l, t.xi};
}

inline void validate(const ExperimentConfig& c) {
    using detail::require;
    require(c.trials >= 1, "config: trials must be at least 1");
    require(c.d >= 1, "config: d must be positive");
    require(c.p >= 0.5 && c.p <= 1.0, "config: p must lie in [1/2, 1]");
    require(c.tasks >= 1 && c.workers >= 2, "config: need T >= 1 and W >= 2");
    if (c.theorem_schedule) {
        require(c.p > 0.5, "config: the theorem schedule needs p > 1/2");
        require(c.alpha > 0.0 && c.alpha < 1.0, "config: alpha must lie in (0, 1)");
        const auto t = theorem1_params(c.d, c.p, c.alpha, c.workers, c.tasks);
        require(t.workers_sufficient, fmt::format("config: W = {} is below the theorem minimum {}", c.workers, t.w_min));
        if (c.partition == PartitionSource::Stage1 || c.kind == ExperimentKind::Clustering) {
            require(t.tasks_sufficient, fmt::format("config: T = {} is below the theorem R = {}", c.tasks, t.r));
        }
    } else {
        require(c.l >= 1, "config: L must be at least 1");
        require(c.xi > 0.5 && c.xi < 1.0, "config: xi must lie in (1/2, 1)");
        require(c.r <= c.tasks, "config: R exceeds T");
    }
    for (auto r : c.r_grid) require(r <= c.tasks, "config: R grid value exceeds T");
    require(c.mv_budget <= c.workers, "config: majority-vote budget exceeds W");
}

struct TrialRecord {
    std::size_t trial = 0;
    std::string method;
    Rational queries_per_task;      // exact |E| / T
    std::size_t max_queries = 0;    // largest per-task degree
    Rational error;                 // exact error fraction (or pair disagreement for clustering)
    std::optional<bool> recovered;  // exact recovery of the type partition
    std::optional<std::size_t> clusters;
    std::uint64_t seed = 0;
    bool failed = false;            // some cluster was smaller than L
    double budget_ld = 0.0;         // L * C
    double budget_wr_over_t = 0.0;  // W * R / T
};

inline constexpr const char* kRecordHeader = "trial,method,queries_per_task,error,recovered,C,seed";

inline void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << kRecordHeader << '\n';
    for (const auto& r : records) {
        os << fmt::format("{},{},{},{},{},{},{}\n", r.trial, r.method, r.queries_per_task.value(), r.error.value(),
                          r.recovered ? (*r.recovered ? "1" : "0") : "",
                          r.clusters ? std::to_string(*r.clusters) : std::string(), r.seed);
    }
}

/// Runs fn(i) for i in [0, n) on up to `threads` threads; results in index order.
template <class Fn>
auto run_indexed(std::size_t n, unsigned threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n && !failed;) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Concatenates response matrices over disjoint pairs.
inline ResponseMatrix combine(const ResponseMatrix& a, const ResponseMatrix& b) {
    std::vector<Response> all(a.entries().begin(), a.entries().end());
    all.insert(all.end(), b.entries().begin(), b.entries().end());
    return ResponseMatrix(a.task_count(), a.worker_count(), std::move(all));
}

/// Fraction of worker pairs on which "same cluster" disagrees with "same type".
inline Rational pair_disagreement(const ClusterPartition& estimated, const ClusterPartition& truth) {
    const std::size_t w = truth.worker_count();
    std::size_t bad = 0;
    for (std::size_t a = 0; a < w; ++a) {
        for (std::size_t b = a + 1; b < w; ++b) {
            bad += (estimated.cluster_of(a) == estimated.cluster_of(b)) != (truth.cluster_of(a) == truth.cluster_of(b));
        }
    }
    return w < 2 ? Rational(0, 1) : Rational(bad, w * (w - 1) / 2);
}

/// Everything one tradeoff trial produced.
struct TradeoffTrial {
    std::uint64_t seed = 0;
    CrowdModel model;
    Stage1Assignment stage1;
    ClusterPartition partition;
    ClusterPartition true_partition;
    std::optional<Assignment> stage2;  // empty when a cluster was smaller than L
    std::optional<EstimateVector> two_stage;
    Assignment mv_assignment;
    EstimateVector majority;
    TrialRecord two_stage_record;
    TrialRecord majority_record;
};

inline TradeoffTrial run_tradeoff_trial(const ExperimentConfig& c, const ResolvedSchedule& s, std::size_t index,
                                        std::uint64_t seed) {
    auto model = make_uniform_dtype(c.tasks, c.workers, c.d, c.p, derive_seed(seed, 0));
    const auto& types = model.get_if<DType>()->worker_types;
    auto truth = ClusterPartition::from_labels(types);

    const std::size_t r = c.partition == PartitionSource::Stage1 ? s.r : 0;
    auto stage1 = stage1_assignment(c.tasks, c.workers, r, derive_seed(seed, 1));
    auto responses1 = sample_responses(model, stage1.assignment, derive_seed(seed, 2));
    auto partition = c.partition == PartitionSource::Stage1 ? cluster_workers(responses1, stage1.tasks, s.xi) : truth;

    const double t = static_cast<double>(c.tasks);
    TrialRecord ts;
    ts.trial = index;
    ts.method = "two_stage";
    ts.seed = seed;
    ts.recovered = partition.same_grouping(truth);
    ts.clusters = partition.cluster_count();
    ts.budget_ld = static_cast<double>(s.l * partition.cluster_count());
    ts.budget_wr_over_t = static_cast<double>(c.workers * r) / t;

    std::optional<Assignment> stage2;
    std::optional<EstimateVector> estimate;
    const auto rest = complement_tasks(c.tasks, stage1.tasks);
    try {
        stage2 = stage2_assignment(c.tasks, rest, partition, s.l, derive_seed(seed, 3));
    } catch (const InsufficientCluster&) {
        ts.failed = true;
    }
    if (stage2) {
        auto responses = combine(responses1, sample_responses(model, *stage2, derive_seed(seed, 4)));
        estimate = estimate_two_stage(responses, partition, derive_seed(seed, 5));
        ts.error = error_rate(*estimate, model.answers());
        ts.queries_per_task = queries_per_task(stage1.assignment, *stage2, c.tasks);
        const auto deg = merge(stage1.assignment, *stage2).task_degrees();
        ts.max_queries = *std::max_element(deg.begin(), deg.end());
        if (ts.budget_ld + ts.budget_wr_over_t < ts.queries_per_task.value() - 1e-9) {
            throw std::logic_error("tradeoff: audited budget exceeds L*C + W*R/T");
        }
    } else {
        ts.error = Rational(1, 1);
        ts.queries_per_task = queries_per_task(stage1.assignment, Assignment(c.tasks, c.workers), c.tasks);
        ts.max_queries = r > 0 ? c.workers : 0;
    }

    // Majority vote at the design's per-task budget, rounded up.
    std::size_t k = c.mv_budget;
    if (k == 0) {
        const auto design = Rational(c.workers * r + s.l * partition.cluster_count() * (c.tasks - r), c.tasks);
        k = std::min<std::size_t>(c.workers, (design.num() + design.den() - 1) / design.den());
        k = std::max<std::size_t>(k, 1);
    }
    auto mv_assignment = uniform_assignment(c.tasks, c.workers, k, derive_seed(seed, 6));
    auto mv_responses = sample_responses(model, mv_assignment, derive_seed(seed, 7));
    auto majority = estimate_majority(mv_responses, derive_seed(seed, 8));

    TrialRecord mv;
    mv.trial = index;
    mv.method = "majority_vote";
    mv.seed = seed;
    mv.queries_per_task = Rational(mv_assignment.size(), c.tasks);
    mv.max_queries = k;
    mv.error = error_rate(majority, model.answers());

    return {seed,
            std::move(model),
            std::move(stage1),
            std::move(partition),
            std::move(truth),
            std::move(stage2),
            std::move(estimate),
            std::move(mv_assignment),
            std::move(majority),
            std::move(ts),
            std::move(mv)};
}

/// Per trial: two-stage record then majority-vote record.
inline std::vector<TrialRecord> run_tradeoff_experiment(const ExperimentConfig& c) {
    validate(c);
    const auto schedule = resolve_schedule(c);
    auto pairs = run_indexed(c.trials, c.threads, [&](std::size_t i) {
        auto trial = run_tradeoff_trial(c, schedule, i, derive_seed(c.seed, i));
        return std::pair{std::move(trial.two_stage_record), std::move(trial.majority_record)};
    });
    std::vector<TrialRecord> out;
    out.reserve(2 * pairs.size());
    for (auto& [a, b] : pairs) {
        out.push_back(std::move(a));
        out.push_back(std::move(b));
    }
    return out;
}

inline std::string recovery_method_name(std::size_t r) { return "stage1_R" + std::to_string(r); }

inline TrialRecord run_clustering_trial(const ExperimentConfig& c, std::size_t r, double xi, std::size_t index,
                                        std::uint64_t seed) {
    auto model = make_uniform_dtype(c.tasks, c.workers, c.d, c.p, derive_seed(seed, 0));
    auto truth = ClusterPartition::from_labels(model.get_if<DType>()->worker_types);
    auto stage1 = stage1_assignment(c.tasks, c.workers, r, derive_seed(seed, 1));
    auto responses = sample_responses(model, stage1.assignment, derive_seed(seed, 2));
    auto partition = cluster_workers(responses, stage1.tasks, xi);

    TrialRecord rec;
    rec.trial = index;
    rec.method = recovery_method_name(r);
    rec.seed = seed;
    rec.queries_per_task = Rational(stage1.assignment.size(), c.tasks);
    rec.max_queries = r > 0 ? c.workers : 0;
    rec.error = pair_disagreement(partition, truth);
    rec.recovered = partition.same_grouping(truth);
    rec.clusters = partition.cluster_count();
    rec.budget_wr_over_t = static_cast<double>(c.workers * r) / static_cast<double>(c.tasks);
    return rec;
}

/// The sweep grid: the configured R values, or the theorem R alone.
inline std::vector<std::size_t> recovery_grid(const ExperimentConfig& c) {
    if (!c.r_grid.empty()) return c.r_grid;
    return {resolve_schedule(c).r};
}

/// Records grouped by grid point, in grid order, then by trial.
inline std::vector<TrialRecord> run_clustering_recovery_experiment(const ExperimentConfig& c) {
    validate(c);
    const auto schedule = resolve_schedule(c);
    const auto grid = recovery_grid(c);
    std::vector<TrialRecord> out;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto base = derive_seed(c.seed, g);
        auto recs = run_indexed(c.trials, c.threads, [&](std::size_t i) {
            return run_clustering_trial(c, grid[g], schedule.xi, i, derive_seed(base, i));
        });
        out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
    return out;
}

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

/// Wilson score interval for k successes out of n.
inline Interval wilson_interval(double k, double n, double z = 1.959963984540054) {
    if (n <= 0.0) return {0.0, 1.0};
    const double phat = k / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct MethodSummary {
    std::string method;
    std::size_t trials = 0;
    std::size_t failed = 0;
    double mean_error = 0.0;
    Interval error_interval;  // Wilson, pooled over trials x T task outcomes
    double mean_queries_per_task = 0.0;
    std::size_t max_queries = 0;
    std::size_t recovered = 0;
    Interval recovery_interval;  // Wilson over trials
    double mean_budget_ld = 0.0;
    double mean_budget_wr_over_t = 0.0;
};

/// Aggregates records by method, in order of first appearance. Error
/// intervals treat the pooled task outcomes as binomial with `tasks` tasks per
/// trial; failed trials enter with error 1.
inline std::vector<MethodSummary> summarize(const std::vector<TrialRecord>& records, std::size_t tasks) {
    std::vector<MethodSummary> out;
    for (const auto& r : records) {
        auto it = std::find_if(out.begin(), out.end(), [&](const MethodSummary& m) { return m.method == r.method; });
        if (it == out.end()) {
            out.push_back({});
            it = std::prev(out.end());
            it->method = r.method;
        }
        ++it->trials;
        it->failed += r.failed;
        it->mean_error += r.error.value();
        it->mean_queries_per_task += r.queries_per_task.value();
        it->max_queries = std::max(it->max_queries, r.max_queries);
        it->recovered += r.recovered.value_or(false);
        it->mean_budget_ld += r.budget_ld;
        it->mean_budget_wr_over_t += r.budget_wr_over_t;
    }
    for (auto& m : out) {
        const double n = static_cast<double>(m.trials);
        m.mean_error /= n;
        m.mean_queries_per_task /= n;
        m.mean_budget_ld /= n;
        m.mean_budget_wr_over_t /= n;
        const double outcomes = n * static_cast<double>(tasks);
        m.error_interval = wilson_interval(m.mean_error * outcomes, outcomes);
        m.recovery_interval = wilson_interval(static_cast<double>(m.recovered), n);
    }
    return out;
}

inline nlohmann::json to_json(const MethodSummary& m) {
    return {{"method", m.method},
            {"trials", m.trials},
            {"failed", m.failed},
            {"mean_error", m.mean_error},
            {"error_wilson95", {m.error_interval.lower, m.error_interval.upper}},
            {"mean_queries_per_task", m.mean_queries_per_task},
            {"max_queries_per_task", m.max_queries},
            {"recovered", m.recovered},
            {"recovery_wilson95", {m.recovery_interval.lower, m.recovery_interval.upper}},
            {"mean_budget_Ld", m.mean_budget_ld},
            {"mean_budget_WR_over_T", m.mean_budget_wr_over_t}};
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j = {{"kind", c.kind == ExperimentKind::Tradeoff ? "tradeoff" : "clustering"},
                        {"d", c.d},
                        {"p", c.p},
                        {"alpha", c.alpha},
                        {"T", c.tasks},
                        {"W", c.workers},
                        {"trials", c.trials},
                        {"seed", c.seed},
                        {"schedule", c.theorem_schedule ? "theorem" : "explicit"},
                        {"partition", c.partition == PartitionSource::Stage1 ? "stage1" : "oracle"},
                        {"mv_budget", c.mv_budget},
                        {"R_grid", c.r_grid},
                        {"threads", c.threads}};
    if (!c.theorem_schedule) {
        j["R"] = c.r;
        j["L"] = c.l;
        j["xi"] = c.xi;
    }
    return j;
}

/// Reads a config; missing keys keep their defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = {}) {
    try {
        if (j.contains("kind")) {
            const auto k = j.at("kind").get<std::string>();
            detail::require(k == "tradeoff" || k == "clustering", "config: kind must be tradeoff or clustering");
            c.kind = k == "tradeoff" ? ExperimentKind::Tradeoff : ExperimentKind::Clustering;
        }
        if (j.contains("d")) c.d = j.at("d").get<int>();
        if (j.contains("p")) c.p = j.at("p").get<double>();
        if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
        if (j.contains("T")) c.tasks = j.at("T").get<std::size_t>();
        if (j.contains("W")) c.workers = j.at("W").get<std::size_t>();
        if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("schedule")) {
            const auto s = j.at("schedule").get<std::string>();
            detail::require(s == "theorem" || s == "explicit", "config: schedule must be theorem or explicit");
            c.theorem_schedule = s == "theorem";
        }
        if (j.contains("R")) c.r = j.at("R").get<std::size_t>();
        if (j.contains("L")) c.l = j.at("L").get<std::size_t>();
        if (j.contains("xi")) c.xi = j.at("xi").get<double>();
        if (j.contains("partition")) {
            const auto s = j.at("partition").get<std::string>();
            detail::require(s == "stage1" || s == "oracle", "config: partition must be stage1 or oracle");
            c.partition = s == "stage1" ? PartitionSource::Stage1 : PartitionSource::Oracle;
        }
        if (j.contains("mv_budget")) c.mv_budget = j.at("mv_budget").get<std::size_t>();
        if (j.contains("R_grid")) c.r_grid = j.at("R_grid").get<std::vector<std::size_t>>();
        if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
}

}  // namespace crowdgraph
