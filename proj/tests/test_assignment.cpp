#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "crowdgraph/assignment.hpp"
#include "crowdgraph/theory.hpp"

namespace cg = crowdgraph;

TEST(UniformAssignment, FullAndEmpty) {
    EXPECT_EQ(cg::uniform_assignment(7, 5, 5, 1).size(), 35u);
    EXPECT_TRUE(cg::uniform_assignment(7, 5, 0, 1).empty());
    EXPECT_THROW(cg::uniform_assignment(7, 5, 6, 1), cg::InvalidArgument);
}

TEST(UniformAssignment, DegreesAndLoads) {
    const auto a = cg::uniform_assignment(100, 50, 10, 3);
    for (auto deg : a.task_degrees()) EXPECT_EQ(deg, 10u);
    const auto loads = a.worker_loads();
    EXPECT_EQ(std::accumulate(loads.begin(), loads.end(), std::size_t{0}), 1000u);
    // each load is Binomial(100, 1/5): mean 20, sd 4
    for (auto l : loads) {
        EXPECT_GT(l, 2u);
        EXPECT_LT(l, 40u);
    }
}

TEST(Stage1Assignment, Examples) {
    const auto all = cg::stage1_assignment(6, 4, 6, 9);
    EXPECT_EQ(all.assignment.size(), 24u);
    EXPECT_EQ(all.tasks.size(), 6u);

    const auto none = cg::stage1_assignment(6, 4, 0, 9);
    EXPECT_TRUE(none.tasks.empty());
    EXPECT_TRUE(none.assignment.empty());

    const auto s = cg::stage1_assignment(1000, 240, 10, 9);
    EXPECT_EQ(s.assignment.size(), 2400u);
    EXPECT_TRUE(std::is_sorted(s.tasks.begin(), s.tasks.end()));
    for (auto i : s.tasks)
        for (std::uint32_t j = 0; j < 240; ++j) EXPECT_TRUE(s.assignment.contains(i, j));

    EXPECT_THROW(cg::stage1_assignment(5, 4, 6, 0), cg::InvalidArgument);
}

TEST(Stage2Assignment, SingleClusterTakesEveryone) {
    const cg::ClusterPartition one(4, {{0, 1, 2, 3}});
    const std::vector<std::uint32_t> tasks{0, 2};
    const auto a = cg::stage2_assignment(3, tasks, one, 4, 5);
    EXPECT_EQ(a.size(), 8u);
    for (auto i : tasks)
        for (std::uint32_t j = 0; j < 4; ++j) EXPECT_TRUE(a.contains(i, j));
    EXPECT_EQ(a.task_degrees()[1], 0u);
}

TEST(Stage2Assignment, DegreeIsLTimesC) {
    std::vector<int> labels(30);
    for (int j = 0; j < 30; ++j) labels[j] = j % 3;
    const auto part = cg::ClusterPartition::from_labels(labels);
    const std::vector<std::uint32_t> tasks{1, 3, 4, 8};
    const auto a = cg::stage2_assignment(10, tasks, part, 5, 2);
    const auto deg = a.task_degrees();
    for (auto i : tasks) EXPECT_EQ(deg[i], 15u);
    for (const auto& p : a.pairs()) EXPECT_TRUE(std::find(tasks.begin(), tasks.end(), p.task) != tasks.end());
    // exactly L from each cluster
    for (auto i : tasks) {
        std::vector<int> per(3, 0);
        for (const auto& p : a.pairs())
            if (p.task == i) ++per[part.cluster_of(p.worker)];
        EXPECT_EQ(per, (std::vector<int>{5, 5, 5}));
    }
}

TEST(Stage2Assignment, SmallClusterIsAnError) {
    const cg::ClusterPartition part(9, {{0, 1, 2, 3}, {4, 5, 6, 7, 8}});
    const std::vector<std::uint32_t> tasks{0};
    try {
        cg::stage2_assignment(1, tasks, part, 5, 0);
        FAIL() << "expected InsufficientCluster";
    } catch (const cg::InsufficientCluster& e) {
        EXPECT_EQ(e.cluster(), 0u);
        EXPECT_EQ(e.size(), 4u);
        EXPECT_EQ(e.needed(), 5u);
    }
}

TEST(Constructors, SeedDeterminism) {
    EXPECT_EQ(cg::uniform_assignment(40, 20, 5, 8).pairs().size(), 200u);
    auto same = [](const cg::Assignment& a, const cg::Assignment& b) {
        return std::equal(a.pairs().begin(), a.pairs().end(), b.pairs().begin(), b.pairs().end());
    };
    EXPECT_TRUE(same(cg::uniform_assignment(40, 20, 5, 8), cg::uniform_assignment(40, 20, 5, 8)));
    EXPECT_FALSE(same(cg::uniform_assignment(40, 20, 5, 8), cg::uniform_assignment(40, 20, 5, 9)));
    EXPECT_EQ(cg::stage1_assignment(40, 20, 7, 8).tasks, cg::stage1_assignment(40, 20, 7, 8).tasks);
    const cg::ClusterPartition part(6, {{0, 2, 4}, {1, 3, 5}});
    const std::vector<std::uint32_t> tasks{0, 1, 2, 3};
    EXPECT_TRUE(same(cg::stage2_assignment(4, tasks, part, 2, 3), cg::stage2_assignment(4, tasks, part, 2, 3)));
}

TEST(QueriesPerTask, Examples) {
    const cg::ClusterPartition part(6, {{0, 1, 2}, {3, 4, 5}});
    std::vector<std::uint32_t> all(10);
    std::iota(all.begin(), all.end(), 0u);
    const auto s2 = cg::stage2_assignment(10, all, part, 2, 1);
    EXPECT_EQ(cg::queries_per_task(cg::Assignment(10, 6), s2, 10), cg::Rational(4, 1));

    const auto s1 = cg::stage1_assignment(10, 6, 10, 1);
    EXPECT_EQ(cg::queries_per_task(s1.assignment, cg::Assignment(10, 6), 10), cg::Rational(6, 1));

    EXPECT_THROW(cg::queries_per_task(cg::Assignment(0, 6), cg::Assignment(0, 6), 0), cg::InvalidArgument);
}

TEST(QueriesPerTask, TheoremScheduleAtLargeT) {
    // W = 240, R = 1068, L = 60, d = 2, T = 10^5: (WR + Ld(T - R)) / T
    // exactly 121.2816; the two-term bound Ld + WR/T is 122.5632
    const std::size_t t = 100000, w = 240, r = 1068, l = 60;
    const cg::Rational q(w * r + l * 2 * (t - r), t);
    EXPECT_EQ(q, cg::Rational(1212816, 10000));
    const auto sched = cg::theorem1_params(2, 0.9, 0.1, w, t);
    EXPECT_EQ(sched.r, r);
    EXPECT_EQ(sched.l, l);
    EXPECT_NEAR(sched.budget_ld + sched.budget_wr_over_t, 122.5632, 1e-12);
    EXPECT_LE(q.value(), sched.budget_ld + sched.budget_wr_over_t);

    // the same identity from actual assignments at a smaller T
    const std::size_t tt = 3000;
    const auto s1 = cg::stage1_assignment(tt, w, r, 4);
    std::vector<int> labels(w);
    for (std::size_t j = 0; j < w; ++j) labels[j] = static_cast<int>(j % 2);
    const auto part = cg::ClusterPartition::from_labels(labels);
    const auto rest = cg::complement_tasks(tt, s1.tasks);
    const auto s2 = cg::stage2_assignment(tt, rest, part, l, 5);
    EXPECT_EQ(cg::queries_per_task(s1.assignment, s2, tt), cg::Rational(w * r + l * 2 * (tt - r), tt));
    EXPECT_LE(cg::queries_per_task(s1.assignment, s2, tt).value(), l * 2.0 + double(w) * r / tt);
}

TEST(QueriesPerTask, BudgetIdentityRandomised) {
    cg::Rng rng(77);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t t = 20 + rng.below(200);
        const std::size_t w = 10 + rng.below(40);
        const std::size_t c = 1 + rng.below(4);
        const std::size_t r = rng.below(t + 1);
        std::vector<int> labels(w);
        for (std::size_t j = 0; j < w; ++j) labels[j] = static_cast<int>(j % c);
        const auto part = cg::ClusterPartition::from_labels(labels);
        const std::size_t l = 1 + rng.below(part.smallest_cluster_size());
        const auto s1 = cg::stage1_assignment(t, w, r, rep);
        const auto rest = cg::complement_tasks(t, s1.tasks);
        const auto s2 = cg::stage2_assignment(t, rest, part, l, rep + 100);
        const auto q = cg::queries_per_task(s1.assignment, s2, t);
        EXPECT_LE(q.value(), double(l * part.cluster_count()) + double(w * r) / double(t) + 1e-12);
        for (auto i : rest) EXPECT_EQ(s2.task_degrees()[i], l * part.cluster_count());
    }
}

TEST(AssignmentType, ValidationMergeAndCsv) {
    EXPECT_THROW(cg::Assignment(2, 2, {{2, 0}}), cg::IndexOutOfRange);
    EXPECT_THROW(cg::Assignment(2, 2, {{0, 0}, {0, 0}}), cg::InvalidArgument);
    const cg::Assignment a(2, 2, {{1, 1}, {0, 1}});
    const cg::Assignment b(2, 2, {{0, 0}});
    const auto m = cg::merge(a, b);
    EXPECT_EQ(m.size(), 3u);
    std::ostringstream os;
    m.write_csv(os);
    EXPECT_EQ(os.str(), "task,worker\n0,0\n0,1\n1,1\n");
    EXPECT_THROW(cg::merge(a, cg::Assignment(3, 2)), cg::InvalidArgument);
}

TEST(ComplementTasks, Basic) {
    const std::vector<std::uint32_t> s{1, 3};
    EXPECT_EQ(cg::complement_tasks(5, s), (std::vector<std::uint32_t>{0, 2, 4}));
    EXPECT_TRUE(cg::complement_tasks(0, {}).empty());
}

TEST(ClusterPartitionType, Validation) {
    EXPECT_THROW(cg::ClusterPartition(3, {{0, 1}}), cg::InvalidArgument);
    EXPECT_THROW(cg::ClusterPartition(3, {{0, 1}, {1, 2}}), cg::InvalidArgument);
    EXPECT_THROW(cg::ClusterPartition(2, {{0, 1}, {}}), cg::InvalidArgument);
    const auto p = cg::ClusterPartition::from_labels(std::vector<int>{3, 1, 3, 0});
    EXPECT_EQ(p.cluster_count(), 3u);
    EXPECT_EQ(p.cluster(0), (std::vector<std::uint32_t>{0, 2}));
    EXPECT_TRUE(p.same_grouping(cg::ClusterPartition(4, {{3}, {1}, {2, 0}})));
    EXPECT_FALSE(p.same_grouping(cg::ClusterPartition(4, {{0, 1, 2}, {3}})));
}
