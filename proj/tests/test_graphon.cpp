#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>

#include "crowdgraph/graphon.hpp"

namespace cg = crowdgraph;

TEST(GraphonSpec, Boundaries) {
    const auto s = cg::build_graphon(0.5, 0.5, 0.5);
    EXPECT_EQ(s.boundaries(), (std::array<double, 5>{0.0, 0.25, 0.5, 0.75, 1.0}));
    const auto full = cg::build_graphon(1.0, 0.4, 0.5);
    EXPECT_EQ(full.length(cg::Region::NegativeTask), 0.0);
    const auto thin = cg::build_graphon(0.5, 0.5, 1e-9);
    EXPECT_LT(thin.length(cg::Region::Hammer), 1e-8);
}

TEST(GraphonSpec, Validation) {
    EXPECT_THROW(cg::build_graphon(0.0, 0.5, 0.5), cg::InvalidArgument);
    EXPECT_THROW(cg::build_graphon(0.5, 1.0, 0.5), cg::InvalidArgument);
    EXPECT_THROW(cg::build_graphon(0.5, 0.5, 1.0), cg::InvalidArgument);
    EXPECT_THROW(cg::build_graphon(1.5, 0.5, 0.5), cg::InvalidArgument);
}

TEST(GraphonSpec, EndpointConventions) {
    const auto s = cg::build_graphon(0.5, 0.5, 0.5);
    EXPECT_EQ(s.region(0.0), cg::Region::PositiveTask);
    EXPECT_EQ(s.region(0.25), cg::Region::NegativeTask);
    EXPECT_EQ(s.region(0.5), cg::Region::Spammer);
    EXPECT_EQ(s.region(0.75), cg::Region::Hammer);
    EXPECT_EQ(s.region(1.0), cg::Region::Hammer);
    EXPECT_EQ(cg::eval_f(s, 0.25, 0.9), -1);
    EXPECT_THROW(s.region(1.01), cg::InvalidArgument);
    EXPECT_THROW(cg::eval_f(s, -0.1, 0.5), cg::InvalidArgument);
}

TEST(EvalF, Examples) {
    const auto s = cg::build_graphon(0.5, 0.5, 0.5);
    EXPECT_EQ(cg::eval_f(s, 0.1, 0.9), 1);
    EXPECT_EQ(cg::eval_f(s, 0.3, 0.9), -1);
    for (double y = 0.0; y <= 1.0; y += 0.01) EXPECT_EQ(cg::eval_f(s, 0.6, y), 0);
    EXPECT_EQ(cg::eval_f(s, 0.1, 0.2), 0);
    EXPECT_EQ(cg::eval_f(s, 0.8, 0.9), 0);
}

TEST(EvalF, Symmetric) {
    const auto s = cg::build_graphon(0.3, 0.6, 0.4);
    for (int a = 0; a <= 200; ++a)
        for (int b = 0; b <= 200; ++b) EXPECT_EQ(cg::eval_f(s, a / 200.0, b / 200.0), cg::eval_f(s, b / 200.0, a / 200.0));
}

TEST(EvalF, KernelMatrixHasRankAtMostTwo) {
    cg::Rng rng(4);
    for (int rep = 0; rep < 5; ++rep) {
        const auto s = cg::build_graphon(0.1 + 0.8 * rng.uniform01(), 0.1 + 0.8 * rng.uniform01(),
                                         0.1 + 0.8 * rng.uniform01());
        const int n = 150;
        std::vector<double> theta(n);
        for (auto& t : theta) t = rng.uniform01();
        Eigen::MatrixXd f(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) f(i, j) = cg::eval_f(s, theta[i], theta[j]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(f);
        EXPECT_LE(svd.singularValues()(2), 1e-9 * n);
    }
}

TEST(Eigensystem, Examples) {
    const auto e = cg::eigensystem(cg::build_graphon(0.5, 0.5, 0.5));
    EXPECT_NEAR(e.lambda1, std::sqrt(0.125), 1e-15);
    EXPECT_NEAR(e.lambda1, 0.353553, 1e-6);
    EXPECT_DOUBLE_EQ(e.lambda2, -e.lambda1);
    EXPECT_NEAR(e.amplitude_bound, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(e.q(1, cg::Region::Hammer), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(e.q(2, cg::Region::Hammer), -std::sqrt(2.0), 1e-15);
    EXPECT_EQ(e.q(1, cg::Region::Spammer), 0.0);
    EXPECT_NEAR(e.q(1, cg::Region::NegativeTask), -1.0, 1e-15);
}

TEST(VerifySpectral, ReferenceSpec) {
    const auto r = cg::verify_spectral(cg::build_graphon(0.5, 0.5, 0.5), 101);
    EXPECT_LE(r.max_pointwise_residual, 1e-12);
    EXPECT_LE(r.gram_residual, 1e-12);
    EXPECT_LE(r.eigen_equation_residual, 1e-12);
    EXPECT_LE(r.rayleigh_residual, 1e-12);
    EXPECT_LE(r.amplitude_residual, 1e-12);
    EXPECT_GT(r.grid_points, 90u);
}

TEST(VerifySpectral, RandomSpecsIncludingAlphaOne) {
    cg::Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const double alpha = rep % 10 == 0 ? 1.0 : 0.01 + 0.98 * rng.uniform01();
        const auto s = cg::build_graphon(alpha, 0.01 + 0.98 * rng.uniform01(), 0.01 + 0.98 * rng.uniform01());
        const auto r = cg::verify_spectral(s, 257);
        EXPECT_LE(r.max_pointwise_residual, 1e-12);
        EXPECT_LE(r.gram_residual, 1e-12);
        EXPECT_LE(r.eigen_equation_residual, 1e-12);
        EXPECT_LE(r.rayleigh_residual, 1e-12);
        EXPECT_LE(r.amplitude_residual, 1e-12);
    }
}

TEST(Sampling, ZeroDensityIsEmpty) {
    const auto s = cg::sample_graphon_matrix(cg::build_graphon(0.5, 0.5, 0.5), 50, 0.0, 1);
    EXPECT_TRUE(s.observed.empty());
    EXPECT_EQ(s.theta.size(), 50u);
}

TEST(Sampling, SymmetricStorageAndDeterminism) {
    const auto spec = cg::build_graphon(0.4, 0.6, 0.3);
    const auto s = cg::sample_graphon_matrix(spec, 40, 0.5, 9);
    for (std::size_t a = 0; a < 40; ++a)
        for (std::size_t b = 0; b < 40; ++b) EXPECT_EQ(s.value(a, b), s.value(b, a));
    for (double t : s.theta) {
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, 1.0);
    }
    const auto again = cg::sample_graphon_matrix(spec, 40, 0.5, 9);
    std::ostringstream x, y;
    s.write_csv(x);
    again.write_csv(y);
    EXPECT_EQ(x.str(), y.str());
    EXPECT_EQ(x.str().rfind("i,j,value\n", 0), 0u);
}

TEST(Sampling, EntryLawMatchesKernel) {
    const auto spec = cg::build_graphon(0.5, 0.5, 0.5);
    const auto s = cg::sample_graphon_matrix(spec, 2000, 1.0, 31);
    std::array<double, 3> plus{}, total{};
    for (const auto& e : s.observed) {
        const int f = cg::eval_f(spec, s.theta[e.i], s.theta[e.j]);
        total[f + 1] += 1;
        plus[f + 1] += e.value == 1;
    }
    EXPECT_EQ(plus[0], 0.0);
    EXPECT_EQ(plus[2], total[2]);
    ASSERT_GT(total[1], 1e6);
    const double mean_zero = (2 * plus[1] - total[1]) / total[1];
    EXPECT_NEAR(mean_zero, 0.0, 0.003);
}

TEST(Sampling, DensityIsRespected) {
    const auto s = cg::sample_graphon_matrix(cg::build_graphon(0.5, 0.5, 0.5), 600, 0.2, 2);
    const double pairs = 600.0 * 601.0 / 2.0;
    EXPECT_NEAR(s.observed.size() / pairs, 0.2, 4 * std::sqrt(0.16 / pairs));
}

TEST(Embedding, SmallestCase) {
    const cg::ResponseMatrix m(1, 1, {{0, 0, 1}});
    const auto y = cg::embed_crowd_matrix(m, 3);
    ASSERT_EQ(y.rows(), 2);
    EXPECT_EQ(y(0, 1), 1.0);
    EXPECT_EQ(y(1, 0), 1.0);
    EXPECT_TRUE(y(0, 0) == 1.0 || y(0, 0) == -1.0);
}

TEST(Embedding, SymmetricForAllSeeds) {
    const auto model = cg::make_spammer_hammer(12, 9, 0.5, 0.5, 1);
    std::vector<cg::TaskWorker> pairs;
    for (std::uint32_t i = 0; i < 12; ++i)
        for (std::uint32_t j = 0; j < 9; ++j) pairs.push_back({i, j});
    const auto m = cg::sample_responses(model, cg::Assignment(12, 9, pairs), 2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto y = cg::embed_crowd_matrix(m, seed);
        EXPECT_TRUE(y.isApprox(y.transpose(), 0.0));
        EXPECT_TRUE((y.array().abs() == 1.0).all());
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(y(i, 12 + j), *m.value(i, j));
    }
    EXPECT_THROW(cg::embed_crowd_matrix(cg::ResponseMatrix(2, 2, {{0, 0, 1}}), 0), cg::InvalidArgument);
}

TEST(Mse, Examples) {
    const Eigen::MatrixXd ey = Eigen::MatrixXd::Constant(4, 4, 0.3);
    EXPECT_EQ(cg::mse(ey, ey), 0.0);
    EXPECT_NEAR(cg::mse((ey.array() + 0.5).matrix(), ey), 0.25, 1e-15);
    cg::Rng rng(1);
    Eigen::MatrixXd y(10, 10);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.sign_with_probability(0.5);
    EXPECT_DOUBLE_EQ(cg::mse(y, Eigen::MatrixXd::Zero(10, 10)), 1.0);
    EXPECT_THROW(cg::mse(y, ey), cg::InvalidArgument);
}

TEST(Conventions, BinaryCenteredRoundTrip) {
    EXPECT_EQ(cg::to_binary(-1), 0);
    EXPECT_EQ(cg::to_binary(1), 1);
    EXPECT_EQ(cg::to_centered(0), -1);
    EXPECT_EQ(cg::to_centered(cg::to_binary(1)), 1);
}

TEST(Json, SpecRoundTrip) {
    const auto s = cg::build_graphon(0.3, 0.7, 0.2);
    const auto back = cg::graphon_from_json(nlohmann::json::parse(cg::to_json(s).dump()));
    EXPECT_EQ(back.boundaries(), s.boundaries());
    EXPECT_THROW(cg::graphon_from_json(nlohmann::json{{"alpha", 0.3}}), cg::InvalidArgument);
    EXPECT_THROW(cg::eigensystem(cg::build_graphon(0.5, 0.5, std::numeric_limits<double>::denorm_min())), cg::DegenerateSpectrum);
}
