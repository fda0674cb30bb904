#include "rbal/active_learning.hpp"
#include "rbal/synthetic.hpp"

#include <gtest/gtest.h>

using namespace rbal;

namespace {

Errc code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no rbal::Error thrown";
    return Errc::IoError;
}

std::vector<std::size_t> class_counts(const LabeledSet& s, std::size_t k) {
    std::vector<std::size_t> n(k, 0);
    for (auto l : s.labels)
        ++n[l.slot()];
    return n;
}

} // namespace

TEST(Synthetic, DefaultSpecTotals) {
    const auto spec = default_synthetic_spec(1);
    EXPECT_EQ(spec.total_count(), 1997u);
    const auto data = generate_synthetic(spec);
    EXPECT_EQ(data.size(), 1997u);
    EXPECT_EQ(data.dim(), 2);
    const auto n = class_counts(data, 4);
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_EQ(n[k], spec.classes[k].count);
}

TEST(Synthetic, Z24LikeLayout) {
    const auto data = generate_synthetic(z24_like_spec(1));
    EXPECT_EQ(data.size(), 3932u);
    EXPECT_EQ(data.dim(), 4);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i < 3476)
            EXPECT_LE(data.labels[i].index(), 2) << "row " << i;
        else
            EXPECT_GE(data.labels[i].index(), 3) << "row " << i;
    }
    EXPECT_EQ(data.labels[3475].index(), 1);
    EXPECT_EQ(data.labels[3476].index(), 3);
}

TEST(Synthetic, DeterministicPerSeed) {
    const auto a = generate_synthetic(default_synthetic_spec(5));
    const auto b = generate_synthetic(default_synthetic_spec(5));
    const auto c = generate_synthetic(default_synthetic_spec(6));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.features[i], b.features[i]);
        EXPECT_EQ(a.labels[i], b.labels[i]);
    }
    EXPECT_NE(a.features[0], c.features[0]);
}

TEST(Synthetic, SampleMomentsConverge) {
    auto spec = default_synthetic_spec(7);
    for (auto& c : spec.classes)
        c.count = 100'000;
    const auto data = generate_synthetic(spec);
    std::vector<Eigen::Vector2d> sum(4, Eigen::Vector2d::Zero());
    std::vector<Eigen::Matrix2d> sq(4, Eigen::Matrix2d::Zero());
    for (std::size_t i = 0; i < data.size(); ++i)
        sum[data.labels[i].slot()] += data.features[i];
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& cs = spec.classes[k];
        const Eigen::Vector2d mean = sum[k] / 1e5;
        for (int j = 0; j < 2; ++j)
            EXPECT_NEAR(mean[j], cs.mean[j], 3 * std::sqrt(cs.cov(j, j)) / std::sqrt(1e5));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto k = data.labels[i].slot();
        const Eigen::Vector2d r = data.features[i] - spec.classes[k].mean;
        sq[k] += r * r.transpose();
    }
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_LE((sq[k] / 1e5 - spec.classes[k].cov).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Synthetic, SeparableClustersGivePerfectDecisions) {
    SyntheticSpec spec;
    spec.seed = 3;
    const double centers[4][2] = {{-30, 0}, {-10, 0}, {10, 0}, {30, 0}};
    for (const auto& c : centers)
        spec.classes.push_back(detail::cluster({c[0], c[1]}, {1, 0, 0, 1}, 100));
    const auto data = generate_synthetic(spec);
    RunConfig cfg;
    cfg.seed = 1;
    const auto rep = make_repetition(data, 4, cfg);
    const auto post = fit(rep.pool, NiwParams::standard(2), DirichletParams::symmetric(4), 4);
    EXPECT_EQ(decision_accuracy(post, synthetic_maintenance_process(), rep.test), 1.0);
}

TEST(Synthetic, Errors) {
    auto spec = default_synthetic_spec(1);
    spec.classes[1].cov(0, 1) = spec.classes[1].cov(1, 0) = 2.0;
    EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), Errc::NonPosDefCovariance);

    spec = default_synthetic_spec(1);
    spec.classes[2].count = 0;
    EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), Errc::InvalidParameter);

    spec = default_synthetic_spec(1);
    spec.classes[0].mean = Eigen::Vector3d::Zero();
    EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), Errc::DimensionMismatch);

    spec = z24_like_spec(1);
    spec.segments.back().count += 1;
    EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), Errc::InvalidParameter);
}
