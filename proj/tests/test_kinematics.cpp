#include <gtest/gtest.h>

#include "nonsimple/errors.hpp"
#include "nonsimple/kinematics.hpp"
#include "oracles.hpp"

using namespace nonsimple;

namespace {

Tensor32 columns(const Vec3& a, const Vec3& b) {
    Tensor32 F;
    F.col(0) = a;
    F.col(1) = b;
    return F;
}

SymThirdTensor paraboloid_G() {
    SymThirdTensor G;
    G.at(2, 0, 0) = 1.0;
    G.at(2, 1, 1) = 1.0;
    return G;
}

} // namespace

TEST(Metric, IdentityEmbedding) {
    const MetricResult m = metric(identity_embedding());
    EXPECT_TRUE(m.C.isApprox(Mat2::Identity()));
    EXPECT_DOUBLE_EQ(m.J, 1.0);
}

TEST(Metric, UniformScaling) {
    const MetricResult m = metric(2.0 * identity_embedding());
    EXPECT_TRUE(m.C.isApprox(4.0 * Mat2::Identity()));
    EXPECT_DOUBLE_EQ(m.J, 4.0);
}

TEST(Metric, RankDeficientGivesZero) {
    const MetricResult m = metric(columns({1, 0, 0}, {1, 0, 0}));
    EXPECT_EQ(m.J, 0.0);
}

TEST(Metric, RotationInvariant) {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.1);
        const Mat3 Q = random_rotation(rng);
        const MetricResult a = metric(F), b = metric(Q * F);
        EXPECT_NEAR(a.J, b.J, 1e-13 * a.J);
        EXPECT_LE((a.C - b.C).norm(), 1e-13 * a.C.norm());
    }
}

TEST(UnitNormal, Examples) {
    EXPECT_TRUE(unit_normal(identity_embedding(), 1.0).isApprox(Vec3(0, 0, 1)));
    EXPECT_TRUE(unit_normal(columns({0, 1, 0}, {-1, 0, 0}), 1.0).isApprox(Vec3(0, 0, 1)));
    EXPECT_TRUE(unit_normal(columns({1, 0, 0}, {0, 0, 1}), 1.0).isApprox(Vec3(0, -1, 0)));
}

TEST(UnitNormal, DegenerateThrows) {
    EXPECT_THROW(unit_normal(columns({1, 0, 0}, {1, 0, 0}), 0.0), DegenerateMetric);
}

TEST(UnitNormal, MatchesCrossProductAndRotatesWithQ) {
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.1);
        const Mat3 Q = random_rotation(rng);
        const double J = metric(F).J;
        const Vec3 n = unit_normal(F, J);
        EXPECT_NEAR((n - oracle::cross_normal(F)).norm(), 0.0, 1e-13);
        EXPECT_NEAR(n.norm(), 1.0, 1e-14);
        EXPECT_NEAR(n.dot(F.col(0)), 0.0, 1e-13 * F.norm());
        EXPECT_NEAR((unit_normal(Q * F, J) - Q * n).norm(), 0.0, 1e-12);
    }
}

TEST(CurvatureSplit, PlanarFieldHasZeroK) {
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        Tensor32 F = random_deformation_gradient(rng, 0.2);
        F.row(2).setZero();
        if (metric(F).J < 0.1)
            continue;
        SymThirdTensor G = random_second_gradient(rng);
        G.c.row(2).setZero();
        EXPECT_EQ(curvature_split(G, F).K.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(CurvatureSplit, ParaboloidAtOrigin) {
    const CurvatureSplit s = curvature_split(paraboloid_G(), identity_embedding());
    EXPECT_TRUE(s.K.isApprox(Mat2::Identity()));
    EXPECT_EQ(s.christoffel.c.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CurvatureSplit, Cylinder) {
    for (double x : {0.0, 0.3, 1.7, -2.4}) {
        const Tensor32 F = columns({std::cos(x), 0, -std::sin(x)}, {0, 1, 0});
        SymThirdTensor G;
        G.at(0, 0, 0) = -std::sin(x);
        G.at(2, 0, 0) = -std::cos(x);
        const CurvatureSplit s = curvature_split(G, F);
        EXPECT_NEAR(s.K(0, 0), -1.0, 1e-14);
        EXPECT_NEAR(s.K(1, 1), 0.0, 1e-14);
        EXPECT_NEAR(s.K(0, 1), 0.0, 1e-14);
        EXPECT_NEAR(s.christoffel.c.cwiseAbs().maxCoeff(), 0.0, 1e-14);
    }
}

TEST(CurvatureSplit, RecompositionAndDualBasis) {
    Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.1);
        const SymThirdTensor G = random_second_gradient(rng);
        const Tensor32 A = dual_basis(F);
        const Mat2 delta = A.transpose() * F;
        EXPECT_LE((delta - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-11);
        const Vec3 n = oracle::cross_normal(F);
        EXPECT_LE(std::abs(A.col(0).dot(n)) + std::abs(A.col(1).dot(n)), 1e-11);
        const SymThirdTensor back = recompose(curvature_split(G, F), F);
        EXPECT_LE((back.c - G.c).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + G.norm()));
    }
}

TEST(Minors, ZeroTensor) {
    for (double d : minors(SymThirdTensor{}))
        EXPECT_EQ(d, 0.0);
}

TEST(Minors, SeparableQuadratic) {
    SymThirdTensor G;
    G.at(0, 0, 0) = 1.0;
    G.at(1, 1, 1) = 1.0;
    const Minors d = minors(G);
    for (int l = 0; l < 15; ++l)
        EXPECT_EQ(d[l], l == 5 ? 1.0 : 0.0) << "d" << l + 1;
}

TEST(Minors, Paraboloid) {
    const Minors d = minors(paraboloid_G());
    for (int l = 0; l < 15; ++l)
        EXPECT_EQ(d[l], l == 2 ? 1.0 : 0.0) << "d" << l + 1;
}

TEST(Minors, MatchRowPairEnumeration) {
    Rng rng(13);
    for (int k = 0; k < 300; ++k) {
        const SymThirdTensor G = random_second_gradient(rng);
        const Minors d = minors(G);
        const auto ref = oracle::minors_by_row_pairs(G);
        for (int l = 0; l < 15; ++l)
            EXPECT_NEAR(d[l], ref[l], 1e-13 * (1.0 + G.squared_norm())) << "d" << l + 1;
    }
}

TEST(Minors, QuadraticHomogeneity) {
    Rng rng(17);
    const SymThirdTensor G = random_second_gradient(rng);
    const Minors d = minors(G), d3 = minors(G * -3.0);
    for (int l = 0; l < 15; ++l)
        EXPECT_NEAR(d3[l], 9.0 * d[l], 1e-12 * (1.0 + std::abs(d[l])));
}

TEST(GaussianCurvature, Examples) {
    EXPECT_EQ(gaussian_curvature(Mat2::Zero(), 1.0), 0.0);
    EXPECT_DOUBLE_EQ(gaussian_curvature(Mat2::Identity(), 1.0), 1.0);
    EXPECT_EQ(gaussian_curvature((Mat2() << -1, 0, 0, 0).finished(), 1.0), 0.0);
    EXPECT_THROW(gaussian_curvature(Mat2::Identity(), 0.0), DegenerateMetric);
}

TEST(GaussianFromMinors, Paraboloid) {
    EXPECT_DOUBLE_EQ(gaussian_from_minors(Vec3(0, 0, 1), minors(paraboloid_G()), 1.0), 1.0);
}

TEST(GaussianFromMinors, PlanarStateIsZero) {
    Rng rng(19);
    SymThirdTensor G = random_second_gradient(rng);
    G.c.row(2).setZero();
    EXPECT_NEAR(gaussian_from_minors(Vec3(0, 0, 1), minors(G), 1.0), 0.0, 1e-15);
}

TEST(GaussianFromMinors, AgreesWithDetKOracle) {
    Rng rng(23);
    int checked = 0;
    while (checked < 1000) {
        const Tensor32 F = random_deformation_gradient(rng, 0.1);
        const SymThirdTensor G = random_second_gradient(rng);
        const KinematicState s = kinematic_state(G, F);
        const double ref = oracle::det_K_over_J2(G, F);
        const double scale = G.squared_norm() / (s.J * s.J);
        EXPECT_NEAR(s.kappa, ref, 1e-10 * scale);
        EXPECT_NEAR(gaussian_from_minors(s.n, s.minors, s.J), gaussian_curvature(s.K, s.J),
                    1e-10 * scale);
        ++checked;
    }
}

TEST(KinematicState, Invariants) {
    Rng rng(29);
    for (int k = 0; k < 100; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.1);
        const SymThirdTensor G = random_second_gradient(rng);
        const KinematicState s = kinematic_state(G, F);
        EXPECT_LE((s.C - F.transpose() * F).cwiseAbs().maxCoeff(), 1e-14 * (1 + F.squaredNorm()));
        EXPECT_NEAR(s.J, oracle::area_ratio(F), 1e-13 * s.J);
        EXPECT_NEAR(s.K(0, 1), s.K(1, 0), 0.0);
    }
}
