#include <gtest/gtest.h>

#include "nonsimple/energy.hpp"
#include "nonsimple/errors.hpp"
#include "oracles.hpp"

using namespace nonsimple;
using nlohmann::json;

namespace {

MaterialParams split_params(double cK = 1.3, double cG = 0.7) {
    MaterialParams m;
    m.split_mode = true;
    m.c_K = cK;
    m.c_Gamma = cG;
    return m;
}

// Componentwise fourth-order differences of psi.total in the stored coordinates.
// The stored mixed slot moves G_{i12} and G_{i21} together, hence the factor 2.
void check_gradient(const SymThirdTensor& G, const Tensor32& F, const MaterialParams& mp,
                    double tol) {
    const PsiGradient pg = psi_grad(G, F, mp);
    const double h = 1e-5;
    double scale = 1.0;
    scale = std::max(scale, pg.Psi_G.c.cwiseAbs().maxCoeff() * 2.0);
    scale = std::max(scale, pg.Psi_F.cwiseAbs().maxCoeff());
    for (int i = 0; i < 3; ++i) {
        for (int s = 0; s < 3; ++s) {
            const double fd = oracle::fd4(
                [&](double e) {
                    SymThirdTensor Gp = G;
                    Gp.c(i, s) += e;
                    return psi(Gp, F, mp).total;
                },
                h);
            const double an = (s == 2 ? 2.0 : 1.0) * pg.Psi_G.c(i, s);
            EXPECT_NEAR(an, fd, tol * scale) << "Psi_G(" << i << "," << s << ")";
        }
        for (int a = 0; a < 2; ++a) {
            const double fd = oracle::fd4(
                [&](double e) {
                    Tensor32 Fp = F;
                    Fp(i, a) += e;
                    return psi(G, Fp, mp).total;
                },
                h);
            EXPECT_NEAR(pg.Psi_F(i, a), fd, tol * scale) << "Psi_F(" << i << "," << a << ")";
        }
    }
}

} // namespace

TEST(Membrane, Examples) {
    const MaterialParams mp;
    EXPECT_NEAR(membrane_energy(Mat2::Identity(), mp), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(membrane_energy(Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix(), mp), 4.5);
    double prev = 0.0;
    for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const double w = membrane_energy(t * Mat2::Identity(), mp);
        EXPECT_GT(w, prev);
        prev = w;
    }
    EXPECT_GT(prev, 1e7);
    EXPECT_THROW(membrane_energy(Mat2::Zero(), mp), DegenerateMetric);
}

TEST(Barrier, NormalizationAndConvexity) {
    const MaterialParams mp;
    EXPECT_EQ(barrier_energy(1.0, mp), 0.0);
    const double slope = oracle::fd4([&](double e) { return barrier_energy(1.0 + e, mp); }, 1e-4);
    EXPECT_NEAR(slope, 0.0, 1e-10);
    EXPECT_GT(barrier_energy(1e-3, mp), 1e11);
    const double h = 1e-2;
    for (double J = 0.05; J < 5.0; J += 0.05) {
        EXPECT_GE(barrier_energy(J, mp), 0.0);
        const double d2 =
            barrier_energy(J + h, mp) - 2 * barrier_energy(J, mp) + barrier_energy(J - h, mp);
        EXPECT_GT(d2, 0.0) << J;
    }
    EXPECT_THROW(barrier_energy(0.0, mp), DegenerateMetric);
}

TEST(Bending, Examples) {
    const MaterialParams mp;
    EXPECT_EQ(bending_energy(SymThirdTensor{}, identity_embedding(), mp), 0.0);
    SymThirdTensor G;
    G.at(0, 0, 0) = 1.0;
    G.at(1, 1, 1) = 1.0;
    G.at(2, 0, 1) = 1.0; // counts twice: |G|^2 = 4
    EXPECT_DOUBLE_EQ(G.squared_norm(), 4.0);
    EXPECT_DOUBLE_EQ(bending_energy(G, identity_embedding(), mp), 4.0);
}

TEST(Bending, SplitPlanarStateIsAllTangential) {
    const MaterialParams mp = split_params(2.0, 0.5);
    Rng rng(2);
    SymThirdTensor G = random_second_gradient(rng);
    G.c.row(2).setZero();
    const double expected = 0.5 / mp.p * std::pow(G.norm(), mp.p);
    EXPECT_NEAR(bending_energy(G, identity_embedding(), mp), expected, 1e-14 * expected);
}

TEST(Bending, SplitPureNormalIsAllCurvature) {
    const MaterialParams mp = split_params(2.0, 0.0);
    SymThirdTensor G;
    G.at(2, 0, 0) = 1.5;
    G.at(2, 0, 1) = -0.5;
    const double expected = 2.0 / mp.p * std::pow(G.norm(), mp.p);
    EXPECT_NEAR(bending_energy(G, identity_embedding(), mp), expected, 1e-14 * expected);
}

TEST(Psi, Examples) {
    const MaterialParams mp;
    const EnergyBreakdown e0 = psi(SymThirdTensor{}, identity_embedding(), mp);
    EXPECT_NEAR(e0.total, 0.0, 1e-15);

    const EnergyBreakdown e2 = psi(SymThirdTensor{}, 2.0 * identity_embedding(), mp);
    // W_m(4 I) = (8 + 1/16 - 3) + (16 + 8/16 - 3); psi_J(4) = 4^-4 + 16 - 5.
    EXPECT_NEAR(e2.membrane, 5.0625 + 13.5, 1e-13);
    EXPECT_NEAR(e2.barrier, 1.0 / 256.0 + 11.0, 1e-13);
    EXPECT_EQ(e2.bending, 0.0);
    EXPECT_DOUBLE_EQ(e2.total, e2.membrane + e2.bending + e2.barrier);
}

TEST(Psi, BoundedBelowByBendingTerm) {
    const MaterialParams mp;
    Rng rng(31);
    for (int k = 0; k < 500; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.5, 2.0);
        const SymThirdTensor G = random_second_gradient(rng);
        const EnergyBreakdown e = psi(G, F, mp);
        EXPECT_GE(e.total, mp.c_b / mp.p * std::pow(G.norm(), mp.p) - 1e-12);
        EXPECT_GE(e.membrane, -1e-12);
        EXPECT_GE(e.barrier, -1e-12);
    }
}

TEST(Psi, ZeroOnlyAtNaturalState) {
    const MaterialParams mp;
    Rng rng(37);
    for (int k = 0; k < 200; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.2);
        EXPECT_GT(psi(SymThirdTensor{}, F, mp).total, 0.0);
    }
    // Rotated identity is still natural.
    const Mat3 Q = random_rotation(rng);
    EXPECT_NEAR(psi(SymThirdTensor{}, Q * identity_embedding(), mp).total, 0.0, 1e-13);
}

TEST(PsiGrad, StationaryAtOrigin) {
    const MaterialParams mp;
    Rng rng(41);
    const PsiGradient g0 = psi_grad(SymThirdTensor{}, random_deformation_gradient(rng, 0.3), mp);
    EXPECT_EQ(g0.Psi_G.c.cwiseAbs().maxCoeff(), 0.0);
    const PsiGradient g1 = psi_grad(SymThirdTensor{}, identity_embedding(), mp);
    EXPECT_LE(g1.Psi_F.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PsiGrad, MatchesFiniteDifferencesDefault) {
    MaterialParams mp;
    mp.alpha = 0.8;
    mp.beta = 1.7;
    mp.c_b = 0.6;
    Rng rng(43);
    for (int k = 0; k < 100; ++k)
        check_gradient(random_second_gradient(rng), random_deformation_gradient(rng, 0.2, 3.0),
                       mp, 1e-6);
}

TEST(PsiGrad, MatchesFiniteDifferencesSplit) {
    const MaterialParams mp = split_params();
    Rng rng(47);
    for (int k = 0; k < 100; ++k)
        check_gradient(random_second_gradient(rng), random_deformation_gradient(rng, 0.2, 3.0),
                       mp, 1e-6);
}

TEST(PsiGrad, MatchesFiniteDifferencesOtherExponents) {
    MaterialParams mp;
    mp.p = 3.0;
    mp.q = 6.0;
    Rng rng(53);
    for (int k = 0; k < 50; ++k)
        check_gradient(random_second_gradient(rng), random_deformation_gradient(rng, 0.3, 3.0),
                       mp, 1e-6);
}

TEST(Params, ValidationReportsFieldPath) {
    MaterialParams mp;
    mp.alpha = -1;
    try {
        mp.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "material.alpha");
    }
    MaterialParams mp2;
    mp2.p = 2.0;
    EXPECT_THROW(mp2.validate(), ConfigError);
    MaterialParams mp3 = split_params(1.0, 0.0);
    EXPECT_NO_THROW(mp3.validate());
}

TEST(Hypothesis, GrowthThreshold) {
    Rng rng(59);
    MaterialParams a;
    const HypothesisReport ra = hypothesis_check(a, 200, rng);
    EXPECT_EQ(ra.growth.status, "pass");
    EXPECT_DOUBLE_EQ(ra.growth.witness_constants["threshold"].get<double>(), 4.0);

    MaterialParams b;
    b.p = 3.0;
    b.q = 2.0;
    const HypothesisReport rb = hypothesis_check(b, 200, rng);
    EXPECT_EQ(rb.growth.status, "fail");
    EXPECT_DOUBLE_EQ(rb.growth.witness_constants["threshold"].get<double>(), 6.0);
    EXPECT_FALSE(rb.passed());
}

TEST(Hypothesis, ExponentRelationFeedingTheLowerBound) {
    for (double p : {2.5, 3.0, 4.0, 6.0, 10.0}) {
        MaterialParams m;
        m.p = p;
        m.q = m.growth_threshold();
        EXPECT_LE(-m.q * (p - 2.0) / p + 1.0, -1.0 + 1e-12);
        m.q *= 1.5;
        EXPECT_LE(-m.q * (p - 2.0) / p + 1.0, -1.0);
    }
}

TEST(Hypothesis, DefaultDensityWitnessedConstants) {
    Rng rng(61);
    const HypothesisReport r = hypothesis_check(MaterialParams{}, 10000, rng, 0.1, 10.0);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.coercivity.status, "pass");
    EXPECT_EQ(r.upper.status, "pass");
    for (const char* k : {"C_psi", "C_psi_G", "C_psi_F"})
        EXPECT_TRUE(std::isfinite(r.upper.witness_constants[k].get<double>())) << k;
    const json j = r.to_json();
    for (const auto& rec : j["records"])
        for (const char* f : {"check", "status", "witness_constants", "worst_sample"})
            EXPECT_TRUE(rec.contains(f)) << f;
}

TEST(Hypothesis, CoercivityBoundHoldsOnIndependentSamples) {
    for (const MaterialParams& mp : {MaterialParams{}, split_params(0.4, 2.0)}) {
        const CoercivityBound cb = coercivity_bound(mp);
        ASSERT_GT(cb.C_low, 0.0);
        std::mt19937_64 rng(67);
        std::uniform_real_distribution<double> lj(std::log(0.01), std::log(20.0));
        for (int k = 0; k < 5000; ++k) {
            const double J = std::exp(lj(rng));
            const Tensor32 F = std::sqrt(J) * random_rotation(rng) * identity_embedding();
            const SymThirdTensor G = random_second_gradient(rng, std::exp(lj(rng)));
            const double lhs = psi(G, F, mp).total;
            const double rhs =
                cb.C_low * (std::pow(G.norm(), mp.p) + std::pow(J, -mp.q)) - cb.offset;
            EXPECT_GE(lhs, rhs - 1e-9 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST(Hypothesis, NonCoerciveSplitWarns) {
    Rng rng(71);
    const HypothesisReport r = hypothesis_check(split_params(1.0, 0.0), 200, rng);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings[0].find("non-coercive"), std::string::npos);
    EXPECT_EQ(r.coercivity.status, "warn");
    EXPECT_FALSE(noncoercivity_warning(MaterialParams{}));
}

TEST(Objectivity, IdentityRotation) {
    const MaterialParams mp;
    Rng rng(73);
    const SymThirdTensor G = random_second_gradient(rng);
    const Tensor32 F = random_deformation_gradient(rng, 0.2);
    EXPECT_EQ(psi(G.rotated(Mat3::Identity()), Mat3::Identity() * F, mp).total,
              psi(G, F, mp).total);
}

TEST(Objectivity, DefaultAndSplitDensities) {
    for (const MaterialParams& mp : {MaterialParams{}, split_params()}) {
        Rng rng(79);
        const CheckRecord r = objectivity_check(mp, 1000, rng);
        EXPECT_EQ(r.status, "pass");
        EXPECT_LE(r.witness_constants["max_relative_deviation"].get<double>(), 1e-12);
    }
}

TEST(Objectivity, NegativeControl) {
    const MaterialParams mp;
    Rng rng(83);
    const CheckRecord r = objectivity_check(
        [&](const SymThirdTensor& G, const Tensor32& F) { return psi(G, F, mp).total + G(0, 0, 0); },
        200, rng);
    EXPECT_EQ(r.status, "fail");
    EXPECT_GT(r.witness_constants["max_relative_deviation"].get<double>(), 1e-2);
}

TEST(Polyconvexity, ConvexCasesHaveNoViolations) {
    Rng rng(89);
    const Tensor32 F = identity_embedding();
    const LiftedDensity norm_p = [](const SymThirdTensor& G, const Minors&, const Tensor32&) {
        return std::pow(G.norm(), 4.0);
    };
    const LiftedDensity linear = [](const SymThirdTensor&, const Minors& d, const Tensor32&) {
        return d[0];
    };
    EXPECT_TRUE(polyconvexity_probe(norm_p, F, 500, rng).empty());
    EXPECT_TRUE(polyconvexity_probe(linear, F, 500, rng).empty());
    EXPECT_TRUE(polyconvexity_probe(lifted_density(MaterialParams{}), F, 500, rng).empty());
}

TEST(Polyconvexity, ConcaveCaseIsDetected) {
    Rng rng(97);
    const LiftedDensity concave = [](const SymThirdTensor& G, const Minors&, const Tensor32&) {
        return -G.squared_norm();
    };
    EXPECT_GT(polyconvexity_probe(concave, identity_embedding(), 100, rng).size(), 50u);
}
