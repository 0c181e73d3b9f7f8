#include <gtest/gtest.h>

#include <numbers>

#include "nonsimple/analysis.hpp"
#include "nonsimple/errors.hpp"
#include "oracles.hpp"

using namespace nonsimple;

namespace {

constexpr auto C = EdgeTag::Clamped;
constexpr auto P = EdgeTag::Pinned;
constexpr auto R = EdgeTag::Free;

Problem plate(int n, std::array<EdgeTag, 4> tags, double b3 = 0.0, Field f_o = {},
              MaterialParams mp = {}) {
    const Grid2D g{n, n, 1.0, 1.0};
    BoundarySpec b;
    b.tags = tags;
    b.f_o = std::move(f_o);
    LoadSpec L = LoadSpec::zero(g.size());
    L.b.col(2).setConstant(b3);
    return Problem(g, b, L, mp);
}

Problem randomly_loaded(std::array<EdgeTag, 4> tags, std::mt19937_64& rng) {
    const Grid2D g{9, 9, 1.0, 1.0};
    BoundarySpec b;
    b.tags = tags;
    std::normal_distribution<double> nd(0.0, 1.0);
    LoadSpec L = LoadSpec::zero(g.size());
    for (int n = 0; n < g.size(); ++n) {
        L.b.row(n) << nd(rng), nd(rng), nd(rng);
        L.tau.row(n) << nd(rng), nd(rng), nd(rng);
        L.mu.row(n) << nd(rng), nd(rng), nd(rng);
        L.B[n] = 0.3 * Tensor32::Random();
    }
    return Problem(g, b, L, MaterialParams{});
}

Field random_variation(const Problem& p, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Field d(p.grid.size(), 3);
    for (int n = 0; n < p.grid.size(); ++n)
        d.row(n) << nd(rng), nd(rng), nd(rng);
    return project_variation(d, p);
}

double dot(const Field& a, const Field& b) { return (a.array() * b.array()).sum(); }
double abs_dot(const Field& a, const Field& b) { return (a.array() * b.array()).abs().sum(); }

SolveConfig tol(double grad_tol) {
    SolveConfig c;
    c.grad_tol = grad_tol;
    c.max_iters = 20000;
    return c;
}

// Composite Simpson on r = delta u^4, which smooths the r^alpha cusp at the origin.
double cone_integral_oracle(double t, double M, double alpha, double q, double delta) {
    const int n = 20000;
    auto f = [&](double u) {
        const double r = delta * u * u * u * u;
        return std::pow(t + M * std::pow(r, alpha), -q) * r * 4.0 * delta * u * u * u;
    };
    double s = f(0.0) + f(1.0);
    for (int k = 1; k < n; ++k)
        s += (k % 2 ? 4.0 : 2.0) * f(static_cast<double>(k) / n);
    return s / (3.0 * n);
}

} // namespace

TEST(WeakResidual, EqualsGradientDotVariation) {
    std::mt19937_64 rng(101);
    for (auto tags : {std::array{C, C, C, C}, std::array{C, R, P, R}, std::array{P, P, P, P}}) {
        const Problem p = randomly_loaded(tags, rng);
        for (int k = 0; k < 5; ++k) {
            const Field f = oracle::random_feasible_field(p, rng, 0.2);
            const Field phi = random_variation(p, rng);
            const Field g = total_gradient(f, p);
            const double r = weak_residual(f, phi, p);
            EXPECT_NEAR(r, dot(g, phi), 1e-12 * (1.0 + abs_dot(g, phi)));
        }
    }
}

TEST(WeakResidual, LinearInVariation) {
    std::mt19937_64 rng(103);
    const Problem p = randomly_loaded({C, R, P, R}, rng);
    const Field f = oracle::random_feasible_field(p, rng, 0.2);
    const Field a = random_variation(p, rng), b = random_variation(p, rng);
    const double ra = weak_residual(f, a, p), rb = weak_residual(f, b, p);
    const double rc = weak_residual(f, 2.5 * a - 0.75 * b, p);
    EXPECT_NEAR(rc, 2.5 * ra - 0.75 * rb, 1e-11 * (1.0 + std::abs(ra) + std::abs(rb)));
    EXPECT_EQ(weak_residual(f, Field::Zero(p.grid.size(), 3), p), 0.0);
}

TEST(WeakResidual, VanishesAtNaturalState) {
    std::mt19937_64 rng(107);
    const Problem p = plate(9, {C, C, C, C});
    const Field f = identity_field(p.grid);
    for (int k = 0; k < 10; ++k) {
        const Field phi = random_variation(p, rng);
        EXPECT_LE(std::abs(weak_residual(f, phi, p)), 1e-10 * phi.norm());
    }
}

TEST(BumpBasis, LiesInVariationSpace) {
    const Problem p = plate(17, {C, P, R, R});
    std::vector<std::string> labels;
    const std::vector<Field> basis = bump_basis(p, BasisSpec{}, &labels);
    EXPECT_EQ(basis.size(), 27u);
    EXPECT_EQ(labels.size(), basis.size());
    for (const Field& phi : basis) {
        EXPECT_GT(phi.cwiseAbs().maxCoeff(), 0.0);
        for (int n = 0; n < p.grid.size(); ++n)
            for (int c = 0; c < 3; ++c)
                if (p.constrained(n, c))
                    EXPECT_EQ(phi(n, c), 0.0);
    }
    BasisSpec in_plane;
    in_plane.in_plane_only = true;
    for (const Field& phi : bump_basis(p, in_plane))
        EXPECT_EQ(phi.col(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BumpBasis, PlanarProblemDropsTransverseBumps) {
    Problem p = plate(17, {P, P, P, P});
    p.boundary.planar = true;
    p.refresh_constraints();
    EXPECT_EQ(bump_basis(p, BasisSpec{}).size(), 18u);
}

TEST(ResidualSuite, ConvergedLoadedSolveIsStationary) {
    const Problem p = plate(9, {C, C, C, C}, 0.1);
    const MinimizeResult r = minimize(p.boundary.f_o, p, tol(1e-8));
    ASSERT_TRUE(r.converged);
    const ResidualReport rep = residual_suite(r.field, p);
    EXPECT_EQ(rep.residuals.size(), 27u);
    EXPECT_LE(rep.max_normalized, 1e-7);
}

TEST(ResidualSuite, UnconvergedStateIsVisiblyLarger) {
    const Problem p = plate(9, {C, C, C, C}, 0.1);
    SolveConfig one = tol(1e-8);
    one.max_iters = 1;
    one.perturbation_amplitude = 0.01;
    one.seed = 9;
    const MinimizeResult early = minimize(p.boundary.f_o, p, one);
    const MinimizeResult done = minimize(p.boundary.f_o, p, tol(1e-8));
    ASSERT_FALSE(early.converged);
    const double r_early = residual_suite(early.field, p).max_normalized;
    const double r_done = residual_suite(done.field, p).max_normalized;
    EXPECT_GT(r_early, 1e-4);
    EXPECT_GT(r_early, 1e3 * r_done);
}

TEST(ResidualSuite, InPlaneBasisOnPlanarSolve) {
    const Grid2D g{9, 9, 1.0, 1.0};
    Problem p = plate(9, {P, P, P, P}, 0.0, stretch_field(g, 1.03, 0.98));
    p.boundary.planar = true;
    p.refresh_constraints();
    const MinimizeResult r = minimize(p.boundary.f_o, p, tol(1e-8));
    ASSERT_TRUE(r.converged);
    BasisSpec spec;
    spec.in_plane_only = true;
    EXPECT_LE(residual_suite(r.field, p, spec).max_normalized, 1e-7);
}

TEST(ResidualSuite, ReportJson) {
    const Problem p = plate(9, {C, C, C, C});
    const nlohmann::json j = residual_suite(identity_field(p.grid), p).to_json();
    EXPECT_EQ(j["tests"].size(), 27u);
    EXPECT_TRUE(j.contains("max_normalized_residual"));
    EXPECT_TRUE(j["basis"].get<std::string>().find("W^{2,p}") != std::string::npos);
}

TEST(ConeIntegral, ConstantJClosedForm) {
    for (double t : {0.3, 1.0, 2.0})
        EXPECT_NEAR(cone_integral(t, 0.0, 0.5, 4.0, 1.0), std::pow(t, -4.0) / 2.0, 1e-15);
    EXPECT_NEAR(invert_cone_integral(0.5, 0.0, 0.5, 4.0, 1.0), 1.0, 1e-9);
    // h(t) = t^-q delta^2 / 2 inverted by hand.
    const double t = invert_cone_integral(3.0, 0.0, 0.5, 6.0, 0.4);
    EXPECT_NEAR(t, std::pow(0.4 * 0.4 / 6.0, 1.0 / 6.0), 1e-9);
}

TEST(ConeIntegral, MatchesDirectQuadrature) {
    for (double M : {0.05, 1.0, 7.0})
        for (double t : {1e-2, 0.1, 1.0})
            for (auto [alpha, q] : {std::pair{0.5, 4.0}, std::pair{1.0 / 3.0, 6.0}}) {
                const double ref = cone_integral_oracle(t, M, alpha, q, 0.25);
                EXPECT_NEAR(cone_integral(t, M, alpha, q, 0.25), ref, 1e-8 * ref)
                    << "M=" << M << " t=" << t << " alpha=" << alpha;
            }
}

TEST(ConeIntegral, StrictlyDecreasingAndInvertible) {
    const double M = 0.7, alpha = 0.5, q = 4.0, delta = 0.25;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 80; ++k) {
        const double t = std::pow(10.0, -8.0 + 0.1 * k);
        const double v = cone_integral(t, M, alpha, q, delta);
        EXPECT_LT(v, prev);
        prev = v;
    }
    for (double target : {1e-3, 1.0, 100.0}) {
        const double t = invert_cone_integral(target, M, alpha, q, delta);
        EXPECT_NEAR(cone_integral(t, M, alpha, q, delta), target, 1e-9 * target);
    }
}

TEST(ConeIntegral, BoundedIntegralFailsToBracket) {
    // q alpha < 2 keeps h finite as t -> 0.
    const double h0 = cone_integral(1e-60, 1.0, 0.5, 3.0, 0.25);
    EXPECT_TRUE(std::isfinite(h0));
    EXPECT_THROW(invert_cone_integral(10.0 * h0, 1.0, 0.5, 3.0, 0.25), BisectionFailure);
}

TEST(HoelderConstant, ConstantJAndBruteForce) {
    const Problem p = plate(9, {C, C, C, C}, 0.0, stretch_field(Grid2D{9, 9, 1, 1}, 1.1, 0.9));
    EXPECT_NEAR(hoelder_constant(p.boundary.f_o, p.ops, 0.5, 0.25), 0.0, 1e-13);

    std::mt19937_64 rng(109);
    const Field f = oracle::random_feasible_field(p, rng, 0.3);
    const double alpha = 0.5, delta = 0.25;
    std::vector<double> J(p.grid.size());
    for (int n = 0; n < p.grid.size(); ++n)
        J[n] = oracle::area_ratio(p.ops.derivatives(f, n).F);
    double ref = 0.0;
    for (int a = 0; a < p.grid.size(); ++a)
        for (int b = 0; b < p.grid.size(); ++b) {
            const double r = (p.grid.point(a) - p.grid.point(b)).norm();
            if (a != b && r <= delta + 1e-12)
                ref = std::max(ref, std::abs(J[a] - J[b]) / std::pow(r, alpha));
        }
    EXPECT_NEAR(hoelder_constant(f, p.ops, alpha, delta), ref, 1e-12 * ref);
}

TEST(EtaEstimate, NaturalState) {
    const Problem p = plate(9, {C, C, C, C});
    const EtaReport e = eta_estimate(identity_field(p.grid), p);
    EXPECT_DOUBLE_EQ(e.eta2, 1.0);
    EXPECT_DOUBLE_EQ(e.observed_min_J, 1.0);
    EXPECT_NEAR(e.M, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(e.alpha, 0.5);
    EXPECT_DOUBLE_EQ(e.delta, 0.25);
    EXPECT_DOUBLE_EQ(e.gamma, std::numbers::pi / 2.0);
    EXPECT_GT(e.eta, 0.0);
    EXPECT_EQ(e.eta, std::min(e.eta1, e.eta2));
    EXPECT_TRUE(e.bound_holds);
}

TEST(EtaEstimate, LowerBoundOnConvergedSolves) {
    const Grid2D g{9, 9, 1.0, 1.0};
    const std::vector<Problem> cases{
        plate(9, {C, C, C, C}, 0.1),
        plate(9, {P, P, P, P}, 0.0, stretch_field(g, 0.97, 1.0)),
        plate(9, {P, P, P, P}, 0.0, stretch_field(g, 1.05, 1.05)),
    };
    for (const Problem& p : cases) {
        const MinimizeResult r = minimize(p.boundary.f_o, p, tol(1e-7));
        ASSERT_TRUE(r.converged);
        const EtaReport e = eta_estimate(r.field, p);
        EXPECT_GT(e.eta, 0.0);
        EXPECT_GE(e.observed_min_J, 0.99 * e.eta);
        EXPECT_TRUE(e.bound_holds);
        EXPECT_EQ(e.eta, std::min(e.eta1, e.eta2));
        // The cone integral diverges at zero, so h(1e-8) dwarfs h(1).
        EXPECT_GT(cone_integral(1e-8, e.M, e.alpha, 4.0, e.delta),
                  1e6 * cone_integral(1.0, e.M, e.alpha, 4.0, e.delta));
    }
}

TEST(EtaEstimate, InapplicableBelowGrowthThreshold) {
    MaterialParams mp;
    mp.q = 2.0;
    const Problem p = plate(9, {C, C, C, C}, 0.0, {}, mp);
    EXPECT_THROW(eta_estimate(identity_field(p.grid), p), Inapplicable);
    MaterialParams split;
    split.split_mode = true;
    split.c_Gamma = 0.0;
    const Problem s = plate(9, {C, C, C, C}, 0.0, {}, split);
    EXPECT_THROW(eta_estimate(identity_field(s.grid), s), Inapplicable);
}

TEST(EtaEstimate, ReportJson) {
    const Problem p = plate(9, {C, C, C, C});
    const nlohmann::json j = eta_estimate(identity_field(p.grid), p).to_json();
    for (const char* key : {"eta1", "eta2", "eta", "M", "alpha", "delta", "gamma", "C_star",
                            "observed_min_J"})
        EXPECT_TRUE(j.contains(key)) << key;
}
