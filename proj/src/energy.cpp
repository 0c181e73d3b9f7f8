#include "nonsimple/energy.hpp"

#include <cmath>

#include "nonsimple/errors.hpp"

namespace nonsimple {

void MaterialParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("material.") + name, "must be positive and finite");
    };
    positive(alpha, "alpha");
    positive(beta, "beta");
    positive(c_b, "c_b");
    positive(c_J, "c_J");
    positive(q, "q");
    if (!(p > 2.0) || !std::isfinite(p))
        throw ConfigError("material.p", "must exceed 2");
    if (split_mode) {
        positive(c_K, "c_K");
        if (!(c_Gamma >= 0.0) || !std::isfinite(c_Gamma))
            throw ConfigError("material.c_Gamma", "must be nonnegative and finite");
    }
}

std::optional<std::string> noncoercivity_warning(const MaterialParams& params) {
    if (params.split_mode && params.c_Gamma == 0.0)
        return "non-coercive: split density with c_Gamma = 0 controls only the curvature part "
               "of the second gradient, so |G|^p is not bounded by the stored energy";
    return std::nullopt;
}

double membrane_energy(const Mat2& C, const MaterialParams& params) {
    const double I2 = C.determinant();
    if (!(I2 > kJFloor * kJFloor))
        throw DegenerateMetric(std::sqrt(std::max(I2, 0.0)));
    // Written in e = C - I so that nothing of order one cancels near the identity.
    const double e11 = C(0, 0) - 1.0, e22 = C(1, 1) - 1.0, e12 = C(0, 1);
    const double t = e11 + e22;
    const double de = e11 * e22 - e12 * e12;
    const double d = t + de; // I2 - 1
    return (params.alpha * (t * d - de) + params.beta * (d * d - de)) / (1.0 + d);
}

double barrier_energy(double J, const MaterialParams& params) {
    if (!(J > kJFloor))
        throw DegenerateMetric(J);
    const double q = params.q;
    const double eps = J - 1.0;
    return params.c_J * (std::expm1(-q * std::log1p(eps)) + q * eps);
}

namespace {

// |K|^2 over all four (alpha, beta) pairs.
double squared_norm_sym(const Mat2& K) {
    return K(0, 0) * K(0, 0) + K(1, 1) * K(1, 1) + 2.0 * K(0, 1) * K(0, 1);
}

struct SplitNorms {
    Vec3 n;
    Mat2 K;
    double s_K;  // |K part|^2
    double s_T;  // |Gamma part|^2 = |G|^2 - |K|^2
};

SplitNorms split_norms(const SymThirdTensor& G, const Tensor32& F) {
    SplitNorms out;
    const double J = metric(F).J;
    out.n = unit_normal(F, J);
    const Eigen::RowVector3d kn = out.n.transpose() * G.c;
    out.K << kn(0), kn(2), kn(2), kn(1);
    out.s_K = squared_norm_sym(out.K);
    out.s_T = std::max(G.squared_norm() - out.s_K, 0.0);
    return out;
}

} // namespace

double bending_energy(const SymThirdTensor& G, const Tensor32& F, const MaterialParams& params) {
    const double p = params.p;
    if (!params.split_mode)
        return params.c_b / p * std::pow(G.squared_norm(), 0.5 * p);
    const SplitNorms s = split_norms(G, F);
    return params.c_K / p * std::pow(s.s_K, 0.5 * p) + params.c_Gamma / p * std::pow(s.s_T, 0.5 * p);
}

EnergyBreakdown psi(const SymThirdTensor& G, const Tensor32& F, const MaterialParams& params) {
    const MetricResult m = metric(F);
    if (!(m.J > kJFloor))
        throw DegenerateMetric(m.J);
    EnergyBreakdown e;
    e.membrane = membrane_energy(m.C, params);
    e.bending = bending_energy(G, F, params);
    e.barrier = barrier_energy(m.J, params);
    e.total = e.membrane + e.bending + e.barrier;
    return e;
}

PsiGradient psi_grad(const SymThirdTensor& G, const Tensor32& F, const MaterialParams& params) {
    const MetricResult m = metric(F);
    if (!(m.J > kJFloor))
        throw DegenerateMetric(m.J);
    const double J = m.J;
    const double I1 = m.C.trace();
    const double I2 = J * J;
    const Tensor32 FCinv = dual_basis(F);

    PsiGradient out;
    const double W1 = params.alpha + params.beta / I2;
    const double W2 = -params.alpha / (I2 * I2) + params.beta - params.beta * I1 / (I2 * I2);
    out.Psi_F = 2.0 * W1 * F + 2.0 * W2 * I2 * FCinv;

    const double q = params.q;
    const double dbarrier = params.c_J * q * (1.0 - std::pow(J, -q - 1.0));
    out.Psi_F += dbarrier * J * FCinv;

    const double p = params.p;
    if (!params.split_mode) {
        out.Psi_G = G * (params.c_b * std::pow(G.squared_norm(), 0.5 * p - 1.0));
        return out;
    }

    // psi_b = (c_K/p) s_K^{p/2} + (c_Gamma/p) (|G|^2 - s_K)^{p/2}
    //   d psi_b = A ds_K + B d|G|^2
    const SplitNorms s = split_norms(G, F);
    const double wK = 0.5 * params.c_K * std::pow(s.s_K, 0.5 * p - 1.0);
    const double wT = 0.5 * params.c_Gamma * std::pow(s.s_T, 0.5 * p - 1.0);
    const double A = wK - wT;
    const double B = wT;

    // ds_K/dG_{i ab} = 2 K_ab n_i ; d|G|^2/dG = 2 G.
    const Eigen::RowVector3d k(s.K(0, 0), s.K(1, 1), s.K(0, 1));
    out.Psi_G.c = 2.0 * A * (s.n * k) + 2.0 * B * G.c;

    // ds_K = v . dn with v = 2 K_ab G_ab (all four pairs), and
    // dn = P (da_1 x a_2 + a_1 x da_2) / J.
    const Vec3 v = 2.0 * (G.c.col(0) * s.K(0, 0) + G.c.col(1) * s.K(1, 1) +
                          2.0 * G.c.col(2) * s.K(0, 1));
    const Vec3 w = (v - s.n * s.n.dot(v)) / J;
    const Vec3 a1 = F.col(0);
    const Vec3 a2 = F.col(1);
    out.Psi_F.col(0) += A * a2.cross(w);
    out.Psi_F.col(1) += A * w.cross(a1);
    return out;
}

} // namespace nonsimple
