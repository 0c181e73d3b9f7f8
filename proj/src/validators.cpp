#include <cmath>
#include <limits>
#include <sstream>

#include "nonsimple/energy.hpp"
#include "nonsimple/errors.hpp"

namespace nonsimple {

using nlohmann::json;

namespace {

json tensor_json(const Tensor32& F) {
    json out = json::array();
    for (int i = 0; i < 3; ++i)
        out.push_back({F(i, 0), F(i, 1)});
    return out;
}

json tensor_json(const SymThirdTensor& G) {
    json out = json::array();
    for (int i = 0; i < 3; ++i)
        out.push_back({G.c(i, 0), G.c(i, 1), G.c(i, 2)});
    return out;
}

// Log-uniform magnitude so that both |G| << 1 and |G| >> 1 are exercised.
double log_uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

} // namespace

json CheckRecord::to_json() const {
    return {{"check", check},
            {"status", status},
            {"witness_constants", witness_constants},
            {"worst_sample", worst_sample}};
}

json HypothesisReport::to_json() const {
    json out = {{"check", "hypotheses"},
                {"status", passed() ? (warnings.empty() ? "pass" : "warn") : "fail"},
                {"records", {growth.to_json(), coercivity.to_json(), upper.to_json()}},
                {"coercivity_bound", {{"C_low", bound.C_low}, {"offset", bound.offset}}},
                {"warnings", warnings}};
    return out;
}

Mat3 random_rotation(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond quat(n(rng), n(rng), n(rng), n(rng));
    quat.normalize();
    return quat.toRotationMatrix();
}

SymThirdTensor random_second_gradient(Rng& rng, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    SymThirdTensor G;
    for (int i = 0; i < 3; ++i)
        for (int s = 0; s < 3; ++s)
            G.c(i, s) = n(rng);
    return G;
}

Tensor32 random_deformation_gradient(Rng& rng, double J_min, double J_max, double spread) {
    std::normal_distribution<double> n(0.0, spread);
    for (;;) {
        Tensor32 F = identity_embedding();
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < 2; ++a)
                F(i, a) += n(rng);
        const double J = metric(F).J;
        if (J >= J_min && J <= J_max)
            return F;
    }
}

CoercivityBound coercivity_bound(const MaterialParams& params) {
    const double p = params.p;
    const double q = params.q;
    double C_G = params.c_b / p;
    if (params.split_mode) {
        // a^{p/2} + b^{p/2} >= 2^{1-p/2} (a + b)^{p/2} for p >= 2.
        C_G = std::min(params.c_K, params.c_Gamma) / p * std::pow(2.0, 1.0 - 0.5 * p);
    }
    // Keep theta * c_J of the J^-q term; the remainder (1-theta) J^-q + q J - (q+1)
    // is minimized at J* = (1-theta)^{1/(q+1)} with value (q+1)(J* - 1).
    const double theta = std::min(0.5, C_G / params.c_J);
    CoercivityBound b;
    b.C_low = std::min(C_G, theta * params.c_J);
    const double J_star = std::pow(1.0 - theta, 1.0 / (q + 1.0));
    b.offset = params.c_J * (q + 1.0) * (1.0 - J_star);
    return b;
}

HypothesisReport hypothesis_check(const MaterialParams& params, int sample_count, Rng& rng,
                                  double eta, double R) {
    HypothesisReport rep;
    if (auto w = noncoercivity_warning(params))
        rep.warnings.push_back(*w);

    const double threshold = params.growth_threshold();
    rep.growth.check = "growth_exponent";
    rep.growth.status = params.growth_condition() ? "pass" : "fail";
    rep.growth.witness_constants = {{"q", params.q}, {"p", params.p}, {"threshold", threshold}};
    if (!params.growth_condition()) {
        std::ostringstream msg;
        msg << "growth condition fails: q = " << params.q << " is below the threshold 2p/(p-2) = "
            << threshold << " for p = " << params.p;
        rep.growth.worst_sample = {{"message", msg.str()}};
    }

    rep.bound = coercivity_bound(params);
    rep.coercivity.check = "coercivity_lower_bound";
    rep.coercivity.witness_constants = {{"C_low", rep.bound.C_low}, {"offset", rep.bound.offset}};
    double worst_slack = std::numeric_limits<double>::infinity();
    json worst;
    for (int k = 0; k < sample_count; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.02, 5.0, 0.8);
        const SymThirdTensor G = random_second_gradient(rng, log_uniform(rng, 1e-3, 10.0));
        const double J = metric(F).J;
        const double value = psi(G, F, params).total;
        const double bound = rep.bound.C_low * (std::pow(G.norm(), params.p) + std::pow(J, -params.q)) -
                             rep.bound.offset;
        const double slack = (value - bound) / (1.0 + std::abs(value));
        if (slack < worst_slack) {
            worst_slack = slack;
            worst = {{"F", tensor_json(F)}, {"G", tensor_json(G)}, {"psi", value}, {"bound", bound}};
        }
    }
    const double round = 1e-12;
    const bool lower_ok = rep.bound.C_low > 0.0 && worst_slack >= -round;
    rep.coercivity.status = lower_ok ? "pass" : (rep.bound.C_low > 0.0 ? "fail" : "warn");
    rep.coercivity.worst_sample = worst;
    rep.coercivity.worst_sample["relative_slack"] = worst_slack;

    // Empirical C_{eta,R} for the three upper bounds on J >= eta, |F| <= R.
    rep.upper.check = "growth_upper_bounds";
    double c_psi = 0.0, c_psiG = 0.0, c_psiF = 0.0;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    json upper_worst;
    int accepted = 0;
    while (accepted < sample_count) {
        Tensor32 F = identity_embedding() * log_uniform(rng, 0.2, R);
        const double spread = log_uniform(rng, 1e-2, R);
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < 2; ++a)
                F(i, a) += spread * u(rng) / std::sqrt(6.0);
        const double J = metric(F).J;
        if (J < eta || F.norm() > R)
            continue;
        ++accepted;
        const SymThirdTensor G = random_second_gradient(rng, log_uniform(rng, 1e-3, 10.0));
        const double g = G.norm();
        const double value = psi(G, F, params).total;
        const PsiGradient d = psi_grad(G, F, params);
        const double r0 = value / (std::pow(g, params.p) + 1.0);
        const double r1 = d.Psi_G.norm() / (std::pow(g, params.p - 1.0) + 1.0);
        const double r2 = d.Psi_F.norm() / (std::pow(g, params.p) + 1.0);
        if (r0 > c_psi || r1 > c_psiG || r2 > c_psiF)
            upper_worst = {{"F", tensor_json(F)}, {"G", tensor_json(G)}};
        c_psi = std::max(c_psi, r0);
        c_psiG = std::max(c_psiG, r1);
        c_psiF = std::max(c_psiF, r2);
    }
    const bool finite = std::isfinite(c_psi) && std::isfinite(c_psiG) && std::isfinite(c_psiF);
    rep.upper.status = finite ? "pass" : "fail";
    rep.upper.witness_constants = {{"eta", eta},
                                   {"R", R},
                                   {"C_psi", c_psi},
                                   {"C_psi_G", c_psiG},
                                   {"C_psi_F", c_psiF},
                                   {"samples", sample_count}};
    rep.upper.worst_sample = upper_worst;
    return rep;
}

CheckRecord objectivity_check(const Density& density, int sample_count, Rng& rng) {
    CheckRecord rec;
    rec.check = "objectivity";
    double worst = 0.0;
    for (int k = 0; k < sample_count; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.2);
        const SymThirdTensor G = random_second_gradient(rng);
        const Mat3 Q = random_rotation(rng);
        const double base = density(G, F);
        const double turned = density(G.rotated(Q), Q * F);
        const double dev = std::abs(turned - base) / (1.0 + std::abs(base));
        if (dev > worst) {
            worst = dev;
            rec.worst_sample = {{"F", tensor_json(F)}, {"G", tensor_json(G)}, {"psi", base},
                                {"psi_rotated", turned}};
        }
    }
    rec.witness_constants = {{"max_relative_deviation", worst}, {"samples", sample_count}};
    rec.status = worst <= 1e-10 ? "pass" : "fail";
    return rec;
}

CheckRecord objectivity_check(const MaterialParams& params, int sample_count, Rng& rng) {
    return objectivity_check(
        [&params](const SymThirdTensor& G, const Tensor32& F) { return psi(G, F, params).total; },
        sample_count, rng);
}

std::vector<ConvexityViolation> polyconvexity_probe(const LiftedDensity& density,
                                                    const Tensor32& F, int segment_count,
                                                    Rng& rng, double tol) {
    std::vector<ConvexityViolation> out;
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int k = 0; k < segment_count; ++k) {
        const SymThirdTensor G0 = random_second_gradient(rng);
        const SymThirdTensor G1 = random_second_gradient(rng);
        Minors d0{}, d1{};
        for (int l = 0; l < 15; ++l) {
            d0[l] = n(rng);
            d1[l] = n(rng);
        }
        double t = ut(rng);
        if (t <= 0.0 || t >= 1.0)
            t = 0.5;
        Minors dt{};
        for (int l = 0; l < 15; ++l)
            dt[l] = t * d0[l] + (1.0 - t) * d1[l];
        const double lhs = density(G0 * t + G1 * (1.0 - t), dt, F);
        const double rhs = t * density(G0, d0, F) + (1.0 - t) * density(G1, d1, F);
        if (lhs > rhs + tol * (1.0 + std::abs(rhs)))
            out.push_back({t, lhs, rhs});
    }
    return out;
}

LiftedDensity lifted_density(const MaterialParams& params) {
    return [params](const SymThirdTensor& G, const Minors&, const Tensor32& F) {
        return psi(G, F, params).total;
    };
}

} // namespace nonsimple
