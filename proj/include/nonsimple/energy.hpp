#pragma once

// Stored-energy density Psi(G, F) = W_m(C) + bending(G, F) + barrier(J) and its
// validators (growth, objectivity, lifted convexity).

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nonsimple/kinematics.hpp"

namespace nonsimple {

struct MaterialParams {
    double alpha = 1.0; ///< Mooney-Rivlin first coefficient
    double beta = 1.0;  ///< Mooney-Rivlin second coefficient
    double c_b = 1.0;   ///< weight of (c_b/p)|G|^p
    double p = 4.0;
    double c_J = 1.0;   ///< barrier weight
    double q = 4.0;     ///< barrier exponent
    bool split_mode = false;
    double c_K = 1.0;     ///< split mode: normal (bending) part weight
    double c_Gamma = 1.0; ///< split mode: tangential (Christoffel) part weight

    /// Throws ConfigError on out-of-range values. c_Gamma = 0 is allowed here.
    void validate() const;

    /// q >= 2p/(p-2).
    bool growth_condition() const { return q >= growth_threshold(); }
    double growth_threshold() const { return 2.0 * p / (p - 2.0); }
};

/// Present when the density is not coercive in G (split mode without the tangential part).
std::optional<std::string> noncoercivity_warning(const MaterialParams& params);

struct EnergyBreakdown {
    double membrane = 0.0;
    double bending = 0.0;
    double barrier = 0.0;
    double total = 0.0;

    EnergyBreakdown& operator+=(const EnergyBreakdown& o) {
        membrane += o.membrane;
        bending += o.bending;
        barrier += o.barrier;
        total += o.total;
        return *this;
    }
};

/// alpha (tr C + 1/det C - 3) + beta (det C + tr C / det C - 3).
double membrane_energy(const Mat2& C, const MaterialParams& params);

/// c_J (J^-q + q J - (q + 1)): zero with zero slope at J = 1.
double barrier_energy(double J, const MaterialParams& params);

double bending_energy(const SymThirdTensor& G, const Tensor32& F, const MaterialParams& params);

EnergyBreakdown psi(const SymThirdTensor& G, const Tensor32& F, const MaterialParams& params);

struct PsiGradient {
    SymThirdTensor Psi_G; ///< full-component derivative; the 12 slot is dPsi/dG_{i12} (not doubled)
    Tensor32 Psi_F;
};

PsiGradient psi_grad(const SymThirdTensor& G, const Tensor32& F, const MaterialParams& params);

// ---------------------------------------------------------------------------
// Random sampling helpers shared by the validators and the tests.

using Rng = std::mt19937_64;

/// Uniform on SO(3) through a normalized Gaussian quaternion.
Mat3 random_rotation(Rng& rng);

SymThirdTensor random_second_gradient(Rng& rng, double scale = 1.0);

/// Perturbed identity embedding with J in [J_min, J_max] (rejection sampled).
Tensor32 random_deformation_gradient(Rng& rng, double J_min, double J_max = 1e300,
                                     double spread = 0.6);

// ---------------------------------------------------------------------------
// Validators. Each returns a record serializable as
// {check, status, witness_constants, worst_sample}.

struct CheckRecord {
    std::string check;
    std::string status; ///< "pass", "fail", "warn"
    nlohmann::json witness_constants = nlohmann::json::object();
    nlohmann::json worst_sample = nlohmann::json::object();

    bool passed() const { return status != "fail"; }
    nlohmann::json to_json() const;
};

/// Explicit lower bound psi >= C_low (|G|^p + J^-q) - offset.
struct CoercivityBound {
    double C_low = 0.0;
    double offset = 0.0;
};

/// Closed-form coercivity constants of the density in `params`.
CoercivityBound coercivity_bound(const MaterialParams& params);

struct HypothesisReport {
    CheckRecord growth;     ///< q >= 2p/(p-2)
    CheckRecord coercivity; ///< sampled lower bound
    CheckRecord upper;      ///< sampled upper bounds on J >= eta, |F| <= R
    CoercivityBound bound;
    std::vector<std::string> warnings;

    bool passed() const { return growth.passed() && coercivity.passed() && upper.passed(); }
    nlohmann::json to_json() const;
};

HypothesisReport hypothesis_check(const MaterialParams& params, int sample_count, Rng& rng,
                                  double eta = 0.1, double R = 10.0);

using Density = std::function<double(const SymThirdTensor&, const Tensor32&)>;

/// max |psi(QG, QF) - psi(G, F)| / (1 + |psi(G, F)|) over random (G, F, Q).
CheckRecord objectivity_check(const Density& density, int sample_count, Rng& rng);
CheckRecord objectivity_check(const MaterialParams& params, int sample_count, Rng& rng);

/// Density on the lifted space (G, d_1..d_15) at fixed F.
using LiftedDensity =
    std::function<double(const SymThirdTensor&, const Minors&, const Tensor32&)>;

struct ConvexityViolation {
    double t = 0.0;
    double lhs = 0.0; ///< phi(t X0 + (1-t) X1)
    double rhs = 0.0; ///< t phi(X0) + (1-t) phi(X1)
};

std::vector<ConvexityViolation> polyconvexity_probe(const LiftedDensity& density,
                                                    const Tensor32& F, int segment_count,
                                                    Rng& rng, double tol = 1e-10);

/// The bending density viewed on the lifted space; it ignores the minors.
LiftedDensity lifted_density(const MaterialParams& params);

} // namespace nonsimple
