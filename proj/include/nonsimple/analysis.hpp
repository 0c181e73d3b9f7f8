#pragma once

// Post-solve verification: weak Euler-Lagrange residual and the min-J lower-bound
// estimator built from the Hoelder modulus of J.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nonsimple/discretization.hpp"
#include "nonsimple/solver.hpp"

namespace nonsimple {

/// int [Psi_G . grad^2 phi + Psi_F . grad phi] - int (b.phi + B.grad phi)
///   - int_{free} tau.phi - int_{free or pinned} mu.(grad phi) nu,
/// evaluated by direct quadrature of the weak form at the nodes of `field`.
double weak_residual(const Field& field, const Field& phi, const Problem& problem);

struct BasisSpec {
    int lattice = 3;          ///< bump centers per axis
    double radius = 0.0;      ///< support half-width; 0 picks 0.6 of the lattice spacing
    bool in_plane_only = false;
};

/// Smooth tensor-product bumps, one per component per lattice center, projected
/// into the variation space. Bumps that vanish after projection are dropped.
std::vector<Field> bump_basis(const Problem& problem, const BasisSpec& spec,
                              std::vector<std::string>* labels = nullptr);

struct ResidualReport {
    std::vector<double> residuals;
    std::vector<double> normalized; ///< |residual| / ||phi||_{W^{2,p}}
    std::vector<std::string> labels;
    double max_normalized = 0.0;
    std::string basis;

    nlohmann::json to_json() const;
};

ResidualReport residual_suite(const Field& field, const Problem& problem,
                              const BasisSpec& spec = {});

/// h(t) = int_0^delta (t + M r^alpha)^(-q) r dr.
double cone_integral(double t, double M, double alpha, double q, double delta);

/// Solves h(t) = target for t by bisection on a log scale. Throws BisectionFailure.
double invert_cone_integral(double target, double M, double alpha, double q, double delta);

struct EtaReport {
    double eta1 = 0.0;  ///< interior bound h^-1(C_star)
    double eta2 = 0.0;  ///< min J of the prescribed placement on the boundary
    double eta = 0.0;
    double M = 0.0;     ///< Hoelder constant of J over pairs within delta
    double alpha = 0.0; ///< 1 - 2/p
    double delta = 0.0;
    double gamma = 0.0;
    double C_star = 0.0;
    double C_low = 0.0;
    double offset = 0.0;
    double internal_energy = 0.0; ///< E + l
    double observed_min_J = 0.0;
    bool bound_holds = false;     ///< observed_min_J >= 0.99 eta

    nlohmann::json to_json() const;
};

/// Throws Inapplicable when q < 2p/(p-2) or the density has no coercivity constant.
EtaReport eta_estimate(const Field& field, const Problem& problem);

/// max over node pairs with |x - y| <= delta of |J(x) - J(y)| / |x - y|^alpha.
double hoelder_constant(const Field& field, const GridOperators& ops, double alpha,
                        double delta);

} // namespace nonsimple
