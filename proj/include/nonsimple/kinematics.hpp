#pragma once

// Pointwise second-gradient kinematics of a deformed flat sheet f : Omega -> R^3.

#include <array>
#include <cmath>

#include <Eigen/Dense>

namespace nonsimple {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Deformation gradient F = grad f, column alpha is the tangent a_alpha = f_{,alpha}.
using Tensor32 = Eigen::Matrix<double, 3, 2>;

/// Second gradient G_{i alpha beta} = f_{i,alpha beta}, symmetric in (alpha, beta).
///
/// Row i holds (G_i11, G_i22, G_i12). The mixed slot is stored once; every
/// contraction and norm counts it twice, so |G|^2 = sum_i G_i11^2 + G_i22^2 + 2 G_i12^2.
struct SymThirdTensor {
    Mat3 c = Mat3::Zero();

    static SymThirdTensor Zero() { return {}; }

    double operator()(int i, int alpha, int beta) const { return c(i, slot(alpha, beta)); }
    double& at(int i, int alpha, int beta) { return c(i, slot(alpha, beta)); }

    /// The 3-vector G[.][alpha][beta].
    Vec3 column(int alpha, int beta) const { return c.col(slot(alpha, beta)); }

    double squared_norm() const {
        return c.col(0).squaredNorm() + c.col(1).squaredNorm() + 2.0 * c.col(2).squaredNorm();
    }
    double norm() const { return std::sqrt(squared_norm()); }

    /// Full-component contraction A . B = A_{i alpha beta} B_{i alpha beta}.
    double dot(const SymThirdTensor& other) const {
        return c.col(0).dot(other.c.col(0)) + c.col(1).dot(other.c.col(1)) +
               2.0 * c.col(2).dot(other.c.col(2));
    }

    /// (Q G)_{i alpha beta} = Q_ij G_{j alpha beta}.
    SymThirdTensor rotated(const Mat3& Q) const { return {Q * c}; }

    SymThirdTensor operator+(const SymThirdTensor& o) const { return {c + o.c}; }
    SymThirdTensor operator-(const SymThirdTensor& o) const { return {c - o.c}; }
    SymThirdTensor operator*(double s) const { return {s * c}; }

    static int slot(int alpha, int beta) { return alpha == beta ? alpha : 2; }
};

struct MetricResult {
    Mat2 C;
    double J;
};

/// Christoffel symbols Gamma^gamma_{alpha beta}: row gamma, columns {11, 22, 12}.
struct Christoffel {
    Eigen::Matrix<double, 2, 3> c = Eigen::Matrix<double, 2, 3>::Zero();
    double operator()(int gamma, int alpha, int beta) const {
        return c(gamma, SymThirdTensor::slot(alpha, beta));
    }
};

struct CurvatureSplit {
    Mat2 K;
    Christoffel christoffel;
};

/// d_1 ... d_15, stored at indices 0 ... 14.
using Minors = std::array<double, 15>;

struct KinematicState {
    Tensor32 F;
    SymThirdTensor G;
    Mat2 C;
    double J = 0.0;
    Vec3 n;
    Mat2 K;
    Christoffel christoffel;
    Minors minors{};
    double kappa = 0.0;
};

/// Columns (1,0,0) and (0,1,0): the flat reference placement.
inline Tensor32 identity_embedding() {
    Tensor32 F = Tensor32::Zero();
    F(0, 0) = 1.0;
    F(1, 1) = 1.0;
    return F;
}

/// C = F^T F and J = sqrt(det C). J = 0 is returned for rank-deficient F.
MetricResult metric(const Tensor32& F);

/// n = (F e1 x F e2) / J. Throws DegenerateMetric for J <= kJFloor.
Vec3 unit_normal(const Tensor32& F, double J);

/// Dual tangent basis a^gamma = (C^-1)_{gamma delta} a_delta, stored as columns.
Tensor32 dual_basis(const Tensor32& F);

/// K_{alpha beta} = n . G_{alpha beta} and Gamma^gamma_{alpha beta} = a^gamma . G_{alpha beta}.
CurvatureSplit curvature_split(const SymThirdTensor& G, const Tensor32& F);

/// K_{alpha beta} n + Gamma^gamma_{alpha beta} a_gamma; reproduces G when J > 0.
SymThirdTensor recompose(const CurvatureSplit& split, const Tensor32& F);

/// The 15 2x2 minors of the 6x2 arrangement of G, in the classical listing order.
Minors minors(const SymThirdTensor& G);

/// kappa = det K / J^2.
double gaussian_curvature(const Mat2& K, double J);

/// Gaussian curvature, linear in the minors for fixed normal.
double gaussian_from_minors(const Vec3& n, const Minors& d, double J);

/// Full bundle at one point. Throws DegenerateMetric when J <= kJFloor.
KinematicState kinematic_state(const SymThirdTensor& G, const Tensor32& F);

} // namespace nonsimple
