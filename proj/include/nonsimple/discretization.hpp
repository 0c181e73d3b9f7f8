#pragma once

// Node-centered finite differences on a rectangle, trapezoid quadrature, and
// the discrete potential energy with its exact gradient.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonsimple/energy.hpp"
#include "nonsimple/kinematics.hpp"

namespace nonsimple {

/// One 3-vector per node, node index = j * nx + i.
using Field = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// true marks a constrained degree of freedom.
using DofMask = Eigen::Array<bool, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct Grid2D {
    int nx = 17;
    int ny = 17;
    double Lx = 1.0;
    double Ly = 1.0;

    double hx() const { return Lx / (nx - 1); }
    double hy() const { return Ly / (ny - 1); }
    int size() const { return nx * ny; }
    int node(int i, int j) const { return j * nx + i; }
    double x(int i) const { return i * hx(); }
    double y(int j) const { return j * hy(); }
    Vec2 point(int n) const { return {x(n % nx), y(n / nx)}; }

    void validate() const;
};

enum class Edge : int { Left = 0, Right = 1, Bottom = 2, Top = 3 };
enum class EdgeTag { Clamped, Pinned, Free };

std::string to_string(EdgeTag tag);
EdgeTag edge_tag_from_string(const std::string& s);
std::string to_string(Edge e);

struct BoundarySpec {
    std::array<EdgeTag, 4> tags{EdgeTag::Clamped, EdgeTag::Clamped, EdgeTag::Clamped,
                                EdgeTag::Clamped};
    Field f_o;            ///< prescribed placement, also the default initial iterate
    bool planar = false;  ///< additionally freeze the e3 component everywhere

    EdgeTag tag(Edge e) const { return tags[static_cast<int>(e)]; }
    bool all_pinned() const;
};

struct LoadSpec {
    Field b;                   ///< body force per reference area
    std::vector<Tensor32> B;   ///< generalized body force per reference area
    Field tau;                 ///< traction per length; read on free edges only
    Field mu;                  ///< hypertraction per length; read where (grad f) nu is free

    static LoadSpec zero(int nodes);
};

/// 1-D-composed finite-difference weights for one derivative at every node.
struct Stencil {
    std::vector<int> start;  ///< size nodes + 1
    std::vector<int> index;
    std::vector<double> weight;

    Vec3 apply(const Field& f, int node) const {
        Vec3 out = Vec3::Zero();
        for (int k = start[node]; k < start[node + 1]; ++k)
            out += weight[k] * f.row(index[k]).transpose();
        return out;
    }
    double apply(const Eigen::VectorXd& f, int node) const {
        double out = 0.0;
        for (int k = start[node]; k < start[node + 1]; ++k)
            out += weight[k] * f(index[k]);
        return out;
    }
    /// out.row(index) += s * weight * v for every entry of the node's stencil.
    void scatter(int node, const Vec3& v, double s, Field& out) const {
        for (int k = start[node]; k < start[node + 1]; ++k)
            out.row(index[k]) += (s * weight[k]) * v.transpose();
    }
};

struct BoundaryEdge {
    Edge edge;
    Vec2 normal;                ///< outward unit normal
    std::vector<int> nodes;
    std::vector<double> weight; ///< 1-D trapezoid weights along the edge
};

struct NodeDerivatives {
    Tensor32 F;
    SymThirdTensor G;
};

/// Grid-dependent operators: difference stencils, quadrature, boundary edges.
class GridOperators {
public:
    explicit GridOperators(const Grid2D& grid);

    const Grid2D& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::array<BoundaryEdge, 4>& edges() const { return edges_; }
    const BoundaryEdge& edge(Edge e) const { return edges_[static_cast<int>(e)]; }

    const Stencil& d1() const { return d1_; }
    const Stencil& d2() const { return d2_; }
    const Stencil& d11() const { return d11_; }
    const Stencil& d22() const { return d22_; }
    const Stencil& d12() const { return d12_; }

    NodeDerivatives derivatives(const Field& f, int node) const;
    std::vector<NodeDerivatives> derivatives(const Field& f) const;

    /// Adjoint of derivatives(): accumulates s * (P_F . dF + P_G . dG) into out.
    void scatter(int node, const Tensor32& P_F, const SymThirdTensor& P_G, double s,
                 Field& out) const;

    double area() const { return grid_.Lx * grid_.Ly; }

private:
    Grid2D grid_;
    std::vector<double> weights_;
    std::array<BoundaryEdge, 4> edges_;
    Stencil d1_, d2_, d11_, d22_, d12_;
};

struct Problem {
    Problem(Grid2D grid, BoundarySpec boundary, LoadSpec loads, MaterialParams material);

    Grid2D grid;
    BoundarySpec boundary;
    LoadSpec loads;
    MaterialParams material;
    GridOperators ops;
    DofMask constrained;

    /// Rebuild the constraint mask after editing `boundary`.
    void refresh_constraints();
};

// ---------------------------------------------------------------------------
// Fields.

Field identity_field(const Grid2D& grid);
Field stretch_field(const Grid2D& grid, double lambda_x, double lambda_y);

/// CLAMPED: boundary node and first interior layer; PINNED: boundary node only.
DofMask constraint_mask(const Grid2D& grid, const BoundarySpec& boundary);

/// Constrained entries set to the prescribed placement. Idempotent.
Field project_constraints(const Field& field, const Problem& problem);
/// Constrained entries set to zero. Idempotent.
Field project_variation(const Field& variation, const Problem& problem);

// ---------------------------------------------------------------------------
// Energy.

std::vector<KinematicState> evaluate_kinematics(const Field& field, const GridOperators& ops);

/// Smallest nodal J; never throws.
double min_J(const Field& field, const GridOperators& ops);

struct TotalEnergy {
    double energy = 0.0;       ///< internal - load_work
    EnergyBreakdown internal;  ///< integrated density terms
    double load_work = 0.0;    ///< l[f]
};

TotalEnergy total_energy(const Field& field, const Problem& problem);

/// l[f] = int (b.f + B.grad f) + int_{free} tau.f + int_{free or pinned} mu.(grad f) nu.
double load_functional(const Field& field, const Problem& problem);

/// d l / d y, the nodal representation of the load functional.
Field load_gradient(const Problem& problem);

/// Exact derivative of total_energy with constrained entries zeroed.
Field total_gradient(const Field& field, const Problem& problem);

/// Max-norm over unconstrained entries.
double projected_max_norm(const Field& gradient, const DofMask& constrained);

// ---------------------------------------------------------------------------
// Diagnostics.

struct DivergenceIdentity {
    double lhs = 0.0; ///< int det(Dw) phi
    double rhs = 0.0; ///< -1/2 int (Cof(Dw) grad phi) . w
};

/// w is nodal (n x 2), phi nodal and vanishing near the boundary.
DivergenceIdentity divergence_identity_check(const Eigen::MatrixX2d& w,
                                             const Eigen::VectorXd& phi,
                                             const GridOperators& ops);

/// w = (f_{2,1}, f_{3,1}) built from a nodal field with the first-derivative stencil.
Eigen::MatrixX2d second_minor_field(const Field& f, const GridOperators& ops);

struct SobolevNorms {
    double Lp = 0.0;
    double W1p = 0.0;
    double W2p = 0.0;
    double grad2_Lp = 0.0; ///< || grad^2 f ||_{L^p} alone
};

SobolevNorms discrete_norms(const Field& field, const GridOperators& ops, double p);

} // namespace nonsimple
