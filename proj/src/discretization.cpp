#include "nonsimple/discretization.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "nonsimple/errors.hpp"

namespace nonsimple {

namespace {

using Taps = std::vector<std::pair<int, double>>;

// Second-order first derivative; one-sided at the ends.
Taps first_derivative_1d(int k, int n, double h) {
    const double s = 1.0 / (2.0 * h);
    if (k == 0)
        return {{0, -3.0 * s}, {1, 4.0 * s}, {2, -1.0 * s}};
    if (k == n - 1)
        return {{n - 3, 1.0 * s}, {n - 2, -4.0 * s}, {n - 1, 3.0 * s}};
    return {{k - 1, -s}, {k + 1, s}};
}

// Second derivative; the one-sided end formula is second order when n >= 4.
Taps second_derivative_1d(int k, int n, double h) {
    const double s = 1.0 / (h * h);
    if (k == 0) {
        if (n >= 4)
            return {{0, 2.0 * s}, {1, -5.0 * s}, {2, 4.0 * s}, {3, -1.0 * s}};
        return {{0, s}, {1, -2.0 * s}, {2, s}};
    }
    if (k == n - 1) {
        if (n >= 4)
            return {{n - 4, -1.0 * s}, {n - 3, 4.0 * s}, {n - 2, -5.0 * s}, {n - 1, 2.0 * s}};
        return {{n - 3, s}, {n - 2, -2.0 * s}, {n - 1, s}};
    }
    return {{k - 1, s}, {k, -2.0 * s}, {k + 1, s}};
}

template <class Build>
Stencil make_stencil(const Grid2D& g, Build&& taps_at) {
    Stencil st;
    st.start.reserve(g.size() + 1);
    st.start.push_back(0);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            for (const auto& [node, w] : taps_at(i, j)) {
                st.index.push_back(node);
                st.weight.push_back(w);
            }
            st.start.push_back(static_cast<int>(st.index.size()));
        }
    }
    return st;
}

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

} // namespace

void Grid2D::validate() const {
    if (nx < 3)
        throw ConfigError("domain.nx", "needs at least 3 nodes");
    if (ny < 3)
        throw ConfigError("domain.ny", "needs at least 3 nodes");
    if (!(Lx > 0.0) || !std::isfinite(Lx))
        throw ConfigError("domain.Lx", "must be positive");
    if (!(Ly > 0.0) || !std::isfinite(Ly))
        throw ConfigError("domain.Ly", "must be positive");
}

std::string to_string(EdgeTag tag) {
    switch (tag) {
    case EdgeTag::Clamped: return "clamped";
    case EdgeTag::Pinned: return "pinned";
    case EdgeTag::Free: return "free";
    }
    return "?";
}

EdgeTag edge_tag_from_string(const std::string& s) {
    if (s == "clamped") return EdgeTag::Clamped;
    if (s == "pinned") return EdgeTag::Pinned;
    if (s == "free") return EdgeTag::Free;
    throw std::invalid_argument("unknown edge tag '" + s + "'");
}

std::string to_string(Edge e) {
    switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
    }
    return "?";
}

bool BoundarySpec::all_pinned() const {
    for (auto t : tags)
        if (t != EdgeTag::Pinned)
            return false;
    return true;
}

LoadSpec LoadSpec::zero(int nodes) {
    LoadSpec l;
    l.b = Field::Zero(nodes, 3);
    l.B.assign(nodes, Tensor32::Zero());
    l.tau = Field::Zero(nodes, 3);
    l.mu = Field::Zero(nodes, 3);
    return l;
}

GridOperators::GridOperators(const Grid2D& grid) : grid_(grid) {
    grid_.validate();
    const Grid2D& g = grid_;
    const double hx = g.hx(), hy = g.hy();

    d1_ = make_stencil(g, [&](int i, int j) {
        Taps out;
        for (auto [ii, w] : first_derivative_1d(i, g.nx, hx))
            out.emplace_back(g.node(ii, j), w);
        return out;
    });
    d2_ = make_stencil(g, [&](int i, int j) {
        Taps out;
        for (auto [jj, w] : first_derivative_1d(j, g.ny, hy))
            out.emplace_back(g.node(i, jj), w);
        return out;
    });
    d11_ = make_stencil(g, [&](int i, int j) {
        Taps out;
        for (auto [ii, w] : second_derivative_1d(i, g.nx, hx))
            out.emplace_back(g.node(ii, j), w);
        return out;
    });
    d22_ = make_stencil(g, [&](int i, int j) {
        Taps out;
        for (auto [jj, w] : second_derivative_1d(j, g.ny, hy))
            out.emplace_back(g.node(i, jj), w);
        return out;
    });
    // Tensor product of the two first-derivative operators. D1 D2 = D2 D1 on a
    // product grid, so both cross-difference orders coincide and G is symmetric.
    d12_ = make_stencil(g, [&](int i, int j) {
        Taps out;
        for (auto [ii, wx] : first_derivative_1d(i, g.nx, hx))
            for (auto [jj, wy] : first_derivative_1d(j, g.ny, hy))
                out.emplace_back(g.node(ii, jj), wx * wy);
        return out;
    });

    auto trap = [](int k, int n, double h) { return (k == 0 || k == n - 1) ? 0.5 * h : h; };
    weights_.resize(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            weights_[g.node(i, j)] = trap(i, g.nx, hx) * trap(j, g.ny, hy);

    auto& left = edges_[static_cast<int>(Edge::Left)];
    auto& right = edges_[static_cast<int>(Edge::Right)];
    auto& bottom = edges_[static_cast<int>(Edge::Bottom)];
    auto& top = edges_[static_cast<int>(Edge::Top)];
    left = {Edge::Left, Vec2(-1.0, 0.0), {}, {}};
    right = {Edge::Right, Vec2(1.0, 0.0), {}, {}};
    bottom = {Edge::Bottom, Vec2(0.0, -1.0), {}, {}};
    top = {Edge::Top, Vec2(0.0, 1.0), {}, {}};
    for (int j = 0; j < g.ny; ++j) {
        left.nodes.push_back(g.node(0, j));
        right.nodes.push_back(g.node(g.nx - 1, j));
        left.weight.push_back(trap(j, g.ny, hy));
        right.weight.push_back(trap(j, g.ny, hy));
    }
    for (int i = 0; i < g.nx; ++i) {
        bottom.nodes.push_back(g.node(i, 0));
        top.nodes.push_back(g.node(i, g.ny - 1));
        bottom.weight.push_back(trap(i, g.nx, hx));
        top.weight.push_back(trap(i, g.nx, hx));
    }
}

NodeDerivatives GridOperators::derivatives(const Field& f, int node) const {
    NodeDerivatives d;
    d.F.col(0) = d1_.apply(f, node);
    d.F.col(1) = d2_.apply(f, node);
    d.G.c.col(0) = d11_.apply(f, node);
    d.G.c.col(1) = d22_.apply(f, node);
    d.G.c.col(2) = d12_.apply(f, node);
    return d;
}

std::vector<NodeDerivatives> GridOperators::derivatives(const Field& f) const {
    std::vector<NodeDerivatives> out(grid_.size());
    for (int n = 0; n < grid_.size(); ++n)
        out[n] = derivatives(f, n);
    return out;
}

void GridOperators::scatter(int node, const Tensor32& P_F, const SymThirdTensor& P_G, double s,
                            Field& out) const {
    d1_.scatter(node, P_F.col(0), s, out);
    d2_.scatter(node, P_F.col(1), s, out);
    d11_.scatter(node, P_G.c.col(0), s, out);
    d22_.scatter(node, P_G.c.col(1), s, out);
    // G_{i12} and G_{i21} share one stencil.
    d12_.scatter(node, P_G.c.col(2), 2.0 * s, out);
}

Problem::Problem(Grid2D grid_, BoundarySpec boundary_, LoadSpec loads_, MaterialParams material_)
    : grid(grid_), boundary(std::move(boundary_)), loads(std::move(loads_)),
      material(material_), ops(grid_) {
    const int n = grid.size();
    if (boundary.f_o.rows() == 0)
        boundary.f_o = identity_field(grid);
    if (boundary.f_o.rows() != n)
        throw ConfigError("boundary.f_o", "node count does not match the grid");
    LoadSpec zero = LoadSpec::zero(n);
    if (loads.b.rows() == 0) loads.b = zero.b;
    if (loads.B.empty()) loads.B = zero.B;
    if (loads.tau.rows() == 0) loads.tau = zero.tau;
    if (loads.mu.rows() == 0) loads.mu = zero.mu;
    if (loads.b.rows() != n || static_cast<int>(loads.B.size()) != n || loads.tau.rows() != n ||
        loads.mu.rows() != n)
        throw ConfigError("loads", "nodal load arrays do not match the grid");
    refresh_constraints();
}

void Problem::refresh_constraints() { constrained = constraint_mask(grid, boundary); }

Field identity_field(const Grid2D& grid) { return stretch_field(grid, 1.0, 1.0); }

Field stretch_field(const Grid2D& grid, double lambda_x, double lambda_y) {
    Field f(grid.size(), 3);
    for (int n = 0; n < grid.size(); ++n) {
        const Vec2 x = grid.point(n);
        f.row(n) << lambda_x * x(0), lambda_y * x(1), 0.0;
    }
    return f;
}

DofMask constraint_mask(const Grid2D& g, const BoundarySpec& boundary) {
    DofMask mask = DofMask::Constant(g.size(), 3, false);
    auto fix_layer = [&](Edge e, int layer) {
        if (e == Edge::Left || e == Edge::Right) {
            const int i = e == Edge::Left ? layer : g.nx - 1 - layer;
            for (int j = 0; j < g.ny; ++j)
                mask.row(g.node(i, j)).setConstant(true);
        } else {
            const int j = e == Edge::Bottom ? layer : g.ny - 1 - layer;
            for (int i = 0; i < g.nx; ++i)
                mask.row(g.node(i, j)).setConstant(true);
        }
    };
    for (int k = 0; k < 4; ++k) {
        const Edge e = static_cast<Edge>(k);
        switch (boundary.tags[k]) {
        case EdgeTag::Clamped:
            fix_layer(e, 0);
            fix_layer(e, 1);
            break;
        case EdgeTag::Pinned: fix_layer(e, 0); break;
        case EdgeTag::Free: break;
        }
    }
    if (boundary.planar)
        mask.col(2).setConstant(true);
    return mask;
}

Field project_constraints(const Field& field, const Problem& problem) {
    Field out = field;
    for (int n = 0; n < out.rows(); ++n)
        for (int c = 0; c < 3; ++c)
            if (problem.constrained(n, c))
                out(n, c) = problem.boundary.f_o(n, c);
    return out;
}

Field project_variation(const Field& variation, const Problem& problem) {
    Field out = variation;
    for (int n = 0; n < out.rows(); ++n)
        for (int c = 0; c < 3; ++c)
            if (problem.constrained(n, c))
                out(n, c) = 0.0;
    return out;
}

std::vector<KinematicState> evaluate_kinematics(const Field& field, const GridOperators& ops) {
    std::vector<KinematicState> out;
    out.reserve(ops.grid().size());
    for (int n = 0; n < ops.grid().size(); ++n) {
        const NodeDerivatives d = ops.derivatives(field, n);
        try {
            out.push_back(kinematic_state(d.G, d.F));
        } catch (const DegenerateMetric& e) {
            throw DegenerateMetric(e.J(), static_cast<std::size_t>(n));
        }
    }
    return out;
}

double min_J(const Field& field, const GridOperators& ops) {
    double m = std::numeric_limits<double>::infinity();
    for (int n = 0; n < ops.grid().size(); ++n) {
        const NodeDerivatives d = ops.derivatives(field, n);
        const double J = metric(d.F).J;
        if (!std::isfinite(J))
            return -std::numeric_limits<double>::infinity();
        m = std::min(m, J);
    }
    return m;
}

namespace {

bool tau_active(EdgeTag t) { return t == EdgeTag::Free; }
bool mu_active(EdgeTag t) { return t != EdgeTag::Clamped; }

} // namespace

double load_functional(const Field& field, const Problem& problem) {
    const GridOperators& ops = problem.ops;
    const LoadSpec& L = problem.loads;
    CompensatedSum acc;
    for (int n = 0; n < problem.grid.size(); ++n) {
        const double w = ops.weights()[n];
        acc.add(w * L.b.row(n).dot(field.row(n)));
        const Tensor32& B = L.B[n];
        if (!B.isZero(0.0)) {
            const Tensor32 F = (Tensor32() << ops.d1().apply(field, n), ops.d2().apply(field, n))
                                   .finished();
            acc.add(w * (B.array() * F.array()).sum());
        }
    }
    for (const BoundaryEdge& e : ops.edges()) {
        const EdgeTag tag = problem.boundary.tag(e.edge);
        for (std::size_t k = 0; k < e.nodes.size(); ++k) {
            const int n = e.nodes[k];
            if (tau_active(tag))
                acc.add(e.weight[k] * L.tau.row(n).dot(field.row(n)));
            if (mu_active(tag)) {
                const Vec3 Fnu = e.normal(0) * ops.d1().apply(field, n) +
                                 e.normal(1) * ops.d2().apply(field, n);
                acc.add(e.weight[k] * L.mu.row(n).dot(Fnu.transpose()));
            }
        }
    }
    return acc.value();
}

Field load_gradient(const Problem& problem) {
    const GridOperators& ops = problem.ops;
    const LoadSpec& L = problem.loads;
    Field g = Field::Zero(problem.grid.size(), 3);
    const SymThirdTensor zeroG;
    for (int n = 0; n < problem.grid.size(); ++n) {
        const double w = ops.weights()[n];
        g.row(n) += w * L.b.row(n);
        if (!L.B[n].isZero(0.0))
            ops.scatter(n, L.B[n], zeroG, w, g);
    }
    for (const BoundaryEdge& e : ops.edges()) {
        const EdgeTag tag = problem.boundary.tag(e.edge);
        for (std::size_t k = 0; k < e.nodes.size(); ++k) {
            const int n = e.nodes[k];
            if (tau_active(tag))
                g.row(n) += e.weight[k] * L.tau.row(n);
            if (mu_active(tag)) {
                const Vec3 mu = L.mu.row(n).transpose();
                ops.d1().scatter(n, mu, e.weight[k] * e.normal(0), g);
                ops.d2().scatter(n, mu, e.weight[k] * e.normal(1), g);
            }
        }
    }
    return g;
}

TotalEnergy total_energy(const Field& field, const Problem& problem) {
    const GridOperators& ops = problem.ops;
    CompensatedSum membrane, bending, barrier;
    for (int n = 0; n < problem.grid.size(); ++n) {
        const NodeDerivatives d = ops.derivatives(field, n);
        EnergyBreakdown e;
        try {
            e = psi(d.G, d.F, problem.material);
        } catch (const DegenerateMetric& err) {
            throw DegenerateMetric(err.J(), static_cast<std::size_t>(n));
        }
        const double w = ops.weights()[n];
        membrane.add(w * e.membrane);
        bending.add(w * e.bending);
        barrier.add(w * e.barrier);
    }
    TotalEnergy out;
    out.internal.membrane = membrane.value();
    out.internal.bending = bending.value();
    out.internal.barrier = barrier.value();
    out.internal.total = out.internal.membrane + out.internal.bending + out.internal.barrier;
    out.load_work = load_functional(field, problem);
    out.energy = out.internal.total - out.load_work;
    return out;
}

Field total_gradient(const Field& field, const Problem& problem) {
    const GridOperators& ops = problem.ops;
    Field g = Field::Zero(problem.grid.size(), 3);
    for (int n = 0; n < problem.grid.size(); ++n) {
        const NodeDerivatives d = ops.derivatives(field, n);
        PsiGradient pg;
        try {
            pg = psi_grad(d.G, d.F, problem.material);
        } catch (const DegenerateMetric& err) {
            throw DegenerateMetric(err.J(), static_cast<std::size_t>(n));
        }
        ops.scatter(n, pg.Psi_F, pg.Psi_G, ops.weights()[n], g);
    }
    g -= load_gradient(problem);
    for (int n = 0; n < g.rows(); ++n)
        for (int c = 0; c < 3; ++c)
            if (problem.constrained(n, c))
                g(n, c) = 0.0;
    return g;
}

double projected_max_norm(const Field& gradient, const DofMask& constrained) {
    double m = 0.0;
    for (int n = 0; n < gradient.rows(); ++n)
        for (int c = 0; c < 3; ++c)
            if (!constrained(n, c))
                m = std::max(m, std::abs(gradient(n, c)));
    return m;
}

DivergenceIdentity divergence_identity_check(const Eigen::MatrixX2d& w,
                                             const Eigen::VectorXd& phi,
                                             const GridOperators& ops) {
    const int N = ops.grid().size();
    const Eigen::VectorXd w1 = w.col(0), w2 = w.col(1);
    CompensatedSum lhs, rhs;
    for (int n = 0; n < N; ++n) {
        Mat2 Dw;
        Dw << ops.d1().apply(w1, n), ops.d2().apply(w1, n), ops.d1().apply(w2, n),
            ops.d2().apply(w2, n);
        Mat2 cof;
        cof << Dw(1, 1), -Dw(1, 0), -Dw(0, 1), Dw(0, 0);
        const Vec2 grad_phi(ops.d1().apply(phi, n), ops.d2().apply(phi, n));
        const double wn = ops.weights()[n];
        lhs.add(wn * Dw.determinant() * phi(n));
        rhs.add(-0.5 * wn * (cof * grad_phi).dot(Vec2(w1(n), w2(n))));
    }
    return {lhs.value(), rhs.value()};
}

Eigen::MatrixX2d second_minor_field(const Field& f, const GridOperators& ops) {
    Eigen::MatrixX2d w(ops.grid().size(), 2);
    for (int n = 0; n < ops.grid().size(); ++n) {
        const Vec3 f1 = ops.d1().apply(f, n);
        w(n, 0) = f1(1);
        w(n, 1) = f1(2);
    }
    return w;
}

SobolevNorms discrete_norms(const Field& field, const GridOperators& ops, double p) {
    CompensatedSum s0, s1, s2;
    for (int n = 0; n < ops.grid().size(); ++n) {
        const NodeDerivatives d = ops.derivatives(field, n);
        const double w = ops.weights()[n];
        s0.add(w * std::pow(field.row(n).norm(), p));
        s1.add(w * std::pow(d.F.norm(), p));
        s2.add(w * std::pow(d.G.norm(), p));
    }
    SobolevNorms out;
    out.Lp = std::pow(s0.value(), 1.0 / p);
    out.W1p = std::pow(s0.value() + s1.value(), 1.0 / p);
    out.W2p = std::pow(s0.value() + s1.value() + s2.value(), 1.0 / p);
    out.grad2_Lp = std::pow(s2.value(), 1.0 / p);
    return out;
}

} // namespace nonsimple
