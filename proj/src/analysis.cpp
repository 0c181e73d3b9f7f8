#include "nonsimple/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nonsimple/errors.hpp"

namespace nonsimple {

using nlohmann::json;

double weak_residual(const Field& field, const Field& phi, const Problem& problem) {
    const GridOperators& ops = problem.ops;
    const LoadSpec& L = problem.loads;
    double interior = 0.0;
    for (int n = 0; n < problem.grid.size(); ++n) {
        const NodeDerivatives d = ops.derivatives(field, n);
        const NodeDerivatives v = ops.derivatives(phi, n);
        PsiGradient pg;
        try {
            pg = psi_grad(d.G, d.F, problem.material);
        } catch (const DegenerateMetric& err) {
            throw DegenerateMetric(err.J(), static_cast<std::size_t>(n));
        }
        const double stress = pg.Psi_G.dot(v.G) + (pg.Psi_F.array() * v.F.array()).sum();
        const double load = L.b.row(n).dot(phi.row(n)) + (L.B[n].array() * v.F.array()).sum();
        interior += ops.weights()[n] * (stress - load);
    }
    double boundary = 0.0;
    for (const BoundaryEdge& e : ops.edges()) {
        const EdgeTag tag = problem.boundary.tag(e.edge);
        for (std::size_t k = 0; k < e.nodes.size(); ++k) {
            const int n = e.nodes[k];
            if (tag == EdgeTag::Free)
                boundary += e.weight[k] * L.tau.row(n).dot(phi.row(n));
            if (tag != EdgeTag::Clamped) {
                const Vec3 dphi_nu = e.normal(0) * ops.d1().apply(phi, n) +
                                     e.normal(1) * ops.d2().apply(phi, n);
                boundary += e.weight[k] * L.mu.row(n).dot(dphi_nu.transpose());
            }
        }
    }
    return interior - boundary;
}

namespace {

double bump_profile(double s) {
    if (std::abs(s) >= 1.0)
        return 0.0;
    const double u = 1.0 - s * s;
    return u * u * u * u;
}

} // namespace

std::vector<Field> bump_basis(const Problem& problem, const BasisSpec& spec,
                              std::vector<std::string>* labels) {
    const Grid2D& g = problem.grid;
    const int m = std::max(spec.lattice, 1);
    const double rx = spec.radius > 0.0 ? spec.radius : 0.6 * g.Lx / (m + 1);
    const double ry = spec.radius > 0.0 ? spec.radius : 0.6 * g.Ly / (m + 1);
    const int components = spec.in_plane_only ? 2 : 3;

    std::vector<Field> out;
    for (int c = 0; c < components; ++c) {
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const double cx = g.Lx * (a + 1) / (m + 1);
                const double cy = g.Ly * (b + 1) / (m + 1);
                Field phi = Field::Zero(g.size(), 3);
                for (int n = 0; n < g.size(); ++n) {
                    const Vec2 x = g.point(n);
                    phi(n, c) = bump_profile((x(0) - cx) / rx) * bump_profile((x(1) - cy) / ry);
                }
                phi = project_variation(phi, problem);
                if (phi.isZero(0.0))
                    continue;
                out.push_back(std::move(phi));
                if (labels) {
                    std::ostringstream os;
                    os << "e" << (c + 1) << "@(" << cx << "," << cy << ")";
                    labels->push_back(os.str());
                }
            }
        }
    }
    return out;
}

json ResidualReport::to_json() const {
    json entries = json::array();
    for (std::size_t k = 0; k < residuals.size(); ++k)
        entries.push_back({{"label", k < labels.size() ? labels[k] : std::to_string(k)},
                           {"residual", residuals[k]},
                           {"normalized", normalized[k]}});
    return {{"report", "weak_residual"},
            {"basis", basis},
            {"max_normalized_residual", max_normalized},
            {"tests", entries}};
}

ResidualReport residual_suite(const Field& field, const Problem& problem, const BasisSpec& spec) {
    ResidualReport rep;
    const std::vector<Field> basis = bump_basis(problem, spec, &rep.labels);
    std::ostringstream desc;
    desc << "tensor-product (1-s^2)^4 bumps on a " << spec.lattice << "x" << spec.lattice
         << " lattice, components " << (spec.in_plane_only ? "e1,e2" : "e1,e2,e3")
         << ", projected into the variation space; normalized by the W^{2,p} norm";
    rep.basis = desc.str();
    for (const Field& phi : basis) {
        const double r = weak_residual(field, phi, problem);
        const double norm = discrete_norms(phi, problem.ops, problem.material.p).W2p;
        rep.residuals.push_back(r);
        rep.normalized.push_back(std::abs(r) / norm);
        rep.max_normalized = std::max(rep.max_normalized, rep.normalized.back());
    }
    return rep;
}

double cone_integral(double t, double M, double alpha, double q, double delta) {
    if (!(t > 0.0))
        return std::numeric_limits<double>::infinity();
    if (M == 0.0)
        return std::pow(t, -q) * delta * delta / 2.0;

    // r = u^{1/alpha}, u = (t/M) v:
    //   h = (1/alpha) (t/M)^{2/alpha} t^{-q} int_0^V v^{2/alpha - 1} (1 + v)^{-q} dv,
    //   V = M delta^alpha / t.
    const double k = 2.0 / alpha - 1.0;
    const double V = M * std::pow(delta, alpha) / t;
    auto integrand = [k, q](double v) {
        return v > 0.0 ? std::exp(k * std::log(v) - q * std::log1p(v)) : 0.0;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

    double sum = 0.0;
    double a = 0.0;
    double b = std::min(1.0, V);
    while (a < V) {
        // Each chunk is mapped onto [0, 1] and scaled to order one before integrating.
        const double scale = integrand(b);
        auto unit = [&](double u) { return integrand(a + (b - a) * u) / scale; };
        sum += (b - a) * scale * GK::integrate(unit, 0.0, 1.0, 15, 1e-13);
        a = b;
        b = std::min(V, a * 8.0);
    }
    const double log_pre = -std::log(alpha) + (2.0 / alpha) * (std::log(t) - std::log(M)) -
                           q * std::log(t);
    return std::exp(log_pre) * sum;
}

double invert_cone_integral(double target, double M, double alpha, double q, double delta) {
    if (!(target > 0.0))
        return std::numeric_limits<double>::infinity();
    auto h = [&](double t) { return cone_integral(t, M, alpha, q, delta); };

    double hi = 1.0;
    while (h(hi) > target && hi < 1e60)
        hi *= 10.0;
    double lo = hi / 10.0;
    while (h(lo) < target && lo > 1e-100)
        lo /= 10.0;
    const double h_lo = h(lo), h_hi = h(hi);
    if (!(h_lo >= target && h_hi <= target))
        throw BisectionFailure(target, h_lo, h_hi);

    // Monotonicity on a log grid before trusting the bisection.
    double prev = std::numeric_limits<double>::infinity();
    const int grid = 64;
    for (int k = 0; k <= grid; ++k) {
        const double t = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / grid);
        const double v = h(t);
        if (!(v < prev))
            throw std::runtime_error("cone integral is not strictly decreasing at t = " +
                                     std::to_string(t));
        prev = v;
    }

    double llo = std::log(lo), lhi = std::log(hi);
    for (int it = 0; it < 300 && lhi - llo > 1e-15 * std::max(1.0, std::abs(llo)); ++it) {
        const double mid = 0.5 * (llo + lhi);
        if (h(std::exp(mid)) > target)
            llo = mid;
        else
            lhi = mid;
    }
    return std::exp(0.5 * (llo + lhi));
}

double hoelder_constant(const Field& field, const GridOperators& ops, double alpha,
                        double delta) {
    const Grid2D& g = ops.grid();
    std::vector<double> J(g.size());
    for (int n = 0; n < g.size(); ++n)
        J[n] = metric(ops.derivatives(field, n).F).J;
    const int wi = static_cast<int>(std::floor(delta / g.hx() + 1e-9));
    const int wj = static_cast<int>(std::floor(delta / g.hy() + 1e-9));
    double M = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int n = g.node(i, j);
            for (int dj = 0; dj <= wj && j + dj < g.ny; ++dj) {
                for (int di = -wi; di <= wi; ++di) {
                    if (dj == 0 && di <= 0)
                        continue;
                    if (i + di < 0 || i + di >= g.nx)
                        continue;
                    const double r = std::hypot(di * g.hx(), dj * g.hy());
                    if (r > delta * (1.0 + 1e-12))
                        continue;
                    const int m = g.node(i + di, j + dj);
                    M = std::max(M, std::abs(J[n] - J[m]) / std::pow(r, alpha));
                }
            }
        }
    }
    return M;
}

json EtaReport::to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"report", "min_J_lower_bound"},
            {"note", "discrete surrogate of the continuum lower bound; not a rigorous bound"},
            {"eta1", num(eta1)},
            {"eta2", num(eta2)},
            {"eta", num(eta)},
            {"M", M},
            {"alpha", alpha},
            {"delta", delta},
            {"gamma", gamma},
            {"C_star", C_star},
            {"C_low", C_low},
            {"offset", offset},
            {"internal_energy", internal_energy},
            {"observed_min_J", observed_min_J},
            {"bound_holds", bound_holds}};
}

EtaReport eta_estimate(const Field& field, const Problem& problem) {
    const MaterialParams& mp = problem.material;
    if (!mp.growth_condition())
        throw Inapplicable("q = " + std::to_string(mp.q) + " < 2p/(p-2) = " +
                           std::to_string(mp.growth_threshold()) +
                           "; the min-J estimator does not apply");
    const CoercivityBound cb = coercivity_bound(mp);
    if (!(cb.C_low > 0.0))
        throw Inapplicable("density has no positive coercivity constant");

    const Grid2D& g = problem.grid;
    const GridOperators& ops = problem.ops;
    EtaReport rep;
    rep.alpha = 1.0 - 2.0 / mp.p;
    rep.delta = std::min(g.hx() * (g.nx - 1), g.hy() * (g.ny - 1)) / 4.0;
    rep.gamma = std::numbers::pi / 2.0;
    rep.C_low = cb.C_low;
    rep.offset = cb.offset;

    rep.observed_min_J = std::max(min_J(field, ops), 0.0);
    rep.M = hoelder_constant(field, ops, rep.alpha, rep.delta);

    const TotalEnergy E = total_energy(field, problem);
    rep.internal_energy = E.internal.total;
    rep.C_star = (rep.internal_energy + rep.offset * ops.area()) / (rep.gamma * rep.C_low);
    rep.eta1 = invert_cone_integral(rep.C_star, rep.M, rep.alpha, mp.q, rep.delta);

    double eta2 = std::numeric_limits<double>::infinity();
    for (const BoundaryEdge& e : ops.edges())
        for (int n : e.nodes)
            eta2 = std::min(eta2, metric(ops.derivatives(problem.boundary.f_o, n).F).J);
    rep.eta2 = eta2;
    rep.eta = std::min(rep.eta1, rep.eta2);
    rep.bound_holds = rep.eta > 0.0 && rep.observed_min_J >= 0.99 * rep.eta;
    return rep;
}

} // namespace nonsimple
