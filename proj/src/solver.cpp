#include "nonsimple/solver.hpp"

#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <random>

#include "nonsimple/errors.hpp"

namespace nonsimple {

void SolveConfig::validate() const {
    if (!(grad_tol > 0.0))
        throw ConfigError("solver.grad_tol", "must be positive");
    if (max_iters < 1)
        throw ConfigError("solver.max_iters", "must be at least 1");
    if (!(ls_shrink > 0.0 && ls_shrink < 1.0))
        throw ConfigError("solver.ls_shrink", "must lie in (0, 1)");
    if (!(ls_armijo > 0.0 && ls_armijo < 0.5))
        throw ConfigError("solver.ls_armijo", "must lie in (0, 1/2)");
    if (memory < 1)
        throw ConfigError("solver.memory", "must be at least 1");
    if (!(perturbation_amplitude >= 0.0))
        throw ConfigError("solver.perturbation_amplitude", "must be nonnegative");
}

Field default_start(const Problem& problem, const SolveConfig&) { return problem.boundary.f_o; }

namespace {

constexpr int kMaxStalled = 20;

using Vec = Eigen::VectorXd;

Eigen::Map<Vec> flat(Field& f) { return {f.data(), f.size()}; }

Field perturbed(const Field& start, const Problem& problem, const SolveConfig& config) {
    if (config.perturbation_amplitude == 0.0)
        return start;
    Rng rng(config.seed);
    std::normal_distribution<double> noise(0.0, config.perturbation_amplitude);
    Field out = start;
    for (int n = 0; n < out.rows(); ++n) {
        const double v = noise(rng);
        if (!problem.constrained(n, 2))
            out(n, 2) += v;
    }
    return out;
}

bool satisfies_constraints(const Field& f, const Problem& problem) {
    for (int n = 0; n < f.rows(); ++n)
        for (int c = 0; c < 3; ++c)
            if (problem.constrained(n, c) &&
                std::abs(f(n, c) - problem.boundary.f_o(n, c)) >
                    1e-12 * (1.0 + std::abs(problem.boundary.f_o(n, c))))
                return false;
    return true;
}

struct Pair {
    Vec s, y;
    double rho;
};

// Two-loop recursion applied to g.
Vec lbfgs_direction(const Vec& g, const std::deque<Pair>& history) {
    Vec r = g;
    std::vector<double> a(history.size());
    for (int k = static_cast<int>(history.size()) - 1; k >= 0; --k) {
        a[k] = history[k].rho * history[k].s.dot(r);
        r -= a[k] * history[k].y;
    }
    if (!history.empty()) {
        const Pair& last = history.back();
        r *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
        const double b = history[k].rho * history[k].y.dot(r);
        r += (a[k] - b) * history[k].s;
    }
    return -r;
}

} // namespace

MinimizeResult minimize(const Field& initial, const Problem& problem, const SolveConfig& config) {
    config.validate();
    if (initial.rows() != problem.grid.size())
        throw InfeasibleStart("initial field does not match the grid");
    if (!satisfies_constraints(initial, problem))
        throw InfeasibleStart("initial field violates the boundary constraints");

    Field x = perturbed(initial, problem, config);
    const double J0 = min_J(x, problem.ops);
    if (!(J0 > kJFloor))
        throw InfeasibleStart("initial field has min J = " + std::to_string(J0));

    const Eigen::Map<const Eigen::Array<bool, Eigen::Dynamic, 1>> fixed(
        problem.constrained.data(), problem.constrained.size());
    auto zero_fixed = [&](Vec& v) {
        for (Eigen::Index k = 0; k < v.size(); ++k)
            if (fixed(k))
                v(k) = 0.0;
    };

    MinimizeResult res;
    TotalEnergy E = total_energy(x, problem);
    Field gfield = total_gradient(x, problem);
    Vec g = flat(gfield);
    double gnorm = projected_max_norm(gfield, problem.constrained);
    double mJ = J0;
    res.trace.push_back({0, E, gnorm, mJ, 0.0});

    const double h = std::min(problem.grid.hx(), problem.grid.hy());
    std::deque<Pair> history;
    int iter = 0;
    int stalled = 0;
    bool converged = gnorm <= config.grad_tol;

    while (!converged && iter < config.max_iters) {
        Vec d = lbfgs_direction(g, history);
        zero_fixed(d);
        if (!(g.dot(d) < 0.0)) {
            history.clear();
            d = -g;
        }
        double t = 1.0;
        if (history.empty()) {
            // Unscaled gradient step: cap the largest nodal move at a tenth of a cell.
            const double dmax = d.lpNorm<Eigen::Infinity>();
            if (dmax > 0.0)
                t = std::min(1.0, 0.1 * h / dmax);
        }

        const double slope = g.dot(d);
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                             (std::abs(E.internal.membrane) + std::abs(E.internal.bending) +
                              std::abs(E.internal.barrier) + std::abs(E.load_work));
        Field trial;
        TotalEnergy Et;
        Field gnew_field;
        bool accepted = false;
        double trial_J = 0.0;
        for (int bt = 0; bt < config.max_backtracks; ++bt, t *= config.ls_shrink) {
            trial = x;
            flat(trial) += t * d;
            trial_J = min_J(trial, problem.ops);
            if (!(trial_J > kJFloor))
                continue;
            Et = total_energy(trial, problem);
            if (-t * slope > noise) {
                if (Et.energy <= E.energy + config.ls_armijo * t * slope) {
                    accepted = true;
                    break;
                }
                continue;
            }
            // Below the rounding level of E the slope at the trial point decides.
            if (Et.energy <= E.energy) {
                gnew_field = total_gradient(trial, problem);
                const double end_slope = flat(gnew_field).dot(d);
                if (std::abs(end_slope) <= 0.9 * std::abs(slope)) {
                    accepted = true;
                    break;
                }
                gnew_field.resize(0, 3);
            }
        }
        if (!accepted) {
            if (!history.empty()) {
                history.clear();
                continue;
            }
            break;
        }

        // Stop once accepted steps no longer move the iterate.
        const bool moved = t * d.lpNorm<Eigen::Infinity>() >
                           std::numeric_limits<double>::epsilon() * x.cwiseAbs().maxCoeff();
        stalled = moved ? 0 : stalled + 1;
        if (stalled > kMaxStalled)
            break;

        ++iter;
        if (gnew_field.rows() == 0)
            gnew_field = total_gradient(trial, problem);
        Vec gnew = flat(gnew_field);
        Pair pr{t * d, gnew - g, 0.0};
        const double sy = pr.s.dot(pr.y);
        if (sy > 1e-300 && sy > 1e-12 * pr.s.norm() * pr.y.norm()) {
            pr.rho = 1.0 / sy;
            history.push_back(std::move(pr));
            if (static_cast<int>(history.size()) > config.memory)
                history.pop_front();
        }

        x = std::move(trial);
        E = Et;
        g = gnew;
        gfield = std::move(gnew_field);
        gnorm = projected_max_norm(gfield, problem.constrained);
        mJ = trial_J;
        res.trace.push_back({iter, E, gnorm, mJ, t});
        converged = gnorm <= config.grad_tol;
    }

    res.field = std::move(x);
    res.energy = E;
    res.grad_norm = gnorm;
    res.min_J = mJ;
    res.iterations = iter;
    res.converged = converged;
    return res;
}

SweepOutcome continuation_sweep(const std::vector<Problem>& schedule, const SolveConfig& config,
                                std::optional<Field> initial) {
    if (schedule.empty())
        throw std::invalid_argument("continuation schedule is empty");
    SweepOutcome out;
    SolveConfig warm = config;
    warm.perturbation_amplitude = 0.0;

    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const Problem& prob = schedule[k];
        if (prob.grid.nx != schedule[0].grid.nx || prob.grid.ny != schedule[0].grid.ny)
            throw std::invalid_argument("continuation schedule must share one grid");
        Field start;
        const SolveConfig* cfg = &config;
        if (k == 0) {
            start = initial ? project_constraints(*initial, prob) : default_start(prob, config);
        } else {
            const Field& prev = out.steps.back().field;
            start = project_constraints(
                prev + (prob.boundary.f_o - schedule[k - 1].boundary.f_o), prob);
            if (!(min_J(start, prob.ops) > kJFloor))
                start = prob.boundary.f_o;
            cfg = &warm;
        }
        try {
            out.steps.push_back(minimize(start, prob, *cfg));
        } catch (const InfeasibleStart& e) {
            throw InfeasibleStart("step " + std::to_string(k) + ": " + e.what());
        } catch (const DegenerateMetric& e) {
            throw std::runtime_error("step " + std::to_string(k) + ": " + e.what());
        }
        if (!out.steps.back().converged) {
            out.failed_step = k;
            break;
        }
    }
    return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "iter,energy,membrane,bending,barrier,load_work,grad_norm,min_J,step_length\r\n";
    os << std::setprecision(17);
    for (const TraceRow& r : trace) {
        os << r.iter << ',' << r.energy.energy << ',' << r.energy.internal.membrane << ','
           << r.energy.internal.bending << ',' << r.energy.internal.barrier << ','
           << r.energy.load_work << ',' << r.grad_norm << ',' << r.min_J << ','
           << r.step_length << "\r\n";
    }
}

} // namespace nonsimple
