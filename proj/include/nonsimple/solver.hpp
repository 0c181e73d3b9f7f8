#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "nonsimple/discretization.hpp"

namespace nonsimple {

struct SolveConfig {
    double grad_tol = 1e-8;   ///< stop when the projected-gradient max-norm is below this
    int max_iters = 20000;
    double ls_shrink = 0.5;
    double ls_armijo = 1e-4;
    int memory = 10;          ///< L-BFGS history length
    double perturbation_amplitude = 0.0; ///< transverse noise added to free nodes of the start
    std::uint64_t seed = 0;
    int max_backtracks = 80;

    void validate() const;
};

struct TraceRow {
    int iter = 0;
    TotalEnergy energy;
    double grad_norm = 0.0;
    double min_J = 0.0;
    double step_length = 0.0;
};

struct MinimizeResult {
    Field field;
    TotalEnergy energy;
    double grad_norm = 0.0;
    double min_J = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<TraceRow> trace;
};

/// Limited-memory quasi-Newton descent over the unconstrained entries.
///
/// Each trial step is first shrunk until every nodal J is positive, and only then
/// tested for sufficient decrease, so the barrier is never evaluated outside its
/// domain. Throws InfeasibleStart when the (projected, perturbed) start has a node
/// with J <= 0 or violates the constraints. Non-convergence is reported through
/// `converged`, with the best iterate returned.
MinimizeResult minimize(const Field& initial, const Problem& problem, const SolveConfig& config);

/// Initial iterate: f_o plus the configured transverse perturbation on free nodes.
Field default_start(const Problem& problem, const SolveConfig& config);

struct SweepOutcome {
    std::vector<MinimizeResult> steps;
    std::optional<std::size_t> failed_step; ///< first step that did not converge
};

/// Solves the schedule in order, warm-starting each step from the previous
/// converged field shifted by the change of prescribed placement. The schedule
/// must share one grid. Stops after the first non-converged step.
SweepOutcome continuation_sweep(const std::vector<Problem>& schedule, const SolveConfig& config,
                                std::optional<Field> initial = std::nullopt);

/// iter,energy,membrane,bending,barrier,load_work,grad_norm,min_J,step_length
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

} // namespace nonsimple
