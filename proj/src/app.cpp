#include "nonsimple/app.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "nonsimple/errors.hpp"

namespace nonsimple {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool wants(const std::vector<std::string>& formats, const std::string& f) {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

void write_vtk(std::ostream& os, const Field& field, const Problem& problem) {
    const Grid2D& g = problem.grid;
    const int N = g.size();
    std::vector<double> J(N), kappa(N), total(N), mem(N), bend(N), bar(N);
    for (int n = 0; n < N; ++n) {
        const NodeDerivatives d = problem.ops.derivatives(field, n);
        const KinematicState s = kinematic_state(d.G, d.F);
        const EnergyBreakdown e = psi(d.G, d.F, problem.material);
        J[n] = s.J;
        kappa[n] = s.kappa;
        total[n] = e.total;
        mem[n] = e.membrane;
        bend[n] = e.bending;
        bar[n] = e.barrier;
    }

    os << "# vtk DataFile Version 3.0\n"
       << "nonsimple deformed surface\n"
       << "ASCII\n"
       << "DATASET STRUCTURED_GRID\n"
       << "DIMENSIONS " << g.nx << ' ' << g.ny << " 1\n"
       << "POINTS " << N << " double\n";
    os << std::setprecision(17);
    for (int n = 0; n < N; ++n)
        os << field(n, 0) << ' ' << field(n, 1) << ' ' << field(n, 2) << '\n';
    os << "POINT_DATA " << N << '\n';
    auto scalars = [&](const char* name, const std::vector<double>& v) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double x : v)
            os << x << '\n';
    };
    scalars("J", J);
    scalars("kappa", kappa);
    scalars("psi_total", total);
    scalars("psi_membrane", mem);
    scalars("psi_bending", bend);
    scalars("psi_barrier", bar);
}

CheckOutcome cmd_check(const RunConfig& config, bool allow_noncoercive, std::uint64_t seed) {
    const MaterialParams& mp = config.material;
    Rng rng(seed);
    CheckOutcome out;

    const HypothesisReport hyp = hypothesis_check(mp, 2000, rng);
    const CheckRecord obj = objectivity_check(mp, 500, rng);

    const LiftedDensity lifted = lifted_density(mp);
    std::size_t violations = 0;
    json worst = json::object();
    for (int k = 0; k < 5; ++k) {
        const Tensor32 F = random_deformation_gradient(rng, 0.2, 5.0);
        const auto v = polyconvexity_probe(lifted, F, 40, rng);
        violations += v.size();
        if (!v.empty() && worst.empty())
            worst = {{"t", v.front().t}, {"lhs", v.front().lhs}, {"rhs", v.front().rhs}};
    }
    CheckRecord poly{"lifted_convexity", violations == 0 ? "pass" : "warn",
                     {{"segments", 200}, {"violations", violations}}, worst};

    std::vector<std::string> messages;
    bool ok = true;
    if (!hyp.growth.passed()) {
        ok = false;
        messages.push_back(hyp.growth.worst_sample.value("message", "growth check failed"));
    }
    if (!hyp.coercivity.passed() || !hyp.upper.passed()) {
        ok = false;
        messages.push_back("sampled growth bounds violated");
    }
    if (!obj.passed()) {
        ok = false;
        messages.push_back("objectivity deviation exceeds 1e-10");
    }
    const auto warn = noncoercivity_warning(mp);
    if (warn && !allow_noncoercive) {
        ok = false;
        messages.push_back(*warn + " (pass --allow-noncoercive to proceed)");
    }

    out.exit_code = ok ? kExitOk : kExitHypothesis;
    out.report = {{"status", ok ? (hyp.warnings.empty() ? "pass" : "warn") : "fail"},
                  {"hypotheses", hyp.to_json()},
                  {"objectivity", obj.to_json()},
                  {"polyconvexity", poly.to_json()},
                  {"warnings", hyp.warnings},
                  {"messages", messages}};
    return out;
}

RunArtifacts analyze(const MinimizeResult& result, const Problem& problem,
                     const SolveConfig& config) {
    RunArtifacts art;
    art.residual_threshold = 10.0 * config.grad_tol;
    art.result = result;
    art.residual = residual_suite(result.field, problem);
    try {
        art.eta_report = eta_estimate(result.field, problem);
        art.eta = art.eta_report->to_json();
        art.eta["status"] = art.eta_report->bound_holds ? "pass" : "fail";
    } catch (const Inapplicable& e) {
        art.eta = {{"report", "min_J_lower_bound"}, {"status", "inapplicable"}, {"reason", e.what()}};
    } catch (const BisectionFailure& e) {
        art.eta = {{"report", "min_J_lower_bound"}, {"status", "error"}, {"reason", e.what()}};
    }
    return art;
}

namespace {

json summary_json(const RunArtifacts& art) {
    const MinimizeResult& r = art.result;
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"energy", r.energy.energy},
            {"membrane", r.energy.internal.membrane},
            {"bending", r.energy.internal.bending},
            {"barrier", r.energy.internal.barrier},
            {"load_work", r.energy.load_work},
            {"grad_norm", r.grad_norm},
            {"min_J", r.min_J},
            {"max_normalized_residual", art.residual.max_normalized},
            {"residual_threshold", art.residual_threshold},
            {"residual_pass", art.residual.max_normalized <= art.residual_threshold},
            {"eta", art.eta_report ? json(art.eta_report->eta) : json(nullptr)},
            {"eta_status", art.eta.value("status", "")}};
}

} // namespace

void write_artifacts(const fs::path& dir, const RunArtifacts& art, const Problem& problem,
                     const std::vector<std::string>& formats) {
    fs::create_directories(dir);
    if (wants(formats, "vtk")) {
        std::ostringstream os;
        write_vtk(os, art.result.field, problem);
        atomic_write(dir / "surface.vtk", os.str());
    }
    if (wants(formats, "csv")) {
        std::ostringstream os;
        write_trace_csv(os, art.result.trace);
        atomic_write(dir / "trace.csv", os.str());
    }
    if (wants(formats, "json")) {
        json res = art.residual.to_json();
        res["threshold"] = art.residual_threshold;
        res["status"] = art.residual.max_normalized <= art.residual_threshold ? "pass" : "fail";
        atomic_write(dir / "residual.json", dump(res));
        atomic_write(dir / "eta.json", dump(art.eta));
    }
    atomic_write(dir / "summary.json", dump(summary_json(art)));
}

int cmd_run(const RunConfig& config, const RunOptions& options, std::ostream& log) {
    if (!options.skip_check) {
        const CheckOutcome chk = cmd_check(config, options.allow_noncoercive);
        for (const auto& w : chk.report["warnings"])
            log << "warning: " << w.get<std::string>() << '\n';
        if (chk.exit_code != kExitOk) {
            for (const auto& m : chk.report["messages"])
                log << "check failed: " << m.get<std::string>() << '\n';
            return chk.exit_code;
        }
    }

    SolveConfig sc = config.solver;
    if (options.seed)
        sc.seed = *options.seed;
    const Problem problem = config.make_problem();
    const MinimizeResult result = minimize(default_start(problem, sc), problem, sc);
    const RunArtifacts art = analyze(result, problem, sc);

    fs::path dir = options.out_dir ? *options.out_dir : fs::path(config.output_directory);
    if (dir.is_relative() && !options.out_dir)
        dir = config.base_dir / dir;
    write_artifacts(dir, art, problem, config.formats);

    log << (result.converged ? "converged" : "not converged") << " after " << result.iterations
        << " iterations: E = " << std::setprecision(12) << result.energy.energy
        << ", |g| = " << result.grad_norm << ", min J = " << result.min_J
        << ", max residual = " << art.residual.max_normalized << '\n';
    return result.converged ? kExitOk : kExitNotConverged;
}

namespace {

std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

int cmd_sweep(const json& document, const fs::path& base_dir, const std::string& param,
              const std::vector<double>& values, const SweepOptions& options, std::ostream& log) {
    if (values.empty())
        throw ConfigError("--values", "at least one value is required");
    if (param.rfind("solver.", 0) == 0 || param.rfind("domain.", 0) == 0 ||
        param.rfind("outputs.", 0) == 0)
        throw ConfigError(param, "sweeps over solver, domain or outputs fields are not supported");

    std::vector<RunConfig> configs;
    for (double v : values) {
        json doc = document;
        set_json_path(doc, param, v);
        configs.push_back(RunConfig::from_json(doc, base_dir));
    }

    if (!options.run.skip_check) {
        for (std::size_t k = 0; k < configs.size(); ++k) {
            const CheckOutcome chk = cmd_check(configs[k], options.run.allow_noncoercive);
            if (chk.exit_code != kExitOk) {
                for (const auto& m : chk.report["messages"])
                    log << "step " << k << ": check failed: " << m.get<std::string>() << '\n';
                return chk.exit_code;
            }
        }
    }

    SolveConfig sc = configs[0].solver;
    if (options.run.seed)
        sc.seed = *options.run.seed;
    std::vector<Problem> schedule;
    for (const RunConfig& c : configs)
        schedule.push_back(c.make_problem());

    const SweepOutcome sweep = continuation_sweep(schedule, sc);

    fs::path dir = options.run.out_dir ? *options.run.out_dir : fs::path(configs[0].output_directory);
    if (dir.is_relative() && !options.run.out_dir)
        dir = base_dir / dir;

    std::ostringstream csv;
    csv << "param,energy,membrane,bending,barrier,load_work,min_J,eta,max_residual,converged";
    if (options.compare_flat)
        csv << ",flat_energy";
    csv << "\r\n";

    for (std::size_t k = 0; k < sweep.steps.size(); ++k) {
        const RunArtifacts art = analyze(sweep.steps[k], schedule[k], sc);
        std::ostringstream name;
        name << "step_" << std::setw(3) << std::setfill('0') << k;
        write_artifacts(dir / name.str(), art, schedule[k], configs[k].formats);

        const MinimizeResult& r = art.result;
        csv << csv_number(values[k]) << ',' << csv_number(r.energy.energy) << ','
            << csv_number(r.energy.internal.membrane) << ','
            << csv_number(r.energy.internal.bending) << ','
            << csv_number(r.energy.internal.barrier) << ',' << csv_number(r.energy.load_work)
            << ',' << csv_number(r.min_J) << ','
            << (art.eta_report ? csv_number(art.eta_report->eta) : std::string()) << ','
            << csv_number(art.residual.max_normalized) << ',' << (r.converged ? "true" : "false");
        if (options.compare_flat) {
            Problem flat = schedule[k];
            flat.boundary.planar = true;
            flat.refresh_constraints();
            SolveConfig fc = sc;
            fc.perturbation_amplitude = 0.0;
            const MinimizeResult fr =
                minimize(project_constraints(flat.boundary.f_o, flat), flat, fc);
            csv << ',' << csv_number(fr.energy.energy);
            log << "step " << k << ": flat energy " << std::setprecision(12) << fr.energy.energy
                << (fr.converged ? "" : " (not converged)") << '\n';
        }
        csv << "\r\n";
        log << "step " << k << " (" << param << " = " << values[k] << "): "
            << (r.converged ? "converged" : "not converged") << ", E = "
            << std::setprecision(12) << r.energy.energy << ", min J = " << r.min_J << '\n';
    }
    atomic_write(dir / "summary.csv", csv.str());

    if (sweep.failed_step) {
        log << "sweep stopped: step " << *sweep.failed_step << " did not converge\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

} // namespace nonsimple
