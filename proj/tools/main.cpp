// mpsh: command-line front end.
//
//   mpsh eigen|cone|fm|solve|regularize|verify-suite --config FILE --out DIR
//        [--seed N] [--grid-override K] [--quiet]
//
// Exit codes: 0 ok, 2 config parse error, 3 validation error, 4 solver or
// pipeline failure, 5 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "functions.hpp"
#include "mpsh/io.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;
using namespace mpsh;
using io::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct Run {
    std::string command;
    std::string config_path;
    fs::path out;
    std::uint64_t seed = 0;
    int grid_override = 0;
    bool quiet = false;

    std::string config_text;
    json config = json::object();
    json resolved = json::object();
    json artifacts = json::array();
    std::string module = "cli";
    std::string operation = "run";

    void at(const char* mod, const char* op) {
        module = mod;
        operation = op;
    }

    void write(const std::string& name, const std::string& bytes, const char* mod, const char* op) {
        std::ofstream os(out / name, std::ios::binary);
        if (!os) fail(ErrorKind::Internal, "cannot write " + (out / name).string());
        os << bytes;
        artifacts.push_back({{"file", name}, {"module", mod}, {"operation", op}});
    }

    void write_json(const std::string& name, const json& j, const char* mod, const char* op) {
        write(name, j.dump(2) + "\n", mod, op);
    }

    void write_grid(const std::string& stem, const GridFunction& u, const char* mod, const char* op) {
        std::ostringstream csv;
        write_csv(csv, u);
        write(stem + ".csv", csv.str(), mod, op);
        std::ostringstream bin(std::ios::binary);
        write_binary(bin, u);
        write(stem + ".mpsg", bin.str(), mod, op);
    }
};

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Parse: return 2;
    case ErrorKind::InvalidArgument:
    case ErrorKind::OutsideCone:
    case ErrorKind::IllPosedRHS:
    case ErrorKind::ChiNotPositive:
    case ErrorKind::TargetNotAdmissible: return 3;
    case ErrorKind::NewtonDiverged:
    case ErrorKind::ConeEscape:
    case ErrorKind::DirichletFailure:
    case ErrorKind::ScheduleExhausted: return 4;
    case ErrorKind::Internal: return 5;
    }
    return 5;
}

HermitianMatrix hermitian_at(const json& j, const char* key) {
    require(j.contains(key), std::string("config: missing '") + key + "'");
    return HermitianMatrix(io::matrix_from_json(j.at(key)));
}

MetricMatrix metric_or_identity(const json& j, const char* key, int n) {
    if (!j.contains(key)) return MetricMatrix::identity(n);
    return MetricMatrix(HermitianMatrix(io::matrix_from_json(j.at(key))));
}

MetricField metric_field(const json& j, const GridDomain& d) {
    return MetricField(d, metric_or_identity(j, "metric", d.n()));
}

// ---------------------------------------------------------------------------

json cmd_eigen(Run& run) {
    run.at("hermitian-core", "relative_eigenvalues");
    const auto t = hermitian_at(run.config, "T");
    const auto w = metric_or_identity(run.config, "omega", t.dim());
    const auto spec = relative_eigenvalues(t, w);
    run.resolved = {{"T", io::matrix_to_json(t.matrix())}, {"omega", io::matrix_to_json(w.matrix())}};
    json rep = {{"lambdas", spec.lambdas}, {"basis", io::matrix_to_json(spec.basis)},
                {"relative_trace", relative_trace(t, w)}};
    run.write_json("report.json", rep, "hermitian-core", "relative_eigenvalues");
    return rep;
}

json cmd_cone(Run& run) {
    run.at("positivity-cones", "is_m_semipositive");
    const auto t = hermitian_at(run.config, "T");
    const auto w = metric_or_identity(run.config, "omega", t.dim());
    const int m = run.config.at("m").get<int>();
    const double tol = run.config.value("tolerance", kConeTolerance);
    run.resolved = {{"T", io::matrix_to_json(t.matrix())}, {"omega", io::matrix_to_json(w.matrix())}, {"m", m},
                    {"tolerance", tol}};
    const auto v = is_m_semipositive(t, w, m, tol);
    run.at("positivity-cones", "strong_positivity_oracle");
    const auto o = strong_positivity_oracle(t, w, m, tol);
    json rep = io::to_json(v);
    rep["oracle"] = io::to_json(o);
    rep["wedge_coefficients"] = wedge_coefficients(relative_eigenvalues_only(t, w), m);
    json levels = json::array();
    for (int k = 1; k <= t.dim(); ++k) levels.push_back(io::to_json(is_m_semipositive(t, w, k, tol)));
    rep["all_levels"] = levels;
    run.write_json("report.json", rep, "positivity-cones", "is_m_semipositive");
    return rep;
}

json cmd_fm(Run& run) {
    run.at("fm-operator", "fm_value");
    const auto t = hermitian_at(run.config, "T");
    const auto w = metric_or_identity(run.config, "omega", t.dim());
    const int m = run.config.at("m").get<int>();
    run.resolved = {{"T", io::matrix_to_json(t.matrix())}, {"omega", io::matrix_to_json(w.matrix())}, {"m", m}};
    const auto lambdas = relative_eigenvalues_only(t, w);
    json rep = {{"lambdas", lambdas}, {"fm_plus", fm_plus(t, w, m)}, {"product_bound", fm_product_bound(t.dim(), m)}};
    const bool inside = smallest_m_sum(lambdas, m) > kConeTolerance;
    rep["interior"] = inside;
    if (smallest_m_sum(lambdas, m) >= -kConeTolerance) {
        const auto v = fm_value_from_spectrum(lambdas, m);
        rep["value"] = v.value;
        rep["msums"] = v.msums;
    }
    if (inside) {
        run.at("fm-operator", "fm_gradient_diagonal");
        const auto g = fm_gradient_diagonal(lambdas, m);
        double prod = 1.0;
        for (double x : g) prod *= x;
        rep["gradient_diagonal"] = g;
        rep["gradient_product"] = prod;
        run.at("fm-operator", "fm_via_determinant");
        rep["via_determinant"] = fm_via_determinant(t, w, m);
    }
    if (run.config.contains("B")) {
        run.at("fm-operator", "cone_PmnB_membership");
        const auto b = hermitian_at(run.config, "B");
        run.resolved["B"] = io::matrix_to_json(b.matrix());
        rep["in_PmnB"] = cone_PmnB_membership(t, b, w, m);
    }
    run.write_json("report.json", rep, "fm-operator", "fm_value");
    return rep;
}

json cmd_solve(Run& run) {
    run.at("grid-discretization", "grid");
    const json& c = run.config;
    const GridDomain d = io::grid_from_json(c.at("grid"), run.grid_override);
    const MetricField g = metric_field(c, d);
    SolverConfig cfg = io::solver_config_from_json(c);
    json rhs_j = c.at("rhs");
    const std::string type = rhs_j.at("type").get<std::string>();
    run.resolved = io::to_json(cfg);
    run.resolved["grid"] = io::to_json(d);
    run.resolved["rhs"] = rhs_j;
    if (c.contains("metric")) run.resolved["metric"] = c.at("metric");

    json rep;
    SolveReport sr;
    if (type == "manufactured") {
        require(!d.is_torus(), "rhs manufactured: needs a ball grid");
        const auto field = cli::field_from_json(rhs_j.at("solution"), d);
        require(static_cast<bool>(field.hessian), "rhs manufactured: solution needs a closed-form Hessian");
        const GridFunction exact = cli::sample_field(field, d);
        GridFunction amp(d, 0.0);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d.tag(i) != NodeTag::Interior) continue;
            const auto h = complex_hessian_point(field.hessian(d.coordinates(i)));
            amp[i] = fm_value(h, g.at(i), cfg.m).value;
        }
        run.at("elliptic-solver", "solve_dirichlet");
        sr = solve_dirichlet(exact, exponential_rhs(amp, exact, 1.0, 0.0), g, cfg);
        double err = 0.0;
        for (std::size_t i : d.interior_nodes()) err = std::max(err, std::abs(sr.solution[i] - exact[i]));
        rep["max_error"] = err;
    } else if (type == "penalty") {
        require(!d.is_torus(), "rhs penalty: needs a ball grid");
        const double beta = rhs_j.at("beta").get<double>();
        require(beta > kEuler, "rhs penalty: beta must exceed e");
        const GridFunction f = cli::sample_field(cli::field_from_json(rhs_j.at("reference"), d), d);
        run.at("elliptic-solver", "solve_dirichlet");
        sr = solve_dirichlet(f, exponential_rhs(GridFunction(d, 1.0), f, beta, 1.0 / (2.0 * beta)), g, cfg);
        double cj = kEuler;
        const GridFunction fp = fm_plus_field(f, g, cfg.m);
        for (std::size_t i : d.interior_nodes()) cj = std::max(cj, fp[i]);
        double gap = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.tag(i) != NodeTag::Exterior) gap = std::max(gap, sr.solution[i] - f[i] - std::log(cj) / beta);
        rep["upper_bound_constant"] = cj;
        rep["upper_bound_gap"] = gap;
    } else if (type == "torus_penalty") {
        require(d.is_torus(), "rhs torus_penalty: needs a torus grid");
        const double beta = rhs_j.at("beta").get<double>();
        require(beta > kEuler, "rhs torus_penalty: beta must exceed e");
        const auto chi = hermitian_at(rhs_j, "chi");
        const GridFunction f = cli::sample_field(cli::field_from_json(rhs_j.at("reference"), d), d);
        GridFunction amp(d, 0.0), offset(d, 0.0);
        const GridFunction corridor = corridor_function(fm_plus_field(f, g, cfg.m, chi));
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto lam = relative_eigenvalues_only(chi, g.at(i));
            if (!(smallest_m_sum(lam, cfg.m) > cfg.cone_floor))
                fail(ErrorKind::ChiNotPositive, "chi is not strictly m-positive");
            offset[i] = fm_value_from_spectrum(lam, cfg.m).value / (2.0 * beta);
            amp[i] = rhs_j.contains("amplitude") ? rhs_j.at("amplitude").get<double>() : corridor[i];
        }
        run.at("elliptic-solver", "solve_torus");
        sr = solve_torus(chi, exponential_rhs(amp, f, beta, offset), g, cfg);
    } else {
        fail(ErrorKind::InvalidArgument, "rhs: unknown type '" + type + "'");
    }
    rep["report"] = io::to_json(sr);
    rep["grid"] = io::to_json(d);
    run.write_json("report.json", rep, "elliptic-solver", d.is_torus() ? "solve_torus" : "solve_dirichlet");
    run.write_grid("solution", sr.solution, "elliptic-solver", d.is_torus() ? "solve_torus" : "solve_dirichlet");
    return rep;
}

json cmd_regularize(Run& run) {
    run.at("grid-discretization", "grid");
    const json& c = run.config;
    const std::string mode = c.at("mode").get<std::string>();
    require(mode == "local" || mode == "global", "regularize: mode must be local or global");
    const GridDomain d = io::grid_from_json(c.at("grid"), run.grid_override);
    const MetricField g = metric_field(c, d);
    const int m = c.at("m").get<int>();
    RegularizationConfig rcfg;
    if (c.contains("solver")) rcfg.solver = io::solver_config_from_json(c.at("solver"));
    rcfg.solver.m = m;
    rcfg.min_iterates = c.value("min_iterates", rcfg.min_iterates);
    rcfg.clip_floor = c.value("clip_floor", rcfg.clip_floor);
    if (c.contains("convergence_target")) rcfg.convergence_target = c.at("convergence_target").get<double>();
    const json sj = c.value("schedule", json::object());
    const int count = sj.value("count", 6);
    const bool normalize = sj.value("normalize", false);

    GridFunction target = cli::sample_field(cli::field_from_json(c.at("target"), d), d);
    if (normalize) target = normalize_sup(clip_target(target, rcfg.clip_floor));

    run.resolved = {{"mode", mode}, {"grid", io::to_json(d)}, {"m", m}, {"solver", io::to_json(rcfg.solver)},
                    {"min_iterates", rcfg.min_iterates}, {"clip_floor", rcfg.clip_floor},
                    {"target", c.at("target")}, {"schedule", {{"count", count}, {"normalize", normalize}}}};
    if (std::isfinite(rcfg.convergence_target)) run.resolved["convergence_target"] = rcfg.convergence_target;

    RegularizationResult res;
    run.at("regularization-pipeline", "upper_smooth_sequence");
    if (mode == "local") {
        require(!d.is_torus(), "regularize local: needs a ball grid");
        ApproximationSchedule s = default_local_schedule(target, g, m, count, rcfg.clip_floor);
        if (sj.contains("betas")) {
            s.beta_schedule = sj.at("betas").get<std::vector<double>>();
            require(s.beta_schedule.size() <= static_cast<std::size_t>(count), "schedule: more betas than count");
            s.f_sequence = upper_smooth_sequence(target, count, rcfg.clip_floor);
            s.f_sequence.resize(s.beta_schedule.size(), s.f_sequence.front());
            s.c_constants.clear();
        }
        run.resolved["schedule"]["betas"] = s.beta_schedule;
        run.at("regularization-pipeline", "local_regularize");
        res = local_regularize(target, g, m, s, rcfg);
    } else {
        require(d.is_torus(), "regularize global: needs a torus grid");
        const auto chi = c.contains("chi") ? hermitian_at(c, "chi") : HermitianMatrix::identity(d.n());
        run.resolved["chi"] = io::matrix_to_json(chi.matrix());
        ApproximationSchedule s = default_global_schedule(target, chi, g, m, count, rcfg.clip_floor);
        if (sj.contains("betas")) {
            s.beta_schedule = sj.at("betas").get<std::vector<double>>();
            require(s.beta_schedule.size() <= static_cast<std::size_t>(count), "schedule: more betas than count");
            s.f_sequence = upper_smooth_sequence(target, count, rcfg.clip_floor);
            s.f_sequence.resize(s.beta_schedule.size(), s.f_sequence.front());
            s.c_constants.clear();
        }
        run.resolved["schedule"]["betas"] = s.beta_schedule;
        run.at("regularization-pipeline", "global_regularize");
        res = global_regularize(target, chi, g, m, s, rcfg);
    }

    run.at("regularization-pipeline", "verify_monotone_convergence");
    const auto conv = verify_monotone_convergence(res.u_sequence, target, rcfg.convergence_target, rcfg.clip_floor);
    const char* op = mode == "local" ? "local_regularize" : "global_regularize";
    std::ostringstream summary;
    summary << "iterate,index,beta,constant,sup_deviation,cone_margin,newton_iterations,upper_bound_gap,lower_bound_gap,"
               "sandwich1,sandwich2,sandwich3\n";
    char buf[512];
    for (std::size_t k = 0; k < res.u_sequence.size(); ++k) {
        const auto& r = res.records[k];
        std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", k, r.index,
                      r.beta, r.constant, res.sup_deviation[k], r.cone_margin, r.newton_iterations, r.upper_bound_gap,
                      r.lower_bound_gap, r.sandwich_gaps[0], r.sandwich_gaps[1], r.sandwich_gaps[2]);
        summary << buf;
        run.write_grid("iterate_" + std::to_string(k), res.u_sequence[k], "regularization-pipeline", op);
    }
    run.write("summary.csv", summary.str(), "regularization-pipeline", op);
    run.write_grid("target", target, "regularization-pipeline", "upper_smooth_sequence");

    json records = json::array();
    for (const auto& r : res.records) records.push_back(io::to_json(r));
    json timings = json::array();
    for (const auto& r : res.records) timings.push_back(r.seconds);
    json rep = {{"mode", mode},
                {"iterates", res.u_sequence.size()},
                {"monotone_gap", res.monotone_gap},
                {"lower_gap", res.lower_gap},
                {"min_cone_margin", res.min_cone_margin},
                {"records", records},
                {"convergence", io::to_json(conv)},
                {"seconds", timings}};
    run.write_json("report.json", rep, "regularization-pipeline", op);
    if (!conv.pass) fail(ErrorKind::Internal, "convergence check failed: " + conv.message);
    return rep;
}

json cmd_verify_suite(Run& run) {
    run.at("cli", "verify-suite");
    const int scale = run.config.value("scale", 1);
    require(scale >= 1, "verify-suite: scale must be >= 1");
    run.resolved = {{"scale", scale}, {"seed", run.seed}};
    cli::SuiteRunner runner(run.seed, scale);
    const auto rows = runner.run_all();
    std::ostringstream csv;
    csv << "suite,module,operation,trials,violations,worst,pass\n";
    json rep = json::array();
    long failures = 0;
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%ld,%ld,%.17g,%d\n", r.name.c_str(), r.module.c_str(),
                      r.operation.c_str(), r.trials, r.violations, r.worst, r.violations == 0 ? 1 : 0);
        csv << buf;
        rep.push_back({{"suite", r.name}, {"trials", r.trials}, {"violations", r.violations}, {"worst", r.worst},
                       {"seconds", r.seconds}});
        failures += r.violations;
    }
    run.write("summary.csv", csv.str(), "cli", "verify-suite");
    run.write_json("report.json", {{"suites", rep}, {"violations", failures}}, "cli", "verify-suite");
    if (failures > 0) fail(ErrorKind::Internal, "verify-suite: " + std::to_string(failures) + " violations");
    return {{"suites", rep}, {"violations", failures}};
}

void write_manifest(Run& run, const std::string& status) {
    json m = {{"tool", "mpsh"},
              {"version", kToolVersion},
              {"command", run.command},
              {"config_path", run.config_path},
              {"output_dir", run.out.string()},
              {"seed", run.seed},
              {"grid_override", run.grid_override},
              {"status", status},
              {"input_hash", io::hex64(io::fnv1a(run.command + "\n" + std::to_string(run.seed) + "\n" +
                                                 std::to_string(run.grid_override) + "\n" + run.config_text))},
              {"resolved_config", run.resolved},
              {"artifacts", run.artifacts}};
    std::ofstream os(run.out / "manifest.json");
    os << m.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"m-positivity cones, the F_m operator and regularization of m-psh functions"};
    app.require_subcommand(1);
    Run run;
    const char* names[] = {"eigen", "cone", "fm", "solve", "regularize", "verify-suite"};
    const char* help[] = {"relative eigenvalues of T against omega", "m-semipositivity verdict",
                          "F_m value, gradient and determinant form", "Dirichlet or periodic F_m solve",
                          "local or global regularization pipeline", "seeded property suites"};
    for (int i = 0; i < 6; ++i) {
        auto* sub = app.add_subcommand(names[i], help[i]);
        auto* cfg = sub->add_option("--config", run.config_path, "JSON config file");
        if (std::string(names[i]) != "verify-suite") cfg->required();
        sub->add_option("--out", run.out, "output directory")->required();
        sub->add_option("--seed", run.seed, "seed for randomized suites");
        sub->add_option("--grid-override", run.grid_override, "points per axis override")->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", run.quiet, "suppress the console summary");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    run.command = app.get_subcommands().front()->get_name();

    int code = 0;
    json report;
    try {
        std::error_code ec;
        fs::create_directories(run.out, ec);
        if (ec) fail(ErrorKind::Internal, "cannot create output directory " + run.out.string());
        if (!run.config_path.empty()) {
            run.config_text = io::read_file(run.config_path);
            run.config = io::parse_json(run.config_text, run.config_path);
            if (!run.config.is_object()) fail(ErrorKind::Parse, run.config_path + ": top level must be an object");
        }
        if (run.command == "eigen") report = cmd_eigen(run);
        else if (run.command == "cone") report = cmd_cone(run);
        else if (run.command == "fm") report = cmd_fm(run);
        else if (run.command == "solve") report = cmd_solve(run);
        else if (run.command == "regularize") report = cmd_regularize(run);
        else report = cmd_verify_suite(run);
    } catch (const Error& e) {
        code = exit_code(e.kind());
        report = {{"status", "error"}, {"exit_code", code}, {"kind", to_string(e.kind())},
                  {"module", run.module}, {"operation", run.operation}, {"message", e.what()}};
    } catch (const json::exception& e) {
        code = 3;  // wrong types or missing keys in a well-formed config
        report = {{"status", "error"}, {"exit_code", code}, {"kind", "InvalidArgument"},
                  {"module", run.module}, {"operation", run.operation}, {"message", e.what()}};
    } catch (const std::exception& e) {
        code = 5;
        report = {{"status", "error"}, {"exit_code", code}, {"kind", "Internal"},
                  {"module", run.module}, {"operation", run.operation}, {"message", e.what()}};
    }
    try {
        if (code != 0) {
            std::ofstream(run.out / "error.json") << report.dump(2) << "\n";
            run.artifacts.push_back({{"file", "error.json"}, {"module", run.module}, {"operation", run.operation}});
        }
        write_manifest(run, code == 0 ? "ok" : "error");
    } catch (const std::exception& e) {
        std::cerr << "mpsh: cannot write manifest: " << e.what() << "\n";
        if (code == 0) code = 5;
    }
    if (code != 0) std::cerr << report.dump() << "\n";
    else if (!run.quiet) std::cout << report.dump(2) << "\n";
    return code;
}
