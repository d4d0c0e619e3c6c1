#include "run.hpp"

#include "config.hpp"
#include "report.hpp"

#include "thinlayer/convergence.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/gamma_harness.hpp"
#include "thinlayer/io.hpp"
#include "thinlayer/layer_solver.hpp"
#include "thinlayer/parallel.hpp"
#include "thinlayer/surface_solver.hpp"
#include "thinlayer/tangential_ops.hpp"

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace thinlayer::cli {

namespace {

constexpr std::array<std::string_view, 6> kNames{"verify-geometry", "verify-identities", "solve-surface",
                                                 "solve-layer",     "gamma-sweep",       "lebesgue-check"};

/// A numerical check that could not be carried out, tied to a config key.
class CheckFailure : public Error {
public:
    CheckFailure(const std::string& key_path, const std::string& message) : Error(key_path + ": " + message) {}
};

/// Output directory, created on first use so that rejected configs leave nothing behind.
class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path operator()(const std::string& name) {
        if (!created_) {
            std::error_code ec;
            std::filesystem::create_directories(dir_, ec);
            if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
            created_ = true;
        }
        written_.push_back(dir_ / name);
        return written_.back();
    }
    const std::vector<std::filesystem::path>& written() const noexcept { return written_; }

private:
    std::filesystem::path dir_;
    bool created_ = false;
    std::vector<std::filesystem::path> written_;
};

struct Context {
    const RunConfig& run;
    const ConfigNode& root;
    const Json& echo;
    Artifacts& artifacts;
    std::string summary;
};

/// Re-raises library errors with the config key they stem from.
template <class F>
auto at_key(const std::string& key_path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const SolverDiverged& e) {
        throw CheckFailure(key_path, e.what());
    } catch (const NoConvergence& e) {
        throw CheckFailure(key_path, e.what());
    } catch (const Error& e) {
        throw ConfigError(key_path, e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key_path, e.what());
    }
}

SurfaceMesh mesh_for(const Chart& chart) {
    return at_key("chart", [&] { return build_surface_mesh(chart); });
}

AmbientFunction as_function(const SpatialFunction& s) {
    return [s](const Vec3& x) { return s.value(x); };
}

int transverse_intervals(const ConfigNode& section) {
    const auto node = section.find("n_t");
    if (!node) return 8;
    const long long n = node->integer();
    if (n < 4 || n % 2 != 0 || n > 1024) node->fail("must be an even integer in [4, 1024]");
    return static_cast<int>(n);
}

void write_csv(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ostringstream os;
    body(os);
    write_text_file(path, os.str());
}

double tolerance(const Context& ctx, const ConfigNode& section, double fallback) {
    if (ctx.run.tol) return *ctx.run.tol;
    const auto node = section.find("tol");
    return node ? node->positive_number() : fallback;
}

struct GeometryLevel {
    int n = 0;
    double h = 0.0;
    std::array<double, 3> curvature_err{};  // h0, mean, gauss
    double normal_defect = 0.0;
    double tangency_defect = 0.0;
    double dual_defect = 0.0;
    double weingarten_asymmetry = 0.0;
    double weingarten_normal = 0.0;
};

GeometryLevel measure_geometry(const ChartSpec& spec, int n) {
    const Chart chart = n > 0 ? spec.chart.refined({n, n}) : spec.chart;
    const SurfaceMesh mesh = mesh_for(chart);
    GeometryLevel lvl;
    lvl.n = n > 0 ? n : std::max(chart.intervals(0), chart.intervals(1));
    lvl.h = 1.0 / lvl.n;
    std::array<double, 3> err{}, scale{};
    for (const auto& g : mesh.geometry()) {
        const auto exact = spec.curvature(g.position);
        const std::array<double, 3> want{exact[0], exact[0] / 2, exact[1]};
        const std::array<double, 3> got{g.h0, g.mean_curvature, g.gauss_curvature};
        for (int q = 0; q < 3; ++q) {
            err[q] = std::max(err[q], std::abs(got[q] - want[q]));
            scale[q] = std::max(scale[q], std::abs(want[q]));
        }
        lvl.normal_defect = std::max(lvl.normal_defect, std::abs(g.normal.norm() - 1.0));
        for (int a = 0; a < 2; ++a) {
            lvl.tangency_defect =
                std::max(lvl.tangency_defect, std::abs(g.normal.dot(g.covariant[a])) / g.covariant[a].norm());
            for (int b = 0; b < 2; ++b) {
                lvl.dual_defect = std::max(
                    lvl.dual_defect, std::abs(g.covariant[a].dot(g.contravariant[b]) - (a == b ? 1.0 : 0.0)));
            }
        }
        lvl.weingarten_asymmetry =
            std::max(lvl.weingarten_asymmetry, (g.weingarten - g.weingarten.transpose()).cwiseAbs().maxCoeff());
        lvl.weingarten_normal = std::max(lvl.weingarten_normal, (g.weingarten * g.normal).cwiseAbs().maxCoeff());
    }
    for (int q = 0; q < 3; ++q) lvl.curvature_err[q] = scale[q] > 0.0 ? err[q] / scale[q] : err[q];
    return lvl;
}

// Errors this small are roundoff; no order can be read off them.
constexpr double kExactFloor = 1e-11;

double order_of(const std::vector<GeometryLevel>& levels, const std::function<double(const GeometryLevel&)>& get) {
    if (levels.size() < 2 || get(levels.back()) <= kExactFloor) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> h, e;
    for (const auto& l : levels) {
        h.push_back(l.h);
        e.push_back(get(l));
    }
    return fit_order(h, e);
}

bool verify_geometry_command(Context& ctx) {
    check_top_level(ctx.root, {"chart", "geometry"});
    const ChartSpec spec = parse_chart(ctx.root.at("chart"));
    static const Json empty = Json::object();
    const auto section_node = ctx.root.find("geometry");
    const ConfigNode section = section_node ? *section_node : ConfigNode(empty, "geometry");
    section.allow_only({"levels", "tol", "order_range", "invariant_tol"});

    std::vector<int> ns;
    if (const auto levels = section.find("levels")) {
        for (const auto& item : levels->items()) {
            const long long n = item.integer();
            if (n < 2 || n > 4096) item.fail("grid level must lie in [2, 4096]");
            if (!ns.empty() && n <= ns.back()) item.fail("levels must be strictly increasing");
            ns.push_back(static_cast<int>(n));
        }
        if (ns.empty()) levels->fail("needs at least one level");
    } else {
        ns.push_back(0);
    }
    const double tol = tolerance(ctx, section, 1e-3);
    const double invariant_tol = section.find("invariant_tol") ? section.at("invariant_tol").positive_number() : 1e-10;
    std::array<double, 2> range{1.8, 2.2};
    if (const auto r = section.find("order_range")) {
        const auto items = r->items();
        if (items.size() != 2) r->fail("expected [lowest, highest]");
        range = {items[0].number(), items[1].number()};
        if (!(range[0] < range[1])) r->fail("lowest must be below highest");
    }

    std::vector<GeometryLevel> levels;
    for (int n : ns) levels.push_back(measure_geometry(spec, n));

    const std::array<const char*, 3> names{"h0", "mean", "gauss"};
    bool pass = true;
    Json checks = Json::array();
    auto add_check = [&](const std::string& name, double value, bool ok) {
        checks.push_back(Json{{"check", name}, {"value", json_number(value)}, {"pass", ok}});
        pass = pass && ok;
    };
    const GeometryLevel& fine = levels.back();
    add_check("normal_defect", fine.normal_defect, fine.normal_defect <= invariant_tol);
    add_check("tangency_defect", fine.tangency_defect, fine.tangency_defect <= invariant_tol);
    add_check("dual_basis_defect", fine.dual_defect, fine.dual_defect <= invariant_tol);
    Json orders = Json::object();
    for (int q = 0; q < 3; ++q) {
        add_check(std::string(names[q]) + "_error", fine.curvature_err[q], fine.curvature_err[q] <= tol);
        const double p = order_of(levels, [q](const GeometryLevel& l) { return l.curvature_err[q]; });
        orders[std::string(names[q])] = json_number(p);
        if (std::isfinite(p)) add_check(std::string(names[q]) + "_order", p, p >= range[0] && p <= range[1]);
    }
    orders["weingarten_asymmetry"] =
        json_number(order_of(levels, [](const GeometryLevel& l) { return l.weingarten_asymmetry; }));
    orders["weingarten_normal"] =
        json_number(order_of(levels, [](const GeometryLevel& l) { return l.weingarten_normal; }));

    Json rows = Json::array();
    std::ostringstream csv;
    csv << "n,h,h0_err,mean_err,gauss_err,normal_defect,tangency_defect,dual_defect,weingarten_asymmetry,"
           "weingarten_normal\n";
    for (const auto& l : levels) {
        rows.push_back(Json{{"n", l.n},
                            {"h", json_number(l.h)},
                            {"h0_err", json_number(l.curvature_err[0])},
                            {"mean_err", json_number(l.curvature_err[1])},
                            {"gauss_err", json_number(l.curvature_err[2])},
                            {"normal_defect", json_number(l.normal_defect)},
                            {"tangency_defect", json_number(l.tangency_defect)},
                            {"dual_defect", json_number(l.dual_defect)},
                            {"weingarten_asymmetry", json_number(l.weingarten_asymmetry)},
                            {"weingarten_normal", json_number(l.weingarten_normal)}});
        csv << l.n << ',' << format_double(l.h);
        for (double v : {l.curvature_err[0], l.curvature_err[1], l.curvature_err[2], l.normal_defect,
                         l.tangency_defect, l.dual_defect, l.weingarten_asymmetry, l.weingarten_normal}) {
            csv << ',' << format_double(v);
        }
        csv << '\n';
    }
    Json report = Json::object();
    report["config"] = ctx.echo;
    report["levels"] = std::move(rows);
    report["orders"] = std::move(orders);
    report["checks"] = std::move(checks);
    report["pass"] = pass;
    write_text_file(ctx.artifacts("geometry_report.csv"), csv.str());
    write_json_file(ctx.artifacts("geometry_report.json"), report);

    std::ostringstream s;
    s << levels.size() << " level(s), finest h0 error " << format_double(fine.curvature_err[0]);
    ctx.summary = s.str();
    return pass;
}

bool verify_identities_command(Context& ctx) {
    check_top_level(ctx.root, {"chart", "identities"});
    const ChartSpec spec = parse_chart(ctx.root.at("chart"));
    static const Json empty = Json::object();
    const auto section_node = ctx.root.find("identities");
    const ConfigNode section = section_node ? *section_node : ConfigNode(empty, "identities");
    section.allow_only({"tol", "field_count", "ambient_routes"});
    IdentityOptions options;
    options.seed = ctx.run.seed;
    options.field_count = static_cast<int>(section.integer_or("field_count", 3));
    if (options.field_count < 1 || options.field_count > 100) section.at("field_count").fail("must lie in [1, 100]");
    options.ambient_routes = section.boolean_or("ambient_routes", false);
    const double tol = tolerance(ctx, section, 1e-3);

    const SurfaceMesh mesh = mesh_for(spec.chart);
    const IdentityReport report = verify_identities(mesh, tol, options);
    emit_report(report, ReportFormat::json, ctx.artifacts("identity_report.json"), ctx.echo);
    emit_report(report, ReportFormat::csv, ctx.artifacts("identity_report.csv"));

    int failed = 0;
    for (const auto& r : report.results) failed += r.pass ? 0 : 1;
    ctx.summary = std::to_string(report.results.size()) + " identities, " + std::to_string(failed) + " failed";
    return report.all_pass();
}

bool solve_surface_command(Context& ctx) {
    check_top_level(ctx.root, {"chart", "surface"});
    const ChartSpec spec = parse_chart(ctx.root.at("chart"));
    const ConfigNode section = ctx.root.at("surface");
    section.allow_only(
        {"source", "dirichlet", "neumann", "dirichlet_edges", "conductivity", "exact", "tol", "export_matrix"});

    const SurfaceMesh mesh = mesh_for(spec.chart);
    const std::size_t n = mesh.node_count();
    auto field = [&](const char* key) {
        const auto node = section.find(key);
        return node ? sample(mesh, as_function(parse_spatial(*node))) : ScalarField::zeros(n);
    };
    MixedBVPSpec bvp{field("source"), field("dirichlet"), field("neumann"), kAllEdges};
    if (const auto edges = section.find("dirichlet_edges")) bvp.dirichlet_edges = parse_edges(*edges);

    AnisotropyField a = AnisotropyField::identity(n);
    if (const auto cond = section.find("conductivity")) {
        const std::string kind = cond->at("kind").string();
        if (kind == "identity") {
            cond->allow_only({"kind"});
        } else if (kind == "scaled_identity") {
            cond->allow_only({"kind", "scale"});
            a = AnisotropyField::scaled_identity(n, cond->at("scale").number());
        } else {
            cond->at("kind").fail("unknown conductivity \"" + kind + "\" (identity, scaled_identity)");
        }
    }
    std::optional<SpatialFunction> exact;
    if (const auto e = section.find("exact")) exact = parse_spatial(*e);
    const double tol = tolerance(ctx, section, 1e-2);
    const bool export_matrix = section.boolean_or("export_matrix", false);

    std::optional<SurfaceProblem> problem;
    try {
        problem.emplace(mesh, std::move(a), std::move(bvp));
    } catch (const NotPositiveDefinite& e) {
        throw ConfigError("surface.conductivity", e.what());
    } catch (const EmptyDirichletBoundary& e) {
        throw ConfigError(section.has("dirichlet_edges") ? "surface.dirichlet_edges" : "chart", e.what());
    }
    const auto sol = at_key("surface", [&] { return problem->solve(); });

    Json report = Json::object();
    report["config"] = ctx.echo;
    report["nodes"] = n;
    report["free_nodes"] = problem->system().free_nodes.size();
    report["iterations"] = sol.iterations;
    report["relative_residual"] = json_number(sol.relative_residual);
    report["energy"] = json_number(problem->energy(sol.field));
    bool pass = true;
    if (exact) {
        const ScalarField want = sample(mesh, as_function(*exact));
        ScalarField diff = sol.field;
        double max_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diff[i] -= want[i];
            max_err = std::max(max_err, std::abs(diff[i]));
        }
        report["exact_l2_err"] = json_number(std::sqrt(surface_inner(mesh, diff, diff)));
        report["exact_max_err"] = json_number(max_err);
        report["tol"] = json_number(tol);
        pass = max_err <= tol;
        ctx.summary = "max error " + format_double(max_err);
    } else {
        ctx.summary = std::to_string(sol.iterations) + " CG iterations";
    }
    report["pass"] = pass;

    write_csv(ctx.artifacts("surface_solution.csv"), [&](std::ostream& os) { write_surface_csv(os, mesh, sol.field); });
    if (export_matrix) {
        write_csv(ctx.artifacts("surface_matrix.mtx"),
                  [&](std::ostream& os) { problem->system().matrix.write_matrix_market(os); });
    }
    write_json_file(ctx.artifacts("surface_report.json"), report);
    return pass;
}

struct DataSpec {
    SourceFamily source;
    FluxFamily flux;
};

DataSpec parse_data(const ConfigNode& root, bool with_flux) {
    DataSpec d;
    const ConfigNode node = root.at("data");
    if (with_flux) {
        node.allow_only({"source", "flux"});
    } else {
        node.allow_only({"source"});
    }
    if (const auto s = node.find("source")) d.source = parse_source(*s);
    if (with_flux) {
        if (const auto q = node.find("flux")) d.flux = parse_flux(*q);
    }
    return d;
}

bool solve_layer_command(Context& ctx) {
    check_top_level(ctx.root, {"chart", "layer", "data"});
    const ChartSpec spec = parse_chart(ctx.root.at("chart"));
    const ConfigNode section = ctx.root.at("layer");
    section.allow_only({"eps", "n_t"});
    const double eps = section.at("eps").positive_number();
    const int n_t = transverse_intervals(section);
    const DataSpec data = parse_data(ctx.root, true);

    const SurfaceMesh mesh = mesh_for(spec.chart);
    const LayerMesh lm = at_key("layer.eps", [&] { return LayerMesh(mesh, eps, n_t); });
    ScalarField q_plus = sample(mesh, as_function(data.flux.spatial));
    ScalarField q_minus = q_plus;
    const double up = data.flux.profile(eps), down = data.flux.profile(-eps);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        q_plus[i] *= up;
        q_minus[i] *= down;
    }
    LayerData layer_data{sample(lm, [&](const Vec3& x, double t) { return data.source(x, t); }), std::move(q_plus),
                         std::move(q_minus)};
    const LayerProblem problem = at_key("chart", [&] { return LayerProblem(lm, std::move(layer_data)); });
    const auto sol = at_key("layer", [&] { return problem.solve(); });
    const ScalarField mid = sol.field.slice(lm, lm.mid_plane());

    Json report = Json::object();
    report["config"] = ctx.echo;
    report["eps"] = json_number(eps);
    report["n_t"] = n_t;
    report["layer_nodes"] = lm.node_count();
    report["iterations"] = sol.iterations;
    report["relative_residual"] = json_number(sol.relative_residual);
    report["scaled_energy"] = json_number(problem.scaled_energy(sol.field));
    report["t_indep_ratio"] = json_number(t_independence_check(lm, sol.field));
    report["midplane_l2_norm"] = json_number(std::sqrt(surface_inner(mesh, mid, mid)));
    report["pass"] = true;

    write_csv(ctx.artifacts("layer_solution.csv"), [&](std::ostream& os) { write_layer_csv(os, lm, sol.field); });
    write_csv(ctx.artifacts("midplane_solution.csv"), [&](std::ostream& os) { write_surface_csv(os, mesh, mid); });
    write_json_file(ctx.artifacts("layer_report.json"), report);
    ctx.summary = std::to_string(sol.iterations) + " CG iterations";
    return true;
}

bool gamma_sweep_command(Context& ctx) {
    check_top_level(ctx.root, {"chart", "sweep", "data"});
    const ChartSpec spec = parse_chart(ctx.root.at("chart"));
    const ConfigNode section = ctx.root.at("sweep");
    section.allow_only({"eps", "n_t", "tol", "exact_limit"});
    SweepConfig config{spec.chart, parse_eps_list(section.at("eps")), transverse_intervals(section), {}, {}, 1e-2,
                       {}};
    const DataSpec data = parse_data(ctx.root, true);
    config.source = data.source;
    config.flux = data.flux;
    config.tol = tolerance(ctx, section, 1e-2);
    if (const auto e = section.find("exact_limit")) config.exact_limit = as_function(parse_spatial(*e));
    if (!config.source.lebesgue_regular() && !config.source.pathological) {
        throw ConfigError("data.source.pathological",
                          "the profile is not Lebesgue regular at t = 0; set pathological to true to run it anyway");
    }
    (void)mesh_for(spec.chart);

    GammaReport report;
    try {
        report = gamma_sweep(config);
    } catch (const LayerTooThick& e) {
        throw ConfigError("sweep.eps", e.what());
    } catch (const EmptyDirichletBoundary& e) {
        throw ConfigError("chart", e.what());
    } catch (const NoConvergence& e) {
        throw CheckFailure("data.flux", e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("sweep", e.what());
    }
    emit_report(report, ReportFormat::csv, ctx.artifacts("gamma_report.csv"));
    emit_report(report, ReportFormat::json, ctx.artifacts("gamma_report.json"), ctx.echo);

    std::ostringstream s;
    s << report.records.size() << " eps values, final l2 error "
      << format_double(report.records.empty() ? 0.0 : report.records.back().l2_err) << ", fitted order "
      << format_double(report.fitted_order);
    ctx.summary = s.str();
    return report.pass;
}

bool lebesgue_check_command(Context& ctx) {
    check_top_level(ctx.root, {"chart", "lebesgue", "data"});
    const ChartSpec spec = parse_chart(ctx.root.at("chart"));
    const ConfigNode section = ctx.root.at("lebesgue");
    section.allow_only({"eps", "expect"});
    const std::vector<double> eps = parse_eps_list(section.at("eps"));
    std::string expect = "bounded";
    if (const auto e = section.find("expect")) {
        expect = e->string();
        if (expect != "bounded" && expect != "divergent") e->fail("expected \"bounded\" or \"divergent\"");
    }
    const DataSpec data = parse_data(ctx.root, false);
    const SurfaceMesh mesh = mesh_for(spec.chart);
    const LebesgueReport report = at_key("lebesgue.eps", [&] {
        return lebesgue_diagnostic(mesh, [&](const Vec3& x, double t) { return data.source(x, t); }, eps);
    });
    const bool pass = expect == "divergent" ? report.divergent : !report.divergent;

    Json json = report_json(report, ctx.echo);
    json["expect"] = expect;
    json["pass"] = pass;
    emit_report(report, ReportFormat::csv, ctx.artifacts("lebesgue_report.csv"));
    write_json_file(ctx.artifacts("lebesgue_report.json"), json);
    ctx.summary = report.divergent ? "DIVERGENT" : "bounded";
    return pass;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return static_cast<Command>(i);
    }
    return std::nullopt;
}

std::string_view command_name(Command command) { return kNames.at(static_cast<std::size_t>(command)); }

std::vector<std::string> command_names() { return {kNames.begin(), kNames.end()}; }

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const std::string name(command_name(config.command));
    try {
        if (config.jobs > 0) set_worker_count(config.jobs);
        const Json doc = load_config(config.config_path);
        const ConfigNode root(doc, "");
        Json echo = Json::object();
        echo["command"] = name;
        echo["seed"] = config.seed;
        echo["tol_override"] = config.tol ? json_number(*config.tol) : Json(nullptr);
        echo["input"] = doc;

        Artifacts artifacts(config.out_dir);
        Context ctx{config, root, echo, artifacts, {}};
        bool pass = false;
        switch (config.command) {
            case Command::verify_geometry:
                pass = verify_geometry_command(ctx);
                break;
            case Command::verify_identities:
                pass = verify_identities_command(ctx);
                break;
            case Command::solve_surface:
                pass = solve_surface_command(ctx);
                break;
            case Command::solve_layer:
                pass = solve_layer_command(ctx);
                break;
            case Command::gamma_sweep:
                pass = gamma_sweep_command(ctx);
                break;
            case Command::lebesgue_check:
                pass = lebesgue_check_command(ctx);
                break;
        }
        out << name << ": " << (pass ? "PASS" : "FAIL") << " (" << ctx.summary << ")\n";
        for (const auto& p : artifacts.written()) out << "  wrote " << p.string() << '\n';
        return pass ? kExitPass : kExitCheckFailed;
    } catch (const ConfigError& e) {
        err << name << ": configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const IoError& e) {
        err << name << ": " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << name << ": FAIL: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Thin-layer heat conduction experiments: surface geometry, layer solves and eps sweeps."};
    app.name("thinlayer");
    std::string command, config_path, out_dir;
    unsigned long long seed = 42;
    int jobs = 0;
    double tol = 0.0;
    app.add_option("command", command, "One of: verify-geometry, verify-identities, solve-surface, solve-layer, "
                                       "gamma-sweep, lebesgue-check")
        ->required();
    app.add_option("--config", config_path, "Experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "Output directory for reports")->required();
    app.add_option("--jobs", jobs, "Worker threads (default: logical cores)")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed for randomized checks")->capture_default_str();
    auto* tol_option = app.add_option("--tol", tol, "Override the tolerance of the command")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitConfigError;
    }
    const auto parsed = parse_command(command);
    if (!parsed) {
        err << "unknown command \"" << command << "\"; expected one of:";
        for (auto n : kNames) err << ' ' << n;
        err << '\n';
        return kExitConfigError;
    }
    RunConfig rc;
    rc.command = *parsed;
    rc.config_path = config_path;
    rc.out_dir = out_dir;
    rc.seed = seed;
    rc.jobs = jobs;
    if (tol_option->count() > 0) rc.tol = tol;
    return run(rc, out, err);
}

}  // namespace thinlayer::cli
