#include "geoinv/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geoinv/csv.hpp"
#include "geoinv/error.hpp"

namespace geoinv::cli {

namespace {

std::vector<double> parse_numbers(const std::string& text, std::size_t expected,
                                  const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size())
            throw Error(ErrorCode::invalid_argument, "bad number '" + cell + "' in " + what);
        out.push_back(value);
    }
    if (out.size() != expected)
        throw Error(ErrorCode::invalid_argument,
                    what + " needs " + std::to_string(expected) + " comma-separated numbers");
    return out;
}

std::pair<std::string, std::string> split_selector(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return {spec, {}};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

std::unique_ptr<Trajectory> trajectory_for_shape(const PotentialShape& shape, const SolverConfig& cfg) {
    if (std::holds_alternative<SechSquared>(shape)) return std::make_unique<SechSquaredTrajectory>();
    if (std::holds_alternative<Exponential>(shape)) return std::make_unique<ExponentialTrajectory>();
    if (const auto* p = std::get_if<ShiftedPower>(&shape))
        return std::make_unique<PowerTrajectory>(
            PowerTrajectory::from_solver(p->f0, p->amplitude, p->exponent, cfg));
    return std::make_unique<NumericTrajectory>(shape, cfg);
}

// Output target: a file when a path is given, otherwise `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty()) return;
        file_.open(path, std::ios::out | std::ios::trunc);
        if (!file_) throw Error(ErrorCode::invalid_argument, "cannot write " + path);
        stream_ = &file_;
    }
    std::ostream& stream() { return *stream_; }
    bool is_file() const { return file_.is_open(); }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

csv::Metadata solver_metadata(const SolverConfig& cfg) {
    return {{"solver.grid_step", csv::number(cfg.grid_step)},
            {"solver.points_per_wavelength", csv::number(cfg.points_per_wavelength)},
            {"solver.domain_margin", csv::number(cfg.domain_margin)},
            {"solver.energy_tolerance", csv::number(cfg.energy_tolerance)}};
}

std::vector<double> couplings_of(const RunConfig& c) {
    std::vector<double> v = c.couplings;
    if (!c.grid.empty()) {
        const auto g = parse_grid(c.grid);
        v.insert(v.end(), g.begin(), g.end());
    }
    if (v.empty()) throw Error(ErrorCode::invalid_argument, "give couplings with --v or --v-grid");
    return v;
}

// ---------------------------------------------------------------------------

int cmd_forward(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto shape = parse_shape(c.shape);
    const auto couplings = couplings_of(c);
    for (const double v : couplings)
        if (!(v > 0.0)) throw Error(ErrorCode::invalid_argument, "couplings must be positive");
    Sink sink(c.out, out);
    auto& csv_out = sink.stream();

    csv::Metadata meta{{"command", "forward"}, {"shape", describe(shape)}};
    const auto solver = solver_metadata(c.solver);
    meta.insert(meta.end(), solver.begin(), solver.end());
    csv::write_metadata(csv_out, meta);
    csv_out << "v,E,s,x_t\n";

    for (std::size_t i = 0; i < couplings.size(); ++i) {
        const double v = couplings[i];
        BoundState state;
        try {
            state = ground_state(shape, v, c.solver);
        } catch (const Error& e) {
            err << "forward: v = " << v << ": " << e.what() << '\n';
            return numeric_failure;
        }
        csv_out << csv::number(v) << ',' << csv::number(state.energy) << ','
                << csv::number(state.kinetic) << ',' << csv::number(state.turning_point) << '\n';
        if (!c.psi_prefix.empty()) {
            Sink psi(c.psi_prefix + "_" + std::to_string(i) + ".csv", out);
            csv::Metadata pm{{"shape", describe(shape)},
                             {"v", csv::number(v)},
                             {"E", csv::number(state.energy)},
                             {"normalization", "unit norm on the whole line"}};
            csv::write_metadata(psi.stream(), pm);
            write_wavefunction_csv(psi.stream(), state);
        }
    }
    return ok;
}

int cmd_trajectory(const RunConfig& c, std::ostream& out, std::ostream&) {
    const auto t = make_trajectory(c.trajectory, c.solver);
    const auto couplings = couplings_of(c);
    Sink sink(c.out, out);
    csv::Metadata meta{{"command", "trajectory"}, {"trajectory", t->name()}};
    if (!c.grid.empty()) meta.emplace_back("v_grid", c.grid);
    csv::write_metadata(sink.stream(), meta);
    write_trajectory_csv(sink.stream(), *t, couplings);
    return ok;
}

int cmd_invert(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.out.empty()) throw Error(ErrorCode::invalid_argument, "invert needs --out <prefix>");
    const auto t = make_trajectory(c.trajectory, c.solver);
    std::optional<PotentialShape> exact;
    if (c.exact == "auto")
        exact = shape_of_trajectory(c.trajectory);
    else if (!c.exact.empty() && c.exact != "none")
        exact = parse_shape(c.exact);

    InversionConfig cfg = c.inversion;
    cfg.solver = c.solver;
    if (c.cut_to_zero == "true" || c.cut_to_zero == "on")
        cfg.cut_to_zero = true;
    else if (c.cut_to_zero == "false" || c.cut_to_zero == "off")
        cfg.cut_to_zero = false;
    else if (c.cut_to_zero != "auto")
        throw Error(ErrorCode::invalid_argument, "--cut-to-zero takes auto, true or false");

    const auto start = std::chrono::steady_clock::now();
    const auto result = invert(*t, cfg);
    const double elapsed = seconds_since(start);

    csv::Metadata run_meta{{"command", "invert"},
                           {"trajectory", t->name()},
                           {"sigma", csv::number(cfg.sigma)},
                           {"h", csv::number(cfg.step)},
                           {"steps", std::to_string(cfg.steps)},
                           {"v1", csv::number(cfg.v1)},
                           {"y_tolerance", csv::number(cfg.y_tolerance)},
                           {"cut_to_zero_flag", c.cut_to_zero}};
    const auto solver = solver_metadata(cfg.solver);
    run_meta.insert(run_meta.end(), solver.begin(), solver.end());

    {
        Sink trace(c.out + "_trace.csv", out);
        csv::write_metadata(trace.stream(), run_meta);
        write_trace_csv(trace.stream(), result, exact ? &*exact : nullptr);
    }
    if (result.potential) {
        const auto& g = *result.potential;
        std::vector<double> grid;
        for (int i = 0; i <= 8; ++i) grid.push_back(g.seed_radius() * i / 8.0);
        for (std::size_t k = 0; k < g.knots().size(); ++k) grid.push_back(g.knot_position(k));
        Sink rec(c.out + "_reconstruction.csv", out);
        write_reconstruction_csv(rec.stream(), g, grid, run_meta);
    }

    const auto& tr = result.trace;
    out << "trajectory: " << t->name() << '\n';
    out << "f0: " << csv::number(tr.f0) << '\n';
    if (tr.seed) {
        for (const auto& [key, value] : tr.seed->report()) out << key << ": " << value << '\n';
    }
    out << "cut_to_zero: " << (tr.cut_to_zero ? "true" : "false") << '\n';
    out << "knots: " << tr.steps.size() << '\n';
    if (exact && result.potential)
        out << "max_abs_error: " << csv::number(max_knot_error(*result.potential, *exact)) << '\n';
    out << "solver_calls: " << tr.solver_calls() << '\n';
    out << "wall_time_s: " << elapsed << '\n';

    if (result.error) {
        err << "invert: " << result.error->what() << '\n';
        return numeric_failure;
    }
    return ok;
}

int cmd_tails(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto shape = parse_shape(c.shape.empty() ? "sech2" : c.shape);
    double x_a = 0.0;
    if (c.x_a) {
        x_a = *c.x_a;
    } else {
        const double m = minimum_value(shape);
        if (!(m < 0.0))
            throw Error(ErrorCode::invalid_argument, "tails needs --x-a for this shape");
        x_a = 2.0 * inverse_on_half_axis(shape, 0.5 * m);
    }
    if (!(x_a > 0.0)) throw Error(ErrorCode::invalid_argument, "x_a must be positive");
    const double x_max = c.x_max.value_or(3.0 * x_a);
    if (!(x_max > x_a)) throw Error(ErrorCode::invalid_argument, "x_max must exceed x_a");
    if (!(c.dx > 0.0)) throw Error(ErrorCode::invalid_argument, "dx must be positive");

    // Turning point at x_a / 2.
    const auto t = trajectory_for_shape(shape, c.solver);
    const double v = t->invert_ratio(evaluate(shape, 0.5 * x_a));
    const double energy = ground_energy(shape, v, c.solver);

    const auto n = static_cast<std::size_t>(std::floor(x_max / c.dx + 1e-9)) + 1;
    std::vector<double> xs(n);
    for (std::size_t j = 0; j < n; ++j) xs[j] = static_cast<double>(j) * c.dx;

    auto resample = [&xs](const std::vector<double>& psi, double h) {
        std::vector<double> out(xs.size(), 0.0);
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const double u = xs[j] / h;
            const auto i = static_cast<std::size_t>(u);
            if (i + 1 >= psi.size()) {
                out[j] = i < psi.size() && u == static_cast<double>(i) ? psi[i] : 0.0;
                continue;
            }
            const double w = u - static_cast<double>(i);
            out[j] = (1.0 - w) * psi[i] + w * psi[i + 1];
        }
        return out;
    };

    csv::Metadata meta{{"command", "tails"},
                       {"shape", describe(shape)},
                       {"x_a", csv::number(x_a)},
                       {"turning_point", csv::number(0.5 * x_a)},
                       {"v", csv::number(v)},
                       {"E", csv::number(energy)},
                       {"mode", c.eigen ? "eigen" : "fixed_energy"},
                       {"normalization", "psi(0) = 1"}};

    std::vector<std::vector<double>> psi_columns;
    std::vector<std::vector<double>> g_columns;
    bool failed = false;
    for (std::size_t s = 0; s < c.slopes.size(); ++s) {
        const double slope = c.slopes[s];
        const auto g = truncated_with_line(shape, x_a, slope);
        std::vector<double> gs(n);
        for (std::size_t j = 0; j < n; ++j) gs[j] = g(xs[j]);
        g_columns.push_back(std::move(gs));
        try {
            if (c.eigen) {
                const auto state = ground_state(g, v, c.solver);
                auto psi = resample(state.psi, state.grid_step);
                const double p0 = state.psi.front();
                for (double& p : psi) p /= p0;
                meta.emplace_back("E[" + csv::number(slope) + "]", csv::number(state.energy));
                psi_columns.push_back(std::move(psi));
            } else {
                const auto sol = integrate_outward(g, v, energy, x_max + c.dx, c.solver);
                psi_columns.push_back(resample(sol.psi, sol.grid_step));
            }
        } catch (const Error& e) {
            failed = true;
            meta.emplace_back("error[" + csv::number(slope) + "]", e.what());
            err << "tails: slope " << slope << ": " << e.what() << '\n';
            psi_columns.emplace_back(n, std::nan(""));
        }
    }

    Sink sink(c.out, out);
    auto& o = sink.stream();
    csv::write_metadata(o, meta);
    o << 'x';
    for (const double s : c.slopes) o << ",psi[" << csv::number(s) << ']';
    for (const double s : c.slopes) o << ",g[" << csv::number(s) << ']';
    o << '\n';
    for (std::size_t j = 0; j < n; ++j) {
        o << csv::number(xs[j]);
        for (const auto& col : psi_columns) o << ',' << csv::number(col[j]);
        for (const auto& col : g_columns) o << ',' << csv::number(col[j]);
        o << '\n';
    }
    return failed ? numeric_failure : ok;
}

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream&) {
    if (c.input.empty()) throw Error(ErrorCode::invalid_argument, "compare needs --input");
    if (c.exact.empty() || c.exact == "auto" || c.exact == "none")
        throw Error(ErrorCode::invalid_argument, "compare needs --exact <shape>");
    std::ifstream in(c.input);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot read " + c.input);
    const auto table = read_reconstruction_csv(in);
    const auto exact = parse_shape(c.exact);
    std::optional<std::vector<double>> grid;
    if (!c.grid.empty()) grid = parse_grid(c.grid);
    const auto report = compare(table, exact, grid);

    if (!c.out.empty()) {
        Sink sink(c.out, out);
        csv::Metadata meta{{"command", "compare"},
                           {"input", c.input},
                           {"exact", describe(exact)},
                           {"max_abs", csv::number(report.max_abs)},
                           {"rms", csv::number(report.rms)},
                           {"max_abs_knots", csv::number(report.max_abs_knots)}};
        csv::write_metadata(sink.stream(), meta);
        sink.stream() << "x,g,f_exact,abs_err,knot\n";
        for (const auto& r : report.rows)
            sink.stream() << csv::number(r.x) << ',' << csv::number(r.g) << ','
                          << csv::number(r.f) << ',' << csv::number(std::abs(r.g - r.f)) << ','
                          << (r.knot ? 1 : 0) << '\n';
    }
    out << "max_abs: " << csv::number(report.max_abs) << '\n';
    out << "rms: " << csv::number(report.rms) << '\n';
    out << "max_abs_knots: " << csv::number(report.max_abs_knots) << '\n';
    return ok;
}

}  // namespace

// ---------------------------------------------------------------------------

PotentialShape parse_shape(const std::string& spec) {
    const auto [name, args] = split_selector(spec);
    if (name == "sech2") return SechSquared{};
    if (name == "exponential" || name == "exp") return Exponential{};
    if (name == "power") {
        const auto p = parse_numbers(args, 3, "power:f0,A,q");
        return make_shifted_power(p[0], p[1], p[2]);
    }
    if (name == "square_well") {
        const auto p = parse_numbers(args, 2, "square_well:depth,half_width");
        return make_square_well(p[0], p[1]);
    }
    throw Error(ErrorCode::invalid_argument, "unknown shape '" + spec + "'");
}

std::unique_ptr<Trajectory> make_trajectory(const std::string& spec, const SolverConfig& cfg) {
    const auto [name, args] = split_selector(spec);
    if (name == "numeric") return std::make_unique<NumericTrajectory>(parse_shape(args), cfg);
    if (name == "sech2" || name == "exponential" || name == "exp" || name == "power")
        return trajectory_for_shape(parse_shape(spec), cfg);
    throw Error(ErrorCode::invalid_argument, "unknown trajectory '" + spec + "'");
}

PotentialShape shape_of_trajectory(const std::string& spec) {
    const auto [name, args] = split_selector(spec);
    return parse_shape(name == "numeric" ? args : spec);
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string cell;
    while (std::getline(ss, cell, ':')) parts.push_back(cell);
    if (parts.size() != 3 && parts.size() != 4)
        throw Error(ErrorCode::invalid_argument, "grid is min:max:count[:log|linear]");
    const auto lo = parse_numbers(parts[0], 1, "grid min")[0];
    const auto hi = parse_numbers(parts[1], 1, "grid max")[0];
    const auto count = parse_numbers(parts[2], 1, "grid count")[0];
    const bool log = parts.size() == 4 && parts[3] == "log";
    if (parts.size() == 4 && parts[3] != "log" && parts[3] != "linear")
        throw Error(ErrorCode::invalid_argument, "grid spacing must be log or linear");
    if (!(count >= 1.0) || count != std::floor(count))
        throw Error(ErrorCode::invalid_argument, "grid count must be a positive integer");
    if (!(hi >= lo)) throw Error(ErrorCode::invalid_argument, "grid needs min <= max");
    if (log && !(lo > 0.0)) throw Error(ErrorCode::invalid_argument, "log grid needs min > 0");

    const auto n = static_cast<std::size_t>(count);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                     : lo + t * (hi - lo);
    }
    if (n > 1) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

CompareReport compare(const ReconstructionTable& table, const PotentialShape& exact,
                      const std::optional<std::vector<double>>& grid) {
    if (table.x.empty()) throw Error(ErrorCode::invalid_argument, "reconstruction table is empty");
    if (grid) {
        bool same = grid->size() == table.x.size();
        for (std::size_t i = 0; same && i < grid->size(); ++i)
            same = std::abs((*grid)[i] - table.x[i]) <= 1e-9 * std::max(1.0, std::abs((*grid)[i]));
        if (!same)
            throw Error(ErrorCode::grid_mismatch, "x column does not match the requested grid");
    }

    auto lookup = [&table](const std::string& key) -> std::optional<double> {
        for (const auto& [k, value] : table.metadata)
            if (k == key) return std::stod(value);
        return std::nullopt;
    };
    const auto b = lookup("b");
    const auto h = lookup("h");
    const auto knots = lookup("knots");

    CompareReport report;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < table.x.size(); ++i) {
        CompareRow row{table.x[i], table.g[i], evaluate(exact, table.x[i]), false};
        if (b && h && knots && row.x > *b * (1.0 + 1e-12)) {
            const double k = (row.x - *b) / *h;
            const double nearest = std::round(k);
            if (std::abs(k - nearest) > 1e-6 || nearest < 1.0 || nearest > *knots) {
                std::ostringstream msg;
                msg << "x = " << row.x << " is not a knot b + k h";
                throw Error(ErrorCode::grid_mismatch, msg.str());
            }
            row.knot = true;
        }
        const double e = std::abs(row.g - row.f);
        report.max_abs = std::max(report.max_abs, e);
        if (row.knot) report.max_abs_knots = std::max(report.max_abs_knots, e);
        sum2 += e * e;
        report.rows.push_back(row);
    }
    report.rms = std::sqrt(sum2 / static_cast<double>(table.x.size()));
    return report;
}

// ---------------------------------------------------------------------------

int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate(c.solver);
        if (c.command == "forward") return cmd_forward(c, out, err);
        if (c.command == "trajectory") return cmd_trajectory(c, out, err);
        if (c.command == "invert") return cmd_invert(c, out, err);
        if (c.command == "tails") return cmd_tails(c, out, err);
        if (c.command == "compare") return cmd_compare(c, out, err);
        err << "unknown command '" << c.command << "'\n";
        return bad_arguments;
    } catch (const Error& e) {
        err << c.command << ": " << e.what() << '\n';
        return e.code() == ErrorCode::invalid_argument ? bad_arguments : numeric_failure;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Geometric spectral inversion: recover a symmetric potential shape from F(v)"};
    app.set_config("--config", "", "key = value file; flags take precedence");
    app.require_subcommand(1, 1);

    auto add_solver = [&c](CLI::App* sub) {
        sub->add_option("--grid-step", c.solver.grid_step, "Largest Numerov step")
            ->capture_default_str();
        sub->add_option("--margin", c.solver.domain_margin, "Decay exponent past the turning point")
            ->capture_default_str();
        sub->add_option("--energy-tol", c.solver.energy_tolerance, "Relative eigenvalue tolerance")
            ->capture_default_str();
    };
    auto add_couplings = [&c](CLI::App* sub) {
        sub->add_option("--v", c.couplings, "Coupling values")->delimiter(',');
        sub->add_option("--v-grid", c.grid, "min:max:count[:log|linear]");
    };

    auto* forward = app.add_subcommand("forward", "Ground state of -d2/dx2 + v f(x)");
    forward->add_option("--shape", c.shape, "sech2 | exponential | power:f0,A,q | square_well:d,w")
        ->required();
    add_couplings(forward);
    forward->add_option("--psi-prefix", c.psi_prefix, "Write <prefix>_<i>.csv wavefunctions");
    forward->add_option("--out", c.out, "CSV path (stdout when absent)");
    add_solver(forward);

    auto* trajectory = app.add_subcommand("trajectory", "Tabulate v, F, F', R, s");
    trajectory->add_option("--trajectory", c.trajectory, "sech2 | exponential | power:f0,A,q | numeric:<shape>")
        ->required();
    add_couplings(trajectory);
    trajectory->add_option("--out", c.out, "CSV path (stdout when absent)");
    add_solver(trajectory);

    auto* inv = app.add_subcommand("invert", "Reconstruct f from F(v)");
    inv->set_help_flag("--help", "Print this help message and exit");
    inv->add_option("--trajectory", c.trajectory, "Trajectory selector")->required();
    inv->add_option("--sigma", c.inversion.sigma, "Turning point fraction")->capture_default_str();
    inv->add_option("--h", c.inversion.step, "Knot spacing")->capture_default_str();
    inv->add_option("--steps", c.inversion.steps, "Number of knots")->capture_default_str();
    inv->add_option("--v1", c.inversion.v1, "Seed-fit coupling")->capture_default_str();
    inv->add_option("--y-tol", c.inversion.y_tolerance, "Relative residual tolerance")
        ->capture_default_str();
    inv->add_option("--cut-to-zero", c.cut_to_zero, "auto | true | false")->capture_default_str();
    inv->add_option("--exact", c.exact, "Shape to compare against (auto | none | <shape>)")
        ->default_val("auto");
    inv->add_option("--out", c.out, "Prefix for <prefix>_trace.csv and <prefix>_reconstruction.csv")
        ->required();
    add_solver(inv);

    auto* tails = app.add_subcommand("tails", "Wavefunction tails under straight-line extensions");
    tails->add_option("--shape", c.shape, "Shape to perturb")->default_val("sech2");
    tails->add_option("--x-a", c.x_a, "Perturbation point; the turning point is put at x_a/2");
    tails->add_option("--slopes", c.slopes, "Extension slopes")->delimiter(',')->capture_default_str();
    tails->add_option("--x-max", c.x_max, "Sampling range (default 3 x_a)");
    tails->add_option("--dx", c.dx, "Output spacing")->capture_default_str();
    tails->add_flag("--eigen", c.eigen, "Ground state of each perturbed potential instead of a fixed-energy solve");
    tails->add_option("--out", c.out, "CSV path (stdout when absent)");
    add_solver(tails);

    auto* cmp = app.add_subcommand("compare", "Error report of a reconstruction CSV");
    cmp->add_option("--input", c.input, "Reconstruction CSV")->required();
    cmp->add_option("--exact", c.exact, "Exact shape")->required();
    cmp->add_option("--grid", c.grid, "Expected x column, min:max:count[:log|linear]");
    cmp->add_option("--out", c.out, "Per-row error CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : bad_arguments;
    }
    for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
    return execute(c, out, err);
}

}  // namespace geoinv::cli
