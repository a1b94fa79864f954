#include "geoinv/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "geoinv/csv.hpp"

namespace geoinv {

void validate(const InversionConfig& cfg) {
    if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0))
        throw Error(ErrorCode::invalid_argument, "sigma must lie in (0, 1)");
    if (!(cfg.step > 0.0)) throw Error(ErrorCode::invalid_argument, "step h must be positive");
    if (cfg.steps < 0) throw Error(ErrorCode::invalid_argument, "steps must be non-negative");
    if (!(cfg.y_tolerance > 0.0 && cfg.y_tolerance < 1e-2))
        throw Error(ErrorCode::invalid_argument, "y tolerance must lie in (0, 1e-2)");
    if (!(cfg.bracket_growth > 1.0))
        throw Error(ErrorCode::invalid_argument, "bracket growth must exceed 1");
    if (cfg.max_expansions < 1)
        throw Error(ErrorCode::invalid_argument, "max expansions must be positive");
    if (cfg.max_slope && !(*cfg.max_slope > 0.0))
        throw Error(ErrorCode::invalid_argument, "max slope must be positive");
    if (!(cfg.v1 > 0.0)) throw Error(ErrorCode::invalid_argument, "v1 must be positive");
    validate(cfg.solver);
}

int InversionTrace::solver_calls() const {
    int total = 0;
    for (const auto& s : steps) total += s.solver_calls;
    return total;
}

CouplingChoice choose_coupling(const PotentialProfile& g, const Trajectory& t, double x_k,
                               double sigma, std::optional<double> fallback_coupling) {
    const double floor = g.minimum();
    const double level = g(sigma * x_k);
    if (level > floor) return {t.invert_ratio(level), false};

    const double midway = 0.5 * (floor + g(x_k));
    if (midway > floor) return {t.invert_ratio(midway), true};
    if (fallback_coupling) return {*fallback_coupling, true};

    std::ostringstream msg;
    msg << "g is flat up to x = " << x_k;
    throw Error(ErrorCode::level_below_minimum, msg.str());
}

namespace {

// Root of G(v, y) - F(v) for y >= g_k, where extend(y) is the potential with
// the trial segment through y.
template <class Extend>
NextValue search_next_value(Extend extend, double g_k, double f0, double step, const Trajectory& t,
                            double v, const InversionConfig& cfg, double max_slope) {
    const double target = t.energy(v);
    const double scale = std::max({std::abs(target), v * std::abs(f0), 1e-300});
    const double fine = cfg.y_tolerance * scale;
    const double coarse = std::max(1e-3 * scale, fine);

    NextValue out;
    auto residual = [&](double y) {
        ++out.solver_calls;
        return ground_energy(extend(y), v, cfg.solver) - target;
    };

    // G(v, y) increases with y.
    double lo = g_k;
    double r_lo = residual(lo);
    if (r_lo >= 0.0) {
        out.value = lo;
        out.residual = r_lo;
        return out;
    }

    double width = max_slope * step;
    double hi = lo + width;
    double r_hi = residual(hi);
    for (int n = 0; r_hi < 0.0; ++n) {
        if (n >= cfg.max_expansions) {
            std::ostringstream msg;
            msg << "no y in [" << g_k << ", " << hi << "] reaches F(" << v << ")";
            throw Error(ErrorCode::inconsistent_extension, msg.str());
        }
        lo = hi;
        r_lo = r_hi;
        width *= cfg.bracket_growth;
        hi = g_k + width;
        r_hi = residual(hi);
    }
    auto best = [&] {
        if (std::abs(r_lo) <= std::abs(r_hi)) {
            out.value = lo;
            out.residual = r_lo;
        } else {
            out.value = hi;
            out.residual = r_hi;
        }
        return out;
    };
    auto collapsed = [&] { return hi - lo <= 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); };
    auto update = [&](double y, double r) {
        if (r < 0.0) {
            lo = y;
            r_lo = r;
        } else {
            hi = y;
            r_hi = r;
        }
    };

    while (std::min(std::abs(r_lo), std::abs(r_hi)) > coarse) {
        if (collapsed()) return best();
        const double mid = 0.5 * (lo + hi);
        update(mid, residual(mid));
    }

    // Secant from the two latest iterates, bisecting whenever it leaves the bracket.
    double prev = std::abs(r_lo) <= std::abs(r_hi) ? hi : lo;
    double r_prev = prev == lo ? r_lo : r_hi;
    double cur = prev == lo ? hi : lo;
    double r_cur = prev == lo ? r_hi : r_lo;
    for (int it = 0; it < 100; ++it) {
        if (std::min(std::abs(r_lo), std::abs(r_hi)) <= fine || collapsed()) break;
        double y = 0.5 * (lo + hi);
        if (r_cur != r_prev) {
            const double s = cur - r_cur * (cur - prev) / (r_cur - r_prev);
            if (s > lo && s < hi) y = s;
        }
        const double r = residual(y);
        update(y, r);
        prev = cur;
        r_prev = r_cur;
        cur = y;
        r_cur = r;
    }
    return best();
}

}  // namespace

NextValue solve_next_value(const ReconstructedPotential& g, const Trajectory& t, double v,
                           const InversionConfig& cfg, double max_slope) {
    return search_next_value([&g](double y) { return PotentialProfile(g.with_extension(y)); },
                             g.frontier_value(), g.f0(), g.step(), t, v, cfg, max_slope);
}

NextValue solve_next_value(const PotentialProfile& known, double x_k, double step, bool cut_to_zero,
                           const Trajectory& t, double v, const InversionConfig& cfg,
                           double max_slope) {
    if (!(x_k > 0.0) || !(step > 0.0))
        throw Error(ErrorCode::invalid_argument, "need x_k > 0 and h > 0");
    const double g_k = known(x_k);
    auto extend = [&known, x_k, g_k, step, cut_to_zero](double y) {
        const double slope = (y - g_k) / step;
        const double ceiling = std::max(0.0, g_k);
        auto value = [known, x_k, g_k, slope, cut_to_zero, ceiling](double x) {
            if (x <= x_k) return known(x);
            const double line = g_k + slope * (x - x_k);
            return cut_to_zero ? std::min(line, ceiling) : line;
        };
        std::optional<double> cap;
        if (slope == 0.0)
            cap = g_k;
        else if (cut_to_zero)
            cap = ceiling;
        return PotentialProfile(value, known.minimum(), cap);
    };
    return search_next_value(extend, g_k, known.minimum(), step, t, v, cfg, max_slope);
}

double default_max_slope(const SeedFit& seed) {
    if (const auto* flat = std::get_if<FlatFit>(&seed.kind))
        return 10.0 * std::sqrt(flat->kinetic_bound);
    const auto& p = std::get<PowerFit>(seed.kind);
    return 10.0 * p.amplitude * p.exponent * std::pow(p.radius, p.exponent - 1.0);
}

bool detect_bounded_above(const Trajectory& t, double f0) {
    if (!(f0 < 0.0)) return false;
    try {
        const double r1 = t.ratio(0.1);
        const double r2 = t.ratio(0.01);
        return r1 < 0.0 && r2 < 0.0 && std::abs(r2) < 0.5 * std::abs(r1);
    } catch (const Error&) {
        return false;
    }
}

InversionResult invert(const Trajectory& t, const InversionConfig& cfg) {
    validate(cfg);
    InversionResult result;
    auto& trace = result.trace;
    try {
        trace.f0 = estimate_f0(t);

        SeedOptions options;
        options.v1 = cfg.v1;
        options.solver = cfg.solver;
        trace.seed = fit_seed(t, trace.f0, options);
        trace.cut_to_zero = cfg.cut_to_zero.value_or(detect_bounded_above(t, trace.f0));
        trace.max_slope = cfg.max_slope.value_or(default_max_slope(*trace.seed));

        const double fallback = trace.seed->is_flat()
                                    ? cfg.v1
                                    : std::get<PowerFit>(trace.seed->kind).coupling;

        result.potential.emplace(trace.f0, trace.seed->seed(), cfg.step, trace.cut_to_zero);
        for (int k = 1; k <= cfg.steps; ++k) {
            const auto& g = *result.potential;
            // Turning point at sigma x_{k+1}, never past the last knot.
            const double target = std::min(g.frontier() + cfg.step, g.frontier() / cfg.sigma);
            const auto choice = choose_coupling(g.with_extension(g.frontier_value()), t, target,
                                                cfg.sigma, fallback);
            const auto next = solve_next_value(g, t, choice.coupling, cfg, trace.max_slope);
            result.potential = g.append_knot(next.value);
            trace.steps.push_back({k, result.potential->frontier(), choice.coupling, next.value,
                                   next.residual, next.solver_calls, choice.fallback});
        }
    } catch (const Error& e) {
        result.error = e;
    }
    return result;
}

double max_knot_error(const ReconstructedPotential& g, const PotentialShape& exact) {
    double worst = 0.0;
    const auto knots = g.knots();
    for (std::size_t i = 0; i < knots.size(); ++i)
        worst = std::max(worst, std::abs(knots[i] - evaluate(exact, g.knot_position(i))));
    return worst;
}

void write_trace_csv(std::ostream& out, const InversionResult& result, const PotentialShape* exact) {
    std::vector<std::pair<std::string, std::string>> meta;
    const auto& trace = result.trace;
    meta.emplace_back("f0", csv::number(trace.f0));
    if (trace.seed) {
        const auto report = trace.seed->report();
        meta.insert(meta.end(), report.begin(), report.end());
    }
    meta.emplace_back("cut_to_zero", trace.cut_to_zero ? "true" : "false");
    meta.emplace_back("max_slope", csv::number(trace.max_slope));
    meta.emplace_back("solver_calls", std::to_string(trace.solver_calls()));
    meta.emplace_back("fallback_steps",
                      std::to_string(std::count_if(trace.steps.begin(), trace.steps.end(),
                                                   [](const StepRecord& s) { return s.fallback; })));
    if (exact) meta.emplace_back("exact", describe(*exact));
    if (result.error) meta.emplace_back("error", result.error->what());
    csv::write_metadata(out, meta);

    out << "k,x_k,v_k,y_k,residual";
    if (exact) out << ",f_exact,abs_err";
    out << '\n';
    for (const auto& s : trace.steps) {
        out << s.k << ',' << csv::number(s.x) << ',' << csv::number(s.coupling) << ','
            << csv::number(s.value) << ',' << csv::number(s.residual);
        if (exact) {
            const double f = evaluate(*exact, s.x);
            out << ',' << csv::number(f) << ',' << csv::number(std::abs(s.value - f));
        }
        out << '\n';
    }
}

}  // namespace geoinv
