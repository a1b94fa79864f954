#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "geoinv/error.hpp"
#include "geoinv/forward_solver.hpp"
#include "geoinv/potential.hpp"
#include "geoinv/seed_model.hpp"
#include "geoinv/trajectory.hpp"

namespace geoinv {

struct InversionConfig {
    /// Turning point of the probing state, as a fraction of the next knot position.
    double sigma = 0.5;
    /// Knot spacing h.
    double step = 0.05;
    int steps = 40;
    /// Clip the straight-line extension at zero. Detected from F when unset.
    std::optional<bool> cut_to_zero;
    /// Relative residual |G - F| accepted for each knot.
    double y_tolerance = 1e-8;
    double bracket_growth = 2.0;
    int max_expansions = 60;
    /// Initial bracket [g_k, g_k + max_slope h]; derived from the seed when unset.
    std::optional<double> max_slope;
    /// Seed-fit coupling.
    double v1 = 1e4;
    SolverConfig solver{};
};

void validate(const InversionConfig& cfg);

struct StepRecord {
    int k = 0;
    /// Position of the new knot, b + k h.
    double x = 0.0;
    double coupling = 0.0;
    double value = 0.0;
    double residual = 0.0;
    int solver_calls = 0;
    bool fallback = false;
};

struct InversionTrace {
    double f0 = 0.0;
    std::optional<SeedFit> seed;
    bool cut_to_zero = false;
    double max_slope = 0.0;
    std::vector<StepRecord> steps;

    int solver_calls() const;
};

struct InversionResult {
    std::optional<ReconstructedPotential> potential;
    InversionTrace trace;
    std::optional<Error> error;

    bool ok() const noexcept { return !error.has_value(); }
};

struct CouplingChoice {
    double coupling = 0.0;
    bool fallback = false;
};

/// v = R^-1(g(sigma x)), x being the position whose value is sought. When
/// g(sigma x) sits on the flat floor the level (f0 + g(x))/2 is used instead,
/// and failing that fallback_coupling.
CouplingChoice choose_coupling(const PotentialProfile& g, const Trajectory& trajectory, double x_k,
                               double sigma, std::optional<double> fallback_coupling = {});

struct NextValue {
    double value = 0.0;
    double residual = 0.0;
    int solver_calls = 0;
};

/// The y >= g(x_k) whose straight-line extension reproduces F(v): bisection
/// down to a residual of 1e-3 |F|, then safeguarded secant to y_tolerance.
NextValue solve_next_value(const ReconstructedPotential& g, const Trajectory& trajectory,
                           double coupling, const InversionConfig& cfg, double max_slope);

/// Same search for a potential known exactly on [0, x_k] and continued by the
/// line through (x_k, g(x_k)) and (x_k + h, y), clipped at zero when asked.
NextValue solve_next_value(const PotentialProfile& known, double x_k, double step, bool cut_to_zero,
                           const Trajectory& trajectory, double coupling,
                           const InversionConfig& cfg, double max_slope);

/// 10 A q b^(q-1) for a power seed, 10 K^(1/2) for a flat one.
double default_max_slope(const SeedFit& seed);

/// True when f0 < 0 and R(v) -> 0- as v -> 0+, i.e. the shape vanishes at infinity.
bool detect_bounded_above(const Trajectory& trajectory, double f0);

/// Full reconstruction: f0, seed, then cfg.steps knots. Step k probes with the
/// turning point at min(sigma x_{k+1}, x_k).
InversionResult invert(const Trajectory& trajectory, const InversionConfig& cfg = {});

/// Largest |g(x_k) - f(x_k)| over the knots.
double max_knot_error(const ReconstructedPotential& g, const PotentialShape& exact);

/// CSV "k,x_k,v_k,y_k,residual[,f_exact,abs_err]".
void write_trace_csv(std::ostream& out, const InversionResult& result,
                     const PotentialShape* exact = nullptr);

}  // namespace geoinv
