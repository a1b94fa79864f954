#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geoinv/forward_solver.hpp"
#include "geoinv/inversion.hpp"
#include "geoinv/potential.hpp"
#include "geoinv/trajectory.hpp"

namespace geoinv::cli {

enum ExitCode : int { ok = 0, numeric_failure = 1, bad_arguments = 2 };

/// "sech2", "exponential", "power:f0,A,q", "square_well:depth,half_width".
PotentialShape parse_shape(const std::string& spec);

/// "sech2", "exponential", "power:f0,A,q" (E(q) from the solver) or
/// "numeric:<shape>" (forward solves of any shape).
std::unique_ptr<Trajectory> make_trajectory(const std::string& spec, const SolverConfig& cfg = {});

/// The shape behind a trajectory selector.
PotentialShape shape_of_trajectory(const std::string& spec);

/// "min:max:count[:log|linear]", linear by default.
std::vector<double> parse_grid(const std::string& spec);

struct CompareRow {
    double x = 0.0;
    double g = 0.0;
    double f = 0.0;
    bool knot = false;
};

struct CompareReport {
    double max_abs = 0.0;
    double rms = 0.0;
    double max_abs_knots = 0.0;
    std::vector<CompareRow> rows;
};

/// Errors of a reconstruction table against an exact shape. Rows past the
/// seed radius must sit on the declared knots b + k h, and when `grid` is
/// given the x column must match it to 1e-9.
CompareReport compare(const ReconstructionTable& table, const PotentialShape& exact,
                      const std::optional<std::vector<double>>& grid = std::nullopt);

struct RunConfig {
    std::string command;
    std::string shape;
    std::string trajectory;
    std::vector<double> couplings;
    std::string grid;
    std::string out;
    std::string exact;
    std::string input;
    std::string psi_prefix;
    std::string cut_to_zero = "auto";
    std::vector<double> slopes{0.0, 0.25, 0.5, 1.0, 2.0};
    std::optional<double> x_a;
    std::optional<double> x_max;
    double dx = 0.005;
    bool eigen = false;
    SolverConfig solver{};
    InversionConfig inversion{};
};

/// Parses argv and runs one command. CSV goes to --out (stdout when absent
/// for single-file commands), summaries and timings to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs an already-parsed configuration.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace geoinv::cli
