#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "geoinv/forward_solver.hpp"
#include "geoinv/potential.hpp"
#include "geoinv/trajectory.hpp"

namespace geoinv {

/// Bounded kinetic energy s <= K: the shape is flat on |x| <= b = (pi/2) K^(-1/2).
struct FlatFit {
    double kinetic_bound = 0.0;
    double radius = 0.0;
};

/// f(x) ~ f0 + A |x|^q on [0, b], fitted from F at v1 and 2 v1.
struct PowerFit {
    double exponent = 0.0;
    double amplitude = 0.0;
    double radius = 0.0;
    double eta = 0.0;
    double coupling = 0.0;
};

struct SeedFit {
    double f0 = 0.0;
    std::variant<FlatFit, PowerFit> kind;

    bool is_flat() const noexcept { return std::holds_alternative<FlatFit>(kind); }
    double radius() const noexcept;
    Seed seed() const;
    /// "# key = value" lines for CSV headers: f0, kind, q, A, b, eta, v1 (or K).
    std::vector<std::pair<std::string, std::string>> report() const;
};

inline constexpr double default_flat_probes[] = {1e2, 1e3, 1e4, 1e5};

/// K = max s(v) over the probes when s(v) = F - v F' looks bounded (non-increasing
/// past the second probe, or a last increase below 5% that is smaller than the
/// one before it); nullopt for an unbounded kinetic energy.
std::optional<double> detect_flat(const Trajectory& trajectory,
                                  std::span<const double> probes = default_flat_probes);

/// One fit at v1 and 2 v1, no bootstrap.
PowerFit fit_power(const Trajectory& trajectory, double f0, double v1, const SolverConfig& cfg = {});

struct SeedOptions {
    double v1 = 1e4;
    std::vector<double> flat_probes{std::begin(default_flat_probes), std::end(default_flat_probes)};
    /// Accepted range for the seed radius before v1 is rescaled once.
    double min_radius = 0.01;
    double max_radius = 1.0;
    double target_radius = 0.05;
    SolverConfig solver{};
};

/// Flat patch if detected, else a power fit at v1; when b falls outside
/// [min_radius, max_radius] v1 is rescaled so the model turning point moves
/// to target_radius and the fit is repeated once.
SeedFit fit_seed(const Trajectory& trajectory, double f0, const SeedOptions& options = {});

}  // namespace geoinv
