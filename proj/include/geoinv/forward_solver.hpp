#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "geoinv/potential.hpp"

namespace geoinv {

struct SolverConfig {
    /// Upper bound on the Numerov step.
    double grid_step = 1e-3;
    /// Grid points per local de Broglie wavelength in the allowed region.
    double points_per_wavelength = 40.0;
    /// Integrated decay exponent, in units of the local decay length, that the
    /// domain extends past the turning point.
    double domain_margin = 12.0;
    /// Relative tolerance on the eigenvalue.
    double energy_tolerance = 1e-10;
    int max_bisections = 200;
    std::size_t max_grid_points = 40'000'000;
};

void validate(const SolverConfig& cfg);

/// Even, node-free ground state of -psi'' + v g(x) psi = E psi sampled on
/// [0, x_max] with unit norm over the whole line.
struct BoundState {
    double energy = 0.0;
    double coupling = 0.0;
    double grid_step = 0.0;
    std::vector<double> x;
    std::vector<double> psi;
    /// <psi, -psi''> = E - v <psi, g psi>
    double kinetic = 0.0;
    /// <psi, g psi>, which equals dE/dv by Hellmann-Feynman.
    double potential_mean = 0.0;
    double turning_point = 0.0;

    double x_max() const { return x.empty() ? 0.0 : x.back(); }
};

BoundState ground_state(const PotentialProfile& g, double coupling, const SolverConfig& cfg = {});
double ground_energy(const PotentialProfile& g, double coupling, const SolverConfig& cfg = {});

/// Even solution of psi'' = (v g - E) psi with psi(0) = 1 on [0, x_max] at a
/// fixed energy, eigenvalue or not. Potentials that agree on [0, a] give
/// identical samples there.
struct OutwardSolution {
    double energy = 0.0;
    double grid_step = 0.0;
    std::vector<double> x;
    std::vector<double> psi;
};

OutwardSolution integrate_outward(const PotentialProfile& g, double coupling, double energy,
                                  double x_max, const SolverConfig& cfg = {});

struct Concentration {
    /// Probability of |x| <= a.
    double probability = 0.0;
    /// (g(a) - F'(v)) / (g(a) - g(0)) with F'(v) = (E - s) / v.
    double bound = 0.0;
};

Concentration concentration(const BoundState& state, const PotentialProfile& g, double a);

/// "x,psi" rows, one per grid point.
void write_wavefunction_csv(std::ostream& out, const BoundState& state);

}  // namespace geoinv
