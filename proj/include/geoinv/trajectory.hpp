#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>

#include "geoinv/forward_solver.hpp"
#include "geoinv/potential.hpp"

namespace geoinv {

/// Ground-state energy trajectory F(v) of -d^2/dx^2 + v f(x).
///
/// Subclasses supply F and F'; the ratio R(v) = F(v)/v, the kinetic energy
/// s(v) = F - v F' and the inverse of R are derived here. R is strictly
/// decreasing because R'(v) = -s(v)/v^2 < 0.
class Trajectory {
public:
    virtual ~Trajectory() = default;

    virtual std::string name() const = 0;
    virtual double energy(double coupling) const = 0;
    virtual double energy_derivative(double coupling) const = 0;
    /// Smallest coupling that supports a discrete ground state.
    virtual double critical_coupling() const { return 0.0; }
    /// Minimum of the generating shape when it is known in closed form; only
    /// used to reject unreachable levels in invert_ratio.
    virtual std::optional<double> known_minimum() const { return std::nullopt; }

    double ratio(double coupling) const { return energy(coupling) / coupling; }
    double kinetic(double coupling) const {
        return energy(coupling) - coupling * energy_derivative(coupling);
    }

    /// The coupling v with R(v) = level, to relative precision 1e-12. The
    /// bracket is grown by doubling or halving from v = 1.
    double invert_ratio(double level) const;

protected:
    void require_above_critical(double coupling) const;
};

/// F(v) = f0 v + E(q) (A v)^(2/(2+q)), exact for f0 + A|x|^q.
class PowerTrajectory final : public Trajectory {
public:
    PowerTrajectory(double f0, double amplitude, double exponent, double unit_energy);
    /// Same, with E(q) from the forward solver.
    static PowerTrajectory from_solver(double f0, double amplitude, double exponent,
                                       const SolverConfig& cfg = {});

    std::string name() const override;
    double energy(double coupling) const override;
    double energy_derivative(double coupling) const override;
    std::optional<double> known_minimum() const override { return f0_; }

    double f0() const noexcept { return f0_; }
    double amplitude() const noexcept { return amplitude_; }
    double exponent() const noexcept { return exponent_; }
    double unit_energy() const noexcept { return unit_energy_; }

private:
    double f0_;
    double amplitude_;
    double exponent_;
    double unit_energy_;
};

/// F(v) = -[(v + 1/4)^(1/2) - 1/2]^2 for f(x) = -sech^2(x).
class SechSquaredTrajectory final : public Trajectory {
public:
    std::string name() const override { return "sech2"; }
    double energy(double coupling) const override;
    double energy_derivative(double coupling) const override;
    std::optional<double> known_minimum() const override { return -1.0; }
};

/// f(x) = -exp(-|x|): E = -nu^2/4 where nu is the largest order in (0, z)
/// with J'_nu(z) = 0 at z = 2 sqrt(v).
class ExponentialTrajectory final : public Trajectory {
public:
    explicit ExponentialTrajectory(double derivative_step = 1e-3);

    std::string name() const override { return "exponential"; }
    double energy(double coupling) const override;
    double energy_derivative(double coupling) const override;
    std::optional<double> known_minimum() const override { return -1.0; }

private:
    double derivative_step_;
};

/// F(v) from the forward solver for an analytic shape. Solves are cached by
/// v rounded to 12 significant digits; the cache is safe for concurrent use.
class NumericTrajectory final : public Trajectory {
public:
    explicit NumericTrajectory(PotentialShape shape, SolverConfig cfg = {},
                               double derivative_step = 1e-3);

    std::string name() const override;
    double energy(double coupling) const override;
    double energy_derivative(double coupling) const override;
    std::optional<double> known_minimum() const override;

    const PotentialShape& shape() const noexcept { return shape_; }
    std::size_t cache_size() const;

private:
    PotentialShape shape_;
    SolverConfig cfg_;
    double derivative_step_;
    mutable std::shared_mutex mutex_;
    mutable std::map<double, double> cache_;
};

/// E(q): ground energy of -d^2/dx^2 + |x|^q.
double pure_power_energy(double exponent, const SolverConfig& cfg = {});

/// J'_nu(z) for real order nu >= 0 and z > 0.
double bessel_j_derivative(double order, double argument);

/// Largest nu in (0, z) with J'_nu(z) = 0 (the ground-state branch).
double ground_bessel_order(double argument);

/// lim F(v)/v, extrapolated from R at v0 * 2^k, k = 0..4, by two rounds of
/// Aitken's delta-squared process.
double estimate_f0(const Trajectory& trajectory, double base_coupling = 1e4);

/// CSV "v,F,dF,R,s"; couplings at or below the critical coupling, or where
/// evaluation fails, are written as nan.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          std::span<const double> couplings);

}  // namespace geoinv
