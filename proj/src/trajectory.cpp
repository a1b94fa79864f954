#include "geoinv/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/bessel_prime.hpp>
#include <boost/math/tools/roots.hpp>

#include "geoinv/csv.hpp"
#include "geoinv/error.hpp"

namespace geoinv {

namespace {

template <class F>
double bracketed_root(F f, double lo, double hi, double f_lo, double f_hi, double rel_tol) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    boost::uintmax_t iterations = 200;
    auto tol = [rel_tol](double a, double b) {
        return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b));
    };
    const auto [a, b] =
        boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iterations);
    return 0.5 * (a + b);
}

double central_difference(const Trajectory& t, double v, double rel_step) {
    const double dv = rel_step * v;
    return (t.energy(v + dv) - t.energy(v - dv)) / (2.0 * dv);
}

}  // namespace

// ---------------------------------------------------------------------------

void Trajectory::require_above_critical(double coupling) const {
    if (!(coupling > critical_coupling())) {
        std::ostringstream msg;
        msg << "v = " << coupling << " for " << name();
        throw Error(ErrorCode::below_critical_coupling, msg.str());
    }
}

double Trajectory::invert_ratio(double level) const {
    if (const auto m = known_minimum(); m && !(level > *m)) {
        std::ostringstream msg;
        msg << "R = " << level << " with minimum " << *m;
        throw Error(ErrorCode::level_below_minimum, msg.str());
    }
    constexpr double limit = 1e30;
    const double floor = std::max(1.0 / limit, critical_coupling());

    // R decreases in v: want R(lo) > level >= R(hi)
    double lo = 1.0;
    double hi = 1.0;
    double r_lo = ratio(1.0);
    double r_hi = r_lo;
    if (r_lo > level) {
        do {
            lo = hi;
            r_lo = r_hi;
            hi *= 2.0;
            if (hi > limit) throw Error(ErrorCode::bracket_failure, "no coupling reaches the level");
            r_hi = ratio(hi);
        } while (r_hi > level);
    } else {
        do {
            hi = lo;
            r_hi = r_lo;
            lo *= 0.5;
            if (lo <= floor) throw Error(ErrorCode::bracket_failure, "level above R near v_min");
            r_lo = ratio(lo);
        } while (r_lo <= level);
    }

    auto f = [this, level](double u) { return ratio(std::exp(u)) - level; };
    const double u = bracketed_root(f, std::log(lo), std::log(hi), r_lo - level, r_hi - level,
                                    1e-14);
    return std::exp(u);
}

// ---------------------------------------------------------------------------

PowerTrajectory::PowerTrajectory(double f0, double amplitude, double exponent, double unit_energy)
    : f0_(f0), amplitude_(amplitude), exponent_(exponent), unit_energy_(unit_energy) {
    if (!(amplitude > 0.0) || !(exponent > 0.0) || !(unit_energy > 0.0))
        throw Error(ErrorCode::invalid_argument, "power trajectory needs A, q, E(q) > 0");
}

PowerTrajectory PowerTrajectory::from_solver(double f0, double amplitude, double exponent,
                                             const SolverConfig& cfg) {
    return PowerTrajectory(f0, amplitude, exponent, pure_power_energy(exponent, cfg));
}

std::string PowerTrajectory::name() const {
    std::ostringstream s;
    s << "power(f0=" << f0_ << ", A=" << amplitude_ << ", q=" << exponent_ << ")";
    return s.str();
}

double PowerTrajectory::energy(double v) const {
    require_above_critical(v);
    const double eta = 2.0 / (2.0 + exponent_);
    return f0_ * v + unit_energy_ * std::pow(v * amplitude_, eta);
}

double PowerTrajectory::energy_derivative(double v) const {
    require_above_critical(v);
    const double eta = 2.0 / (2.0 + exponent_);
    return f0_ + unit_energy_ * eta * std::pow(amplitude_, eta) * std::pow(v, eta - 1.0);
}

// ---------------------------------------------------------------------------

double SechSquaredTrajectory::energy(double v) const {
    require_above_critical(v);
    const double root = std::sqrt(v + 0.25);
    const double d = v / (root + 0.5);  // root - 1/2 without cancellation
    return -d * d;
}

double SechSquaredTrajectory::energy_derivative(double v) const {
    require_above_critical(v);
    const double root = std::sqrt(v + 0.25);
    return -(v / (root + 0.5)) / root;
}

// ---------------------------------------------------------------------------

double bessel_j_derivative(double order, double argument) {
    if (!(order >= 0.0) || !(argument >= 0.0))
        throw Error(ErrorCode::invalid_argument, "Bessel derivative needs nu >= 0 and z >= 0");
    double value = 0.0;
    try {
        value = boost::math::cyl_bessel_j_prime(order, argument);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::bessel_failure, e.what());
    }
    if (!std::isfinite(value)) throw Error(ErrorCode::bessel_failure, "non-finite J'");
    return value;
}

double ground_bessel_order(double z) {
    if (!(z > 0.0)) throw Error(ErrorCode::invalid_argument, "Bessel argument must be positive");
    // J'_nu(z) > 0 for nu >= z; scan downward to the first sign change.
    const double step = std::min(0.25, z / 8.0);
    double upper = z;
    double f_upper = bessel_j_derivative(upper, z);
    for (;;) {
        const double lower = std::max(upper - step, 0.0);
        const double f_lower = bessel_j_derivative(lower, z);
        if (f_lower <= 0.0) {
            auto f = [z](double nu) { return bessel_j_derivative(nu, z); };
            return bracketed_root(f, lower, upper, f_lower, f_upper, 1e-15);
        }
        if (lower == 0.0) throw Error(ErrorCode::bessel_failure, "no ground-branch order found");
        upper = lower;
        f_upper = f_lower;
    }
}

ExponentialTrajectory::ExponentialTrajectory(double derivative_step)
    : derivative_step_(derivative_step) {
    if (!(derivative_step > 0.0 && derivative_step < 0.5))
        throw Error(ErrorCode::invalid_argument, "derivative step must lie in (0, 0.5)");
}

double ExponentialTrajectory::energy(double v) const {
    require_above_critical(v);
    const double nu = ground_bessel_order(2.0 * std::sqrt(v));
    return -0.25 * nu * nu;
}

double ExponentialTrajectory::energy_derivative(double v) const {
    require_above_critical(v);
    return central_difference(*this, v, derivative_step_);
}

// ---------------------------------------------------------------------------

NumericTrajectory::NumericTrajectory(PotentialShape shape, SolverConfig cfg, double derivative_step)
    : shape_(std::move(shape)), cfg_(cfg), derivative_step_(derivative_step) {
    validate(cfg_);
    if (!(derivative_step > 0.0 && derivative_step < 0.5))
        throw Error(ErrorCode::invalid_argument, "derivative step must lie in (0, 0.5)");
}

std::string NumericTrajectory::name() const { return "numeric " + describe(shape_); }

std::optional<double> NumericTrajectory::known_minimum() const { return minimum_value(shape_); }

double NumericTrajectory::energy(double v) const {
    require_above_critical(v);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    const double key = std::strtod(buf, nullptr);
    {
        std::shared_lock lock(mutex_);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double e = ground_energy(shape_, key, cfg_);
    std::unique_lock lock(mutex_);
    cache_.emplace(key, e);
    return e;
}

double NumericTrajectory::energy_derivative(double v) const {
    require_above_critical(v);
    return central_difference(*this, v, derivative_step_);
}

std::size_t NumericTrajectory::cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

// ---------------------------------------------------------------------------

double pure_power_energy(double exponent, const SolverConfig& cfg) {
    if (!(exponent > 0.0)) throw Error(ErrorCode::invalid_argument, "exponent must be positive");
    return ground_energy(make_shifted_power(0.0, 1.0, exponent), 1.0, cfg);
}

double estimate_f0(const Trajectory& t, double base_coupling) {
    std::array<double, 5> r{};
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] = t.ratio(base_coupling * std::pow(2.0, static_cast<double>(k)));

    // Aitken delta-squared over consecutive triples; nullopt when the
    // differences are already at rounding level.
    auto aitken = [](double a, double b, double c) -> std::optional<double> {
        const double d1 = b - a;
        const double d2 = c - b;
        const double den = d2 - d1;
        const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
        if (std::abs(den) <= 1e-14 * scale) return std::nullopt;
        const double out = c - d2 * d2 / den;
        if (!std::isfinite(out)) return std::nullopt;
        return out;
    };

    if (std::abs(r[1] - r[0]) <= 1e-6 * std::max(1.0, std::abs(r[1]))) return r[4];

    std::array<double, 3> first{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto a = aitken(r[i], r[i + 1], r[i + 2]);
        if (!a) return r[4];
        first[i] = *a;
    }
    return aitken(first[0], first[1], first[2]).value_or(first[2]);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t, std::span<const double> couplings) {
    out << "v,F,dF,R,s\n";
    for (const double v : couplings) {
        out << csv::number(v);
        try {
            const double f = t.energy(v);
            const double df = t.energy_derivative(v);
            out << ',' << csv::number(f) << ',' << csv::number(df) << ',' << csv::number(f / v)
                << ',' << csv::number(f - v * df) << '\n';
        } catch (const Error&) {
            out << ",nan,nan,nan,nan\n";
        }
    }
}

}  // namespace geoinv
