#include "geoinv/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "geoinv/csv.hpp"
#include "geoinv/error.hpp"

namespace geoinv {

namespace {

// Samples of v * g(x_i) on the uniform grid x_i = i h, grown on demand and
// shared by every trial energy of one solve.
class ScaledPotentialGrid {
public:
    ScaledPotentialGrid(const PotentialProfile& g, double coupling, double step)
        : g_(g), coupling_(coupling), step_(step) {}

    double step() const noexcept { return step_; }

    double operator[](std::size_t i) {
        while (values_.size() <= i)
            values_.push_back(coupling_ * g_(static_cast<double>(values_.size()) * step_));
        return values_[i];
    }

    /// v g on the sub-grid j h / substeps, j = 0..substeps.
    const std::vector<double>& fine() {
        if (fine_.empty())
            for (int j = 0; j <= substeps; ++j) fine_.push_back(coupling_ * g_(j * step_ / substeps));
        return fine_;
    }

    static constexpr int substeps = 64;

private:
    const PotentialProfile& g_;
    double coupling_;
    double step_;
    std::vector<double> values_;
    std::vector<double> fine_;
};

// psi(h) from Numerov on the fine sub-grid. The symmetric start psi(-d) = psi(d)
// is only O(v d^3) accurate when g has a kink at the origin (e.g. -exp(-|x|)).
double first_step(ScaledPotentialGrid& vg, double energy) {
    const auto& q = vg.fine();
    const double d = vg.step() / ScaledPotentialGrid::substeps;
    const double c = d * d / 12.0;
    double p_prev = 1.0;
    double p_curr = (1.0 + 5.0 * c * (q[0] - energy)) / (1.0 - c * (q[1] - energy));
    for (int j = 1; j < ScaledPotentialGrid::substeps; ++j) {
        const double p_next = (2.0 * p_curr * (1.0 + 5.0 * c * (q[j] - energy)) -
                               p_prev * (1.0 - c * (q[j - 1] - energy))) /
                              (1.0 - c * (q[j + 1] - energy));
        p_prev = p_curr;
        p_curr = p_next;
    }
    return p_curr;
}

struct Shot {
    bool too_high = false;
    std::size_t last = 0;  // index of the last grid point integrated
};

// Outward Numerov integration of psi'' = (v g - E) psi with psi(0) = 1,
// psi'(0) = 0. Stops at the first node (energy too high) or once the
// accumulated decay exponent past the turning point reaches the margin.
Shot shoot(ScaledPotentialGrid& vg, double energy, const SolverConfig& cfg,
           std::vector<double>* psi_out) {
    const double h = vg.step();
    const double h2 = h * h;
    const double c = h2 / 12.0;

    double q_prev = vg[0] - energy;
    double q_curr = vg[1] - energy;
    double psi_prev = 1.0;
    double psi_curr = first_step(vg, energy);
    double w_prev = (1.0 - c * q_prev) * psi_prev;
    double w_curr = (1.0 - c * q_curr) * psi_curr;

    if (psi_out) {
        psi_out->clear();
        psi_out->push_back(psi_prev);
        psi_out->push_back(psi_curr);
    }
    if (psi_curr <= 0.0) return {true, 1};

    double decay = std::sqrt(std::max(q_prev, 0.0)) * h + std::sqrt(std::max(q_curr, 0.0)) * h;
    for (std::size_t i = 1;; ++i) {
        if (i + 1 >= cfg.max_grid_points) {
            std::ostringstream msg;
            msg << "integration domain exceeded " << cfg.max_grid_points
                << " grid points at E = " << energy;
            throw Error(ErrorCode::no_bound_state, msg.str());
        }
        const double q_next = vg[i + 1] - energy;
        const double w_next = 2.0 * w_curr - w_prev + h2 * q_curr * psi_curr;
        const double psi_next = w_next / (1.0 - c * q_next);
        if (psi_out) psi_out->push_back(psi_next);
        if (psi_next <= 0.0) return {true, i + 1};

        decay += std::sqrt(std::max(q_next, 0.0)) * h;
        if (decay >= cfg.domain_margin && q_next > 0.0) return {false, i + 1};

        w_prev = w_curr;
        w_curr = w_next;
        q_curr = q_next;
        psi_curr = psi_next;
    }
}

double choose_step(const PotentialProfile& g, double kinetic_bound, const SolverConfig& cfg) {
    double h = cfg.grid_step;
    if (kinetic_bound > 0.0) {
        const double wavelength = 2.0 * std::numbers::pi / std::sqrt(kinetic_bound);
        h = std::min(h, wavelength / cfg.points_per_wavelength);
    }
    // land a grid point on a jump so it sees the mean value
    if (const auto d = g.discontinuity(); d && *d > 0.0) h = *d / std::ceil(*d / h);
    return h;
}

struct Eigenvalue {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
};

Eigenvalue locate(const PotentialProfile& g, double v, const SolverConfig& cfg,
                  std::optional<ScaledPotentialGrid>& grid) {
    const double floor = v * g.minimum();
    const auto cap = g.upper_limit();

    double hi = 0.0;
    if (cap) {
        hi = v * *cap;
        if (!(hi > floor)) throw Error(ErrorCode::no_bound_state, "potential is flat");
    } else {
        double delta = std::max(1.0, std::sqrt(v));
        for (int tries = 0;; ++tries) {
            if (tries > 200) throw Error(ErrorCode::no_bound_state, "no upper energy bracket");
            ScaledPotentialGrid trial(g, v, choose_step(g, delta, cfg));
            if (shoot(trial, floor + delta, cfg, nullptr).too_high) break;
            delta *= 2.0;
        }
        hi = floor + delta;
    }

    grid.emplace(g, v, choose_step(g, hi - floor, cfg));
    double lo = floor;
    for (int it = 0; it < cfg.max_bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double scale = std::max(std::abs(mid), mid - floor);
        if (hi - lo <= cfg.energy_tolerance * scale || mid <= lo || mid >= hi) break;
        if (cap && mid >= v * *cap) {
            hi = mid;
            continue;
        }
        if (shoot(*grid, mid, cfg, nullptr).too_high)
            hi = mid;
        else
            lo = mid;
    }

    if (cap) {
        const double top = v * *cap;
        if (top - lo <= 1e3 * cfg.energy_tolerance * std::max(std::abs(top), top - floor))
            throw Error(ErrorCode::state_not_bound, "eigenvalue reached the continuum edge");
    }
    if (lo == floor) throw Error(ErrorCode::no_bound_state, "bisection did not leave the floor");
    return {lo, hi, grid->step()};
}

double trapezoid_half_line(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double sum = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
    return sum * h;
}

double refine_turning_point(const PotentialProfile& g, double v, double energy, double left,
                            double right) {
    for (int it = 0; it < 100 && right - left > 1e-15 * std::max(1.0, right); ++it) {
        const double mid = 0.5 * (left + right);
        if (v * g(mid) >= energy)
            right = mid;
        else
            left = mid;
    }
    return right;
}

}  // namespace

void validate(const SolverConfig& cfg) {
    if (!(cfg.grid_step > 0.0) || !(cfg.points_per_wavelength > 0.0) ||
        !(cfg.domain_margin > 0.0) || !(cfg.energy_tolerance > 0.0) || cfg.max_bisections <= 0 ||
        cfg.max_grid_points < 16)
        throw Error(ErrorCode::invalid_argument, "solver configuration values must be positive");
}

double ground_energy(const PotentialProfile& g, double coupling, const SolverConfig& cfg) {
    validate(cfg);
    if (!(coupling > 0.0)) throw Error(ErrorCode::invalid_argument, "coupling must be positive");
    std::optional<ScaledPotentialGrid> grid;
    const auto e = locate(g, coupling, cfg, grid);
    return 0.5 * (e.lo + e.hi);
}

BoundState ground_state(const PotentialProfile& g, double coupling, const SolverConfig& cfg) {
    validate(cfg);
    if (!(coupling > 0.0)) throw Error(ErrorCode::invalid_argument, "coupling must be positive");
    std::optional<ScaledPotentialGrid> grid;
    const auto e = locate(g, coupling, cfg, grid);
    const double energy = 0.5 * (e.lo + e.hi);
    const double h = e.step;
    const double c = h * h / 12.0;
    auto& vg = *grid;

    // The lower bracket integrates node-free out to the margin; that fixes x_max.
    std::vector<double> psi;
    const std::size_t last = shoot(vg, e.lo, cfg, nullptr).last;
    shoot(vg, energy, cfg, &psi);
    psi.resize(last + 1, 0.0);

    // Outward solution diverges in the forbidden region; replace it past the
    // turning point by the inward solution that vanishes at x_max.
    std::size_t turn = 1;
    while (turn < last && vg[turn] < energy) ++turn;
    if (turn + 2 < last) {
        std::vector<double> inward(last + 1, 0.0);
        inward[last] = 0.0;
        inward[last - 1] = 1.0;
        double w_next = 0.0;
        double w_curr = (1.0 - c * (vg[last - 1] - energy)) * inward[last - 1];
        for (std::size_t i = last - 1; i > turn; --i) {
            const double q = vg[i] - energy;
            const double w_prev = 2.0 * w_curr - w_next + h * h * q * inward[i];
            inward[i - 1] = w_prev / (1.0 - c * (vg[i - 1] - energy));
            w_next = w_curr;
            w_curr = w_prev;
        }
        const double scale = psi[turn] / inward[turn];
        for (std::size_t i = turn; i <= last; ++i) psi[i] = scale * inward[i];
    }

    std::vector<double> density(psi.size());
    std::vector<double> weighted(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        density[i] = psi[i] * psi[i];
        weighted[i] = density[i] * vg[i];
    }
    const double norm = 2.0 * trapezoid_half_line(density, h);
    const double inv = 1.0 / std::sqrt(norm);
    for (double& p : psi) p *= inv;

    BoundState state;
    state.energy = energy;
    state.coupling = coupling;
    state.grid_step = h;
    state.potential_mean = 2.0 * trapezoid_half_line(weighted, h) / norm / coupling;
    state.kinetic = energy - coupling * state.potential_mean;
    state.x.resize(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) state.x[i] = static_cast<double>(i) * h;
    state.psi = std::move(psi);

    const double left = turn == 0 ? 0.0 : static_cast<double>(turn - 1) * h;
    state.turning_point = refine_turning_point(g, coupling, energy, left, static_cast<double>(turn) * h);
    return state;
}

OutwardSolution integrate_outward(const PotentialProfile& g, double coupling, double energy,
                                  double x_max, const SolverConfig& cfg) {
    validate(cfg);
    if (!(coupling > 0.0)) throw Error(ErrorCode::invalid_argument, "coupling must be positive");
    if (!(x_max > 0.0)) throw Error(ErrorCode::invalid_argument, "x_max must be positive");

    const double h = choose_step(g, energy - coupling * g.minimum(), cfg);
    const auto n = static_cast<std::size_t>(std::ceil(x_max / h)) + 1;
    if (n > cfg.max_grid_points)
        throw Error(ErrorCode::invalid_argument, "x_max needs too many grid points");

    ScaledPotentialGrid vg(g, coupling, h);
    const double c = h * h / 12.0;
    OutwardSolution out;
    out.energy = energy;
    out.grid_step = h;
    out.psi.resize(n);
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = static_cast<double>(i) * h;

    out.psi[0] = 1.0;
    out.psi[1] = first_step(vg, energy);
    double w_prev = (1.0 - c * (vg[0] - energy)) * out.psi[0];
    double w_curr = (1.0 - c * (vg[1] - energy)) * out.psi[1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double w_next = 2.0 * w_curr - w_prev + h * h * (vg[i] - energy) * out.psi[i];
        out.psi[i + 1] = w_next / (1.0 - c * (vg[i + 1] - energy));
        w_prev = w_curr;
        w_curr = w_next;
    }
    return out;
}

Concentration concentration(const BoundState& state, const PotentialProfile& g, double a) {
    if (!(a > 0.0) || a > state.x_max())
        throw Error(ErrorCode::out_of_range, "concentration radius outside the sampled range");
    const double ga = g(a);
    const double g0 = g(0.0);
    if (!(ga > g0)) throw Error(ErrorCode::flat_region, "g(a) equals g(0)");

    const double h = state.grid_step;
    double mass = 0.0;
    std::size_t i = 0;
    for (; i + 1 < state.psi.size() && state.x[i + 1] <= a; ++i)
        mass += 0.5 * h * (state.psi[i] * state.psi[i] + state.psi[i + 1] * state.psi[i + 1]);
    if (i + 1 < state.psi.size() && state.x[i] < a) {
        const double t = (a - state.x[i]) / h;
        const double psi_a = state.psi[i] + t * (state.psi[i + 1] - state.psi[i]);
        mass += 0.5 * (a - state.x[i]) * (state.psi[i] * state.psi[i] + psi_a * psi_a);
    }

    const double slope = (state.energy - state.kinetic) / state.coupling;
    return {2.0 * mass, (ga - slope) / (ga - g0)};
}

void write_wavefunction_csv(std::ostream& out, const BoundState& state) {
    out << "x,psi\n";
    for (std::size_t i = 0; i < state.psi.size(); ++i)
        out << csv::number(state.x[i]) << ',' << csv::number(state.psi[i]) << '\n';
}

}  // namespace geoinv
