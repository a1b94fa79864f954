#include "geoinv/seed_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geoinv/csv.hpp"
#include "geoinv/error.hpp"

namespace geoinv {

double SeedFit::radius() const noexcept {
    return std::visit([](const auto& k) { return k.radius; }, kind);
}

Seed SeedFit::seed() const {
    if (const auto* flat = std::get_if<FlatFit>(&kind)) return FlatSeed{flat->radius};
    const auto& p = std::get<PowerFit>(kind);
    return PowerSeed{p.amplitude, p.exponent, p.radius};
}

std::vector<std::pair<std::string, std::string>> SeedFit::report() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("seed.f0", csv::number(f0));
    if (const auto* flat = std::get_if<FlatFit>(&kind)) {
        out.emplace_back("seed.kind", "flat");
        out.emplace_back("seed.K", csv::number(flat->kinetic_bound));
        out.emplace_back("seed.b", csv::number(flat->radius));
        return out;
    }
    const auto& p = std::get<PowerFit>(kind);
    out.emplace_back("seed.kind", "power");
    out.emplace_back("seed.q", csv::number(p.exponent));
    out.emplace_back("seed.A", csv::number(p.amplitude));
    out.emplace_back("seed.b", csv::number(p.radius));
    out.emplace_back("seed.eta", csv::number(p.eta));
    out.emplace_back("seed.v1", csv::number(p.coupling));
    return out;
}

std::optional<double> detect_flat(const Trajectory& t, std::span<const double> probes) {
    if (probes.size() < 4) throw Error(ErrorCode::invalid_argument, "need at least 4 probes");
    if (!std::is_sorted(probes.begin(), probes.end()))
        throw Error(ErrorCode::invalid_argument, "probes must be increasing");

    std::vector<double> s;
    s.reserve(probes.size());
    for (const double v : probes) s.push_back(t.kinetic(v));

    const std::size_t n = s.size();
    bool non_increasing = true;
    for (std::size_t i = 2; i < n; ++i) non_increasing = non_increasing && s[i] <= s[i - 1];

    // last increase below 5% and shrinking
    const double last = s[n - 1] - s[n - 2];
    const bool saturating = last < 0.05 * std::abs(s[n - 2]) && last < s[n - 2] - s[n - 3];

    if (!non_increasing && !saturating) return std::nullopt;
    return *std::max_element(s.begin(), s.end());
}

PowerFit fit_power(const Trajectory& t, double f0, double v1, const SolverConfig& cfg) {
    if (!(v1 > 0.0)) throw Error(ErrorCode::invalid_argument, "v1 must be positive");
    const double excess1 = t.energy(v1) - v1 * f0;
    const double excess2 = t.energy(2.0 * v1) - 2.0 * v1 * f0;
    if (!(excess1 > 0.0) || !(excess2 > 0.0)) {
        std::ostringstream msg;
        msg << "F(v1) - v1 f0 = " << excess1 << ", F(2 v1) - 2 v1 f0 = " << excess2;
        throw Error(ErrorCode::inconsistent_f0, msg.str());
    }

    const double eta = (std::log(excess2) - std::log(excess1)) / std::numbers::ln2;
    if (!(eta > 0.0 && eta < 1.0)) {
        std::ostringstream msg;
        msg << "eta = " << eta;
        throw Error(ErrorCode::not_power_like, msg.str());
    }

    PowerFit fit;
    fit.eta = eta;
    fit.coupling = v1;
    fit.exponent = 2.0 / eta - 2.0;
    const double unit_energy = pure_power_energy(fit.exponent, cfg);
    fit.amplitude = std::pow(excess1 / unit_energy, 1.0 / eta) / v1;
    fit.radius = std::pow(excess1 / (fit.amplitude * v1), 1.0 / fit.exponent);
    return fit;
}

SeedFit fit_seed(const Trajectory& t, double f0, const SeedOptions& options) {
    if (const auto bound = detect_flat(t, options.flat_probes))
        return {f0, FlatFit{*bound, 0.5 * std::numbers::pi / std::sqrt(*bound)}};

    auto fit = fit_power(t, f0, options.v1, options.solver);
    if (fit.radius < options.min_radius || fit.radius > options.max_radius) {
        // b scales as v1^(-1/(2+q))
        const double v1 =
            options.v1 * std::pow(fit.radius / options.target_radius, 2.0 + fit.exponent);
        fit = fit_power(t, f0, v1, options.solver);
    }
    return {f0, fit};
}

}  // namespace geoinv
