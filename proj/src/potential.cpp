#include "geoinv/potential.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "geoinv/csv.hpp"
#include "geoinv/error.hpp"

namespace geoinv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void out_of_range(double value, const std::string& what) {
    std::ostringstream msg;
    msg << "level " << value << " not attained by " << what;
    throw Error(ErrorCode::out_of_range, msg.str());
}

}  // namespace

PotentialShape make_shifted_power(double f0, double amplitude, double exponent) {
    if (!(amplitude > 0.0) || !(exponent > 0.0) || !std::isfinite(f0))
        throw Error(ErrorCode::invalid_argument, "shifted power needs amplitude > 0 and exponent > 0");
    return ShiftedPower{f0, amplitude, exponent};
}

PotentialShape make_square_well(double depth, double half_width) {
    if (!(depth < 0.0) || !(half_width > 0.0))
        throw Error(ErrorCode::invalid_argument, "square well needs depth < 0 and half_width > 0");
    return SquareWell{depth, half_width};
}

double evaluate(const PotentialShape& shape, double x) {
    const double ax = std::abs(x);
    return std::visit(
        overloaded{
            [ax](const ShiftedPower& p) { return p.f0 + p.amplitude * std::pow(ax, p.exponent); },
            [ax](const Exponential&) { return -std::exp(-ax); },
            [ax](const SechSquared&) {
                const double c = std::cosh(ax);
                return -1.0 / (c * c);
            },
            [ax](const SquareWell& w) {
                if (ax < w.half_width) return w.depth;
                if (ax == w.half_width) return 0.5 * w.depth;
                return 0.0;
            },
        },
        shape);
}

double minimum_value(const PotentialShape& shape) {
    return std::visit(overloaded{
                          [](const ShiftedPower& p) { return p.f0; },
                          [](const Exponential&) { return -1.0; },
                          [](const SechSquared&) { return -1.0; },
                          [](const SquareWell& w) { return w.depth; },
                      },
                      shape);
}

std::optional<double> upper_limit(const PotentialShape& shape) {
    if (std::holds_alternative<ShiftedPower>(shape)) return std::nullopt;
    return 0.0;
}

std::optional<double> discontinuity(const PotentialShape& shape) {
    if (const auto* w = std::get_if<SquareWell>(&shape)) return w->half_width;
    return std::nullopt;
}

double inverse_on_half_axis(const PotentialShape& shape, double value) {
    const double lo = minimum_value(shape);
    if (!(value >= lo)) out_of_range(value, describe(shape));
    if (value == lo) return 0.0;
    return std::visit(
        overloaded{
            [value](const ShiftedPower& p) {
                return std::pow((value - p.f0) / p.amplitude, 1.0 / p.exponent);
            },
            [value, &shape](const Exponential&) {
                if (value >= 0.0) out_of_range(value, describe(shape));
                // -exp(-x) = value; 1 + value is exact near the minimum.
                return -std::log1p(-(1.0 + value));
            },
            [value, &shape](const SechSquared&) {
                if (value >= 0.0) out_of_range(value, describe(shape));
                if (value < -0.5) return std::atanh(std::sqrt(1.0 + value));
                return std::acosh(1.0 / std::sqrt(-value));
            },
            [value, &shape](const SquareWell& w) {
                if (value > 0.0) out_of_range(value, describe(shape));
                return w.half_width;
            },
        },
        shape);
}

std::string describe(const PotentialShape& shape) {
    return std::visit(overloaded{
                          [](const ShiftedPower& p) {
                              std::ostringstream s;
                              s << "power(f0=" << p.f0 << ", A=" << p.amplitude
                                << ", q=" << p.exponent << ")";
                              return s.str();
                          },
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const SechSquared&) { return std::string("sech2"); },
                          [](const SquareWell& w) {
                              std::ostringstream s;
                              s << "well(depth=" << w.depth << ", half_width=" << w.half_width
                                << ")";
                              return s.str();
                          },
                      },
                      shape);
}

// ---------------------------------------------------------------------------

ReconstructedPotential::ReconstructedPotential(double f0, Seed seed, double step, bool cut_to_zero)
    : f0_(f0), seed_(seed), step_(step), cut_to_zero_(cut_to_zero) {
    if (!(step > 0.0)) throw Error(ErrorCode::invalid_argument, "knot step must be positive");
    const bool ok = std::visit(overloaded{
                                   [](const FlatSeed& s) { return s.radius > 0.0; },
                                   [](const PowerSeed& s) {
                                       return s.radius > 0.0 && s.amplitude > 0.0 &&
                                              s.exponent > 0.0;
                                   },
                               },
                               seed_);
    if (!ok) throw Error(ErrorCode::invalid_argument, "seed parameters must be positive");
}

double ReconstructedPotential::seed_radius() const noexcept {
    return std::visit([](const auto& s) { return s.radius; }, seed_);
}

double ReconstructedPotential::knot_position(std::size_t i) const noexcept {
    return seed_radius() + static_cast<double>(i + 1) * step_;
}

double ReconstructedPotential::frontier() const noexcept {
    return seed_radius() + static_cast<double>(knots_.size()) * step_;
}

double ReconstructedPotential::frontier_value() const noexcept {
    return knots_.empty() ? seed_value(seed_radius()) : knots_.back();
}

double ReconstructedPotential::seed_value(double x) const noexcept {
    const double ax = std::abs(x);
    return std::visit(overloaded{
                          [this](const FlatSeed&) { return f0_; },
                          [this, ax](const PowerSeed& s) {
                              return f0_ + s.amplitude * std::pow(ax, s.exponent);
                          },
                      },
                      seed_);
}

double ReconstructedPotential::operator()(double x) const {
    const double ax = std::abs(x);
    const double b = seed_radius();
    if (ax <= b) return seed_value(ax);

    const double edge = frontier();
    if (ax > edge) {
        if (extension_) {
            const double g_last = frontier_value();
            const double line = g_last + (*extension_ - g_last) * (ax - edge) / step_;
            return cut_to_zero_ ? std::min(line, std::max(0.0, g_last)) : line;
        }
        if (ax - edge > 1e-12 * std::max(1.0, edge)) {
            std::ostringstream msg;
            msg << "x = " << ax << " beyond last knot at " << edge;
            throw Error(ErrorCode::extension_required, msg.str());
        }
        return frontier_value();
    }

    const std::size_t count = knots_.size();
    auto j = static_cast<std::size_t>((ax - b) / step_);
    if (j >= count) j = count - 1;
    const double left = (j == 0) ? seed_value(b) : knots_[j - 1];
    const double right = knots_[j];
    const double t = (ax - (b + static_cast<double>(j) * step_)) / step_;
    return left + (right - left) * t;
}

ReconstructedPotential ReconstructedPotential::with_extension(double y) const {
    if (!(y >= frontier_value())) {
        std::ostringstream msg;
        msg << "extension value " << y << " below frontier value " << frontier_value();
        throw Error(ErrorCode::monotonicity_violation, msg.str());
    }
    ReconstructedPotential out = *this;
    out.extension_ = y;
    return out;
}

ReconstructedPotential ReconstructedPotential::without_extension() const {
    ReconstructedPotential out = *this;
    out.extension_.reset();
    return out;
}

ReconstructedPotential ReconstructedPotential::append_knot(double y) const {
    if (!(y >= frontier_value())) {
        std::ostringstream msg;
        msg << "knot value " << y << " below previous value " << frontier_value();
        throw Error(ErrorCode::monotonicity_violation, msg.str());
    }
    ReconstructedPotential out = *this;
    out.knots_.push_back(y);
    out.extension_.reset();
    return out;
}

std::optional<double> ReconstructedPotential::upper_limit() const {
    if (!extension_) return std::nullopt;
    const double g_last = frontier_value();
    if (*extension_ == g_last) return g_last;
    if (cut_to_zero_) return std::max(0.0, g_last);
    return std::nullopt;
}

double ReconstructedPotential::defined_range() const noexcept {
    return extension_ ? std::numeric_limits<double>::infinity() : frontier();
}

double evaluate(const ReconstructedPotential& g, double x) { return g(x); }

double inverse_on_half_axis(const ReconstructedPotential& g, double value) {
    const double f0 = g.f0();
    if (!(value >= f0)) out_of_range(value, "reconstruction");
    if (value == f0) return 0.0;

    const double b = g.seed_radius();
    const double at_b = g.seed_value(b);
    if (value <= at_b) {
        // a flat seed has at_b == f0, handled above
        const auto& s = std::get<PowerSeed>(g.seed());
        return std::pow((value - f0) / s.amplitude, 1.0 / s.exponent);
    }

    const auto knots = g.knots();
    double left = at_b;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const double right = knots[i];
        if (value <= right) {
            if (value == right) return g.knot_position(i);
            const double x_left = (i == 0) ? b : g.knot_position(i - 1);
            return x_left + g.step() * (value - left) / (right - left);
        }
        left = right;
    }

    if (const auto y = g.extension()) {
        const double g_last = g.frontier_value();
        const double slope = (*y - g_last) / g.step();
        const auto cap = g.upper_limit();
        if (slope > 0.0 && (!cap || value <= *cap)) return g.frontier() + (value - g_last) / slope;
    }
    out_of_range(value, "reconstruction");
}

// ---------------------------------------------------------------------------

PotentialProfile::PotentialProfile(const PotentialShape& shape)
    : value_([shape](double x) { return evaluate(shape, x); }),
      minimum_(minimum_value(shape)),
      upper_limit_(geoinv::upper_limit(shape)),
      discontinuity_(geoinv::discontinuity(shape)) {}

PotentialProfile::PotentialProfile(const ReconstructedPotential& potential)
    : value_([potential](double x) { return potential(x); }),
      minimum_(potential.f0()),
      upper_limit_(potential.upper_limit()) {}

PotentialProfile::PotentialProfile(std::function<double(double)> value, double minimum,
                                   std::optional<double> upper_limit,
                                   std::optional<double> discontinuity)
    : value_(std::move(value)),
      minimum_(minimum),
      upper_limit_(upper_limit),
      discontinuity_(discontinuity) {}

PotentialProfile truncated_with_line(const PotentialShape& shape, double x_a, double slope) {
    if (!(x_a > 0.0) || !(slope >= 0.0))
        throw Error(ErrorCode::invalid_argument, "tail perturbation needs x_a > 0 and slope >= 0");
    const double at_a = evaluate(shape, x_a);
    auto value = [shape, x_a, at_a, slope](double x) {
        return x <= x_a ? evaluate(shape, x) : at_a + slope * (x - x_a);
    };
    std::optional<double> cap;
    if (slope == 0.0) cap = at_a;
    auto jump = discontinuity(shape);
    if (jump && *jump > x_a) jump.reset();
    return PotentialProfile(std::move(value), minimum_value(shape), cap, jump);
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> reconstruction_metadata(
    const ReconstructedPotential& g) {
    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("f0", csv::number(g.f0()));
    std::visit(overloaded{
                   [&meta](const FlatSeed&) {
                       meta.emplace_back("seed", "flat");
                   },
                   [&meta](const PowerSeed& s) {
                       meta.emplace_back("seed", "power");
                       meta.emplace_back("A", csv::number(s.amplitude));
                       meta.emplace_back("q", csv::number(s.exponent));
                   },
               },
               g.seed());
    meta.emplace_back("b", csv::number(g.seed_radius()));
    meta.emplace_back("h", csv::number(g.step()));
    meta.emplace_back("knots", std::to_string(g.knots().size()));
    meta.emplace_back("cut_to_zero", g.cut_to_zero() ? "true" : "false");
    return meta;
}

void write_reconstruction_csv(std::ostream& out, const ReconstructedPotential& g,
                              std::span<const double> grid,
                              std::span<const std::pair<std::string, std::string>> extra) {
    csv::write_metadata(out, reconstruction_metadata(g));
    csv::write_metadata(out, extra);
    out << "x,g\n";
    for (const double x : grid) out << csv::number(x) << ',' << csv::number(g(x)) << '\n';
}

ReconstructionTable read_reconstruction_csv(std::istream& in) {
    auto doc = csv::read(in);
    if (doc.header.size() < 2 || doc.header[0] != "x" || doc.header[1] != "g")
        throw Error(ErrorCode::invalid_argument, "reconstruction CSV must start with columns x,g");
    ReconstructionTable table;
    table.metadata = std::move(doc.metadata);
    for (const auto& row : doc.rows) {
        if (row.size() < 2) throw Error(ErrorCode::invalid_argument, "short CSV row");
        table.x.push_back(std::stod(row[0]));
        table.g.push_back(std::stod(row[1]));
    }
    return table;
}

}  // namespace geoinv
