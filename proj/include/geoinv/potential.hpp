#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace geoinv {

// Analytic test shapes. All are symmetric in x, nondecreasing on x >= 0 and
// attain their minimum at the origin.

/// f(x) = f0 + amplitude * |x|^exponent
struct ShiftedPower {
    double f0 = 0.0;
    double amplitude = 1.0;
    double exponent = 2.0;
};

/// f(x) = -exp(-|x|)
struct Exponential {};

/// f(x) = -sech^2(x)
struct SechSquared {};

/// f(x) = depth for |x| < half_width, 0 outside. At |x| = half_width the
/// mean of both sides is returned, which keeps the Numerov grid second order
/// when a grid point lands on the wall.
struct SquareWell {
    double depth = -1.0;
    double half_width = 1.0;
};

using PotentialShape = std::variant<ShiftedPower, Exponential, SechSquared, SquareWell>;

PotentialShape make_shifted_power(double f0, double amplitude, double exponent);
PotentialShape make_square_well(double depth, double half_width);

double evaluate(const PotentialShape& shape, double x);
double minimum_value(const PotentialShape& shape);
/// Limit of the shape as |x| -> infinity, if finite.
std::optional<double> upper_limit(const PotentialShape& shape);
/// Position of a jump discontinuity on x > 0, if any.
std::optional<double> discontinuity(const PotentialShape& shape);
/// Smallest x >= 0 with shape(x) = value. Throws ErrorCode::out_of_range for
/// levels below the minimum or at/above the supremum.
double inverse_on_half_axis(const PotentialShape& shape, double value);
std::string describe(const PotentialShape& shape);

// ---------------------------------------------------------------------------
// Reconstruction g(x): a seed on [0, b], then knots g_i at x_i = b + (i+1) h
// joined linearly, then an optional straight-line extension through the
// trial value y at the next knot position.

struct FlatSeed {
    double radius = 0.0;
};

struct PowerSeed {
    double amplitude = 1.0;
    double exponent = 2.0;
    double radius = 0.0;
};

using Seed = std::variant<FlatSeed, PowerSeed>;

class ReconstructedPotential {
public:
    ReconstructedPotential(double f0, Seed seed, double step, bool cut_to_zero = false);

    double f0() const noexcept { return f0_; }
    const Seed& seed() const noexcept { return seed_; }
    double seed_radius() const noexcept;
    double step() const noexcept { return step_; }
    bool cut_to_zero() const noexcept { return cut_to_zero_; }
    std::span<const double> knots() const noexcept { return knots_; }
    std::optional<double> extension() const noexcept { return extension_; }

    /// x position of knot i (0-based): b + (i + 1) h.
    double knot_position(std::size_t i) const noexcept;
    /// Right end of the determined part: b + K h for K knots.
    double frontier() const noexcept;
    /// g at the frontier (the seed value at b when there are no knots).
    double frontier_value() const noexcept;
    double seed_value(double x) const noexcept;

    double operator()(double x) const;

    /// Same knots with the straight-line extension through y at the next
    /// knot position. Requires y >= frontier_value().
    ReconstructedPotential with_extension(double y) const;
    ReconstructedPotential without_extension() const;
    /// Appends g(x_{K+1}) = y and clears the extension.
    ReconstructedPotential append_knot(double y) const;

    /// Limit as |x| -> infinity when the extended potential is bounded.
    std::optional<double> upper_limit() const;
    /// Largest x for which evaluation is defined (infinity with an extension).
    double defined_range() const noexcept;

private:
    double f0_;
    Seed seed_;
    double step_;
    bool cut_to_zero_;
    std::vector<double> knots_;
    std::optional<double> extension_;
};

double evaluate(const ReconstructedPotential& g, double x);
double inverse_on_half_axis(const ReconstructedPotential& g, double value);

// ---------------------------------------------------------------------------
// Type-erased read-only view used by the forward solver and by the
// coupling recipe, so both accept analytic shapes and reconstructions.
class PotentialProfile {
public:
    PotentialProfile(const PotentialShape& shape);               // NOLINT
    PotentialProfile(const ReconstructedPotential& potential);   // NOLINT
    PotentialProfile(std::function<double(double)> value, double minimum,
                     std::optional<double> upper_limit,
                     std::optional<double> discontinuity = std::nullopt);

    double operator()(double x) const { return value_(x < 0.0 ? -x : x); }
    double minimum() const noexcept { return minimum_; }
    std::optional<double> upper_limit() const noexcept { return upper_limit_; }
    std::optional<double> discontinuity() const noexcept { return discontinuity_; }

private:
    std::function<double(double)> value_;
    double minimum_;
    std::optional<double> upper_limit_;
    std::optional<double> discontinuity_;
};

/// The analytic shape for |x| <= x_a continued by a straight line of the
/// given slope (the perturbations used in the tail study).
PotentialProfile truncated_with_line(const PotentialShape& shape, double x_a, double slope);

// ---------------------------------------------------------------------------
// CSV serialization of (x, g(x)) samples with "# key = value" metadata.

struct ReconstructionTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<double> x;
    std::vector<double> g;
};

std::vector<std::pair<std::string, std::string>> reconstruction_metadata(
    const ReconstructedPotential& g);
void write_reconstruction_csv(std::ostream& out, const ReconstructedPotential& g,
                              std::span<const double> grid,
                              std::span<const std::pair<std::string, std::string>> extra = {});
ReconstructionTable read_reconstruction_csv(std::istream& in);

}  // namespace geoinv
