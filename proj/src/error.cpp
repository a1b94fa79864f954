#include "geoinv/error.hpp"

namespace geoinv {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::extension_required: return "extension required";
        case ErrorCode::out_of_range: return "out of range";
        case ErrorCode::monotonicity_violation: return "monotonicity violation";
        case ErrorCode::no_bound_state: return "no bound state";
        case ErrorCode::state_not_bound: return "state not bound";
        case ErrorCode::flat_region: return "flat region, bound undefined";
        case ErrorCode::below_critical_coupling: return "below critical coupling";
        case ErrorCode::level_below_minimum: return "level at or below potential minimum";
        case ErrorCode::bracket_failure: return "bracket failure";
        case ErrorCode::bessel_failure: return "bessel evaluation failure";
        case ErrorCode::inconsistent_f0: return "f0 inconsistent with trajectory";
        case ErrorCode::not_power_like: return "not power-like near origin";
        case ErrorCode::inconsistent_extension:
            return "trajectory inconsistent with monotone extension";
        case ErrorCode::grid_mismatch: return "grid mismatch";
    }
    return "unknown error";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                        : std::string(to_string(code)) + ": " + detail),
      code_(code) {}

}  // namespace geoinv
