#pragma once

#include <stdexcept>
#include <string>

namespace geoinv {

enum class ErrorCode {
    invalid_argument,
    extension_required,
    out_of_range,
    monotonicity_violation,
    no_bound_state,
    state_not_bound,
    flat_region,
    below_critical_coupling,
    level_below_minimum,
    bracket_failure,
    bessel_failure,
    inconsistent_f0,
    not_power_like,
    inconsistent_extension,
    grid_mismatch,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (and the
// CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace geoinv
