#pragma once

#include <stdexcept>
#include <string>

namespace curverec {

enum class Errc {
    parse_error,
    io_error,
    index_error,
    domain_error,
    length_mismatch,
    empty_field,
    missing_color,
    too_few_points,
    degenerate,
    singular_fit,
    ratio_out_of_range,
    layout_mismatch,
    grid_too_large,
    nonfinite_evaluation,
    no_votes,
    all_failed,
    empty_locus,
    unsupported_family,
    config_error,
};

/// All library failures surface as this exception; code() tells callers
/// (and the C API) which condition was hit.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace curverec
