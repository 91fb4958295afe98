#pragma once

#include <stdexcept>
#include <string>

namespace rfrecon {

// One categorized error type; the CLI maps Kind to distinct exit codes.
struct Error : std::runtime_error {
    enum class Kind {
        config,
        invalid_input,
        incomplete_input,
        infeasible_placement,
        io_corrupt_header,
        io_truncated,
        io_version_mismatch,
        io,
        divergence,
    };

    Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

inline Error config_error(const std::string& m) { return {Error::Kind::config, m}; }
inline Error invalid_input(const std::string& m) { return {Error::Kind::invalid_input, m}; }
inline Error incomplete_input(const std::string& m) { return {Error::Kind::incomplete_input, m}; }
inline Error infeasible_placement(const std::string& m) { return {Error::Kind::infeasible_placement, m}; }

}  // namespace rfrecon
