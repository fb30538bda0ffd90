#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace mccall {

// Bad input: invalid parameters, schema violations, unsupported mode.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside a solver. `kind` is a stable machine-readable tag
// (e.g. "ReservationOutOfSupport", "NoBracket", "NonUniqueRoot").
class SolverError : public std::runtime_error {
public:
    SolverError(std::string kind, const std::string& what,
                std::optional<double> z = std::nullopt)
        : std::runtime_error(what), kind_(std::move(kind)), z_(z) {}

    const std::string& kind() const noexcept { return kind_; }
    std::optional<double> z() const noexcept { return z_; }

    SolverError with_z(double z) const { return SolverError(kind_, what(), z); }

private:
    std::string kind_;
    std::optional<double> z_;
};

}  // namespace mccall
