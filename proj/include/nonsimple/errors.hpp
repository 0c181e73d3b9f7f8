#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace nonsimple {

// J at or below this is treated as a collapsed metric.
inline constexpr double kJFloor = 1e-12;

class DegenerateMetric : public std::runtime_error {
public:
    explicit DegenerateMetric(double J, std::optional<std::size_t> node = std::nullopt)
        : std::runtime_error(describe(J, node)), J_(J), node_(node) {}

    double J() const noexcept { return J_; }
    std::optional<std::size_t> node() const noexcept { return node_; }

private:
    static std::string describe(double J, std::optional<std::size_t> node) {
        std::string msg = "degenerate metric: J = " + std::to_string(J);
        if (node)
            msg += " at node " + std::to_string(*node);
        return msg;
    }

    double J_;
    std::optional<std::size_t> node_;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class InfeasibleStart : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the min-J estimator cannot be applied (growth exponent too small
/// or no coercivity constant available).
class Inapplicable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BisectionFailure : public std::runtime_error {
public:
    BisectionFailure(double target, double h_low_t, double h_high_t)
        : std::runtime_error("cone integral does not bracket C_star = " + std::to_string(target) +
                             " (h(t_lo) = " + std::to_string(h_low_t) +
                             ", h(t_hi) = " + std::to_string(h_high_t) + ")"),
          target_(target), h_lo_(h_low_t), h_hi_(h_high_t) {}

    double target() const noexcept { return target_; }
    double h_at_low() const noexcept { return h_lo_; }
    double h_at_high() const noexcept { return h_hi_; }

private:
    double target_, h_lo_, h_hi_;
};

} // namespace nonsimple
