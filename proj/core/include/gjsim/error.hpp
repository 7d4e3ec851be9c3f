#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gjsim {

/// Invalid or missing configuration entry. `key()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Self-consistency iteration failed for every seed.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<std::vector<double>> histories = {})
        : std::runtime_error(what), histories_(std::move(histories)) {}
    /// Residual history of every seed that was tried, in seed order.
    const std::vector<std::vector<double>>& residual_histories() const noexcept { return histories_; }

private:
    std::vector<std::vector<double>> histories_;
};

/// Numerical precondition violated (non-uniform sampling, budget exceeded, ...).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gjsim
