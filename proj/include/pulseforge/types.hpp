#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pf {

using Real = double;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

inline constexpr Real kPi = 3.14159265358979323846;
inline constexpr Real kTwoPi = 2.0 * kPi;

/// Angular frequency (rad/ns) for an ordinary frequency in GHz. All internal
/// quantities are angular frequencies with hbar = 1; GHz appears only at
/// user-facing interfaces.
inline Real ghz_to_rad(Real f_ghz) { return kTwoPi * f_ghz; }
inline Real rad_to_ghz(Real w_rad) { return w_rad / kTwoPi; }

/// Invalid user input or violated precondition. The CLI maps this to exit 2.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure (non-convergence, tolerance breach). CLI exit 3.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pf
