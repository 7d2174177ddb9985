#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

// Unit system used throughout: lengths in μm, wave numbers / momenta in
// rad/μm (ħ = 1, so ħ/μm and rad/μm coincide), energies in eV.
namespace epr {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHbarC = 0.19732697;          // eV·μm
inline constexpr double kElectronRestEnergy = 511.0e3; // eV
inline constexpr double kAlpha = 1.0 / 137.036;
// Ratio FWHM / σ of a Gaussian.
inline const double kFwhmPerSigma = 2.0 * 1.1774100225154747; // sqrt(8 ln 2)

// Input that violates a documented precondition (CLI exit code 2).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical procedure that failed to reach its tolerance (CLI exit code 3).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace epr
