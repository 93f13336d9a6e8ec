#pragma once

// Closed-form linear analysis of the coupled-cavity subsystem: supermode
// eigenvalues, the exceptional point, normal-mode splitting, and the
// phase classification used by the phase diagram.

#include <array>
#include <complex>
#include <optional>

#include "ptchaos/params.hpp"

namespace ptchaos {

enum class PhaseLabel {
    PT_SYMMETRIC,      ///< J above the EP: equal damping, split frequencies
    PT_BROKEN,         ///< J below the EP: one growing / one decaying supermode
    PASSIVE_PASSIVE,   ///< kappa < 0: both cavities lossy
    EXCEPTIONAL_POINT  ///< |J - (gamma+kappa)/4| within tolerance
};

const char* to_string(PhaseLabel label);

/// Eigenvalues of the 2x2 coupled-cavity coefficient matrix
/// [[-i dc - g/2, iJ], [iJ, -i dc + k/2]]:
///   lambda_pm = -i dc + (k - g)/4 +- sqrt(((g+k)/4)^2 - J^2).
/// Sorted by real part descending, ties broken by imaginary part ascending.
std::array<std::complex<double>, 2> linear_cavity_eigenvalues(const ReducedParams& r);

/// The coupling at which the supermodes coalesce: J_EP = (gamma + kappa)/4.
double exceptional_point_coupling(double gamma, double kappa);

/// Supermode frequency splitting sqrt(16 J^2 - (gamma+kappa)^2)/2 when the
/// splitting is resolved (16 J^2 > (gamma+kappa)^2), 0 at the EP itself,
/// and nullopt on the PT-broken side.
std::optional<double> normal_mode_splitting(double J, double gamma, double kappa);

/// Pure function of (J, gamma, kappa): kappa < 0 is passive-passive;
/// otherwise the sign of J - (gamma+kappa)/4 decides, with |.| <= tol
/// labeled as the exceptional point.
PhaseLabel classify_phase(double J, double gamma, double kappa, double tol);
PhaseLabel classify_phase(double J, double gamma, double kappa);  // tol = 1e-9 * gamma

/// Largest real part over the block eigenvalues of the g0 = 0 linear
/// system (mechanical 2x2 plus coupled-cavity block); the analytic oracle
/// for Lyapunov estimates on linear systems.
double linear_max_growth_rate(const ReducedParams& r);

}  // namespace ptchaos
