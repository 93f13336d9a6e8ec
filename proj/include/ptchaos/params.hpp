#pragma once

// Physical and reduced parameter sets for the PT-symmetric optomechanical
// dimer: a driven passive cavity with a mechanical mode, tunnel-coupled to
// a second cavity that provides gain (kappa > 0) or extra loss (kappa < 0).
//
// All dynamics run in units of the passive-cavity decay rate gamma; the
// time unit is 1/gamma. Dimensionful parameters live in PhysicalParams
// (angular frequencies, rad/s) and are nondimensionalized once, up front.

#include <stdexcept>
#include <string>

namespace ptchaos {

inline constexpr const char* kVersion = "0.1.0";

/// Reduced Planck constant, J*s (CODATA 2018).
inline constexpr double kHBar = 1.054571817e-34;

/// Default reporting decay rate: gamma/2pi = 1 MHz, in rad/s.
inline constexpr double kDefaultGamma = 2.0 * 3.14159265358979323846 * 1.0e6;

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// How the laser drive is specified: exactly one of the two is
/// authoritative, the other is derived via the power/amplitude relation.
enum class DriveKind { Power, Amplitude };

struct DriveSpec {
    DriveKind kind = DriveKind::Amplitude;
    double value = 0.0;  // W for Power, rad/s for Amplitude

    static DriveSpec power(double watts) { return {DriveKind::Power, watts}; }
    static DriveSpec amplitude(double rad_per_s) { return {DriveKind::Amplitude, rad_per_s}; }
};

/// Dimensionful experimental parameters. Angular frequencies and rates in
/// rad/s. omega_c is an angular frequency; callers converting from an
/// ordinary (Hz-style) cavity frequency must multiply by 2pi themselves.
struct PhysicalParams {
    double omega_c = 1.9e14;        ///< optical resonance (rad/s)
    double omega_m = 0.0;           ///< mechanical frequency (rad/s)
    double gamma = kDefaultGamma;   ///< passive-cavity decay rate (rad/s), > 0
    double kappa = 0.0;             ///< second-cavity gain rate (rad/s); < 0 means a lossy passive cavity
    double gamma_m = 0.0;           ///< mechanical damping rate (rad/s)
    double g0 = 0.0;                ///< single-photon optomechanical coupling (rad/s)
    double tunneling = 0.0;         ///< inter-cavity tunneling rate J (rad/s), >= 0
    double delta_c = 0.0;           ///< drive detuning omega_c - omega_d (rad/s)
    DriveSpec drive{};
    double hbar = kHBar;

    /// Drive laser frequency implied by the detuning.
    double omega_d() const { return omega_c - delta_c; }

    /// Throws InvalidParameter on any violated constraint.
    void validate() const;
};

/// Dimensionless parameters in units of gamma; time unit 1/gamma.
/// `gamma` is normally exactly 1 after reduction; it is kept as a field so
/// degenerate lossless limits (gamma = 0) remain expressible in tests and
/// closed-form checks.
struct ReducedParams {
    double omega_m = 0.0;
    double gamma_m = 0.0;
    double g0 = 0.0;
    double tunneling = 0.0;  ///< J / gamma
    double delta_c = 0.0;
    double kappa = 0.0;
    double omega_d_amp = 0.0;  ///< drive amplitude Omega_d / gamma, >= 0
    double gamma = 1.0;
};

/// |Omega_d| = sqrt(2 P gamma / (hbar omega_d)), all in SI.
double drive_amplitude_from_power(double power_w, double gamma, double omega_d,
                                  double hbar = kHBar);

/// Inverse of drive_amplitude_from_power: P = hbar omega_d Omega_d^2 / (2 gamma).
double power_from_drive_amplitude(double amplitude, double gamma, double omega_d,
                                  double hbar = kHBar);

/// Nondimensionalize: every rate divided by gamma, drive converted to an
/// amplitude first if given as power.
ReducedParams reduce_params(const PhysicalParams& p);

/// Rescale a reduced set back to physical units (drive as amplitude).
PhysicalParams rescale_params(const ReducedParams& r, double gamma,
                              double omega_c = 1.9e14, double hbar = kHBar);

/// Time conversions between gamma-units and microseconds.
inline double gamma_time_to_us(double t_gamma, double gamma = kDefaultGamma) {
    return t_gamma / gamma * 1.0e6;
}
inline double us_to_gamma_time(double t_us, double gamma = kDefaultGamma) {
    return t_us * gamma * 1.0e-6;
}
/// Rate conversion: lambda in gamma-units -> 1/us.
inline double rate_gamma_to_per_us(double lam_gamma, double gamma = kDefaultGamma) {
    return lam_gamma * gamma * 1.0e-6;
}

}  // namespace ptchaos
