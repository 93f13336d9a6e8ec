#include "ptchaos/params.hpp"

#include <cmath>

namespace ptchaos {

void PhysicalParams::validate() const {
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    if (!(omega_m > 0.0)) throw InvalidParameter("omega_m must be > 0");
    if (gamma_m < 0.0) throw InvalidParameter("gamma_m must be >= 0");
    if (g0 < 0.0) throw InvalidParameter("g0 must be >= 0");
    if (tunneling < 0.0) throw InvalidParameter("J must be >= 0");
    if (drive.kind == DriveKind::Power && drive.value < 0.0)
        throw InvalidParameter("drive power must be >= 0");
    if (drive.kind == DriveKind::Amplitude && drive.value < 0.0)
        throw InvalidParameter("drive amplitude must be >= 0");
    if (!(omega_d() > 0.0)) throw InvalidParameter("omega_d = omega_c - delta_c must be > 0");
}

double drive_amplitude_from_power(double power_w, double gamma, double omega_d,
                                  double hbar) {
    if (power_w < 0.0) throw InvalidParameter("power must be >= 0");
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    if (!(omega_d > 0.0)) throw InvalidParameter("omega_d must be > 0");
    return std::sqrt(2.0 * power_w * gamma / (hbar * omega_d));
}

double power_from_drive_amplitude(double amplitude, double gamma, double omega_d,
                                  double hbar) {
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    if (!(omega_d > 0.0)) throw InvalidParameter("omega_d must be > 0");
    return hbar * omega_d * amplitude * amplitude / (2.0 * gamma);
}

ReducedParams reduce_params(const PhysicalParams& p) {
    p.validate();
    const double amp = p.drive.kind == DriveKind::Power
                           ? drive_amplitude_from_power(p.drive.value, p.gamma,
                                                        p.omega_d(), p.hbar)
                           : p.drive.value;
    ReducedParams r;
    r.omega_m = p.omega_m / p.gamma;
    r.gamma_m = p.gamma_m / p.gamma;
    r.g0 = p.g0 / p.gamma;
    r.tunneling = p.tunneling / p.gamma;
    r.delta_c = p.delta_c / p.gamma;
    r.kappa = p.kappa / p.gamma;
    r.omega_d_amp = amp / p.gamma;
    r.gamma = 1.0;
    return r;
}

PhysicalParams rescale_params(const ReducedParams& r, double gamma,
                              double omega_c, double hbar) {
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    PhysicalParams p;
    p.omega_c = omega_c;
    p.omega_m = r.omega_m * gamma;
    p.gamma = gamma;
    p.kappa = r.kappa * gamma;
    p.gamma_m = r.gamma_m * gamma;
    p.g0 = r.g0 * gamma;
    p.tunneling = r.tunneling * gamma;
    p.delta_c = r.delta_c * gamma;
    p.drive = DriveSpec::amplitude(r.omega_d_amp * gamma);
    p.hbar = hbar;
    return p;
}

}  // namespace ptchaos
