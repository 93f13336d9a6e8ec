#include "ptchaos/linear.hpp"

#include <algorithm>
#include <cmath>

namespace ptchaos {

const char* to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::PT_SYMMETRIC: return "PT_SYMMETRIC";
        case PhaseLabel::PT_BROKEN: return "PT_BROKEN";
        case PhaseLabel::PASSIVE_PASSIVE: return "PASSIVE_PASSIVE";
        case PhaseLabel::EXCEPTIONAL_POINT: return "EXCEPTIONAL_POINT";
    }
    return "?";
}

std::array<std::complex<double>, 2> linear_cavity_eigenvalues(const ReducedParams& r) {
    const std::complex<double> base(0.25 * (r.kappa - r.gamma), -r.delta_c);
    const double disc = 0.0625 * (r.gamma + r.kappa) * (r.gamma + r.kappa)
                        - r.tunneling * r.tunneling;
    const std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
    std::array<std::complex<double>, 2> ev{base + root, base - root};
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

double exceptional_point_coupling(double gamma, double kappa) {
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    return 0.25 * (gamma + kappa);
}

std::optional<double> normal_mode_splitting(double J, double gamma, double kappa) {
    const double lhs = 16.0 * J * J;
    const double rhs = (gamma + kappa) * (gamma + kappa);
    // Exact coalescence: a resolved splitting of zero width.
    if (std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs)) return 0.0;
    if (lhs <= rhs) return std::nullopt;
    return 0.5 * std::sqrt(lhs - rhs);
}

PhaseLabel classify_phase(double J, double gamma, double kappa, double tol) {
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    if (tol < 0.0) throw InvalidParameter("tol must be >= 0");
    if (kappa < 0.0) return PhaseLabel::PASSIVE_PASSIVE;
    const double ep = exceptional_point_coupling(gamma, kappa);
    if (std::abs(J - ep) <= tol) return PhaseLabel::EXCEPTIONAL_POINT;
    return J > ep ? PhaseLabel::PT_SYMMETRIC : PhaseLabel::PT_BROKEN;
}

PhaseLabel classify_phase(double J, double gamma, double kappa) {
    return classify_phase(J, gamma, kappa, 1e-9 * gamma);
}

double linear_max_growth_rate(const ReducedParams& r) {
    // Mechanical block [[0, om], [-om, -gm/2]]: eigenvalues
    // -gm/4 +- sqrt(gm^2/16 - om^2).
    const double half_tr = -r.gamma_m / 4.0;
    const double disc = r.gamma_m * r.gamma_m / 16.0 - r.omega_m * r.omega_m;
    const double mech = disc >= 0.0 ? half_tr + std::sqrt(disc) : half_tr;
    const auto optical = linear_cavity_eigenvalues(r);
    return std::max(mech, optical[0].real());
}

}  // namespace ptchaos
