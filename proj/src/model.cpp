#include "ptchaos/model.hpp"

namespace ptchaos {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

SystemState vector_field(const SystemState& s, const ReducedParams& r) {
    const double i1 = s.i1();
    const double gx = kSqrt2 * r.g0 * s.x;  // optomechanical detuning shift
    SystemState d;
    d.x = r.omega_m * s.p;
    d.p = -(r.gamma_m / 2.0) * s.p - r.omega_m * s.x + kSqrt2 * r.g0 * i1;
    // a1' = (-i dc - g/2) a1 + i J a2 + i sqrt(2) g0 x a1 + Omega_d
    d.a1_re = -(r.gamma / 2.0) * s.a1_re + r.delta_c * s.a1_im - r.tunneling * s.a2_im
              - gx * s.a1_im + r.omega_d_amp;
    d.a1_im = -r.delta_c * s.a1_re - (r.gamma / 2.0) * s.a1_im + r.tunneling * s.a2_re
              + gx * s.a1_re;
    // a2' = (-i dc + k/2) a2 + i J a1
    d.a2_re = (r.kappa / 2.0) * s.a2_re + r.delta_c * s.a2_im - r.tunneling * s.a1_im;
    d.a2_im = -r.delta_c * s.a2_re + (r.kappa / 2.0) * s.a2_im + r.tunneling * s.a1_re;
    return d;
}

Mat6 jacobian(const SystemState& s, const ReducedParams& r) {
    const double g = kSqrt2 * r.g0;
    const double gx = g * s.x;
    Mat6 m{};
    m[0] = {0.0, r.omega_m, 0.0, 0.0, 0.0, 0.0};
    m[1] = {-r.omega_m, -r.gamma_m / 2.0, 2.0 * g * s.a1_re, 2.0 * g * s.a1_im, 0.0, 0.0};
    m[2] = {-g * s.a1_im, 0.0, -r.gamma / 2.0, r.delta_c - gx, 0.0, -r.tunneling};
    m[3] = {g * s.a1_re, 0.0, -r.delta_c + gx, -r.gamma / 2.0, r.tunneling, 0.0};
    m[4] = {0.0, 0.0, 0.0, -r.tunneling, r.kappa / 2.0, r.delta_c};
    m[5] = {0.0, 0.0, r.tunneling, 0.0, -r.delta_c, r.kappa / 2.0};
    return m;
}

TangentVector apply(const Mat6& m, const TangentVector& v) {
    TangentVector out{};
    for (int i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 6; ++j) acc += m[i][j] * v[j];
        out[i] = acc;
    }
    return out;
}

double norm(const TangentVector& v) {
    double acc = 0.0;
    for (double c : v) acc += c * c;
    return std::sqrt(acc);
}

}  // namespace ptchaos
