#pragma once

// Semiclassical equations of motion of the PT-symmetric optomechanical
// dimer and their analytic Jacobian. State ordering everywhere is
// (x, p, Re a1, Im a1, Re a2, Im a2).

#include <array>
#include <cmath>

#include "ptchaos/params.hpp"

namespace ptchaos {

/// The six real dynamical variables.
struct SystemState {
    double x = 0.0;      ///< dimensionless mechanical displacement
    double p = 0.0;      ///< dimensionless mechanical momentum
    double a1_re = 0.0;  ///< passive-cavity amplitude, real part
    double a1_im = 0.0;
    double a2_re = 0.0;  ///< active-cavity amplitude, real part
    double a2_im = 0.0;

    double i1() const { return a1_re * a1_re + a1_im * a1_im; }
    double i2() const { return a2_re * a2_re + a2_im * a2_im; }

    std::array<double, 6> to_array() const { return {x, p, a1_re, a1_im, a2_re, a2_im}; }
    static SystemState from_array(const std::array<double, 6>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
    bool finite() const {
        for (double v : to_array())
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Perturbation vector, ordered identically to SystemState.
using TangentVector = std::array<double, 6>;

/// Row-major 6x6 real matrix.
using Mat6 = std::array<std::array<double, 6>, 6>;

/// Time derivative of the state, per unit 1/gamma time.
SystemState vector_field(const SystemState& s, const ReducedParams& r);

/// Analytic Jacobian of vector_field at s; governs the tangent flow
/// d(delta)/dt = M delta and the divergence of nearby trajectories.
Mat6 jacobian(const SystemState& s, const ReducedParams& r);

/// y = M v.
TangentVector apply(const Mat6& m, const TangentVector& v);

double norm(const TangentVector& v);

}  // namespace ptchaos
