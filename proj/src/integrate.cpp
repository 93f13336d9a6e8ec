#include "ptchaos/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace ptchaos {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI controller constants (classic dopri5 values).
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;   // strongest shrink per step
constexpr double kFacMax = 10.0;  // strongest growth per step

template <std::size_t N>
using Vec = std::array<double, N>;

struct BaseRhs {
    ReducedParams r;
    static constexpr std::size_t dim = 6;
    void operator()(const Vec<6>& y, Vec<6>& dy) const {
        SystemState s = SystemState::from_array(y);
        const SystemState d = vector_field(s, r);
        dy = d.to_array();
    }
};

struct AugmentedRhs {
    ReducedParams r;
    static constexpr std::size_t dim = 12;
    void operator()(const Vec<12>& y, Vec<12>& dy) const {
        SystemState s;
        s.x = y[0];
        s.p = y[1];
        s.a1_re = y[2];
        s.a1_im = y[3];
        s.a2_re = y[4];
        s.a2_im = y[5];
        const SystemState d = vector_field(s, r);
        dy[0] = d.x;
        dy[1] = d.p;
        dy[2] = d.a1_re;
        dy[3] = d.a1_im;
        dy[4] = d.a2_re;
        dy[5] = d.a2_im;
        const Mat6 m = jacobian(s, r);
        for (std::size_t i = 0; i < 6; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 6; ++j) acc += m[i][j] * y[6 + j];
            dy[6 + i] = acc;
        }
    }
};

template <std::size_t N>
bool all_finite(const Vec<N>& y) {
    for (double v : y) {
        if (!std::isfinite(v) || std::abs(v) > 1e150) return false;
    }
    return true;
}

/// Hairer-style starting step selection from the local derivative scales.
template <std::size_t N, class Rhs>
double initial_step(const Rhs& rhs, const Vec<N>& y, const Vec<N>& f0, double hmax,
                    double atol, double rtol, IntegratorStats& stats) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sk = atol + rtol * std::abs(y[i]);
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);

    Vec<N> y1, f1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * f0[i];
    rhs(y1, f1);
    ++stats.n_rhs;

    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sk = atol + rtol * std::abs(y[i]);
        der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;

    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                       : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, hmax});
}

/// Cubic Hermite interpolation on [t0, t0 + h].
template <std::size_t N>
Vec<N> hermite(const Vec<N>& y0, const Vec<N>& f0, const Vec<N>& y1, const Vec<N>& f1,
               double h, double theta) {
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + theta;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    return out;
}

SystemState state_from(const Vec<6>& y) { return SystemState::from_array(y); }
SystemState state_from(const Vec<12>& y) {
    SystemState s;
    s.x = y[0];
    s.p = y[1];
    s.a1_re = y[2];
    s.a1_im = y[3];
    s.a2_re = y[4];
    s.a2_im = y[5];
    return s;
}

void push_sample(Trajectory& traj, double t, const SystemState& s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
    traj.i1.push_back(s.i1());
    traj.i2.push_back(s.i2());
}

double tangent_intensity_shift(const Vec<12>& y) {
    // |a1 + da1|^2 - |a1|^2 for the current unit-scaled tangent.
    return 2.0 * (y[2] * y[6 + 2] + y[3] * y[6 + 3]) + y[6 + 2] * y[6 + 2] +
           y[6 + 3] * y[6 + 3];
}

/// Shared adaptive driver. For N == 12 the trailing six components carry
/// the tangent, renormalized to unit norm at every multiple of
/// cfg.renorm_interval with the log-magnitude increments recorded.
template <std::size_t N, class Rhs>
void drive(const Rhs& rhs, Vec<N> y, const IntegratorConfig& cfg, Trajectory& traj,
           TangentLog* tlog) {
    constexpr bool kTangent = (N == 12);
    const double atol = cfg.abs_tol;
    const double rtol = cfg.rel_tol;
    const double hmax =
        cfg.max_step > 0.0 ? std::min(cfg.max_step, cfg.t_end) : cfg.t_end;

    IntegratorStats& stats = traj.meta;

    double t = 0.0;
    Vec<N> f_now;
    rhs(y, f_now);
    ++stats.n_rhs;

    double log_scale = 0.0;
    auto emit = [&](double ts, const Vec<N>& ys) {
        push_sample(traj, ts, state_from(ys));
        if constexpr (kTangent) {
            tlog->sample_times.push_back(ts);
            tlog->d_i1.push_back(tangent_intensity_shift(ys));
            tlog->log_scale.push_back(log_scale);
        }
    };
    emit(0.0, y);

    std::size_t next_sample = 1;
    std::uint64_t next_renorm = 1;

    double h = initial_step<N>(rhs, y, f_now, hmax, atol, rtol, stats);
    double facold = 1e-4;
    bool last_rejected = false;
    bool last_err_nonfinite = false;

    Vec<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;

    while (t < cfg.t_end) {
        if (!(h > 1e-14 * std::max(t, 1.0))) {
            const auto kind = last_err_nonfinite ? IntegrationError::Kind::Divergence
                                                 : IntegrationError::Kind::StepUnderflow;
            throw IntegrationError(
                kind, t,
                last_err_nonfinite
                    ? "non-finite stage values at t = " + std::to_string(t)
                    : "step size underflow at t = " + std::to_string(t));
        }

        // Clip to the nearest boundary: renormalization grid point or t_end.
        double target = cfg.t_end;
        bool renorm_hit = false;
        if constexpr (kTangent) {
            const double b = static_cast<double>(next_renorm) * cfg.renorm_interval;
            if (b < target) {
                target = b;
                renorm_hit = true;
            } else if (b == target) {
                renorm_hit = true;
            }
        }
        double ha = h;
        bool clipped = false;
        bool hit_target = false;
        if (t + ha >= target) {
            ha = target - t;
            clipped = (ha < h);
            hit_target = true;
        }

        // Stages 2..7 (FSAL: stage 7 is the derivative at the new point).
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + ha * a21 * f_now[i];
        rhs(ytmp, k2);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + ha * (a31 * f_now[i] + a32 * k2[i]);
        rhs(ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + ha * (a41 * f_now[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] +
                      ha * (a51 * f_now[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + ha * (a61 * f_now[i] + a62 * k2[i] + a63 * k3[i] +
                                   a64 * k4[i] + a65 * k5[i]);
        rhs(ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + ha * (b1 * f_now[i] + b3 * k3[i] + b4 * k4[i] +
                                   b5 * k5[i] + b6 * k6[i]);
        rhs(ynew, k7);
        stats.n_rhs += 6;

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = ha * (e1 * f_now[i] + e3 * k3[i] + e4 * k4[i] +
                                    e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sk) * (ei / sk);
        }
        err = std::sqrt(err / static_cast<double>(N));

        if (!std::isfinite(err)) {
            ++stats.n_rejected;
            last_err_nonfinite = true;
            last_rejected = true;
            h = ha * kFacMin;
            continue;
        }
        last_err_nonfinite = false;

        const double fac11 = std::pow(err, kExpo1);
        if (err <= 1.0) {
            ++stats.n_accepted;
            const double t_new = hit_target ? target : t + ha;

            // Emit every sample instant inside (t, t_new].
            const double stol = 1e-9 * cfg.sample_dt;
            while (true) {
                const double ts = static_cast<double>(next_sample) * cfg.sample_dt;
                if (ts > t_new + stol || ts > cfg.t_end + stol) break;
                double theta = (ts - t) / ha;
                theta = std::clamp(theta, 0.0, 1.0);
                emit(ts, hermite<N>(y, f_now, ynew, k7, ha, theta));
                ++next_sample;
            }

            y = ynew;
            f_now = k7;  // FSAL
            t = t_new;

            if (!all_finite(y)) {
                throw IntegrationError(IntegrationError::Kind::Divergence, t,
                                       "state diverged at t = " + std::to_string(t));
            }

            if constexpr (kTangent) {
                if (renorm_hit && hit_target) {
                    double nrm = 0.0;
                    for (std::size_t i = 6; i < 12; ++i) nrm += y[i] * y[i];
                    nrm = std::sqrt(nrm);
                    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
                        throw IntegrationError(
                            IntegrationError::Kind::TangentUnderflow, t,
                            "tangent norm collapsed at t = " + std::to_string(t));
                    }
                    tlog->renorm_times.push_back(t);
                    tlog->increments.push_back(std::log(nrm));
                    log_scale += std::log(nrm);
                    // The tangent block of the derivative is linear in the
                    // tangent, so rescale it instead of re-evaluating.
                    for (std::size_t i = 6; i < 12; ++i) {
                        y[i] /= nrm;
                        f_now[i] /= nrm;
                    }
                    ++next_renorm;
                }
            }

            if (clipped) {
                // Boundary-shortened step: keep the controller memory intact.
                last_rejected = false;
                continue;
            }
            double fac = fac11 / std::pow(facold, kBeta);
            fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
            double hnew = ha / fac;
            if (last_rejected) hnew = std::min(hnew, ha);
            facold = std::max(err, 1e-4);
            h = std::min(hnew, hmax);
            last_rejected = false;
        } else {
            ++stats.n_rejected;
            h = ha / std::min(1.0 / kFacMin, fac11 / kSafe);
            last_rejected = true;
        }
    }
}

}  // namespace

void IntegratorConfig::validate() const {
    auto bad = [](const std::string& what) { throw InvalidParameter(what); };
    if (!(rel_tol >= 0.0) || !std::isfinite(rel_tol)) bad("rel_tol must be >= 0");
    if (!(abs_tol >= 0.0) || !std::isfinite(abs_tol)) bad("abs_tol must be >= 0");
    if (rel_tol <= 0.0 && abs_tol <= 0.0) bad("tolerances cannot both vanish");
    if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) bad("sample_dt must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) bad("t_end must be > 0");
    if (!(renorm_interval > 0.0) || !std::isfinite(renorm_interval))
        bad("renorm_interval must be > 0");
    if (!std::isfinite(max_step) || max_step < 0.0)
        bad("max_step must be finite and >= 0");
}

IntegratorConfig IntegratorConfig::defaults_for(const ReducedParams& r) {
    IntegratorConfig cfg;
    const double fastest = std::max(
        {r.omega_m, std::abs(r.delta_c), std::abs(r.tunneling), 1.0});
    cfg.sample_dt = kPi / (4.0 * fastest);
    cfg.t_end = 20.0 * kPi;  // 10 us at gamma = 2*pi MHz
    return cfg;
}

Trajectory integrate(const SystemState& s0, const ReducedParams& r,
                     const IntegratorConfig& cfg) {
    cfg.validate();
    if (!s0.finite()) throw InvalidParameter("initial state must be finite");
    Trajectory traj;
    traj.params = r;
    traj.sample_dt = cfg.sample_dt;
    BaseRhs rhs{r};
    drive<6>(rhs, s0.to_array(), cfg, traj, nullptr);
    return traj;
}

std::pair<Trajectory, TangentLog> integrate_with_tangent(const SystemState& s0,
                                                         const TangentVector& d0,
                                                         const ReducedParams& r,
                                                         const IntegratorConfig& cfg) {
    cfg.validate();
    if (!s0.finite()) throw InvalidParameter("initial state must be finite");
    const double n0 = norm(d0);
    if (!(n0 > 0.0) || !std::isfinite(n0))
        throw InvalidParameter("initial tangent must have positive finite norm");

    Vec<12> y;
    const auto base = s0.to_array();
    for (std::size_t i = 0; i < 6; ++i) {
        y[i] = base[i];
        y[6 + i] = d0[i] / n0;
    }

    Trajectory traj;
    traj.params = r;
    traj.sample_dt = cfg.sample_dt;
    TangentLog tlog;
    AugmentedRhs rhs{r};
    drive<12>(rhs, y, cfg, traj, &tlog);
    return {std::move(traj), std::move(tlog)};
}

Trajectory resample(const Trajectory& traj, double t_a, double t_b, std::size_t n) {
    if (traj.size() < 2) throw RangeError("trajectory has fewer than two samples");
    if (n < 2) throw InvalidParameter("resample needs at least two points");
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    const double dt = traj.sample_dt;
    const double slack = 1e-9 * dt;
    if (!(t_a < t_b)) throw RangeError("window must satisfy t_a < t_b");
    if (t_a < t0 - slack || t_b > t1 + slack)
        throw RangeError("window outside the stored time range");

    Trajectory out;
    out.params = traj.params;
    out.meta = traj.meta;
    out.sample_dt = (t_b - t_a) / static_cast<double>(n - 1);

    std::size_t cached_j = traj.size();  // sentinel: no cached derivatives
    std::array<double, 6> f_lo{}, f_hi{};

    for (std::size_t k = 0; k < n; ++k) {
        double q = (k == n - 1) ? t_b
                                : t_a + static_cast<double>(k) * out.sample_dt;
        q = std::clamp(q, t0, t1);

        // Copy stored samples exactly when the query lands on the grid.
        const double pos = (q - t0) / dt;
        const auto jr = static_cast<std::size_t>(
            std::clamp(std::llround(pos), 0LL,
                       static_cast<long long>(traj.size() - 1)));
        if (std::abs(q - traj.times[jr]) <= slack) {
            push_sample(out, traj.times[jr], traj.states[jr]);
            continue;
        }

        auto j = static_cast<std::size_t>(std::clamp(
            static_cast<long long>(std::floor(pos)), 0LL,
            static_cast<long long>(traj.size() - 2)));
        if (j != cached_j) {
            const SystemState dlo = vector_field(traj.states[j], traj.params);
            const SystemState dhi = vector_field(traj.states[j + 1], traj.params);
            f_lo = dlo.to_array();
            f_hi = dhi.to_array();
            cached_j = j;
        }
        const double h = traj.times[j + 1] - traj.times[j];
        const double theta = std::clamp((q - traj.times[j]) / h, 0.0, 1.0);
        const auto yi = hermite<6>(traj.states[j].to_array(), f_lo,
                                   traj.states[j + 1].to_array(), f_hi, h, theta);
        push_sample(out, q, SystemState::from_array(yi));
    }
    return out;
}

}  // namespace ptchaos
