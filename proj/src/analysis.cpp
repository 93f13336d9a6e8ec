#include "ptchaos/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>

#include "ptchaos/fft.hpp"
#include "ptchaos/linear.hpp"

namespace ptchaos {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;

double taper_value(WindowFn w, std::size_t j, std::size_t n) {
    switch (w) {
        case WindowFn::Hann:
            return 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(j) /
                                         static_cast<double>(n - 1)));
        case WindowFn::Rectangular:
            return 1.0;
    }
    return 1.0;
}

/// Snap a window edge down to the tangent renormalization grid.
std::int64_t grid_floor(double t, double dt) {
    return static_cast<std::int64_t>(std::floor(t / dt + 1e-9));
}

struct TangentEstimates {
    LyapunovResult result;
    bool slope_ok = false;
};

TangentEstimates estimate_from_tangent(const SystemState& s0, const TangentVector& d0,
                                       const ReducedParams& r,
                                       const IntegratorConfig& cfg, double t_a,
                                       double t_b) {
    if (!(t_a >= 0.0) || !(t_b > t_a))
        throw RangeError("lyapunov window must satisfy 0 <= t_a < t_b");
    if (t_b > cfg.t_end * (1.0 + 1e-12))
        throw RangeError("lyapunov window exceeds the integration horizon");

    const auto [traj, tlog] = integrate_with_tangent(s0, d0, r, cfg);

    const double ren = cfg.renorm_interval;
    const std::int64_t ja = grid_floor(t_a, ren);
    const std::int64_t jb = grid_floor(t_b, ren);
    if (jb <= ja)
        throw InvalidParameter("lyapunov window shorter than the renorm interval");
    const double ta_eff = static_cast<double>(ja) * ren;
    const double tb_eff = static_cast<double>(jb) * ren;

    TangentEstimates out;
    LyapunovResult& res = out.result;
    res.window_t_a = ta_eff;
    res.window_t_b = tb_eff;
    res.stats = traj.meta;

    // Increment i lives at renorm boundary (i+1)*ren; the window covers
    // boundaries ja+1 .. jb.
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < tlog.increments.size(); ++i) {
        const auto bi = static_cast<std::int64_t>(
            std::llround(tlog.renorm_times[i] / ren));
        if (bi > ja && bi <= jb) {
            sum += tlog.increments[i];
            ++count;
        }
    }
    if (count == 0)
        throw InvalidParameter("no renormalization increments inside the window");
    res.lambda_benettin = sum / (tb_eff - ta_eff);
    res.n_increments = count;

    // Least-squares line through (t, log_scale + ln|dI1|) on the samples
    // inside the snapped window.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<double> xs, ys;
    const double tol = 1e-9 * cfg.sample_dt;
    for (std::size_t k = 0; k < tlog.sample_times.size(); ++k) {
        const double ts = tlog.sample_times[k];
        if (ts < ta_eff - tol || ts > tb_eff + tol) continue;
        const double mag = std::abs(tlog.d_i1[k]);
        if (!(mag > 0.0) || !std::isfinite(mag)) continue;
        const double L = tlog.log_scale[k] + std::log(mag);
        if (!std::isfinite(L)) continue;
        xs.push_back(ts);
        ys.push_back(L);
    }
    res.n_fit_points = xs.size();
    if (xs.size() >= 2) {
        const auto n = static_cast<double>(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sx += xs[k];
            sy += ys[k];
            sxx += xs[k] * xs[k];
            sxy += xs[k] * ys[k];
        }
        const double det = n * sxx - sx * sx;
        if (det > 0.0) {
            const double slope = (n * sxy - sx * sy) / det;
            const double intercept = (sy - slope * sx) / n;
            double ss = 0.0;
            for (std::size_t k = 0; k < xs.size(); ++k) {
                const double resid = ys[k] - (intercept + slope * xs[k]);
                ss += resid * resid;
            }
            res.lambda_slope_dI1 = slope;
            res.fit_residual = std::sqrt(ss / n);
            out.slope_ok = true;
        }
    }
    if (!out.slope_ok) {
        res.lambda_slope_dI1 = std::numeric_limits<double>::quiet_NaN();
        res.fit_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace

std::string to_string(WindowFn w) {
    switch (w) {
        case WindowFn::Hann: return "hann";
        case WindowFn::Rectangular: return "rectangular";
    }
    return "?";
}

std::string to_string(FrequencyUnit u) {
    switch (u) {
        case FrequencyUnit::Gamma: return "gamma";
        case FrequencyUnit::OmegaM: return "omega_m";
    }
    return "?";
}

SpectrumResult power_spectrum(const std::vector<double>& series, double dt,
                              WindowFn window_fn) {
    const std::size_t n = series.size();
    if (n < 64) throw InvalidParameter("power_spectrum needs at least 64 samples");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidParameter("sample interval must be positive and finite");

    double mean = 0.0;
    for (double v : series) {
        if (!std::isfinite(v)) throw InvalidParameter("series contains non-finite values");
        mean += v;
    }
    mean /= static_cast<double>(n);

    std::vector<std::complex<double>> buf(n);
    for (std::size_t j = 0; j < n; ++j)
        buf[j] = {(series[j] - mean) * taper_value(window_fn, j, n), 0.0};
    fft::transform(buf, false);

    SpectrumResult spec;
    spec.window_fn = window_fn;
    spec.n_samples = n;
    spec.resolution_bandwidth = kTwoPi / (static_cast<double>(n) * dt);

    const std::size_t n_bins = n / 2 + 1;
    spec.frequencies.resize(n_bins);
    spec.power.resize(n_bins);
    spec.log_power.resize(n_bins);
    const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    for (std::size_t k = 0; k < n_bins; ++k) {
        spec.frequencies[k] = spec.resolution_bandwidth * static_cast<double>(k);
        double p = std::norm(buf[k]) * inv_n2;
        const bool nyquist = (n % 2 == 0) && (k == n / 2);
        if (k != 0 && !nyquist) p *= 2.0;  // fold the negative frequencies
        spec.power[k] = p;
        spec.log_power[k] = std::log(p);
    }
    spec.dc_power = spec.power[0];
    return spec;
}

void convert_frequencies(SpectrumResult& spec, FrequencyUnit unit, double omega_m) {
    if (unit == spec.unit) return;
    if (unit == FrequencyUnit::OmegaM) {
        if (!(omega_m > 0.0)) throw InvalidParameter("omega_m must be > 0");
        for (double& f : spec.frequencies) f /= omega_m;
        spec.resolution_bandwidth /= omega_m;
    } else {
        for (double& f : spec.frequencies) f *= omega_m;
        spec.resolution_bandwidth *= omega_m;
    }
    spec.unit = unit;
}

double spectral_flatness(const SpectrumResult& spec, double band_lo, double band_hi) {
    if (!(band_lo < band_hi)) throw RangeError("flatness band must satisfy lo < hi");
    if (band_hi > spec.frequencies.back() * (1.0 + 1e-12))
        throw RangeError("flatness band exceeds the spectrum range");
    double log_sum = 0.0, lin_sum = 0.0;
    std::size_t count = 0;
    bool has_zero = false;
    const double tol = 1e-12 * spec.resolution_bandwidth;
    for (std::size_t k = 0; k < spec.frequencies.size(); ++k) {
        const double f = spec.frequencies[k];
        if (f <= band_lo + tol || f > band_hi + tol) continue;
        const double p = spec.power[k];
        lin_sum += p;
        if (p > 0.0) {
            log_sum += std::log(p);
        } else {
            has_zero = true;
        }
        ++count;
    }
    if (count == 0) throw RangeError("flatness band contains no spectral bins");
    if (lin_sum <= 0.0 || has_zero) return 0.0;
    const double geo = std::exp(log_sum / static_cast<double>(count));
    const double ari = lin_sum / static_cast<double>(count);
    return geo / ari;
}

LyapunovResult lyapunov_benettin(const SystemState& s0, const TangentVector& d0,
                                 const ReducedParams& r, const IntegratorConfig& cfg,
                                 double t_a, double t_b) {
    return estimate_from_tangent(s0, d0, r, cfg, t_a, t_b).result;
}

LyapunovResult lyapunov_slope_dI1(const SystemState& s0, const TangentVector& d0,
                                  const ReducedParams& r, const IntegratorConfig& cfg,
                                  double t_a, double t_b) {
    TangentEstimates est = estimate_from_tangent(s0, d0, r, cfg, t_a, t_b);
    if (!est.slope_ok)
        throw DegenerateFit("dI1 vanishes over the window; slope fit is degenerate");
    return est.result;
}

std::vector<double> local_maxima(const std::vector<double>& t,
                                 const std::vector<double>& y, double t_a, double t_b) {
    if (t.size() != y.size()) throw InvalidParameter("time/value size mismatch");
    std::vector<double> maxima;
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        if (t[k] < t_a || t[k] > t_b) continue;
        if (y[k] > y[k - 1] && y[k] > y[k + 1]) maxima.push_back(y[k]);
    }
    return maxima;
}

std::size_t cluster_count(std::vector<double> values, double rel_tol) {
    if (values.empty()) return 0;
    if (!(rel_tol > 0.0)) throw InvalidParameter("cluster tolerance must be > 0");
    std::sort(values.begin(), values.end());
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 1;
    std::size_t clusters = 1;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] - values[k - 1] > rel_tol * scale) ++clusters;
    }
    return clusters;
}

BifurcationDiagram bifurcation_scan(const ReducedParams& base, const std::string& control,
                                    std::vector<double> values,
                                    const IntegratorConfig& cfg, double t_a, double t_b) {
    if (control != "tunneling" && control != "kappa" && control != "omega_d_amp")
        throw InvalidParameter("control must be tunneling, kappa or omega_d_amp");
    if (values.empty()) throw InvalidParameter("control value list is empty");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidParameter("control values must be finite");
    if (!(t_a >= 0.0) || !(t_b > t_a) || t_b > cfg.t_end * (1.0 + 1e-12))
        throw RangeError("analysis window outside the integration horizon");

    std::sort(values.begin(), values.end());

    BifurcationDiagram diagram;
    diagram.control = control;
    diagram.window_t_a = t_a;
    diagram.window_t_b = t_b;
    diagram.points.reserve(values.size());

    for (double v : values) {
        ReducedParams r = base;
        if (control == "tunneling") r.tunneling = v;
        else if (control == "kappa") r.kappa = v;
        else r.omega_d_amp = v;

        BifurcationPoint point;
        point.value = v;
        try {
            const Trajectory traj = integrate(SystemState{}, r, cfg);
            point.maxima = local_maxima(traj.times, traj.i1, t_a, t_b);
        } catch (const std::exception& e) {
            point.error = e.what();
        }
        diagram.points.push_back(std::move(point));
    }
    return diagram;
}

OnsetResult chaos_onset_time(const SystemState& s0, const ReducedParams& r,
                             const IntegratorConfig& cfg, const OnsetDetector& det) {
    if (!(det.window > 0.0) || !(det.lambda_threshold > 0.0))
        throw InvalidParameter("detector window and threshold must be > 0");
    if (!(det.linear_margin >= 0.0))
        throw InvalidParameter("linear margin must be >= 0");
    if (!(det.sustain_time > 0.0))
        throw InvalidParameter("sustain time must be > 0");
    if (det.window > cfg.t_end * (1.0 + 1e-12))
        throw InvalidParameter("horizon too short for one detector window");

    const TangentVector d0{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const auto [traj, tlog] = integrate_with_tangent(s0, d0, r, cfg);

    OnsetResult out;
    out.detector = det;
    out.horizon = cfg.t_end;

    const double ren = cfg.renorm_interval;
    const std::size_t m = tlog.increments.size();
    const auto w = static_cast<std::size_t>(
        std::max<std::int64_t>(1, std::llround(det.window / ren)));
    if (m < w) throw InvalidParameter("horizon too short for one detector window");
    const double w_eff = static_cast<double>(w) * ren;

    // Whole-horizon estimate (consistency guard: no onset when negative).
    const double total =
        std::accumulate(tlog.increments.begin(), tlog.increments.end(), 0.0);
    out.lambda_full = total / tlog.renorm_times.back();

    // Sliding-window estimates; window j starts at boundary j*ren and
    // covers increments j .. j+w-1.
    std::vector<double> prefix(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + tlog.increments[i];
    const std::size_t n_win = m - w + 1;
    out.trace_times.resize(n_win);
    out.trace_lambda.resize(n_win);
    for (std::size_t j = 0; j < n_win; ++j) {
        out.trace_times[j] = static_cast<double>(j) * ren;
        out.trace_lambda[j] = (prefix[j + w] - prefix[j]) / w_eff;
    }

    // During PT-broken linear amplification the window exponent equals the
    // analytic growth rate, so chaos is declared only above it.
    out.sigma_linear = linear_max_growth_rate(r);
    out.lambda_required =
        std::max(det.lambda_threshold, out.sigma_linear + det.linear_margin);

    if (out.lambda_full <= 0.0) return out;  // no onset without net growth

    for (std::size_t j = 0; j < n_win; ++j) {
        if (out.trace_lambda[j] <= out.lambda_required) continue;
        std::size_t k_end = n_win;
        if (std::isfinite(det.sustain_time)) {
            const auto span = static_cast<std::size_t>(
                std::llround(det.sustain_time / ren));
            k_end = std::min(n_win, j + span + 1);
        }
        bool sustained = true;
        for (std::size_t k = j; k < k_end; ++k) {
            if (out.trace_lambda[k] <= out.lambda_required) {
                sustained = false;
                break;
            }
        }
        if (sustained) {
            out.tau = out.trace_times[j];
            break;
        }
    }
    return out;
}

}  // namespace ptchaos
