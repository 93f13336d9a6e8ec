#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "ptchaos/analysis.hpp"
#include "ptchaos/integrate.hpp"
#include "ptchaos/linear.hpp"
#include "ptchaos/model.hpp"
#include "ptchaos/params.hpp"

using namespace ptchaos;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Microcavity working point (rates in gamma units).
ReducedParams cavity_params(double tunneling, double drive_amp, double kappa = 0.8) {
    ReducedParams r;
    r.omega_m = 23.0;
    r.gamma_m = 0.038;
    r.g0 = 7.4e-5;
    r.tunneling = tunneling;
    r.delta_c = 23.0;
    r.kappa = kappa;
    r.omega_d_amp = drive_amp;
    return r;
}

IntegratorConfig run_config(double t_end) {
    IntegratorConfig cfg = IntegratorConfig::defaults_for(cavity_params(1.0, 0.5));
    cfg.t_end = t_end;
    return cfg;
}

std::vector<double> sine_series(double omega, double dt, std::size_t n,
                                double amp = 1.0, double phase = 0.0) {
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k)
        y[k] = amp * std::sin(omega * static_cast<double>(k) * dt + phase);
    return y;
}

double spectrum_sum(const SpectrumResult& spec) {
    return std::accumulate(spec.power.begin(), spec.power.end(), 0.0);
}

double windowed_mean_square(const std::vector<double>& series, WindowFn fn) {
    const std::size_t n = series.size();
    const double mean =
        std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double w = 1.0;
        if (fn == WindowFn::Hann)
            w = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(j) /
                                      static_cast<double>(n - 1)));
        const double v = (series[j] - mean) * w;
        acc += v * v;
    }
    return acc / static_cast<double>(n);
}

std::size_t peak_bin(const SpectrumResult& spec) {
    std::size_t best = 1;
    for (std::size_t k = 2; k < spec.power.size(); ++k)
        if (spec.power[k] > spec.power[best]) best = k;
    return best;
}

}  // namespace

TEST_CASE("periodogram satisfies Parseval for both tapers and parities") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {512u, 511u}) {
        std::vector<double> y(n);
        for (double& v : y) v = u(rng);
        for (WindowFn fn : {WindowFn::Hann, WindowFn::Rectangular}) {
            const SpectrumResult spec = power_spectrum(y, 0.02, fn);
            const double lhs = spectrum_sum(spec);
            const double rhs = windowed_mean_square(y, fn);
            CHECK(std::abs(lhs - rhs) <= 1e-6 * rhs);
            CHECK(spec.n_samples == n);
            CHECK(spec.power.size() == n / 2 + 1);
            CHECK(spec.frequencies.size() == spec.power.size());
            CHECK(spec.dc_power == spec.power[0]);
        }
    }
}

TEST_CASE("periodogram places a pure tone within one bin") {
    const std::size_t n = 1024;
    const double dt = 0.02;
    const double omega0 = 23.0;
    const std::vector<double> y = sine_series(omega0, dt, n);
    for (WindowFn fn : {WindowFn::Hann, WindowFn::Rectangular}) {
        const SpectrumResult spec = power_spectrum(y, dt, fn);
        CHECK(spec.resolution_bandwidth ==
              doctest::Approx(2.0 * kPi / (static_cast<double>(n) * dt)).epsilon(1e-14));
        CHECK(spec.frequencies[1] == doctest::Approx(spec.resolution_bandwidth));
        const std::size_t k = peak_bin(spec);
        CHECK(std::abs(spec.frequencies[k] - omega0) <= spec.resolution_bandwidth);
        // mean removal keeps the DC bin far below the tone
        CHECK(spec.power[0] < 1e-6 * spec.power[k]);
    }
}

TEST_CASE("frequency axis conversion rescales and round-trips") {
    const std::vector<double> y = sine_series(23.0, 0.02, 256);
    SpectrumResult spec = power_spectrum(y, 0.02);
    const std::vector<double> freq_gamma = spec.frequencies;
    const double rbw_gamma = spec.resolution_bandwidth;

    convert_frequencies(spec, FrequencyUnit::OmegaM, 23.0);
    CHECK(spec.unit == FrequencyUnit::OmegaM);
    CHECK(spec.resolution_bandwidth == doctest::Approx(rbw_gamma / 23.0).epsilon(1e-14));
    for (std::size_t k = 0; k < spec.frequencies.size(); ++k)
        CHECK(spec.frequencies[k] == doctest::Approx(freq_gamma[k] / 23.0).epsilon(1e-13));

    convert_frequencies(spec, FrequencyUnit::OmegaM, 23.0);  // no-op
    CHECK(spec.unit == FrequencyUnit::OmegaM);

    convert_frequencies(spec, FrequencyUnit::Gamma, 23.0);
    for (std::size_t k = 0; k < spec.frequencies.size(); ++k)
        CHECK(spec.frequencies[k] == doctest::Approx(freq_gamma[k]).epsilon(1e-12));

    SpectrumResult bad = power_spectrum(y, 0.02);
    CHECK_THROWS_AS(convert_frequencies(bad, FrequencyUnit::OmegaM, 0.0), InvalidParameter);
}

TEST_CASE("spectral flatness separates white noise from a line spectrum") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> noise(4096);
    for (double& v : noise) v = u(rng);
    const double dt = 0.05;
    const SpectrumResult white = power_spectrum(noise, dt);
    const double f_hi = white.frequencies.back() * 0.9;
    CHECK(spectral_flatness(white, 0.0, f_hi) > 0.5);

    const SpectrumResult tone =
        power_spectrum(sine_series(23.0, dt, 4096), dt);
    CHECK(spectral_flatness(tone, 0.0, tone.frequencies.back() * 0.9) < 0.01);

    CHECK_THROWS_AS(spectral_flatness(white, 2.0, 1.0), RangeError);
    CHECK_THROWS_AS(spectral_flatness(white, 0.0, white.frequencies.back() * 2.0),
                    RangeError);
    // band below the first nonzero bin holds no samples
    CHECK_THROWS_AS(
        spectral_flatness(white, 0.0, white.resolution_bandwidth * 0.5), RangeError);
}

TEST_CASE("periodogram input validation") {
    std::vector<double> y(63, 1.0);
    CHECK_THROWS_AS(power_spectrum(y, 0.1), InvalidParameter);
    y.resize(64, 1.0);
    CHECK_THROWS_AS(power_spectrum(y, 0.0), InvalidParameter);
    CHECK_THROWS_AS(power_spectrum(y, -1.0), InvalidParameter);
    y[10] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(power_spectrum(y, 0.1), InvalidParameter);
}

TEST_CASE("local maxima of a sampled sine are the crest samples") {
    const double dt = 0.05;
    const std::size_t n = 1257;  // ~ t in [0, 62.8]
    std::vector<double> t(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
        t[k] = static_cast<double>(k) * dt;
        y[k] = std::sin(t[k]);
    }
    const std::vector<double> all = local_maxima(t, y, 0.0, t.back());
    CHECK(all.size() == 10);
    for (double v : all) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(cluster_count(all, 0.02) == 1);

    // window restriction keeps only interior crests
    CHECK(local_maxima(t, y, 10.0, 40.0).size() == 5);

    std::vector<double> short_t(t.begin(), t.begin() + 5);
    CHECK_THROWS_AS(local_maxima(short_t, y, 0.0, 1.0), InvalidParameter);
}

TEST_CASE("half-frequency admixture doubles the maxima clusters") {
    const double dt = 0.002;
    const std::size_t n = 6284;  // several beat periods
    std::vector<double> t(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
        t[k] = static_cast<double>(k) * dt;
        y[k] = std::sin(23.0 * t[k]) + 0.5 * std::sin(11.5 * t[k]);
    }
    const std::vector<double> pure = local_maxima(t, sine_series(23.0, dt, n), 0.0, t.back());
    CHECK(cluster_count(pure, 0.05) == 1);
    const std::vector<double> mixed = local_maxima(t, y, 0.0, t.back());
    CHECK(cluster_count(mixed, 0.2) == 2);
}

TEST_CASE("cluster counting splits on relative gaps") {
    CHECK(cluster_count({}, 0.02) == 0);
    CHECK(cluster_count({0.0, 0.0, 0.0}, 0.02) == 1);
    CHECK(cluster_count({1.0, 1.005, 2.0}, 0.01) == 2);
    CHECK(cluster_count({1.0, 1.5, 2.0}, 0.3) == 1);   // chain within tolerance
    CHECK(cluster_count({1.0, 1.5, 2.0}, 0.2) == 3);
    CHECK_THROWS_AS(cluster_count({1.0}, 0.0), InvalidParameter);
    CHECK_THROWS_AS(cluster_count({1.0}, -0.1), InvalidParameter);
}

TEST_CASE("tangent-average exponent reproduces the linear rates when the coupling is off") {
    // growing branch: supermode gain dominates
    ReducedParams grow = cavity_params(0.2, 0.0);
    grow.g0 = 0.0;
    const double sigma = linear_max_growth_rate(grow);
    CHECK(sigma == doctest::Approx(0.3531128874149275).epsilon(1e-12));
    SystemState s0;
    s0.x = 1.0;
    s0.a1_re = 1e-3;
    const TangentVector d0{0.3, -0.2, 0.9, 0.1, -0.4, 0.7};
    LyapunovResult res =
        lyapunov_benettin(s0, d0, grow, run_config(60.0), 20.0, 60.0);
    CHECK(res.lambda_benettin == doctest::Approx(sigma).epsilon(1e-4));
    CHECK(res.n_increments == 400);

    // decaying branch: everything stable, slowest mode is mechanical
    ReducedParams stable = cavity_params(1.0, 0.5);
    stable.g0 = 0.0;
    const double top = linear_max_growth_rate(stable);
    CHECK(top == doctest::Approx(-0.0095).epsilon(1e-12));
    res = lyapunov_benettin(s0, d0, stable, run_config(180.0), 80.0, 180.0);
    CHECK(res.lambda_benettin == doctest::Approx(top).epsilon(2e-3));
}

TEST_CASE("exponent estimates are invariant under tangent seed rescaling") {
    const ReducedParams r = cavity_params(0.2, 0.5);
    const IntegratorConfig cfg = run_config(30.0);
    const TangentVector base{1.0, -2.0, 0.5, 0.25, -0.75, 1.5};
    TangentVector big = base, tiny = base;
    for (int i = 0; i < 6; ++i) {
        big[i] *= 1e6;
        tiny[i] *= 1e-6;
    }
    const LyapunovResult a = lyapunov_benettin(SystemState{}, base, r, cfg, 5.0, 30.0);
    const LyapunovResult b = lyapunov_benettin(SystemState{}, big, r, cfg, 5.0, 30.0);
    const LyapunovResult c = lyapunov_benettin(SystemState{}, tiny, r, cfg, 5.0, 30.0);
    CHECK(std::abs(a.lambda_benettin - b.lambda_benettin) <= 1e-10);
    CHECK(std::abs(a.lambda_benettin - c.lambda_benettin) <= 1e-10);
    CHECK(std::abs(a.lambda_slope_dI1 - b.lambda_slope_dI1) <= 1e-10);
    CHECK(std::abs(a.lambda_slope_dI1 - c.lambda_slope_dI1) <= 1e-10);
}

TEST_CASE("intensity-slope exponent agrees with the tangent average on an overdamped decay") {
    // all blocks overdamped and non-oscillatory; slowest optical mode at -0.3
    ReducedParams r;
    r.omega_m = 1.0;
    r.gamma_m = 2.0;
    r.g0 = 0.0;
    r.tunneling = 0.1;
    r.delta_c = 0.0;
    r.kappa = -0.5;
    r.omega_d_amp = 1.0;
    const double expected = linear_max_growth_rate(r);
    CHECK(expected == doctest::Approx(-0.3).epsilon(1e-12));

    IntegratorConfig cfg;
    cfg.t_end = 50.0;
    cfg.sample_dt = 0.02;
    const TangentVector d0{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const LyapunovResult res = lyapunov_slope_dI1(SystemState{}, d0, r, cfg, 30.0, 50.0);
    CHECK(res.lambda_benettin == doctest::Approx(expected).epsilon(5e-3));
    CHECK(res.lambda_slope_dI1 == doctest::Approx(expected).epsilon(5e-3));
    CHECK(std::abs(res.lambda_slope_dI1 - res.lambda_benettin) <=
          0.1 * std::abs(res.lambda_benettin));
    CHECK(res.fit_residual < 0.05);
    CHECK(res.n_fit_points > 100);
}

TEST_CASE("both exponent definitions agree in sign at the reference operating points") {
    struct Case {
        double tunneling, drive, kappa, t_a, t_b, t_end;
        bool positive;
    };
    const Case cases[] = {
        {1.0, 0.5, 0.8, 30.0, 60.0, 60.0, false},    // symmetric phase, weak drive
        {0.2, 0.5, 0.8, 52.0, 62.8, 62.8, true},     // broken phase, past onset
        {1.0, 0.5, -0.8, 30.0, 60.0, 60.0, false},   // passive-passive, weak drive
        {1.0, 3e6, -0.8, 0.5, 12.5, 12.5, true},     // passive-passive, huge drive
    };
    const TangentVector d0{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    for (const Case& c : cases) {
        CAPTURE(c.tunneling);
        CAPTURE(c.drive);
        const ReducedParams r = cavity_params(c.tunneling, c.drive, c.kappa);
        const LyapunovResult res =
            lyapunov_slope_dI1(SystemState{}, d0, r, run_config(c.t_end), c.t_a, c.t_b);
        if (c.positive) {
            CHECK(res.lambda_benettin > 0.0);
            CHECK(res.lambda_slope_dI1 > 0.0);
        } else {
            CHECK(res.lambda_benettin < 0.0);
            CHECK(res.lambda_slope_dI1 < 0.0);
        }
    }
}

TEST_CASE("window edges snap to the renormalization grid and shifts stay benign") {
    ReducedParams r = cavity_params(0.2, 0.0);
    r.g0 = 0.0;
    const TangentVector d0{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const IntegratorConfig cfg = run_config(60.0);
    const LyapunovResult snapped =
        lyapunov_benettin(SystemState{}, d0, r, cfg, 30.04, 50.07);
    CHECK(snapped.window_t_a == doctest::Approx(30.0).epsilon(1e-14));
    CHECK(snapped.window_t_b == doctest::Approx(50.0).epsilon(1e-14));

    const LyapunovResult shifted =
        lyapunov_benettin(SystemState{}, d0, r, cfg, 25.0, 50.0);
    CHECK(std::abs(shifted.lambda_benettin - snapped.lambda_benettin) <=
          0.2 * std::abs(snapped.lambda_benettin));
}

TEST_CASE("exponent window validation") {
    const ReducedParams r = cavity_params(1.0, 0.5);
    const IntegratorConfig cfg = run_config(20.0);
    const TangentVector d0{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(lyapunov_benettin(SystemState{}, d0, r, cfg, -1.0, 10.0), RangeError);
    CHECK_THROWS_AS(lyapunov_benettin(SystemState{}, d0, r, cfg, 5.0, 5.0), RangeError);
    CHECK_THROWS_AS(lyapunov_benettin(SystemState{}, d0, r, cfg, 5.0, 40.0), RangeError);
    // window narrower than one renormalization interval
    CHECK_THROWS_AS(lyapunov_benettin(SystemState{}, d0, r, cfg, 10.01, 10.05),
                    InvalidParameter);
}

TEST_CASE("intensity-slope fit is degenerate when the cavities stay dark") {
    // no drive and no coupling: a1 = a2 = 0 for all time, so dI1 vanishes
    ReducedParams r = cavity_params(0.5, 0.0);
    r.g0 = 0.0;
    SystemState s0;
    s0.x = 1.0;
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    cfg.sample_dt = 0.05;
    const TangentVector d0{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(lyapunov_slope_dI1(s0, d0, r, cfg, 0.0, 10.0), DegenerateFit);
    // the tangent average over the same run is still well defined
    const LyapunovResult res = lyapunov_benettin(s0, d0, r, cfg, 0.0, 10.0);
    CHECK(std::isfinite(res.lambda_benettin));
}

TEST_CASE("bifurcation scan records maxima per control value and tolerates bad points") {
    ReducedParams base = cavity_params(1.0, 0.5);
    IntegratorConfig cfg = run_config(40.0);
    const BifurcationDiagram diagram =
        bifurcation_scan(base, "tunneling", {1.0, 0.6, 0.8}, cfg, 20.0, 40.0);
    CHECK(diagram.points.size() == 3);
    // values come back sorted
    CHECK(diagram.points[0].value == 0.6);
    CHECK(diagram.points[2].value == 1.0);
    for (const BifurcationPoint& p : diagram.points) {
        CHECK(p.error.empty());
        CHECK(!p.maxima.empty());
        for (double v : p.maxima) CHECK(std::isfinite(v));
    }

    CHECK_THROWS_AS(
        bifurcation_scan(base, "g0", {1.0}, cfg, 20.0, 40.0), InvalidParameter);
    CHECK_THROWS_AS(
        bifurcation_scan(base, "tunneling", {}, cfg, 20.0, 40.0), InvalidParameter);
    CHECK_THROWS_AS(
        bifurcation_scan(base, "tunneling", {0.5}, cfg, 20.0, 60.0), RangeError);
}

TEST_CASE("onset detector reports none whenever the full-horizon exponent is negative") {
    const ReducedParams r = cavity_params(1.0, 0.5);  // symmetric phase
    const OnsetResult res =
        chaos_onset_time(SystemState{}, r, run_config(40.0 * kPi), OnsetDetector{});
    CHECK(!res.tau.has_value());
    CHECK(res.lambda_full < 0.0);
    CHECK(!res.trace_times.empty());
    CHECK(res.horizon == doctest::Approx(40.0 * kPi));
}

TEST_CASE("onset time for the weak-drive broken phase matches the frozen regression value") {
    const ReducedParams r = cavity_params(0.2, 0.5);
    const IntegratorConfig cfg = run_config(62.83);
    const OnsetResult res = chaos_onset_time(SystemState{}, r, cfg, OnsetDetector{});
    REQUIRE(res.tau.has_value());
    CHECK(*res.tau == doctest::Approx(52.4).epsilon(2e-3));
    CHECK(res.sigma_linear == doctest::Approx(0.3531128874149275).epsilon(1e-12));
    CHECK(res.lambda_required == doctest::Approx(0.4031128874149275).epsilon(1e-12));
    CHECK(res.lambda_full > 0.0);

    // tau sits on the trace grid and the trace value there exceeds the threshold
    const double ren = cfg.renorm_interval;
    const auto idx = static_cast<std::size_t>(std::llround(*res.tau / ren));
    REQUIRE(idx < res.trace_lambda.size());
    CHECK(res.trace_times[idx] == doctest::Approx(*res.tau).epsilon(1e-12));
    CHECK(res.trace_lambda[idx] > res.lambda_required);
    for (std::size_t j = idx; j < res.trace_lambda.size(); ++j)
        CHECK(res.trace_lambda[j] > res.lambda_required);

    // a finite sustain requirement can only move the onset earlier
    OnsetDetector relaxed;
    relaxed.sustain_time = 1.0;
    const OnsetResult early = chaos_onset_time(SystemState{}, r, cfg, relaxed);
    REQUIRE(early.tau.has_value());
    CHECK(*early.tau <= *res.tau + 1e-12);
}

TEST_CASE("onset detector validation") {
    const ReducedParams r = cavity_params(0.2, 0.5);
    const IntegratorConfig cfg = run_config(20.0);
    OnsetDetector det;
    det.window = 0.0;
    CHECK_THROWS_AS(chaos_onset_time(SystemState{}, r, cfg, det), InvalidParameter);
    det = OnsetDetector{};
    det.lambda_threshold = 0.0;
    CHECK_THROWS_AS(chaos_onset_time(SystemState{}, r, cfg, det), InvalidParameter);
    det = OnsetDetector{};
    det.linear_margin = -0.01;
    CHECK_THROWS_AS(chaos_onset_time(SystemState{}, r, cfg, det), InvalidParameter);
    det = OnsetDetector{};
    det.sustain_time = 0.0;
    CHECK_THROWS_AS(chaos_onset_time(SystemState{}, r, cfg, det), InvalidParameter);
    // horizon shorter than one detector window
    IntegratorConfig tiny = cfg;
    tiny.t_end = 5.0;
    CHECK_THROWS_AS(chaos_onset_time(SystemState{}, r, tiny, OnsetDetector{}),
                    InvalidParameter);
}
