#pragma once

// Trajectory diagnostics: tapered periodograms, the two largest-Lyapunov
// estimators (tangent-flow Benettin average and the log-slope of the
// intensity perturbation dI1), bifurcation extrema scans, and the
// sliding-window chaos onset detector.

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptchaos/integrate.hpp"
#include "ptchaos/model.hpp"
#include "ptchaos/params.hpp"

namespace ptchaos {

struct DegenerateFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class WindowFn { Hann, Rectangular };
enum class FrequencyUnit { Gamma, OmegaM };

std::string to_string(WindowFn w);
std::string to_string(FrequencyUnit u);

/// One-sided periodogram of a real, uniformly sampled series. Bin k of n
/// input samples sits at angular frequency 2*pi*k/(n*dt); arrays have
/// n/2 + 1 entries with strictly increasing frequencies. power holds the
/// linear one-sided values (sum equals the mean square of the windowed,
/// mean-removed series), log_power their natural log, and the DC bin is
/// additionally reported on its own.
struct SpectrumResult {
    std::vector<double> frequencies;
    std::vector<double> power;
    std::vector<double> log_power;
    double dc_power = 0.0;
    FrequencyUnit unit = FrequencyUnit::Gamma;
    WindowFn window_fn = WindowFn::Hann;
    std::size_t n_samples = 0;
    double resolution_bandwidth = 0.0;  ///< frequency grid spacing
};

SpectrumResult power_spectrum(const std::vector<double>& series, double dt,
                              WindowFn window_fn = WindowFn::Hann);

/// Rescale the frequency axis to units of omega_m (pass omega_m in the
/// same gamma units the spectrum was computed in).
void convert_frequencies(SpectrumResult& spec, FrequencyUnit unit, double omega_m);

/// Geometric mean / arithmetic mean of the linear power over the bins
/// with band_lo < frequency <= band_hi. 1 is maximally flat (white),
/// values near 0 indicate a line spectrum.
double spectral_flatness(const SpectrumResult& spec, double band_lo, double band_hi);

/// Both largest-Lyapunov estimates over the same tangent-flow run. The
/// window is snapped outward to the renormalization grid; the snapped
/// edges are reported. Rates are in gamma units (divide by 2*pi for
/// inverse microseconds at the default gamma).
struct LyapunovResult {
    double lambda_benettin = 0.0;
    double lambda_slope_dI1 = 0.0;
    double window_t_a = 0.0;
    double window_t_b = 0.0;
    double fit_residual = 0.0;  ///< RMS residual of the ln|dI1| line fit
    std::size_t n_increments = 0;
    std::size_t n_fit_points = 0;
    IntegratorStats stats;
};

LyapunovResult lyapunov_benettin(const SystemState& s0, const TangentVector& d0,
                                 const ReducedParams& r, const IntegratorConfig& cfg,
                                 double t_a, double t_b);

/// Same run, but the headline estimate is the least-squares slope of
/// ln|dI1| vs t with the renormalization increments re-accumulated.
/// Throws DegenerateFit when dI1 vanishes over the whole window.
LyapunovResult lyapunov_slope_dI1(const SystemState& s0, const TangentVector& d0,
                                  const ReducedParams& r, const IntegratorConfig& cfg,
                                  double t_a, double t_b);

/// Strict three-point local maxima of y(t) restricted to t in [t_a, t_b].
std::vector<double> local_maxima(const std::vector<double>& t,
                                 const std::vector<double>& y, double t_a, double t_b);

/// Number of distinct clusters after sorting, splitting where adjacent
/// values differ by more than rel_tol times the largest magnitude.
std::size_t cluster_count(std::vector<double> values, double rel_tol);

struct BifurcationPoint {
    double value = 0.0;
    std::vector<double> maxima;  ///< I1 local maxima inside the window
    std::string error;           ///< non-empty if this point failed
};

struct BifurcationDiagram {
    std::string control;  ///< "tunneling", "kappa" or "omega_d_amp"
    double window_t_a = 0.0;
    double window_t_b = 0.0;
    std::vector<BifurcationPoint> points;  ///< sorted by control value
};

/// Integrates from the zero state for every control value and collects
/// the I1 maxima in the window; per-point integrator failures are
/// recorded and the scan continues.
BifurcationDiagram bifurcation_scan(const ReducedParams& base, const std::string& control,
                                    std::vector<double> values,
                                    const IntegratorConfig& cfg, double t_a, double t_b);

/// Sliding-window chaos onset detector. The Benettin estimate over each
/// window of width `window` is compared against the effective threshold
///   max(lambda_threshold, linear_growth_rate + linear_margin);
/// tau is the earliest window start whose estimate exceeds it and keeps
/// exceeding it for sustain_time (infinite = for the rest of the
/// horizon). Comparing against the analytic linear growth rate is what
/// separates chaos from plain PT-broken amplification: during the
/// pre-chaotic growth stage the window exponent sits exactly on the
/// linear rate, then jumps well above it when the motion turns chaotic.
struct OnsetDetector {
    double window = 6.283185307179586;            ///< 1 us at default gamma
    double lambda_threshold = 0.015915494309189534;  ///< 0.1 per us
    double linear_margin = 0.05;  ///< margin over the linear rate, gamma units
    double sustain_time = std::numeric_limits<double>::infinity();
};

struct OnsetResult {
    std::optional<double> tau;  ///< gamma time; none if no sustained onset
    std::vector<double> trace_times;    ///< sliding-window start times
    std::vector<double> trace_lambda;   ///< window Benettin estimates
    double sigma_linear = 0.0;          ///< analytic linear growth rate
    double lambda_required = 0.0;       ///< effective threshold applied
    double lambda_full = 0.0;           ///< whole-horizon Benettin estimate
    double horizon = 0.0;
    OnsetDetector detector;
};

OnsetResult chaos_onset_time(const SystemState& s0, const ReducedParams& r,
                             const IntegratorConfig& cfg, const OnsetDetector& det);

}  // namespace ptchaos
