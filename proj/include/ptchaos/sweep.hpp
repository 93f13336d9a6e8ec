#pragma once

// Deterministic parallel parameter sweeps. Grid points are distributed
// over worker threads in static contiguous blocks and every worker
// writes into its own pre-assigned result slots, so the assembled
// SweepResult is identical whatever the worker count.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ptchaos/analysis.hpp"
#include "ptchaos/integrate.hpp"
#include "ptchaos/linear.hpp"
#include "ptchaos/params.hpp"

namespace ptchaos {

struct SweepAxis {
    std::string name;  ///< a ReducedParams field: tunneling, kappa, ...
    std::vector<double> values;
};

/// Which analyses to run on every grid point, and with what settings.
struct AnalysisRecipe {
    bool lyapunov = true;
    bool flatness = false;
    bool onset = false;
    double window_t_a = 0.0;  ///< analysis window (lyapunov + spectrum)
    double window_t_b = 0.0;  ///< <= 0 means "up to the horizon"
    double flatness_band_lo = 0.0;
    double flatness_band_hi = 0.0;  ///< <= 0 means "auto: (0, 2*omega_m]"
    OnsetDetector detector;
};

struct SweepGrid {
    ReducedParams base;
    std::vector<SweepAxis> axes;  ///< one or two axes
    AnalysisRecipe recipe;
    IntegratorConfig integrator;
    unsigned workers = 1;  ///< 0 picks the hardware concurrency
};

struct PointOutcome {
    std::vector<double> coords;  ///< axis values, one per axis
    PhaseLabel phase = PhaseLabel::PT_SYMMETRIC;
    double lambda_benettin = std::numeric_limits<double>::quiet_NaN();
    double lambda_slope_dI1 = std::numeric_limits<double>::quiet_NaN();
    double flatness = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> tau;
    std::string error;          ///< non-empty if the point failed
    double wall_seconds = 0.0;  ///< informational; not part of canonical output
    std::uint64_t n_accepted = 0;
    std::uint64_t n_rhs = 0;
};

struct SweepResult {
    std::vector<std::string> axis_names;
    std::vector<std::vector<double>> axis_values;
    std::vector<PointOutcome> points;  ///< row-major over the axes
    std::string engine_version;
    std::uint64_t config_hash = 0;
};

/// Simulates and analyzes every grid point from the zero initial state.
/// A failing point records its diagnostic and never aborts the sweep.
SweepResult run_sweep(const SweepGrid& grid);

/// Closed-form phase classification on a (kappa, J) grid; no dynamics.
/// labels[i][j] classifies (kappa_values[i], J_values[j]).
std::vector<std::vector<PhaseLabel>> phase_diagram_scan(
    const std::vector<double>& J_values, const std::vector<double>& kappa_values,
    double gamma);

struct OnsetPoint {
    double drive = 0.0;  ///< drive amplitude, gamma units
    std::optional<double> tau;
    double lambda_required = 0.0;
    double lambda_full = 0.0;
    double horizon_used = 0.0;
    std::string note;  ///< "", "none (horizon)", or an error message
};

/// Onset time per drive amplitude in a PT-broken base configuration.
/// When no sustained onset fits in cfg.t_end the horizon doubles up to
/// horizon_cap (default 200 us at the standard gamma) before reporting
/// "none (horizon)".
std::vector<OnsetPoint> onset_curve(const std::vector<double>& omega_d_values,
                                    const ReducedParams& r_base,
                                    const IntegratorConfig& cfg,
                                    const OnsetDetector& det,
                                    double horizon_cap = 1256.6370614359172);

}  // namespace ptchaos
