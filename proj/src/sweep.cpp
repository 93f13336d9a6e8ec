#include "ptchaos/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "ptchaos/textutil.hpp"

namespace ptchaos {
namespace {

double* field_by_name(ReducedParams& r, const std::string& name) {
    if (name == "omega_m") return &r.omega_m;
    if (name == "gamma_m") return &r.gamma_m;
    if (name == "g0") return &r.g0;
    if (name == "tunneling") return &r.tunneling;
    if (name == "delta_c") return &r.delta_c;
    if (name == "kappa") return &r.kappa;
    if (name == "omega_d_amp") return &r.omega_d_amp;
    return nullptr;
}

void validate_grid(const SweepGrid& grid) {
    if (grid.axes.empty() || grid.axes.size() > 2)
        throw InvalidParameter("sweep needs one or two axes");
    for (const auto& axis : grid.axes) {
        ReducedParams probe = grid.base;
        if (field_by_name(probe, axis.name) == nullptr)
            throw InvalidParameter("unknown sweep axis: " + axis.name);
        if (axis.values.empty())
            throw InvalidParameter("sweep axis " + axis.name + " has no values");
        for (double v : axis.values)
            if (!std::isfinite(v))
                throw InvalidParameter("sweep axis " + axis.name +
                                       " has non-finite values");
    }
    grid.integrator.validate();
}

std::string canonical_grid_description(const SweepGrid& grid) {
    std::ostringstream os;
    const ReducedParams& b = grid.base;
    os << "base:omega_m=" << format_double(b.omega_m)
       << ",gamma_m=" << format_double(b.gamma_m) << ",g0=" << format_double(b.g0)
       << ",tunneling=" << format_double(b.tunneling)
       << ",delta_c=" << format_double(b.delta_c) << ",kappa=" << format_double(b.kappa)
       << ",omega_d_amp=" << format_double(b.omega_d_amp)
       << ",gamma=" << format_double(b.gamma) << "\n";
    for (const auto& axis : grid.axes) {
        os << "axis:" << axis.name << "=";
        for (std::size_t i = 0; i < axis.values.size(); ++i) {
            if (i) os << ",";
            os << format_double(axis.values[i]);
        }
        os << "\n";
    }
    const AnalysisRecipe& rc = grid.recipe;
    os << "recipe:lyapunov=" << rc.lyapunov << ",flatness=" << rc.flatness
       << ",onset=" << rc.onset << ",ta=" << format_double(rc.window_t_a)
       << ",tb=" << format_double(rc.window_t_b)
       << ",band=" << format_double(rc.flatness_band_lo) << ":"
       << format_double(rc.flatness_band_hi)
       << ",W=" << format_double(rc.detector.window)
       << ",th=" << format_double(rc.detector.lambda_threshold)
       << ",margin=" << format_double(rc.detector.linear_margin) << "\n";
    const IntegratorConfig& ic = grid.integrator;
    os << "integrator:rtol=" << format_double(ic.rel_tol)
       << ",atol=" << format_double(ic.abs_tol)
       << ",max_step=" << format_double(ic.max_step)
       << ",sample_dt=" << format_double(ic.sample_dt)
       << ",t_end=" << format_double(ic.t_end)
       << ",renorm=" << format_double(ic.renorm_interval) << "\n";
    return os.str();
}

void analyze_point(const SweepGrid& grid, const std::vector<double>& coords,
                   PointOutcome& out) {
    ReducedParams r = grid.base;
    for (std::size_t a = 0; a < grid.axes.size(); ++a)
        *field_by_name(r, grid.axes[a].name) = coords[a];

    out.coords = coords;
    out.phase = classify_phase(r.tunneling, r.gamma, r.kappa);

    const IntegratorConfig& cfg = grid.integrator;
    const double t_a = grid.recipe.window_t_a;
    const double t_b = grid.recipe.window_t_b > 0.0 ? grid.recipe.window_t_b : cfg.t_end;

    const auto start = std::chrono::steady_clock::now();
    try {
        if (grid.recipe.lyapunov) {
            const TangentVector d0{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
            const LyapunovResult lr =
                lyapunov_benettin(SystemState{}, d0, r, cfg, t_a, t_b);
            out.lambda_benettin = lr.lambda_benettin;
            out.lambda_slope_dI1 = lr.lambda_slope_dI1;
            out.n_accepted += lr.stats.n_accepted;
            out.n_rhs += lr.stats.n_rhs;
        }
        if (grid.recipe.flatness) {
            const Trajectory traj = integrate(SystemState{}, r, cfg);
            std::vector<double> slice;
            slice.reserve(traj.size());
            const double tol = 1e-9 * cfg.sample_dt;
            for (std::size_t k = 0; k < traj.size(); ++k) {
                if (traj.times[k] >= t_a - tol && traj.times[k] <= t_b + tol)
                    slice.push_back(traj.i1[k]);
            }
            const SpectrumResult spec = power_spectrum(slice, cfg.sample_dt);
            const double lo = grid.recipe.flatness_band_lo;
            const double hi = grid.recipe.flatness_band_hi > 0.0
                                  ? grid.recipe.flatness_band_hi
                                  : 2.0 * r.omega_m;
            out.flatness = spectral_flatness(spec, lo, hi);
            out.n_accepted += traj.meta.n_accepted;
            out.n_rhs += traj.meta.n_rhs;
        }
        if (grid.recipe.onset) {
            const OnsetResult onset =
                chaos_onset_time(SystemState{}, r, cfg, grid.recipe.detector);
            out.tau = onset.tau;
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SweepResult run_sweep(const SweepGrid& grid) {
    validate_grid(grid);

    const std::size_t n0 = grid.axes[0].values.size();
    const std::size_t n1 = grid.axes.size() == 2 ? grid.axes[1].values.size() : 1;
    const std::size_t n = n0 * n1;

    SweepResult result;
    for (const auto& axis : grid.axes) {
        result.axis_names.push_back(axis.name);
        result.axis_values.push_back(axis.values);
    }
    result.engine_version = kVersion;
    result.config_hash = fnv1a64(canonical_grid_description(grid));
    result.points.resize(n);

    auto point_coords = [&](std::size_t idx) {
        std::vector<double> coords;
        coords.push_back(grid.axes[0].values[idx / n1]);
        if (grid.axes.size() == 2) coords.push_back(grid.axes[1].values[idx % n1]);
        return coords;
    };

    unsigned workers = grid.workers;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            analyze_point(grid, point_coords(i), result.points[i]);
        return result;
    }

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i)
                analyze_point(grid, point_coords(i), result.points[i]);
        });
    }
    for (auto& th : pool) th.join();
    return result;
}

std::vector<std::vector<PhaseLabel>> phase_diagram_scan(
    const std::vector<double>& J_values, const std::vector<double>& kappa_values,
    double gamma) {
    if (J_values.empty() || kappa_values.empty())
        throw InvalidParameter("phase diagram value lists must be non-empty");
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    std::vector<std::vector<PhaseLabel>> labels(kappa_values.size());
    for (std::size_t i = 0; i < kappa_values.size(); ++i) {
        labels[i].reserve(J_values.size());
        for (const double j : J_values)
            labels[i].push_back(classify_phase(j, gamma, kappa_values[i]));
    }
    return labels;
}

std::vector<OnsetPoint> onset_curve(const std::vector<double>& omega_d_values,
                                    const ReducedParams& r_base,
                                    const IntegratorConfig& cfg,
                                    const OnsetDetector& det, double horizon_cap) {
    if (omega_d_values.empty())
        throw InvalidParameter("onset curve needs at least one drive value");
    if (classify_phase(r_base.tunneling, r_base.gamma, r_base.kappa) !=
        PhaseLabel::PT_BROKEN)
        throw InvalidParameter("onset curve requires PT-broken base parameters");
    if (!(horizon_cap >= cfg.t_end))
        throw InvalidParameter("horizon cap below the starting horizon");

    std::vector<OnsetPoint> curve;
    curve.reserve(omega_d_values.size());
    for (const double drive : omega_d_values) {
        OnsetPoint point;
        point.drive = drive;
        ReducedParams r = r_base;
        r.omega_d_amp = drive;
        try {
            IntegratorConfig local = cfg;
            while (true) {
                const OnsetResult res = chaos_onset_time(SystemState{}, r, local, det);
                point.tau = res.tau;
                point.lambda_required = res.lambda_required;
                point.lambda_full = res.lambda_full;
                point.horizon_used = local.t_end;
                if (res.tau.has_value()) break;
                if (local.t_end >= horizon_cap * (1.0 - 1e-12)) {
                    point.note = "none (horizon)";
                    break;
                }
                local.t_end = std::min(2.0 * local.t_end, horizon_cap);
            }
        } catch (const std::exception& e) {
            point.note = e.what();
        }
        curve.push_back(std::move(point));
    }
    return curve;
}

}  // namespace ptchaos
