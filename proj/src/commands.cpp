#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>

#include "ptchaos/io.hpp"
#include "ptchaos/linear.hpp"
#include "ptchaos/sweep.hpp"
#include "ptchaos/textutil.hpp"

namespace ptchaos {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string now_iso_utc() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Collects written files; removes them unless the command commits.
struct Outputs {
    fs::path dir;
    std::vector<fs::path> files;
    bool committed = false;

    explicit Outputs(const fs::path& d) : dir(d) { fs::create_directories(dir); }
    ~Outputs() {
        if (committed) return;
        std::error_code ec;
        for (const auto& f : files) fs::remove(f, ec);
    }
    void add(const fs::path& p) { files.push_back(p); }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(files.size());
        for (const auto& f : files) out.push_back(f.filename().string());
        return out;
    }
};

/// Shared prologue/epilogue: runs `body`, writes the manifest, prints the
/// summary, and maps any exception to exit code 1 with cleanup.
template <class Body>
int run_command(const ResolvedConfig& rc, const fs::path& out_dir,
                const std::string& command_line, const std::string& stem, Body body) {
    Outputs outputs(out_dir);
    RunManifest manifest;
    manifest.command = command_line;
    manifest.started_at = now_iso_utc();
    std::string summary;
    try {
        summary = body(outputs);
        manifest.finished_at = now_iso_utc();
        manifest.outputs = outputs.names();
        outputs.add(write_manifest(out_dir, stem, manifest, rc));
        outputs.committed = true;
    } catch (const std::exception& e) {
        std::cerr << "ptchaos " << stem << ": error: " << e.what() << "\n";
        return 1;
    }
    std::cout << summary << "\n";
    return 0;
}

double analysis_t_a(const ResolvedConfig& rc) {
    return rc.settings.window_t_a >= 0.0 ? rc.settings.window_t_a : 0.0;
}
double analysis_t_b(const ResolvedConfig& rc) {
    return rc.settings.window_t_b >= 0.0 ? rc.settings.window_t_b
                                         : rc.integrator.t_end;
}

int phase_code(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::PT_SYMMETRIC: return 0;
        case PhaseLabel::PT_BROKEN: return 1;
        case PhaseLabel::PASSIVE_PASSIVE: return 2;
        case PhaseLabel::EXCEPTIONAL_POINT: return 3;
    }
    return -1;
}

std::string fmt_rate_us(double lam_gamma, double gamma) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%+.3e /us", rate_gamma_to_per_us(lam_gamma, gamma));
    return buf;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

}  // namespace

int cmd_simulate(const ResolvedConfig& rc, const fs::path& out_dir,
                 const std::string& command_line) {
    return run_command(rc, out_dir, command_line, "timeseries", [&](Outputs& outputs) {
        const Trajectory traj =
            integrate(rc.settings.initial_state, rc.reduced, rc.integrator);
        const double gamma = rc.physical.gamma;
        const double t_a = analysis_t_a(rc);
        const double t_b = analysis_t_b(rc);

        Table table;
        table.comments = {"optomechanical time series; rates in units of gamma",
                          "gamma = " + format_double(gamma) + " rad/s"};
        table.columns = {"t[1/gamma]", "t[us]",     "x[1]",     "p[1]",
                         "a1_re[1]",   "a1_im[1]",  "a2_re[1]", "a2_im[1]",
                         "I1[1]",      "I2[1]"};
        table.data.resize(table.columns.size());
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times[k];
            if (t < t_a - 1e-12 || t > t_b + 1e-12) continue;
            const SystemState& s = traj.states[k];
            table.data[0].push_back(t);
            table.data[1].push_back(gamma_time_to_us(t, gamma));
            table.data[2].push_back(s.x);
            table.data[3].push_back(s.p);
            table.data[4].push_back(s.a1_re);
            table.data[5].push_back(s.a1_im);
            table.data[6].push_back(s.a2_re);
            table.data[7].push_back(s.a2_im);
            table.data[8].push_back(traj.i1[k]);
            table.data[9].push_back(traj.i2[k]);
        }
        outputs.add(write_table(out_dir, "timeseries", table, rc.settings.format));

        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "samples = %zu, I1(final) = %.6g, I2(final) = %.6g",
                      table.data[0].size(), traj.i1.back(), traj.i2.back());
        return std::string(buf);
    });
}

int cmd_spectrum(const ResolvedConfig& rc, const fs::path& out_dir,
                 const std::string& command_line) {
    return run_command(rc, out_dir, command_line, "spectrum", [&](Outputs& outputs) {
        const Trajectory traj =
            integrate(rc.settings.initial_state, rc.reduced, rc.integrator);
        const double t_a = analysis_t_a(rc);
        const double t_b = analysis_t_b(rc);

        std::vector<double> series;
        series.reserve(traj.size());
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times[k];
            if (t < t_a - 1e-12 || t > t_b + 1e-12) continue;
            if (rc.settings.observable == "i1") series.push_back(traj.i1[k]);
            else if (rc.settings.observable == "i2") series.push_back(traj.i2[k]);
            else series.push_back(traj.states[k].x);
        }

        SpectrumResult spec = power_spectrum(series, rc.integrator.sample_dt,
                                             rc.settings.spectrum_window);
        convert_frequencies(spec, rc.settings.freq_unit, rc.reduced.omega_m);
        const std::string unit = to_string(spec.unit);

        Table table;
        table.comments = {
            "one-sided power spectrum of " + rc.settings.observable +
                " over t = [" + format_double(t_a) + ", " + format_double(t_b) +
                "] (1/gamma)",
            "taper = " + to_string(spec.window_fn) +
                ", samples = " + std::to_string(spec.n_samples),
            "dc_power[1] = " + format_double(spec.dc_power),
            "resolution_bandwidth[" + unit + "] = " +
                format_double(spec.resolution_bandwidth)};
        table.columns = {"omega[" + unit + "]", "power[1]", "LnS[1]"};
        table.data = {spec.frequencies, spec.power, spec.log_power};
        outputs.add(write_table(out_dir, "spectrum", table, rc.settings.format));

        std::size_t peak = 1;
        for (std::size_t k = 1; k < spec.power.size(); ++k)
            if (spec.power[k] > spec.power[peak]) peak = k;
        char buf[160];
        std::snprintf(buf, sizeof buf, "peak at omega = %.6g %s, LnS = %.4g",
                      spec.frequencies[peak], unit.c_str(), spec.log_power[peak]);
        return std::string(buf);
    });
}

int cmd_lyapunov(const ResolvedConfig& rc, const fs::path& out_dir,
                 const std::string& command_line) {
    return run_command(rc, out_dir, command_line, "lyapunov", [&](Outputs& outputs) {
        const double gamma = rc.physical.gamma;
        const TangentVector d0{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
        const LyapunovResult res =
            lyapunov_benettin(rc.settings.initial_state, d0, rc.reduced, rc.integrator,
                              analysis_t_a(rc), analysis_t_b(rc));

        json j;
        j["lambda_benettin_gamma"] = res.lambda_benettin;
        j["lambda_benettin_per_us"] = rate_gamma_to_per_us(res.lambda_benettin, gamma);
        j["lambda_slope_dI1_gamma"] = res.lambda_slope_dI1;
        j["lambda_slope_dI1_per_us"] =
            rate_gamma_to_per_us(res.lambda_slope_dI1, gamma);
        j["window_gamma"] = {res.window_t_a, res.window_t_b};
        j["window_us"] = {gamma_time_to_us(res.window_t_a, gamma),
                          gamma_time_to_us(res.window_t_b, gamma)};
        j["fit_residual"] = res.fit_residual;
        j["n_increments"] = res.n_increments;
        j["n_fit_points"] = res.n_fit_points;
        j["n_accepted_steps"] = res.stats.n_accepted;
        j["n_rhs_evaluations"] = res.stats.n_rhs;
        outputs.add(write_json_file(out_dir, "lyapunov.json", j));

        return "lambda = " + fmt_rate_us(res.lambda_benettin, gamma) +
               " (benettin), " + fmt_rate_us(res.lambda_slope_dI1, gamma) +
               " (dI1 slope)";
    });
}

int cmd_bifurcation(const ResolvedConfig& rc, const fs::path& out_dir,
                    const std::string& command_line) {
    return run_command(rc, out_dir, command_line, "bifurcation", [&](Outputs& outputs) {
        if (rc.settings.control_values.empty())
            throw ParseError("bifurcation needs 'values' (list or start:stop:count)");
        const BifurcationDiagram diagram = bifurcation_scan(
            rc.reduced, rc.settings.control, rc.settings.control_values, rc.integrator,
            analysis_t_a(rc), analysis_t_b(rc));

        Table table;
        table.comments = {
            "I1 local maxima vs " + diagram.control + " over t = [" +
                format_double(diagram.window_t_a) + ", " +
                format_double(diagram.window_t_b) + "] (1/gamma)",
            "cluster_tol = " + format_double(rc.settings.cluster_tol)};
        table.columns = {diagram.control + "[gamma]", "I1_max[1]"};
        table.data.resize(2);

        Table clusters;
        clusters.columns = {diagram.control + "[gamma]", "n_clusters[1]",
                            "n_maxima[1]"};
        clusters.data.resize(3);

        std::size_t failed = 0;
        json errors = json::array();
        for (const auto& point : diagram.points) {
            if (!point.error.empty()) {
                ++failed;
                errors.push_back({{"value", point.value}, {"error", point.error}});
                continue;
            }
            for (const double m : point.maxima) {
                table.data[0].push_back(point.value);
                table.data[1].push_back(m);
            }
            clusters.data[0].push_back(point.value);
            clusters.data[1].push_back(static_cast<double>(
                cluster_count(point.maxima, rc.settings.cluster_tol)));
            clusters.data[2].push_back(static_cast<double>(point.maxima.size()));
        }
        outputs.add(write_table(out_dir, "bifurcation", table, rc.settings.format));
        outputs.add(
            write_table(out_dir, "bifurcation_clusters", clusters, rc.settings.format));
        if (failed > 0)
            outputs.add(write_json_file(out_dir, "bifurcation_errors.json", errors));

        char buf[160];
        std::snprintf(buf, sizeof buf, "points = %zu (failed = %zu), maxima = %zu",
                      diagram.points.size(), failed, table.data[0].size());
        return std::string(buf);
    });
}

int cmd_phase(const ResolvedConfig& rc, const fs::path& out_dir,
              const std::string& command_line) {
    return run_command(rc, out_dir, command_line, "phase_diagram", [&](Outputs& outputs) {
        const std::vector<double> j_values = rc.settings.control_values.empty()
                                                 ? linspace(0.0, 2.0, 101)
                                                 : rc.settings.control_values;
        const std::vector<double> k_values = rc.settings.kappa_values.empty()
                                                 ? linspace(-1.0, 1.0, 101)
                                                 : rc.settings.kappa_values;
        const auto labels = phase_diagram_scan(j_values, k_values, rc.reduced.gamma);

        Table table;
        table.comments = {
            "linear phase classification on the (J, kappa) grid",
            "phase codes: 0 = PT_SYMMETRIC, 1 = PT_BROKEN, 2 = PASSIVE_PASSIVE, "
            "3 = EXCEPTIONAL_POINT",
            "exceptional point: J = (gamma + kappa)/4"};
        table.columns = {"J[gamma]", "kappa[gamma]", "phase_code[1]"};
        table.data.resize(3);
        for (std::size_t i = 0; i < k_values.size(); ++i) {
            for (std::size_t jj = 0; jj < j_values.size(); ++jj) {
                table.data[0].push_back(j_values[jj]);
                table.data[1].push_back(k_values[i]);
                table.data[2].push_back(phase_code(labels[i][jj]));
            }
        }
        outputs.add(write_table(out_dir, "phase_diagram", table, rc.settings.format));

        char buf[96];
        std::snprintf(buf, sizeof buf, "grid = %zu x %zu points", j_values.size(),
                      k_values.size());
        return std::string(buf);
    });
}

int cmd_onset(const ResolvedConfig& rc, const fs::path& out_dir,
              const std::string& command_line) {
    return run_command(rc, out_dir, command_line, "onset", [&](Outputs& outputs) {
        const double gamma = rc.physical.gamma;
        const OnsetDetector& det = rc.settings.detector;

        if (!rc.settings.drive_values.empty()) {
            const auto curve =
                onset_curve(rc.settings.drive_values, rc.reduced, rc.integrator, det,
                            rc.settings.horizon_cap);
            Table table;
            table.comments = {
                "chaos onset time vs drive amplitude",
                "detector: W = " + format_double(det.window) +
                    " (1/gamma), threshold = " + format_double(det.lambda_threshold) +
                    " (gamma), linear_margin = " +
                    format_double(det.linear_margin)};
            table.columns = {"omega_d[gamma]",        "tau[1/gamma]", "tau[us]",
                             "lambda_required[gamma]", "lambda_full[gamma]",
                             "horizon[1/gamma]"};
            table.data.resize(6);
            table.text_column = "note";
            const double nan = std::numeric_limits<double>::quiet_NaN();
            std::size_t found = 0;
            for (const auto& point : curve) {
                const double tau = point.tau.value_or(nan);
                if (point.tau) ++found;
                table.data[0].push_back(point.drive);
                table.data[1].push_back(tau);
                table.data[2].push_back(point.tau ? gamma_time_to_us(tau, gamma) : nan);
                table.data[3].push_back(point.lambda_required);
                table.data[4].push_back(point.lambda_full);
                table.data[5].push_back(point.horizon_used);
                table.text_data.push_back(point.note);
            }
            outputs.add(write_table(out_dir, "onset_curve", table, rc.settings.format));
            char buf[96];
            std::snprintf(buf, sizeof buf, "onset found for %zu of %zu drives", found,
                          curve.size());
            return std::string(buf);
        }

        const OnsetResult res =
            chaos_onset_time(rc.settings.initial_state, rc.reduced, rc.integrator, det);
        json j;
        if (res.tau) {
            j["tau_gamma"] = *res.tau;
            j["tau_us"] = gamma_time_to_us(*res.tau, gamma);
        } else {
            j["tau_gamma"] = nullptr;
            j["tau_us"] = nullptr;
        }
        j["sigma_linear_gamma"] = res.sigma_linear;
        j["lambda_required_gamma"] = res.lambda_required;
        j["lambda_full_gamma"] = res.lambda_full;
        j["horizon_gamma"] = res.horizon;
        j["detector"] = {{"window", det.window},
                         {"lambda_threshold", det.lambda_threshold},
                         {"linear_margin", det.linear_margin},
                         {"sustain_time", std::isfinite(det.sustain_time)
                                              ? det.sustain_time
                                              : 0.0}};
        outputs.add(write_json_file(out_dir, "onset.json", j));

        Table trace;
        trace.comments = {"sliding-window Benettin estimate vs window start time"};
        trace.columns = {"t[1/gamma]", "t[us]", "lambda_w[gamma]", "lambda_w[per_us]"};
        trace.data.resize(4);
        for (std::size_t k = 0; k < res.trace_times.size(); ++k) {
            trace.data[0].push_back(res.trace_times[k]);
            trace.data[1].push_back(gamma_time_to_us(res.trace_times[k], gamma));
            trace.data[2].push_back(res.trace_lambda[k]);
            trace.data[3].push_back(rate_gamma_to_per_us(res.trace_lambda[k], gamma));
        }
        outputs.add(write_table(out_dir, "onset_trace", trace, rc.settings.format));

        if (res.tau) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "tau = %.4g us",
                          gamma_time_to_us(*res.tau, gamma));
            return std::string(buf);
        }
        return std::string("tau = none");
    });
}

int cmd_sweep(const ResolvedConfig& rc, const fs::path& out_dir,
              const std::string& command_line) {
    return run_command(rc, out_dir, command_line, "sweep", [&](Outputs& outputs) {
        if (rc.settings.control_values.empty())
            throw ParseError("sweep needs 'values' (list or start:stop:count)");

        SweepGrid grid;
        grid.base = rc.reduced;
        grid.axes.push_back({rc.settings.sweep_axis, rc.settings.control_values});
        if (!rc.settings.sweep_axis2.empty()) {
            if (rc.settings.sweep_values2.empty())
                throw ParseError("sweep axis2 set but 'values2' is empty");
            grid.axes.push_back({rc.settings.sweep_axis2, rc.settings.sweep_values2});
        }
        grid.integrator = rc.integrator;
        grid.workers = rc.settings.workers;
        grid.recipe.lyapunov = true;
        grid.recipe.flatness = rc.settings.sweep_flatness;
        grid.recipe.onset = rc.settings.sweep_onset;
        grid.recipe.window_t_a = analysis_t_a(rc);
        grid.recipe.window_t_b = analysis_t_b(rc);
        grid.recipe.flatness_band_lo = rc.settings.flatness_lo;
        grid.recipe.flatness_band_hi = rc.settings.flatness_hi;
        grid.recipe.detector = rc.settings.detector;

        const SweepResult result = run_sweep(grid);

        Table table;
        table.comments = {"parameter sweep; rates in units of gamma",
                          "engine_version = " + result.engine_version,
                          "config_hash = " + hash_hex(result.config_hash),
                          "phase codes: 0 = PT_SYMMETRIC, 1 = PT_BROKEN, "
                          "2 = PASSIVE_PASSIVE, 3 = EXCEPTIONAL_POINT"};
        table.columns.push_back(result.axis_names[0] + "[gamma]");
        if (result.axis_names.size() == 2)
            table.columns.push_back(result.axis_names[1] + "[gamma]");
        for (const char* c : {"phase_code[1]", "lambda_benettin[gamma]",
                              "lambda_slope_dI1[gamma]", "flatness[1]",
                              "tau[1/gamma]", "n_accepted[1]", "n_rhs[1]"})
            table.columns.emplace_back(c);
        table.data.resize(table.columns.size());
        table.text_column = "error";

        const double nan = std::numeric_limits<double>::quiet_NaN();
        std::size_t failed = 0;
        for (const auto& point : result.points) {
            std::size_t c = 0;
            table.data[c++].push_back(point.coords[0]);
            if (point.coords.size() == 2) table.data[c++].push_back(point.coords[1]);
            table.data[c++].push_back(phase_code(point.phase));
            table.data[c++].push_back(point.lambda_benettin);
            table.data[c++].push_back(point.lambda_slope_dI1);
            table.data[c++].push_back(point.flatness);
            table.data[c++].push_back(point.tau ? *point.tau : nan);
            table.data[c++].push_back(static_cast<double>(point.n_accepted));
            table.data[c++].push_back(static_cast<double>(point.n_rhs));
            table.text_data.push_back(point.error);
            if (!point.error.empty()) ++failed;
        }
        outputs.add(write_table(out_dir, "sweep", table, rc.settings.format));

        char buf[96];
        std::snprintf(buf, sizeof buf, "points = %zu (failed = %zu), workers = %u",
                      result.points.size(), failed, grid.workers);
        return std::string(buf);
    });
}

}  // namespace ptchaos
