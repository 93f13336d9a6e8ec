#pragma once

// Configuration resolution (presets, config files, key=value overrides,
// unit suffixes), plot-ready table serialization (CSV or JSON) and run
// manifests with provenance hashes. Command implementations wrap one
// figure pipeline each and are invoked by the ptchaos CLI driver.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptchaos/analysis.hpp"
#include "ptchaos/integrate.hpp"
#include "ptchaos/model.hpp"
#include "ptchaos/params.hpp"

namespace ptchaos {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------
// Unit-suffixed value parsing. Internal storage is gamma-units: rates as
// multiples of gamma, times in 1/gamma. Bare rate numbers are read as
// gamma-relative ("0.46" == "0.46g"); Hz-family suffixes are ordinary
// frequencies and get the 2*pi; "rads" is rad/s. Bare times are 1/gamma;
// "us"/"ns"/"ms"/"s" are absolute. Power accepts W down to fW.

double parse_rate(const std::string& text, double gamma);
double parse_absolute_rate(const std::string& text, const std::string& key);
double parse_time(const std::string& text, double gamma);
double parse_power(const std::string& text);
double parse_number(const std::string& text, const std::string& key);

// ---------------------------------------------------------------------
// Resolved configuration: defaults < preset < config file < overrides.

/// Analysis and output settings that ride along with the physics.
struct SimSettings {
    SystemState initial_state;   ///< default: the zero state
    double window_t_a = -1.0;    ///< analysis window, gamma time; < 0 = unset
    double window_t_b = -1.0;
    OnsetDetector detector;
    WindowFn spectrum_window = WindowFn::Hann;
    FrequencyUnit freq_unit = FrequencyUnit::Gamma;
    std::string observable = "i1";      ///< spectrum input: i1 | i2 | x
    std::string control = "tunneling";  ///< bifurcation control parameter
    std::vector<double> control_values;  ///< bifurcation values / sweep axis / phase J grid
    std::vector<double> kappa_values;    ///< phase-diagram kappa grid
    std::string sweep_axis = "tunneling";
    std::string sweep_axis2;
    std::vector<double> sweep_values2;
    std::vector<double> drive_values;  ///< onset-curve drive amplitudes
    double cluster_tol = 0.02;
    double flatness_lo = 0.0;
    double flatness_hi = 0.0;  ///< <= 0: auto (0, 2*omega_m]
    double horizon_cap = 1256.6370614359172;  ///< 200 us
    bool sweep_flatness = false;
    bool sweep_onset = false;
    unsigned workers = 1;
    std::string format = "csv";  ///< data file format: csv | json
};

struct ResolvedConfig {
    PhysicalParams physical;
    ReducedParams reduced;
    IntegratorConfig integrator;
    SimSettings settings;
};

/// Applies defaults, then the named preset ("fig2", "fig3", "fig4",
/// "fig5ab", "fig5c"), then the config file (a JSON object, or a
/// manifest whose "config" node is reused), then key=value overrides, in
/// that order. Unknown keys, malformed units and inconsistent
/// power/drive_amp pairs raise ParseError naming the keys.
ResolvedConfig resolve_config(const std::optional<std::string>& preset,
                              const std::optional<std::string>& config_path,
                              const std::vector<std::string>& overrides);

/// Canonical JSON echo of a resolved configuration. Feeding it back
/// through resolve_config reproduces the identical configuration.
nlohmann::json config_to_json(const ResolvedConfig& rc);

/// Hex FNV-1a hash of the compact dump of a config echo.
std::string config_hash(const nlohmann::json& config);

// ---------------------------------------------------------------------
// Output files.

/// Column-oriented table: numeric columns plus an optional trailing text
/// column. Serialized as CSV ('#' comments, header row, shortest
/// round-trip decimals) or as a JSON object of column arrays.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  ///< column-major, equal lengths
    std::string text_column;                ///< empty = no text column
    std::vector<std::string> text_data;
};

/// Writes `stem`.csv or `stem`.json under dir; returns the path written.
std::filesystem::path write_table(const std::filesystem::path& dir,
                                  const std::string& stem, const Table& table,
                                  const std::string& format);

std::filesystem::path write_json_file(const std::filesystem::path& dir,
                                      const std::string& name,
                                      const nlohmann::json& payload);

struct RunManifest {
    std::string command;  ///< reconstructed invocation
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;  ///< file names relative to the out dir
};

/// Writes `<stem>_manifest.json` with version, config echo and hash.
std::filesystem::path write_manifest(const std::filesystem::path& dir,
                                     const std::string& stem, const RunManifest& m,
                                     const ResolvedConfig& rc);

// ---------------------------------------------------------------------
// Commands (exit code 0 on success; diagnostics on stderr; a one-line
// summary on stdout; partial outputs removed on failure).

int cmd_simulate(const ResolvedConfig& rc, const std::filesystem::path& out_dir,
                 const std::string& command_line);
int cmd_spectrum(const ResolvedConfig& rc, const std::filesystem::path& out_dir,
                 const std::string& command_line);
int cmd_lyapunov(const ResolvedConfig& rc, const std::filesystem::path& out_dir,
                 const std::string& command_line);
int cmd_bifurcation(const ResolvedConfig& rc, const std::filesystem::path& out_dir,
                    const std::string& command_line);
int cmd_phase(const ResolvedConfig& rc, const std::filesystem::path& out_dir,
              const std::string& command_line);
int cmd_onset(const ResolvedConfig& rc, const std::filesystem::path& out_dir,
              const std::string& command_line);
int cmd_sweep(const ResolvedConfig& rc, const std::filesystem::path& out_dir,
              const std::string& command_line);

}  // namespace ptchaos
