// ptchaos: simulate and analyze a PT-symmetric optomechanical dimer.
// Subcommands wrap the library pipelines; all physics configuration goes
// through presets, JSON config files and --set key=value overrides.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ptchaos/io.hpp"
#include "ptchaos/params.hpp"

namespace {

struct CommonFlags {
    std::string preset;
    std::string config;
    std::string out = ".";
    std::vector<std::string> sets;
    std::string t_end;
    std::string window;
    std::string format;
    int workers = -1;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("--preset", flags.preset,
                    "parameter preset: fig2, fig3, fig4, fig5ab, fig5c");
    sub->add_option("--config", flags.config,
                    "JSON config file (a run manifest is accepted too)");
    sub->add_option("--out", flags.out, "output directory (default: .)")
        ->envname("PTCHAOS_OUT");
    sub->add_option("--set", flags.sets,
                    "override key=value with unit suffixes, repeatable "
                    "(e.g. --set tunneling=0.2g --set power=1uW)");
    sub->add_option("--workers", flags.workers, "sweep worker threads (0 = auto)");
    sub->add_option("--t-end", flags.t_end,
                    "integration horizon (e.g. 10us or 62.83)");
    sub->add_option("--window", flags.window,
                    "analysis window t_a:t_b (e.g. 8us:9us)");
    sub->add_option("--format", flags.format, "data file format")
        ->check(CLI::IsMember({"csv", "json"}));
}

std::vector<std::string> build_overrides(const CommonFlags& flags) {
    std::vector<std::string> overrides = flags.sets;
    if (!flags.window.empty()) {
        const auto colon = flags.window.find(':');
        if (colon == std::string::npos || colon == 0 ||
            colon + 1 >= flags.window.size())
            throw ptchaos::ParseError("--window expects t_a:t_b, got '" +
                                      flags.window + "'");
        overrides.push_back("window_t_a=" + flags.window.substr(0, colon));
        overrides.push_back("window_t_b=" + flags.window.substr(colon + 1));
    }
    if (!flags.t_end.empty()) overrides.push_back("t_end=" + flags.t_end);
    if (flags.workers >= 0)
        overrides.push_back("workers=" + std::to_string(flags.workers));
    if (!flags.format.empty()) overrides.push_back("format=" + flags.format);
    return overrides;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PT-symmetric optomechanics: chaos simulation and analysis"};
    app.require_subcommand(1);

    std::string command_line;
    for (int i = 0; i < argc; ++i) {
        if (i) command_line += " ";
        command_line += argv[i];
    }

    using Command = int (*)(const ptchaos::ResolvedConfig&,
                            const std::filesystem::path&, const std::string&);
    const std::vector<std::pair<std::string, Command>> commands = {
        {"simulate", ptchaos::cmd_simulate},
        {"spectrum", ptchaos::cmd_spectrum},
        {"lyapunov", ptchaos::cmd_lyapunov},
        {"bifurcation", ptchaos::cmd_bifurcation},
        {"phase", ptchaos::cmd_phase},
        {"onset", ptchaos::cmd_onset},
        {"sweep", ptchaos::cmd_sweep},
    };
    const std::vector<std::string> descriptions = {
        "integrate the equations of motion and write the sampled time series",
        "power spectrum of an intensity/displacement observable",
        "largest Lyapunov exponent (Benettin and dI1-slope estimates)",
        "I1-maxima bifurcation scan over a control parameter",
        "closed-form (J, kappa) phase diagram",
        "chaos onset time (single run, or a curve over drive_values)",
        "deterministic parallel parameter sweep",
    };

    int exit_code = 0;
    std::vector<std::shared_ptr<CommonFlags>> flag_sets;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto flags = std::make_shared<CommonFlags>();
        flag_sets.push_back(flags);
        CLI::App* sub = app.add_subcommand(commands[i].first, descriptions[i]);
        add_common(sub, *flags);
        const Command fn = commands[i].second;
        sub->callback([&exit_code, flags, fn, &command_line] {
            try {
                const auto preset = flags->preset.empty()
                                        ? std::nullopt
                                        : std::optional<std::string>(flags->preset);
                const auto config = flags->config.empty()
                                        ? std::nullopt
                                        : std::optional<std::string>(flags->config);
                const ptchaos::ResolvedConfig rc =
                    ptchaos::resolve_config(preset, config, build_overrides(*flags));
                exit_code = fn(rc, flags->out, command_line);
            } catch (const std::exception& e) {
                std::cerr << "ptchaos: error: " << e.what() << "\n";
                exit_code = 1;
            }
        });
    }

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
