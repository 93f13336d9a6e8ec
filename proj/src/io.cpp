#include "ptchaos/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ptchaos/textutil.hpp"

namespace ptchaos {
namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.283185307179586476925286766559005768;

struct SplitValue {
    double number = 0.0;
    std::string suffix;
};

SplitValue split_value(const std::string& text, const std::string& key) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](unsigned char c) { return std::isspace(c); }),
            s.end());
    if (s.empty()) throw ParseError("empty value for key '" + key + "'");
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    SplitValue out;
    const auto [ptr, ec] = std::from_chars(begin, end, out.number);
    if (ec != std::errc() || ptr == begin)
        throw ParseError("malformed number in '" + text + "' for key '" + key + "'");
    out.suffix.assign(ptr, end);
    return out;
}

double frequency_multiplier(const std::string& suffix) {
    // Ordinary-frequency suffixes carry the 2*pi into angular units.
    if (suffix == "Hz") return kTwoPi;
    if (suffix == "kHz") return kTwoPi * 1e3;
    if (suffix == "MHz") return kTwoPi * 1e6;
    if (suffix == "GHz") return kTwoPi * 1e9;
    if (suffix == "THz") return kTwoPi * 1e12;
    return 0.0;
}

}  // namespace

double parse_rate(const std::string& text, double gamma) {
    const SplitValue v = split_value(text, "rate");
    if (v.suffix.empty() || v.suffix == "g") return v.number;
    if (v.suffix == "rads") return v.number / gamma;
    if (const double mult = frequency_multiplier(v.suffix); mult != 0.0)
        return v.number * mult / gamma;
    throw ParseError("unknown rate unit '" + v.suffix + "' in '" + text + "'");
}

double parse_absolute_rate(const std::string& text, const std::string& key) {
    const SplitValue v = split_value(text, key);
    if (v.suffix == "g")
        throw ParseError("key '" + key + "' sets the gamma scale and cannot be "
                         "given in gamma-relative units");
    if (v.suffix.empty() || v.suffix == "rads") return v.number;
    if (const double mult = frequency_multiplier(v.suffix); mult != 0.0)
        return v.number * mult;
    throw ParseError("unknown rate unit '" + v.suffix + "' for key '" + key + "'");
}

double parse_time(const std::string& text, double gamma) {
    const SplitValue v = split_value(text, "time");
    if (v.suffix.empty() || v.suffix == "g") return v.number;
    if (v.suffix == "s") return v.number * gamma;
    if (v.suffix == "ms") return v.number * 1e-3 * gamma;
    if (v.suffix == "us") return v.number * 1e-6 * gamma;
    if (v.suffix == "ns") return v.number * 1e-9 * gamma;
    throw ParseError("unknown time unit '" + v.suffix + "' in '" + text + "'");
}

double parse_power(const std::string& text) {
    const SplitValue v = split_value(text, "power");
    if (v.suffix.empty() || v.suffix == "W") return v.number;
    if (v.suffix == "mW") return v.number * 1e-3;
    if (v.suffix == "uW" || v.suffix == "µW" || v.suffix == "μW")
        return v.number * 1e-6;
    if (v.suffix == "nW") return v.number * 1e-9;
    if (v.suffix == "pW") return v.number * 1e-12;
    if (v.suffix == "fW") return v.number * 1e-15;
    throw ParseError("unknown power unit '" + v.suffix + "' in '" + text + "'");
}

double parse_number(const std::string& text, const std::string& key) {
    const SplitValue v = split_value(text, key);
    if (!v.suffix.empty())
        throw ParseError("key '" + key + "' takes a bare number, got '" + text + "'");
    return v.number;
}

namespace {

enum class KeyKind {
    Rate,          // gamma-relative
    AbsoluteRate,  // rad/s (gamma, omega_c)
    Time,          // 1/gamma
    Power,         // watts
    Number,
    Integer,
    Boolean,
    Keyword,
    RateList,
    KeywordArg,  // string passed through with validation at finalize
};

struct KeySpec {
    KeyKind kind;
    const char* canonical;  // alias target, or nullptr
};

const std::map<std::string, KeySpec>& key_table() {
    static const std::map<std::string, KeySpec> table = {
        {"omega_c", {KeyKind::AbsoluteRate, nullptr}},
        {"gamma", {KeyKind::AbsoluteRate, nullptr}},
        {"omega_m", {KeyKind::Rate, nullptr}},
        {"kappa", {KeyKind::Rate, nullptr}},
        {"gamma_m", {KeyKind::Rate, nullptr}},
        {"g0", {KeyKind::Rate, nullptr}},
        {"tunneling", {KeyKind::Rate, nullptr}},
        {"J", {KeyKind::Rate, "tunneling"}},
        {"delta_c", {KeyKind::Rate, nullptr}},
        {"power", {KeyKind::Power, nullptr}},
        {"drive_amp", {KeyKind::Rate, nullptr}},
        {"x0", {KeyKind::Number, nullptr}},
        {"p0", {KeyKind::Number, nullptr}},
        {"a1_re0", {KeyKind::Number, nullptr}},
        {"a1_im0", {KeyKind::Number, nullptr}},
        {"a2_re0", {KeyKind::Number, nullptr}},
        {"a2_im0", {KeyKind::Number, nullptr}},
        {"rel_tol", {KeyKind::Number, nullptr}},
        {"abs_tol", {KeyKind::Number, nullptr}},
        {"max_step", {KeyKind::Time, nullptr}},
        {"sample_dt", {KeyKind::Time, nullptr}},
        {"t_end", {KeyKind::Time, nullptr}},
        {"renorm_interval", {KeyKind::Time, nullptr}},
        {"window_t_a", {KeyKind::Time, nullptr}},
        {"window_t_b", {KeyKind::Time, nullptr}},
        {"onset_window", {KeyKind::Time, nullptr}},
        {"onset_threshold", {KeyKind::Rate, nullptr}},
        {"onset_margin", {KeyKind::Rate, nullptr}},
        {"onset_sustain", {KeyKind::Time, nullptr}},
        {"horizon_cap", {KeyKind::Time, nullptr}},
        {"spectrum_window", {KeyKind::Keyword, nullptr}},
        {"freq_unit", {KeyKind::Keyword, nullptr}},
        {"observable", {KeyKind::Keyword, nullptr}},
        {"control", {KeyKind::Keyword, nullptr}},
        {"axis", {KeyKind::Keyword, nullptr}},
        {"axis2", {KeyKind::Keyword, nullptr}},
        {"format", {KeyKind::Keyword, nullptr}},
        {"values", {KeyKind::RateList, nullptr}},
        {"values2", {KeyKind::RateList, nullptr}},
        {"kappa_values", {KeyKind::RateList, nullptr}},
        {"drive_values", {KeyKind::RateList, nullptr}},
        {"cluster_tol", {KeyKind::Number, nullptr}},
        {"flatness_lo", {KeyKind::Rate, nullptr}},
        {"flatness_hi", {KeyKind::Rate, nullptr}},
        {"workers", {KeyKind::Integer, nullptr}},
        {"sweep_flatness", {KeyKind::Boolean, nullptr}},
        {"sweep_onset", {KeyKind::Boolean, nullptr}},
    };
    return table;
}

/// Raw value of a key: a JSON scalar or array, plus the layer that set it.
struct RawEntry {
    json value;
    int layer = -1;
    int order = -1;  // application order, for last-wins within a layer
};

struct RawConfig {
    std::map<std::string, RawEntry> entries;
    int counter = 0;

    void set(const std::string& key_in, json value, int layer) {
        const auto it = key_table().find(key_in);
        if (it == key_table().end())
            throw ParseError("unknown config key '" + key_in + "'");
        const std::string key =
            it->second.canonical ? it->second.canonical : key_in;
        entries[key] = RawEntry{std::move(value), layer, counter++};
    }
    const RawEntry* find(const std::string& key) const {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }
};

std::string scalar_to_string(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    throw ParseError("key '" + key + "' has a non-scalar value");
}

double typed_rate(const RawConfig& raw, const std::string& key, double gamma,
                  double fallback) {
    const RawEntry* e = raw.find(key);
    if (!e) return fallback;
    return parse_rate(scalar_to_string(e->value, key), gamma);
}

double typed_time(const RawConfig& raw, const std::string& key, double gamma,
                  double fallback) {
    const RawEntry* e = raw.find(key);
    if (!e) return fallback;
    return parse_time(scalar_to_string(e->value, key), gamma);
}

double typed_number(const RawConfig& raw, const std::string& key, double fallback) {
    const RawEntry* e = raw.find(key);
    if (!e) return fallback;
    return parse_number(scalar_to_string(e->value, key), key);
}

std::string typed_keyword(const RawConfig& raw, const std::string& key,
                          const std::string& fallback,
                          const std::vector<std::string>& allowed) {
    const RawEntry* e = raw.find(key);
    std::string v = fallback;
    if (e) {
        if (!e->value.is_string())
            throw ParseError("key '" + key + "' expects a string");
        v = e->value.get<std::string>();
    }
    if (!allowed.empty() &&
        std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        std::string msg = "key '" + key + "' must be one of:";
        for (const auto& a : allowed) msg += " " + a;
        throw ParseError(msg + "; got '" + v + "'");
    }
    return v;
}

bool typed_bool(const RawConfig& raw, const std::string& key, bool fallback) {
    const RawEntry* e = raw.find(key);
    if (!e) return fallback;
    if (e->value.is_boolean()) return e->value.get<bool>();
    const std::string s = scalar_to_string(e->value, key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ParseError("key '" + key + "' expects true or false, got '" + s + "'");
}

/// Rate lists accept a JSON array, a comma-separated string, or the
/// linspace form "start:stop:count".
std::vector<double> typed_rate_list(const RawConfig& raw, const std::string& key,
                                    double gamma) {
    const RawEntry* e = raw.find(key);
    std::vector<double> out;
    if (!e) return out;
    auto parse_one = [&](const json& v) {
        out.push_back(parse_rate(scalar_to_string(v, key), gamma));
    };
    if (e->value.is_array()) {
        for (const auto& v : e->value) parse_one(v);
        return out;
    }
    const std::string s = scalar_to_string(e->value, key);
    const auto n_colon = std::count(s.begin(), s.end(), ':');
    if (n_colon == 2) {
        std::istringstream is(s);
        std::string start, stop, count;
        std::getline(is, start, ':');
        std::getline(is, stop, ':');
        std::getline(is, count, ':');
        const double a = parse_rate(start, gamma);
        const double b = parse_rate(stop, gamma);
        const double nf = parse_number(count, key);
        const auto n = static_cast<long long>(nf);
        if (n < 2 || static_cast<double>(n) != nf)
            throw ParseError("key '" + key + "': linspace count must be an integer >= 2");
        for (long long i = 0; i < n; ++i)
            out.push_back(a + (b - a) * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
        return out;
    }
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (!item.empty()) out.push_back(parse_rate(item, gamma));
    }
    if (out.empty()) throw ParseError("key '" + key + "' has an empty value list");
    return out;
}

void apply_layer(RawConfig& raw, const json& obj, int layer) {
    if (!obj.is_object()) throw ParseError("config must be a JSON object");
    for (const auto& [key, value] : obj.items()) raw.set(key, value, layer);
}

json builtin_defaults() {
    // Common caption parameter set: a PT-symmetric active-passive dimer
    // driven at the red sideband with a modest drive.
    return json{
        {"omega_m", 23.0},  {"gamma_m", 0.038}, {"g0", 7.4e-5},
        {"kappa", 0.8},     {"tunneling", 1.0}, {"drive_amp", 0.5},
        {"gamma", kDefaultGamma}, {"omega_c", 1.9e14},
    };
}

json preset_config(const std::string& name) {
    if (name == "fig2")
        return json{{"tunneling", 0.46}, {"power", 1e-6}};
    if (name == "fig3")
        return json{{"tunneling", 1.0}, {"drive_amp", 0.5}};
    if (name == "fig4")
        return json{{"tunneling", 0.2}, {"drive_amp", 0.5}};
    if (name == "fig5ab")
        return json{{"tunneling", 1.0}, {"kappa", -0.8}, {"drive_amp", 0.5}};
    if (name == "fig5c")
        return json{{"tunneling", 0.2}, {"kappa", 0.8}, {"drive_amp", 0.5}};
    throw ParseError("unknown preset '" + name +
                     "' (available: fig2 fig3 fig4 fig5ab fig5c)");
}

}  // namespace

ResolvedConfig resolve_config(const std::optional<std::string>& preset,
                              const std::optional<std::string>& config_path,
                              const std::vector<std::string>& overrides) {
    RawConfig raw;
    apply_layer(raw, builtin_defaults(), 0);
    if (preset) apply_layer(raw, preset_config(*preset), 1);

    if (config_path) {
        std::ifstream in(*config_path);
        if (!in) throw ParseError("cannot open config file '" + *config_path + "'");
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ParseError("config file '" + *config_path + "': " + e.what());
        }
        // A manifest is accepted transparently through its config echo.
        if (doc.is_object() && doc.contains("config") && doc["config"].is_object())
            doc = doc["config"];
        apply_layer(raw, doc, 2);
    }

    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError("override '" + kv + "' is not of the form key=value");
        raw.set(kv.substr(0, eq), json(kv.substr(eq + 1)), 3);
    }

    ResolvedConfig rc;
    PhysicalParams& ph = rc.physical;

    // The gamma scale resolves first; every gamma-relative value needs it.
    const RawEntry* ge = raw.find("gamma");
    ph.gamma = ge ? parse_absolute_rate(scalar_to_string(ge->value, "gamma"), "gamma")
                  : kDefaultGamma;
    const RawEntry* oc = raw.find("omega_c");
    ph.omega_c = oc ? parse_absolute_rate(scalar_to_string(oc->value, "omega_c"),
                                          "omega_c")
                    : 1.9e14;

    ph.omega_m = typed_rate(raw, "omega_m", ph.gamma, 0.0) * ph.gamma;
    ph.kappa = typed_rate(raw, "kappa", ph.gamma, 0.0) * ph.gamma;
    ph.gamma_m = typed_rate(raw, "gamma_m", ph.gamma, 0.0) * ph.gamma;
    ph.g0 = typed_rate(raw, "g0", ph.gamma, 0.0) * ph.gamma;
    ph.tunneling = typed_rate(raw, "tunneling", ph.gamma, 0.0) * ph.gamma;

    // The paper's operating point: detuning defaults to omega_m.
    const RawEntry* dc = raw.find("delta_c");
    ph.delta_c = dc ? parse_rate(scalar_to_string(dc->value, "delta_c"), ph.gamma) *
                          ph.gamma
                    : ph.omega_m;

    const RawEntry* pw = raw.find("power");
    const RawEntry* da = raw.find("drive_amp");
    if (pw && da) {
        const double watts = parse_power(scalar_to_string(pw->value, "power"));
        const double amp =
            parse_rate(scalar_to_string(da->value, "drive_amp"), ph.gamma) * ph.gamma;
        if (pw->layer == da->layer) {
            const double amp_from_p =
                drive_amplitude_from_power(watts, ph.gamma, ph.omega_c - ph.delta_c);
            if (std::abs(amp_from_p - amp) >
                1e-6 * std::max(std::abs(amp_from_p), std::abs(amp)))
                throw ParseError(
                    "conflicting keys 'power' and 'drive_amp': power implies "
                    "Omega_d = " +
                    format_double(amp_from_p / ph.gamma) + "g but drive_amp = " +
                    format_double(amp / ph.gamma) + "g");
            ph.drive = DriveSpec::amplitude(amp);
        } else {
            // Later layer wins and replaces the drive specification.
            ph.drive = pw->order > da->order ? DriveSpec::power(watts)
                                             : DriveSpec::amplitude(amp);
        }
    } else if (pw) {
        ph.drive = DriveSpec::power(parse_power(scalar_to_string(pw->value, "power")));
    } else if (da) {
        ph.drive = DriveSpec::amplitude(
            parse_rate(scalar_to_string(da->value, "drive_amp"), ph.gamma) * ph.gamma);
    }

    ph.validate();
    rc.reduced = reduce_params(ph);

    rc.integrator = IntegratorConfig::defaults_for(rc.reduced);
    rc.integrator.rel_tol = typed_number(raw, "rel_tol", rc.integrator.rel_tol);
    rc.integrator.abs_tol = typed_number(raw, "abs_tol", rc.integrator.abs_tol);
    rc.integrator.max_step = typed_time(raw, "max_step", ph.gamma, rc.integrator.max_step);
    rc.integrator.sample_dt =
        typed_time(raw, "sample_dt", ph.gamma, rc.integrator.sample_dt);
    rc.integrator.t_end = typed_time(raw, "t_end", ph.gamma, rc.integrator.t_end);
    rc.integrator.renorm_interval =
        typed_time(raw, "renorm_interval", ph.gamma, rc.integrator.renorm_interval);
    rc.integrator.validate();

    SimSettings& st = rc.settings;
    st.initial_state.x = typed_number(raw, "x0", 0.0);
    st.initial_state.p = typed_number(raw, "p0", 0.0);
    st.initial_state.a1_re = typed_number(raw, "a1_re0", 0.0);
    st.initial_state.a1_im = typed_number(raw, "a1_im0", 0.0);
    st.initial_state.a2_re = typed_number(raw, "a2_re0", 0.0);
    st.initial_state.a2_im = typed_number(raw, "a2_im0", 0.0);

    st.window_t_a = typed_time(raw, "window_t_a", ph.gamma, -1.0);
    st.window_t_b = typed_time(raw, "window_t_b", ph.gamma, -1.0);

    st.detector.window = typed_time(raw, "onset_window", ph.gamma, st.detector.window);
    st.detector.lambda_threshold =
        typed_rate(raw, "onset_threshold", ph.gamma, st.detector.lambda_threshold);
    st.detector.linear_margin =
        typed_rate(raw, "onset_margin", ph.gamma, st.detector.linear_margin);
    const double sustain = typed_time(raw, "onset_sustain", ph.gamma, 0.0);
    st.detector.sustain_time =
        sustain > 0.0 ? sustain : std::numeric_limits<double>::infinity();

    st.horizon_cap = typed_time(raw, "horizon_cap", ph.gamma, st.horizon_cap);

    const std::string sw = typed_keyword(raw, "spectrum_window", "hann",
                                         {"hann", "rectangular"});
    st.spectrum_window = sw == "hann" ? WindowFn::Hann : WindowFn::Rectangular;
    const std::string fu = typed_keyword(raw, "freq_unit", "gamma",
                                         {"gamma", "omega_m"});
    st.freq_unit = fu == "gamma" ? FrequencyUnit::Gamma : FrequencyUnit::OmegaM;
    st.observable = typed_keyword(raw, "observable", "i1", {"i1", "i2", "x"});
    st.control = typed_keyword(raw, "control", "tunneling",
                               {"tunneling", "kappa", "omega_d_amp"});
    st.sweep_axis = typed_keyword(raw, "axis", "tunneling",
                                  {"omega_m", "gamma_m", "g0", "tunneling", "delta_c",
                                   "kappa", "omega_d_amp"});
    st.sweep_axis2 = typed_keyword(raw, "axis2", "",
                                   {"", "omega_m", "gamma_m", "g0", "tunneling",
                                    "delta_c", "kappa", "omega_d_amp"});
    st.format = typed_keyword(raw, "format", "csv", {"csv", "json"});

    st.control_values = typed_rate_list(raw, "values", ph.gamma);
    st.sweep_values2 = typed_rate_list(raw, "values2", ph.gamma);
    st.kappa_values = typed_rate_list(raw, "kappa_values", ph.gamma);
    st.drive_values = typed_rate_list(raw, "drive_values", ph.gamma);

    st.cluster_tol = typed_number(raw, "cluster_tol", st.cluster_tol);
    st.flatness_lo = typed_rate(raw, "flatness_lo", ph.gamma, st.flatness_lo);
    st.flatness_hi = typed_rate(raw, "flatness_hi", ph.gamma, st.flatness_hi);

    const double workers = typed_number(raw, "workers", 1.0);
    if (workers < 0.0 || workers != std::floor(workers))
        throw ParseError("key 'workers' must be a non-negative integer");
    st.workers = static_cast<unsigned>(workers);

    st.sweep_flatness = typed_bool(raw, "sweep_flatness", false);
    st.sweep_onset = typed_bool(raw, "sweep_onset", false);

    if (st.detector.linear_margin < 0.0)
        throw ParseError("key 'onset_margin' must be >= 0");
    if (st.window_t_a >= 0.0 && st.window_t_b >= 0.0 &&
        !(st.window_t_a < st.window_t_b))
        throw ParseError("keys 'window_t_a'/'window_t_b' must satisfy t_a < t_b");

    return rc;
}

nlohmann::json config_to_json(const ResolvedConfig& rc) {
    const PhysicalParams& ph = rc.physical;
    const SimSettings& st = rc.settings;
    json j;
    j["gamma"] = ph.gamma;
    j["omega_c"] = ph.omega_c;
    j["omega_m"] = ph.omega_m / ph.gamma;
    j["kappa"] = ph.kappa / ph.gamma;
    j["gamma_m"] = ph.gamma_m / ph.gamma;
    j["g0"] = ph.g0 / ph.gamma;
    j["tunneling"] = ph.tunneling / ph.gamma;
    j["delta_c"] = ph.delta_c / ph.gamma;
    if (ph.drive.kind == DriveKind::Power)
        j["power"] = ph.drive.value;
    else
        j["drive_amp"] = ph.drive.value / ph.gamma;

    j["x0"] = st.initial_state.x;
    j["p0"] = st.initial_state.p;
    j["a1_re0"] = st.initial_state.a1_re;
    j["a1_im0"] = st.initial_state.a1_im;
    j["a2_re0"] = st.initial_state.a2_re;
    j["a2_im0"] = st.initial_state.a2_im;

    const IntegratorConfig& ic = rc.integrator;
    j["rel_tol"] = ic.rel_tol;
    j["abs_tol"] = ic.abs_tol;
    j["max_step"] = ic.max_step;
    j["sample_dt"] = ic.sample_dt;
    j["t_end"] = ic.t_end;
    j["renorm_interval"] = ic.renorm_interval;

    j["window_t_a"] = st.window_t_a;
    j["window_t_b"] = st.window_t_b;
    j["onset_window"] = st.detector.window;
    j["onset_threshold"] = st.detector.lambda_threshold;
    j["onset_margin"] = st.detector.linear_margin;
    j["onset_sustain"] =
        std::isfinite(st.detector.sustain_time) ? st.detector.sustain_time : 0.0;
    j["horizon_cap"] = st.horizon_cap;
    j["spectrum_window"] = to_string(st.spectrum_window);
    j["freq_unit"] = to_string(st.freq_unit);
    j["observable"] = st.observable;
    j["control"] = st.control;
    j["axis"] = st.sweep_axis;
    if (!st.sweep_axis2.empty()) j["axis2"] = st.sweep_axis2;
    if (!st.control_values.empty()) j["values"] = st.control_values;
    if (!st.sweep_values2.empty()) j["values2"] = st.sweep_values2;
    if (!st.kappa_values.empty()) j["kappa_values"] = st.kappa_values;
    if (!st.drive_values.empty()) j["drive_values"] = st.drive_values;
    j["cluster_tol"] = st.cluster_tol;
    j["flatness_lo"] = st.flatness_lo;
    j["flatness_hi"] = st.flatness_hi;
    j["workers"] = st.workers;
    j["sweep_flatness"] = st.sweep_flatness;
    j["sweep_onset"] = st.sweep_onset;
    j["format"] = st.format;
    return j;
}

std::string config_hash(const nlohmann::json& config) {
    return hash_hex(fnv1a64(config.dump()));
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

std::filesystem::path write_table(const std::filesystem::path& dir,
                                  const std::string& stem, const Table& table,
                                  const std::string& format) {
    const std::size_t n_rows = table.data.empty()
                                   ? table.text_data.size()
                                   : table.data.front().size();
    for (const auto& col : table.data)
        if (col.size() != n_rows)
            throw InvalidParameter("table columns have unequal lengths");
    if (!table.text_column.empty() && table.text_data.size() != n_rows)
        throw InvalidParameter("table text column has the wrong length");

    const std::filesystem::path path =
        dir / (stem + (format == "json" ? ".json" : ".csv"));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());

    if (format == "json") {
        json j;
        j["comments"] = table.comments;
        json cols = json::object();
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            cols[table.columns[c]] = table.data[c];
        if (!table.text_column.empty()) cols[table.text_column] = table.text_data;
        j["columns"] = cols;
        out << j.dump(2) << "\n";
        return path;
    }

    for (const auto& c : table.comments) out << "# " << c << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ",";
        out << table.columns[c];
    }
    if (!table.text_column.empty()) {
        if (!table.columns.empty()) out << ",";
        out << table.text_column;
    }
    out << "\n";
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < table.data.size(); ++c) {
            if (c) out << ",";
            out << format_double(table.data[c][r]);
        }
        if (!table.text_column.empty()) {
            if (!table.data.empty()) out << ",";
            out << csv_escape(table.text_data[r]);
        }
        out << "\n";
    }
    return path;
}

std::filesystem::path write_json_file(const std::filesystem::path& dir,
                                      const std::string& name,
                                      const nlohmann::json& payload) {
    const std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << payload.dump(2) << "\n";
    return path;
}

std::filesystem::path write_manifest(const std::filesystem::path& dir,
                                     const std::string& stem, const RunManifest& m,
                                     const ResolvedConfig& rc) {
    json j;
    j["tool"] = "ptchaos";
    j["version"] = kVersion;
    j["command"] = m.command;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["config"] = config_to_json(rc);
    j["config_hash"] = config_hash(j["config"]);
    j["outputs"] = m.outputs;
    return write_json_file(dir, stem + "_manifest.json", j);
}

}  // namespace ptchaos
