#include "eitmem/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "eitmem/dsp.hpp"
#include "json.hpp"

namespace eitmem {

using nlohmann::json;

void SequenceConfig::validate() const
{
    if (!(pump_duration > 0.0) || !(dark_period > 0.0) || lead < 0.0)
        throw ConfigError("sequence durations must be positive");
    if (n_realizations < 2)
        throw ConfigError("need at least two realizations");
    if (n_calibration < 100)
        throw ConfigError("shot-noise calibration needs at least 100 runs");
}

SweepKind parse_sweep_kind(std::string_view name)
{
    if (name == "storage_time")
        return SweepKind::storage_time;
    if (name == "sideband_frequency")
        return SweepKind::sideband_frequency;
    if (name == "input_phase")
        return SweepKind::input_phase;
    if (name == "larmor")
        return SweepKind::larmor;
    if (name == "control_power")
        return SweepKind::control_power;
    if (name == "dual_vs_single")
        return SweepKind::dual_vs_single;
    throw ConfigError("unknown sweep kind '" + std::string(name) + "'");
}

std::string_view to_string(SweepKind kind)
{
    switch (kind) {
    case SweepKind::storage_time:
        return "storage_time";
    case SweepKind::sideband_frequency:
        return "sideband_frequency";
    case SweepKind::input_phase:
        return "input_phase";
    case SweepKind::larmor:
        return "larmor";
    case SweepKind::control_power:
        return "control_power";
    case SweepKind::dual_vs_single:
        break;
    }
    return "dual_vs_single";
}

void SweepSpec::validate() const
{
    if (grid.empty())
        throw ConfigError("sweep grid is empty");
    for (double v : grid) {
        if (!std::isfinite(v))
            throw ConfigError("sweep grid holds a non-finite value");
        switch (kind) {
        case SweepKind::storage_time:
            if (v < 0.0)
                throw ConfigError("storage times must be non-negative");
            break;
        case SweepKind::sideband_frequency:
        case SweepKind::control_power:
        case SweepKind::dual_vs_single:
            if (!(v > 0.0))
                throw ConfigError("sweep values must be positive for this kind");
            break;
        case SweepKind::input_phase:
        case SweepKind::larmor:
            break;
        }
    }
    if (!(dual_frequency > 0.0))
        throw ConfigError("dual-sideband frequency must be positive");
}

void RunConfig::validate() const
{
    sequence.validate();
    const StorageSetup setup = resolve_setup(*this);
    setup.validate();
    if (setup.control.mode == ControlEnvelope::Mode::switched)
        check_switch_off(setup.pulse, setup.timeline);
    const AcquisitionConfig acq = resolve_acquisition(*this);
    acq.validate(setup.pulse.omega);
    // Keep the sideband and the pulse edges well inside the Nyquist band.
    const double nyquist = 0.5 * acq.sample_rate;
    if (setup.pulse.omega / kTwoPi > 0.8 * nyquist)
        throw ConfigError("sideband frequency above 80% of the Nyquist frequency");
    if (1.0 / setup.pulse.ramp > nyquist)
        throw ConfigError("signal pulse bandwidth exceeds the Nyquist frequency");
    if (input_power && *input_power < 0.0)
        throw ConfigError("input power must be non-negative");
    if (excess_noise && *excess_noise < 0.0)
        throw ConfigError("excess noise must be non-negative");
    if (n_cycles != 0 && (n_cycles < 2 || n_cycles > 4))
        throw ConfigError("n_cycles must be 0 (automatic) or 2 to 4");
    if (benchmark.enabled && !acq.noise)
        throw ConfigError("the T-V benchmark needs noise enabled");
    if (!(benchmark.margin_sigmas >= 0.0))
        throw ConfigError("margin_sigmas must be non-negative");
    if (sweep)
        sweep->validate();
}

int resolve_n_cycles(const RunConfig& config)
{
    const double omega = config.storage.pulse.omega;
    if (config.n_cycles != 0) {
        window_samples(omega, config.n_cycles, config.acquisition.sample_rate);
        return config.n_cycles;
    }
    for (int n = 2; n <= 4; ++n) {
        const double exact = n * config.acquisition.sample_rate * kTwoPi / omega;
        if (std::abs(exact - std::round(exact)) <= 1e-6 * exact)
            return n;
    }
    throw ConfigError("no window of 2 to 4 sideband periods holds a whole number of samples");
}

double resolve_excess(const RunConfig& config)
{
    return config.excess_noise.value_or(config.excess_table(config.storage.control.power));
}

StorageSetup resolve_setup(const RunConfig& config)
{
    StorageSetup setup = config.storage;
    const double window = resolve_n_cycles(config) * kTwoPi / setup.pulse.omega;
    // Analysis windows start at t = 0; a lead of whole windows puts a window
    // boundary on the pulse start.
    setup.pulse.start_time = window * std::ceil(config.sequence.lead / window - 1e-9);
    double magnitude = config.input_amplitude;
    if (config.input_power)
        magnitude = amplitude_from_power(*config.input_power, window, config.wavelength);
    setup.pulse.amplitude = std::polar(magnitude, config.input_phase);
    setup.phenomenological.excess_noise = resolve_excess(config);
    return setup;
}

AcquisitionConfig resolve_acquisition(const RunConfig& config)
{
    AcquisitionConfig acq = config.acquisition;
    acq.shot_noise_cycles = resolve_n_cycles(config);
    return acq;
}

namespace {

/// Reads keys of one JSON object and rejects anything not consumed.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name))
    {
        if (!j_.is_object())
            throw ConfigError("'" + name_ + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& target)
    {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null())
            return;
        try {
            target = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(name_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    void read(const char* key, std::optional<T>& target)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        if (j_.at(key).is_null()) {
            target.reset();
            return;
        }
        T value{};
        read(key, value);
        target = value;
    }

    /// Reads a frequency given in Hz into an angular frequency.
    void read_hz(const char* key, double& angular)
    {
        double hz = angular / kTwoPi;
        read(key, hz);
        angular = kTwoPi * hz;
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& child(const char* key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const
    {
        for (const auto& item : j_.items()) {
            if (!seen_.contains(item.key()))
                throw ConfigError("unknown key '" + name_ + "." + item.key() + "'");
        }
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

ControlEnvelope::Mode parse_mode(const std::string& s)
{
    if (s == "switched")
        return ControlEnvelope::Mode::switched;
    if (s == "always_on")
        return ControlEnvelope::Mode::always_on;
    if (s == "off")
        return ControlEnvelope::Mode::off;
    throw ConfigError("unknown control mode '" + s + "'");
}

std::string mode_name(ControlEnvelope::Mode m)
{
    switch (m) {
    case ControlEnvelope::Mode::switched:
        return "switched";
    case ControlEnvelope::Mode::always_on:
        return "always_on";
    case ControlEnvelope::Mode::off:
        break;
    }
    return "off";
}

void skip_if_present(Section& section, const char* key)
{
    if (section.has(key))
        (void)section.child(key);
}

RunConfig from_json(const json& root)
{
    RunConfig c;
    Section top(root, "config");
    top.read("name", c.name);
    std::string backend{to_string(c.backend)};
    top.read("backend", backend);
    c.backend = parse_backend(backend);
    top.read("seed", c.sequence.master_seed);
    // Provenance written next to the configuration in saved manifests.
    skip_if_present(top, "manifest");

    if (top.has("sequence")) {
        Section s(top.child("sequence"), "sequence");
        s.read("pump_duration", c.sequence.pump_duration);
        s.read("dark_period", c.sequence.dark_period);
        s.read("lead", c.sequence.lead);
        s.read("n_realizations", c.sequence.n_realizations);
        s.read("n_calibration", c.sequence.n_calibration);
        s.finish();
    }

    MediumParams& m = c.storage.medium;
    if (top.has("medium")) {
        Section s(top.child("medium"), "medium");
        s.read("temperature", m.temperature);
        std::optional<double> depth;
        s.read("optical_depth", depth);
        m.optical_depth = depth ? *depth : optical_depth_of_temperature(m.temperature);
        s.read_hz("gamma_e_hz", m.gamma_e);
        s.read("gamma_0", m.gamma_0);
        s.read("tau_m", m.tau_m);
        s.read_hz("larmor_hz", m.larmor);
        s.read("length", m.length);
        s.read("pumping_efficiency", m.pumping_efficiency);
        s.finish();
    }

    ControlField& ctl = c.storage.control;
    if (top.has("control")) {
        Section s(top.child("control"), "control");
        s.read("power", ctl.power);
        s.read("rabi2_per_watt", ctl.rabi2_per_watt);
        s.read("ramp", ctl.ramp);
        std::string mode = mode_name(ctl.mode);
        s.read("mode", mode);
        ctl.mode = parse_mode(mode);
        s.read("leakage_amp", ctl.leakage_amp);
        s.finish();
    }

    SignalPulse& p = c.storage.pulse;
    if (top.has("signal")) {
        Section s(top.child("signal"), "signal");
        s.read_hz("frequency_hz", p.omega);
        s.read("power", c.input_power);
        s.read("amplitude", c.input_amplitude);
        s.read("phase", c.input_phase);
        s.read("wavelength", c.wavelength);
        s.read("duration", p.duration);
        std::string shape{to_string(p.shape)};
        s.read("shape", shape);
        p.shape = parse_envelope_shape(shape);
        s.read("ramp", p.ramp);
        s.finish();
    }

    StorageTimeline& tl = c.storage.timeline;
    if (top.has("timeline")) {
        Section s(top.child("timeline"), "timeline");
        s.read("switch_off_delay", tl.switch_off_delay);
        s.read("hold", tl.hold);
        s.read("read_duration", tl.read_duration);
        s.finish();
    }

    PhenomenologicalModel& pm = c.storage.phenomenological;
    if (top.has("memory")) {
        Section s(top.child("memory"), "memory");
        s.read("eta0", pm.eta0);
        s.read("write_fraction", pm.write_fraction);
        s.read("readout_power_ratio", pm.readout_power_ratio);
        s.read("excess_noise", c.excess_noise);
        if (s.has("excess_table")) {
            std::vector<std::pair<double, double>> table;
            s.read("excess_table", table);
            if (table.empty())
                throw ConfigError("memory.excess_table must not be empty");
            for (std::size_t i = 1; i < table.size(); ++i) {
                if (!(table[i].first > table[i - 1].first))
                    throw ConfigError("memory.excess_table powers must increase");
            }
            c.excess_table.points = std::move(table);
        }
        s.read("output_dt", c.storage.output_dt);
        s.finish();
    }

    if (top.has("propagation")) {
        Section s(top.child("propagation"), "propagation");
        s.read("nz", c.storage.grid.nz);
        s.read("dt", c.storage.grid.dt);
        s.read("check_convergence", c.storage.grid.check_convergence);
        s.finish();
    }

    AcquisitionConfig& acq = c.acquisition;
    if (top.has("acquisition")) {
        Section s(top.child("acquisition"), "acquisition");
        s.read("sample_rate", acq.sample_rate);
        s.read("bits", acq.bits);
        s.read("full_scale", acq.full_scale);
        s.read("lo_phase", acq.lo_phase);
        s.read("lo_phase_jitter", acq.lo_phase_jitter);
        s.read("noise", acq.noise);
        s.read("quantize", acq.quantize);
        s.read("n_cycles", c.n_cycles);
        s.finish();
    }

    if (top.has("benchmark")) {
        Section s(top.child("benchmark"), "benchmark");
        s.read("enabled", c.benchmark.enabled);
        s.read("margin_sigmas", c.benchmark.margin_sigmas);
        s.finish();
    }

    if (top.has("sweep")) {
        Section s(top.child("sweep"), "sweep");
        SweepSpec spec;
        std::string kind;
        s.read("kind", kind);
        spec.kind = parse_sweep_kind(kind);
        s.read("grid", spec.grid);
        s.read("larmor_tracking", spec.larmor_tracking);
        s.read_hz("dual_frequency_hz", spec.dual_frequency);
        s.finish();
        c.sweep = std::move(spec);
    }
    top.finish();
    return c;
}

json to_json(const RunConfig& c)
{
    const MediumParams& m = c.storage.medium;
    const ControlField& ctl = c.storage.control;
    const SignalPulse& p = c.storage.pulse;
    const StorageTimeline& tl = c.storage.timeline;
    const PhenomenologicalModel& pm = c.storage.phenomenological;
    const AcquisitionConfig& acq = c.acquisition;

    json j;
    j["name"] = c.name;
    j["backend"] = std::string(to_string(c.backend));
    j["seed"] = c.sequence.master_seed;
    j["sequence"] = {{"pump_duration", c.sequence.pump_duration},
                     {"dark_period", c.sequence.dark_period},
                     {"lead", c.sequence.lead},
                     {"n_realizations", c.sequence.n_realizations},
                     {"n_calibration", c.sequence.n_calibration}};
    j["medium"] = {{"temperature", m.temperature},
                   {"optical_depth", m.optical_depth},
                   {"gamma_e_hz", m.gamma_e / kTwoPi},
                   {"gamma_0", m.gamma_0},
                   {"tau_m", m.tau_m},
                   {"larmor_hz", m.larmor / kTwoPi},
                   {"length", m.length},
                   {"pumping_efficiency", m.pumping_efficiency}};
    j["control"] = {{"power", ctl.power},
                    {"rabi2_per_watt", ctl.rabi2_per_watt},
                    {"ramp", ctl.ramp},
                    {"mode", mode_name(ctl.mode)},
                    {"leakage_amp", ctl.leakage_amp}};
    j["signal"] = {{"frequency_hz", p.omega / kTwoPi},
                   {"power", c.input_power ? json(*c.input_power) : json(nullptr)},
                   {"amplitude", c.input_amplitude},
                   {"phase", c.input_phase},
                   {"wavelength", c.wavelength},
                   {"duration", p.duration},
                   {"shape", std::string(to_string(p.shape))},
                   {"ramp", p.ramp}};
    j["timeline"] = {{"switch_off_delay", tl.switch_off_delay},
                     {"hold", tl.hold},
                     {"read_duration", tl.read_duration}};
    j["memory"] = {{"eta0", pm.eta0},
                   {"write_fraction", pm.write_fraction ? json(*pm.write_fraction) : json(nullptr)},
                   {"readout_power_ratio", pm.readout_power_ratio},
                   {"excess_noise", c.excess_noise ? json(*c.excess_noise) : json(nullptr)},
                   {"excess_table", c.excess_table.points},
                   {"output_dt", c.storage.output_dt}};
    j["propagation"] = {{"nz", c.storage.grid.nz},
                        {"dt", c.storage.grid.dt},
                        {"check_convergence", c.storage.grid.check_convergence}};
    j["acquisition"] = {{"sample_rate", acq.sample_rate},
                        {"bits", acq.bits},
                        {"full_scale", acq.full_scale},
                        {"lo_phase", acq.lo_phase},
                        {"lo_phase_jitter", acq.lo_phase_jitter},
                        {"noise", acq.noise},
                        {"quantize", acq.quantize},
                        {"n_cycles", c.n_cycles}};
    j["benchmark"] = {{"enabled", c.benchmark.enabled}, {"margin_sigmas", c.benchmark.margin_sigmas}};
    if (c.sweep) {
        j["sweep"] = {{"kind", std::string(to_string(c.sweep->kind))},
                      {"grid", c.sweep->grid},
                      {"larmor_tracking", c.sweep->larmor_tracking},
                      {"dual_frequency_hz", c.sweep->dual_frequency / kTwoPi}};
    }
    return j;
}

} // namespace

RunConfig parse_config(std::string_view text)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    RunConfig c = from_json(root);
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string dump_config(const RunConfig& config)
{
    return to_json(config).dump(2) + "\n";
}

std::string dump_manifest(const RunConfig& config, std::string_view command)
{
    json j = to_json(config);
    j["manifest"] = {{"tool", "eitmem"},
                     {"format", 1},
                     {"command", std::string(command)},
                     {"backend", std::string(to_string(config.backend))},
                     {"seed", config.sequence.master_seed}};
    return j.dump(2) + "\n";
}

} // namespace eitmem
