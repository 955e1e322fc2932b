#include "eitmem/storage.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eitmem {

namespace {

constexpr double kPlanck = 6.62607015e-34;
constexpr double kSpeedOfLight = 299792458.0;

} // namespace

void SignalPulse::validate() const
{
    envelope().validate();
    if (!(omega > 0.0))
        throw ConfigError("sideband frequency must be positive");
    if (start_time < 0.0)
        throw ConfigError("pulse start time must be non-negative");
}

void check_switch_off(const SignalPulse& pulse, const StorageTimeline& timeline)
{
    if (timeline.switch_off(pulse) <= pulse.start_time)
        throw ConfigError("control switches off before the signal pulse starts");
}

double amplitude_from_power(double power, double window, double wavelength)
{
    if (power < 0.0 || !(window > 0.0) || !(wavelength > 0.0))
        throw ConfigError("amplitude_from_power: invalid arguments");
    const double photon_energy = kPlanck * kSpeedOfLight / wavelength;
    return std::sqrt(power * window / photon_energy);
}

void StorageTimeline::validate() const
{
    if (hold < 0.0)
        throw ConfigError("hold time must be non-negative");
    if (!(read_duration > 0.0))
        throw ConfigError("read duration must be positive");
}

ControlEnvelope control_envelope(const ControlField& control, const SignalPulse& pulse,
                                 const StorageTimeline& timeline)
{
    ControlEnvelope env;
    env.mode = control.mode;
    env.ramp = control.ramp;
    env.switch_off = timeline.switch_off(pulse);
    env.hold = timeline.hold;
    return env;
}

Backend parse_backend(std::string_view name)
{
    if (name == "phenom" || name == "phenomenological")
        return Backend::phenomenological;
    if (name == "propagate" || name == "propagation")
        return Backend::propagation;
    throw ConfigError("unknown backend '" + std::string(name) + "'");
}

std::string_view to_string(Backend backend)
{
    return backend == Backend::phenomenological ? "phenom" : "propagate";
}

cplx StorageOutcome::field(double t) const
{
    if (grid.size == 0 || grid.dt <= 0.0)
        return {};
    const double x = (t - grid.t0) / grid.dt;
    if (x < 0.0 || x > static_cast<double>(grid.size - 1))
        return {};
    const auto i = std::min<Index>(static_cast<Index>(x), grid.size - 2 < 0 ? 0 : grid.size - 2);
    if (grid.size == 1)
        return leak_envelope(0) + retrieved_envelope(0);
    const double w = x - static_cast<double>(i);
    const cplx a = leak_envelope(i) + retrieved_envelope(i);
    const cplx b = leak_envelope(i + 1) + retrieved_envelope(i + 1);
    return (1.0 - w) * a + w * b;
}

double InterpolationTable::operator()(double x) const
{
    if (points.empty())
        return 0.0;
    if (x <= points.front().first)
        return points.front().second;
    if (x >= points.back().first)
        return points.back().second;
    const auto hi = std::upper_bound(points.begin(), points.end(), x,
                                     [](double v, const auto& p) { return v < p.first; });
    const auto lo = hi - 1;
    const double w = (x - lo->first) / (hi->first - lo->first);
    return (1.0 - w) * lo->second + w * hi->second;
}

double PhenomenologicalModel::kappa() const
{
    return write_fraction.value_or(std::sqrt(eta0));
}

void PhenomenologicalModel::validate() const
{
    if (!(eta0 >= 0.0 && eta0 <= 1.0))
        throw ConfigError("eta0 must lie in [0, 1]");
    const double k = kappa();
    if (!(k >= 0.0 && k <= 1.0))
        throw ConfigError("write fraction must lie in [0, 1]");
    if (!(readout_power_ratio > 0.0))
        throw ConfigError("readout power ratio must be positive");
    if (excess_noise < 0.0)
        throw ConfigError("excess noise must be non-negative");
}

void StorageSetup::validate() const
{
    pulse.validate();
    timeline.validate();
    eitmem::validate(medium);
    control.validate();
    phenomenological.validate();
    if (!(output_dt > 0.0))
        throw ConfigError("output sampling step must be positive");
}

StorageOutcome phenomenological_store(const SignalPulse& pulse, const StorageTimeline& timeline,
                                      const MediumParams& medium, const ControlField& control,
                                      const PhenomenologicalModel& model, double output_dt)
{
    pulse.validate();
    timeline.validate();
    validate(medium);
    control.validate();
    model.validate();
    if (control.mode != ControlEnvelope::Mode::switched)
        throw ConfigError("phenomenological storage needs a switched control field");
    control_envelope(control, pulse, timeline).validate();
    check_switch_off(pulse, timeline);

    const double tau = timeline.hold;
    const double delta = two_photon_detuning(medium.larmor, pulse.omega);
    const double acceptance = window_acceptance(delta, control, medium);
    const double kappa = model.kappa();
    const double magnitude = std::abs(pulse.amplitude);

    StorageOutcome out;
    out.backend = Backend::phenomenological;
    out.amplitude_efficiency = model.eta0 * std::exp(-tau / medium.tau_m) * acceptance;
    out.retrieved_phase = pulse.phase() + delta * tau;
    out.excess_noise = model.excess_noise;
    out.spin_wave.amplitude = kappa * acceptance * pulse.amplitude;

    PulseEnvelope readout = pulse.envelope();
    readout.start = timeline.switch_on(pulse) + 0.5 * control.ramp;
    readout.duration = pulse.duration / model.readout_power_ratio;
    readout.ramp = pulse.ramp / model.readout_power_ratio;
    if (readout.end() > timeline.end(pulse) + 1e-12)
        throw ConfigError("read window too short for the retrieved pulse");
    out.retrieved_start = timeline.switch_on(pulse);
    out.retrieved_duration = readout.duration;

    const PulseEnvelope input = pulse.envelope();
    const cplx leak_amp = std::sqrt(std::max(0.0, 1.0 - kappa * kappa)) * pulse.amplitude;
    const cplx retrieved_amp = std::polar(out.amplitude_efficiency * magnitude, out.retrieved_phase);

    out.grid.t0 = 0.0;
    out.grid.dt = output_dt;
    out.grid.size = static_cast<Index>(std::ceil(timeline.end(pulse) / output_dt)) + 1;
    out.leak_envelope.resize(out.grid.size);
    out.retrieved_envelope.resize(out.grid.size);
    for (Index i = 0; i < out.grid.size; ++i) {
        const double t = out.grid.time(i);
        const double e_in = input(t);
        out.leak_envelope(i) = leak_amp * e_in;
        out.retrieved_envelope(i) = retrieved_amp * readout(t);
        out.energy.input += std::norm(pulse.amplitude * e_in) * output_dt;
    }
    out.energy.leak = out.leak_envelope.squaredNorm() * output_dt;
    out.energy.retrieved = out.retrieved_envelope.squaredNorm() * output_dt;
    return out;
}

StorageOutcome store(Backend backend, const StorageSetup& setup)
{
    if (backend == Backend::propagation)
        return propagate_store(setup.pulse, setup.timeline, setup.medium, setup.control, setup.grid);
    return phenomenological_store(setup.pulse, setup.timeline, setup.medium, setup.control,
                                  setup.phenomenological, setup.output_dt);
}

std::vector<std::pair<double, double>> efficiency_vs_time(Backend backend, const StorageSetup& setup,
                                                          std::span<const double> holds)
{
    std::vector<std::pair<double, double>> result;
    result.reserve(holds.size());
    StorageSetup point = setup;
    for (double tau : holds) {
        point.timeline.hold = tau;
        result.emplace_back(tau, store(backend, point).amplitude_efficiency);
    }
    return result;
}

std::vector<std::pair<double, double>> efficiency_vs_frequency(Backend backend,
                                                               const StorageSetup& setup,
                                                               std::span<const double> omegas,
                                                               bool larmor_tracking)
{
    std::vector<std::pair<double, double>> result;
    result.reserve(omegas.size());
    StorageSetup point = setup;
    for (double omega : omegas) {
        point.pulse.omega = omega;
        if (larmor_tracking)
            point.medium.larmor = 0.5 * omega;
        result.emplace_back(omega, store(backend, point).amplitude_efficiency);
    }
    return result;
}

} // namespace eitmem
