#ifndef EITMEM_STORAGE_HPP
#define EITMEM_STORAGE_HPP

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "eitmem/common.hpp"
#include "eitmem/envelope.hpp"
#include "eitmem/medium.hpp"

namespace eitmem {

/// Single-sideband coherent input. Quadratures in shot-noise units are
/// X = 2 Re(amplitude), Y = 2 Im(amplitude), referred to one analysis window.
struct SignalPulse {
    double omega = kTwoPi * 1.25e6;
    cplx amplitude{1.0, 0.0};
    double duration = 5e-6;
    EnvelopeShape shape = EnvelopeShape::smoothed;
    double ramp = 0.2e-6;
    double start_time = 0.0;

    double phase() const { return std::arg(amplitude); }
    PulseEnvelope envelope() const { return {shape, start_time, duration, ramp}; }
    double end_time() const { return start_time + duration; }
    void validate() const;
};

/// Coherent amplitude (per analysis-window mode) of a weak beam of the given
/// power: |alpha|^2 = P t_window / (h c / wavelength).
double amplitude_from_power(double power, double window, double wavelength = 852.3e-9);

/// Control switching around the pulse. The control goes dark `switch_off_delay`
/// after the pulse ends (negative: before it ends) and returns `hold` later
/// (ramp midpoints).
struct StorageTimeline {
    double switch_off_delay = 0.0;
    double hold = 15e-6;
    double read_duration = 10e-6;

    double switch_off(const SignalPulse& pulse) const { return pulse.end_time() + switch_off_delay; }
    double switch_on(const SignalPulse& pulse) const { return switch_off(pulse) + hold; }
    double end(const SignalPulse& pulse) const { return switch_on(pulse) + read_duration; }
    void validate() const;
};

/// Throws ConfigError unless the control switches off after the pulse starts.
void check_switch_off(const SignalPulse& pulse, const StorageTimeline& timeline);

ControlEnvelope control_envelope(const ControlField& control, const SignalPulse& pulse,
                                 const StorageTimeline& timeline);

struct SpinWave {
    cplx amplitude{0.0, 0.0};
    Eigen::VectorXcd profile; ///< propagation backend only, samples over z in [0, L]
};

/// Integrated |field|^2 terms; dissipated and remaining are only tracked by the
/// propagation backend.
struct EnergyBudget {
    double input = 0.0;
    double leak = 0.0;
    double retrieved = 0.0;
    double dissipated = 0.0;
    double remaining = 0.0;

    double residual() const { return input - leak - retrieved - dissipated - remaining; }
};

enum class Backend { phenomenological, propagation };

Backend parse_backend(std::string_view name);
std::string_view to_string(Backend backend);

struct StorageOutcome {
    Backend backend = Backend::phenomenological;
    TimeGrid grid;
    Eigen::VectorXcd leak_envelope;
    Eigen::VectorXcd retrieved_envelope;
    SpinWave spin_wave;
    double amplitude_efficiency = 0.0;
    double retrieved_phase = 0.0;
    double excess_noise = 0.0;
    double retrieved_start = 0.0;    ///< control back on
    double retrieved_duration = 0.0; ///< nominal retrieved pulse length
    EnergyBudget energy;

    /// Output field (leak + retrieved) at time t, linearly interpolated.
    cplx field(double t) const;
};

/// Linear interpolation table, clamped at both ends.
struct InterpolationTable {
    std::vector<std::pair<double, double>> points;

    double operator()(double x) const;
};

struct PhenomenologicalModel {
    double eta0 = 0.25;
    std::optional<double> write_fraction; ///< kappa; defaults to sqrt(eta0)
    double readout_power_ratio = 1.0;     ///< P_read / P_write; compresses the retrieved pulse
    double excess_noise = 0.0;

    double kappa() const;
    void validate() const;
};

struct PropagationGrid {
    int nz = 256;
    double dt = 2e-9;
    bool check_convergence = false;
};

/// Everything either backend needs for one write-hold-read cycle.
struct StorageSetup {
    SignalPulse pulse;
    StorageTimeline timeline;
    MediumParams medium;
    ControlField control;
    PhenomenologicalModel phenomenological;
    PropagationGrid grid;
    double output_dt = 20e-9; ///< phenomenological envelope sampling

    void validate() const;
};

/// eta(tau) = eta0 exp(-tau/tau_m) W(delta), retrieved phase phi_i + delta tau.
StorageOutcome phenomenological_store(const SignalPulse& pulse, const StorageTimeline& timeline,
                                      const MediumParams& medium, const ControlField& control,
                                      const PhenomenologicalModel& model, double output_dt);

/// 1D Maxwell-Bloch slow-light solver; see propagation.cpp.
StorageOutcome propagate_store(const SignalPulse& pulse, const StorageTimeline& timeline,
                               const MediumParams& medium, const ControlField& control,
                               const PropagationGrid& grid);

StorageOutcome store(Backend backend, const StorageSetup& setup);

std::vector<std::pair<double, double>> efficiency_vs_time(Backend backend, const StorageSetup& setup,
                                                          std::span<const double> holds);

/// With larmor_tracking the Larmor frequency follows Omega/2 at every point.
std::vector<std::pair<double, double>> efficiency_vs_frequency(Backend backend,
                                                               const StorageSetup& setup,
                                                               std::span<const double> omegas,
                                                               bool larmor_tracking);

} // namespace eitmem

#endif // EITMEM_STORAGE_HPP
