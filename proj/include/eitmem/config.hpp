#ifndef EITMEM_CONFIG_HPP
#define EITMEM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eitmem/detection.hpp"
#include "eitmem/storage.hpp"

namespace eitmem {

/// Timed experimental cycle. Pumping and the dark period precede each
/// recorded window; the record starts at least `lead` before the signal
/// pulse, rounded up to whole analysis windows.
struct SequenceConfig {
    double pump_duration = 6e-3;
    double dark_period = 0.5e-3;
    double lead = 2e-6;
    Index n_realizations = 2000;
    Index n_calibration = 2000;
    std::uint64_t master_seed = 1;
    void validate() const;
};

enum class SweepKind { storage_time, sideband_frequency, input_phase, larmor, control_power, dual_vs_single };

SweepKind parse_sweep_kind(std::string_view name);
std::string_view to_string(SweepKind kind);

/// Grid units: storage_time s, sideband_frequency Hz, input_phase rad,
/// larmor Hz, control_power W, dual_vs_single W.
struct SweepSpec {
    SweepKind kind = SweepKind::storage_time;
    std::vector<double> grid;
    bool larmor_tracking = true;          ///< sideband_frequency: Omega_L follows Omega/2
    double dual_frequency = kTwoPi * 400e3; ///< dual_vs_single: modulation frequency, rad/s
    void validate() const;
};

struct BenchmarkConfig {
    bool enabled = false;
    double margin_sigmas = 3.0;
};

struct RunConfig {
    std::string name = "run";
    Backend backend = Backend::phenomenological;
    SequenceConfig sequence;
    StorageSetup storage;               ///< pulse.start_time and amplitude are resolved from the fields below
    std::optional<double> input_power = 0.1e-9;  ///< W; sets |amplitude| per analysis window
    double input_amplitude = 0.0;       ///< used when input_power is unset
    double input_phase = 0.0;
    double wavelength = 852.3e-9;
    std::optional<double> excess_noise; ///< overrides the table
    InterpolationTable excess_table{{{0.0, 0.0}, {0.01, 0.0}, {0.14, 0.12}}}; ///< excess vs control power
    AcquisitionConfig acquisition;
    int n_cycles = 0;                   ///< 0 picks the smallest of 2..4 giving whole samples
    BenchmarkConfig benchmark;
    std::optional<SweepSpec> sweep;

    void validate() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Complete JSON rendering; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& config);

/// dump_config plus a "manifest" object naming the command; loads as a config.
std::string dump_manifest(const RunConfig& config, std::string_view command);

/// Demodulation periods per window for this sideband frequency.
int resolve_n_cycles(const RunConfig& config);

/// Excess noise at the configured control power.
double resolve_excess(const RunConfig& config);

/// Storage parameters with pulse timing, amplitude and excess noise filled in.
StorageSetup resolve_setup(const RunConfig& config);

/// Acquisition settings with the vacuum reference matched to the analysis window.
AcquisitionConfig resolve_acquisition(const RunConfig& config);

} // namespace eitmem

#endif // EITMEM_CONFIG_HPP
