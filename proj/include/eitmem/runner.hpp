#ifndef EITMEM_RUNNER_HPP
#define EITMEM_RUNNER_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eitmem/benchmark.hpp"
#include "eitmem/config.hpp"
#include "eitmem/dsp.hpp"

namespace eitmem {

struct RunOptions {
    int workers = 1;
    bool keep_records = false;
};

struct ShotNoiseCalibration {
    double level = 1.0;       ///< mean vacuum variance of the demodulated quadratures
    double first_half = 1.0;
    double second_half = 1.0;
    QuadratureStats stats;    ///< raw units
};

/// Vacuum runs without control field at the configured sideband frequency.
ShotNoiseCalibration calibrate_shot_noise(const RunConfig& config, const RunOptions& options);

struct SequenceResult {
    RunConfig config;
    StorageSetup setup;
    StorageOutcome outcome;
    int n_cycles = 2;
    double window = 0.0;
    ShotNoiseCalibration calibration;
    QuadratureStats signal;          ///< raw units
    QuadratureStats blank;           ///< raw units
    SubtractionReport subtraction;   ///< corrected variances in shot-noise units
    cplx input_area{0.0, 0.0};
    cplx retrieved_area{0.0, 0.0};
    double efficiency = 0.0;         ///< |retrieved area| / |input area|
    double peak_efficiency = 0.0;    ///< smoothed peak magnitude ratio
    double retrieved_phase = 0.0;    ///< arg of the retrieved area
    double phase_shift = 0.0;        ///< arg(retrieved area / input area)
    Eigen::Vector2d signal_variance = Eigen::Vector2d::Ones();     ///< shot units, read interval mean
    Eigen::Vector2d subtracted_variance = Eigen::Vector2d::Ones();
    Eigen::Vector2d corrected_variance = Eigen::Vector2d::Ones();
    std::optional<TVReport> tv;
    Eigen::MatrixX2d tv_input;
    Eigen::MatrixX2d tv_output;
    std::vector<HomodyneRecord> records;
};

/// Signal and paired blank ensembles plus the derived statistics. A given
/// shot-noise calibration is reused instead of running a new one.
SequenceResult run_sequence(const RunConfig& config, const RunOptions& options,
                            const std::optional<ShotNoiseCalibration>& calibration = std::nullopt);

/// Noiseless demodulation of the bare input pulse: sum of X + iY over the pulse.
cplx input_reference_area(const RunConfig& config);

/// Efficiency and phases from shot-normalized subtracted means.
struct AreaEstimate {
    cplx input_area;
    cplx retrieved_area;
    double efficiency = 0.0;
    double retrieved_phase = 0.0;
    double phase_shift = 0.0;
};
AreaEstimate estimate_from_means(const RunConfig& config, const QuadratureStats& subtracted,
                                 double shot_reference);

struct SweepPoint {
    double value = 0.0;
    double efficiency = 0.0;
    double model_efficiency = 0.0;
    double retrieved_phase = 0.0;
    double phase_shift = 0.0;
    double var_x = 1.0;
    double var_y = 1.0;
    double fwhm_hz = 0.0;
    double excess = 0.0;
    std::optional<double> dual_efficiency;
    std::optional<TVReport> tv;
};

struct SweepResult {
    RunConfig config;
    std::vector<SweepPoint> points;
    std::vector<std::pair<std::string, double>> fit;
    std::optional<std::string> error; ///< set when a point failed; points holds the completed ones
};

/// Configuration of one grid point; its seed is derived from the master seed and index.
RunConfig sweep_point_config(const RunConfig& config, double value, Index index);

SweepResult run_sweep(const RunConfig& config, const RunOptions& options);

/// Least-squares line y = slope x + intercept.
std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y);

/// Removes 2 pi jumps between consecutive phases.
std::vector<double> unwrap(std::span<const double> phases);

} // namespace eitmem

#endif // EITMEM_RUNNER_HPP
