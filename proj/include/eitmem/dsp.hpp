#ifndef EITMEM_DSP_HPP
#define EITMEM_DSP_HPP

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

#include "eitmem/common.hpp"
#include "eitmem/detection.hpp"

namespace eitmem {

/// Demodulated quadratures on contiguous, non-overlapping windows of
/// n_cycles sideband periods. times holds window centres.
struct QuadratureSeries {
    Eigen::VectorXd times;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    int n_cycles = 2;
    double omega = 0.0;
    double window = 0.0;
    Index window_samples = 0;
};

/// Samples per analysis window; throws unless n_cycles periods hold an
/// integer number of samples.
Index window_samples(double omega, int n_cycles, double sample_rate);

/// X_k = (2/N) sum s cos(Omega t), Y_k = (2/N) sum s sin(Omega t) over window k.
/// A noiseless record X0 cos + Y0 sin returns exactly (X0, Y0).
template <typename Derived>
QuadratureSeries demodulate(const Eigen::MatrixBase<Derived>& samples, double sample_rate, double t0,
                            double omega, int n_cycles)
{
    if (n_cycles < 2 || n_cycles > 4)
        throw ConfigError("demodulation window must span 2 to 4 sideband periods");
    const Index n = window_samples(omega, n_cycles, sample_rate);
    const Index count = samples.size() / n;
    if (count < 1)
        throw ConfigError("record shorter than one demodulation window");

    QuadratureSeries out;
    out.n_cycles = n_cycles;
    out.omega = omega;
    out.window_samples = n;
    out.window = static_cast<double>(n) / sample_rate;
    out.times.resize(count);
    out.x.resize(count);
    out.y.resize(count);
    const double dt = 1.0 / sample_rate;
    const double gain = 2.0 / static_cast<double>(n);
    // A window spans whole periods, so one table of N phases serves all windows.
    Eigen::VectorXd cosine(n);
    Eigen::VectorXd sine(n);
    for (Index i = 0; i < n; ++i) {
        const double phase = omega * (t0 + dt * static_cast<double>(i));
        cosine(i) = std::cos(phase);
        sine(i) = std::sin(phase);
    }
    for (Index k = 0; k < count; ++k) {
        double sx = 0.0;
        double sy = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double v = samples(k * n + i);
            sx += v * cosine(i);
            sy += v * sine(i);
        }
        out.x(k) = gain * sx;
        out.y(k) = gain * sy;
        out.times(k) = t0 + dt * (static_cast<double>(k * n) + 0.5 * static_cast<double>(n));
    }
    return out;
}

QuadratureSeries demodulate(const HomodyneRecord& record, double omega, int n_cycles);

/// Pointwise ensemble mean and population variance <X^2> - <X>^2.
struct QuadratureStats {
    Eigen::VectorXd times;
    Eigen::VectorXd mean_x;
    Eigen::VectorXd mean_y;
    Eigen::VectorXd var_x;
    Eigen::VectorXd var_y;
    Index n_realizations = 0;
    double shot_reference = 1.0;

    /// Means in units of sqrt(shot_reference), variances in units of shot_reference.
    QuadratureStats normalized() const;
};

QuadratureStats ensemble_stats(std::span<const QuadratureSeries> series);

struct SubtractionReport {
    QuadratureStats raw;        ///< signal runs as recorded
    QuadratureStats subtracted; ///< pairwise signal - blank
    Eigen::VectorXd corrected_var_x; ///< subtracted (shot units) - 1
    Eigen::VectorXd corrected_var_y;
};

/// Sample-wise subtraction of each blank run from its paired signal run
/// before demodulation. shot_reference rescales the corrected variances.
SubtractionReport subtract_transients(std::span<const HomodyneRecord> signal_runs,
                                      std::span<const HomodyneRecord> blank_runs, double omega,
                                      int n_cycles, double shot_reference = 1.0);

/// Same, on already-demodulated series of paired runs (demodulation is linear).
SubtractionReport subtract_transients(std::span<const QuadratureSeries> signal_series,
                                      std::span<const QuadratureSeries> blank_series,
                                      double shot_reference = 1.0);

/// Mean demodulated variance over time and both quadratures of at least 100
/// vacuum runs. Throws StatisticsError when the two halves of the ensemble
/// disagree by more than 10%.
double shot_noise_calibration(std::span<const HomodyneRecord> blank_runs_no_control, double omega,
                              int n_cycles);
double shot_noise_calibration(std::span<const QuadratureSeries> series);

/// Complex sum of mean X + iY over windows whose centres lie in [t_begin, t_end).
cplx complex_area(const QuadratureStats& stats, double t_begin, double t_end);

/// Maximum of the 3-window moving average of |mean X + i mean Y| in [t_begin, t_end).
double peak_magnitude(const QuadratureStats& stats, double t_begin, double t_end, int smoothing = 3);

/// CSV with columns t, mean_x, mean_y, var_x, var_y.
void write_stats_csv(std::ostream& os, const QuadratureStats& stats);

} // namespace eitmem

#endif // EITMEM_DSP_HPP
