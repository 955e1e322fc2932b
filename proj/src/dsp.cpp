#include "eitmem/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace eitmem {

Index window_samples(double omega, int n_cycles, double sample_rate)
{
    if (!(omega > 0.0) || !(sample_rate > 0.0))
        throw ConfigError("demodulation needs positive frequency and sample rate");
    const double exact = n_cycles * sample_rate * kTwoPi / omega;
    const double rounded = std::round(exact);
    if (rounded < 1.0 || std::abs(exact - rounded) > 1e-6 * exact)
        throw ConfigError("demodulation window is not an integer number of samples");
    return static_cast<Index>(rounded);
}

QuadratureSeries demodulate(const HomodyneRecord& record, double omega, int n_cycles)
{
    return demodulate(record.values(), record.sample_rate, record.t0, omega, n_cycles);
}

QuadratureStats QuadratureStats::normalized() const
{
    QuadratureStats out = *this;
    const double amplitude = std::sqrt(shot_reference);
    out.mean_x /= amplitude;
    out.mean_y /= amplitude;
    out.var_x /= shot_reference;
    out.var_y /= shot_reference;
    out.shot_reference = 1.0;
    return out;
}

QuadratureStats ensemble_stats(std::span<const QuadratureSeries> series)
{
    if (series.size() < 2)
        throw StatisticsError("ensemble statistics need at least two realizations");
    const QuadratureSeries& first = series.front();
    const Index bins = first.x.size();
    for (const auto& s : series) {
        if (s.x.size() != bins || s.window_samples != first.window_samples
            || s.n_cycles != first.n_cycles || s.omega != first.omega)
            throw StatisticsError("ensemble members do not share a time grid and window");
    }

    const double count = static_cast<double>(series.size());
    QuadratureStats stats;
    stats.times = first.times;
    stats.n_realizations = static_cast<Index>(series.size());
    // Deviations are taken from the first member, so identical members give
    // an exact zero variance and large common offsets do not cancel.
    Eigen::VectorXd shift_x = Eigen::VectorXd::Zero(bins);
    Eigen::VectorXd shift_y = Eigen::VectorXd::Zero(bins);
    for (const auto& s : series) {
        shift_x += s.x - first.x;
        shift_y += s.y - first.y;
    }
    shift_x /= count;
    shift_y /= count;
    stats.mean_x = first.x + shift_x;
    stats.mean_y = first.y + shift_y;

    stats.var_x = Eigen::VectorXd::Zero(bins);
    stats.var_y = Eigen::VectorXd::Zero(bins);
    for (const auto& s : series) {
        stats.var_x += (s.x - first.x - shift_x).cwiseAbs2();
        stats.var_y += (s.y - first.y - shift_y).cwiseAbs2();
    }
    stats.var_x /= count;
    stats.var_y /= count;
    return stats;
}

namespace {

SubtractionReport finish_subtraction(QuadratureStats raw, QuadratureStats subtracted,
                                     double shot_reference)
{
    if (!(shot_reference > 0.0))
        throw StatisticsError("shot reference must be positive");
    raw.shot_reference = shot_reference;
    subtracted.shot_reference = shot_reference;
    SubtractionReport report;
    report.corrected_var_x = subtracted.var_x / shot_reference - Eigen::VectorXd::Ones(subtracted.var_x.size());
    report.corrected_var_y = subtracted.var_y / shot_reference - Eigen::VectorXd::Ones(subtracted.var_y.size());
    report.raw = std::move(raw);
    report.subtracted = std::move(subtracted);
    return report;
}

} // namespace

SubtractionReport subtract_transients(std::span<const HomodyneRecord> signal_runs,
                                      std::span<const HomodyneRecord> blank_runs, double omega,
                                      int n_cycles, double shot_reference)
{
    if (signal_runs.size() != blank_runs.size())
        throw StatisticsError("signal and blank runs are not paired one to one");
    std::vector<QuadratureSeries> raw;
    std::vector<QuadratureSeries> diff;
    raw.reserve(signal_runs.size());
    diff.reserve(signal_runs.size());
    for (std::size_t i = 0; i < signal_runs.size(); ++i) {
        const HomodyneRecord& sig = signal_runs[i];
        const HomodyneRecord& blk = blank_runs[i];
        if (sig.size() != blk.size() || sig.sample_rate != blk.sample_rate || sig.t0 != blk.t0)
            throw StatisticsError("paired runs differ in length or timing");
        raw.push_back(demodulate(sig, omega, n_cycles));
        const Eigen::VectorXd d = sig.values() - blk.values();
        diff.push_back(demodulate(d, sig.sample_rate, sig.t0, omega, n_cycles));
    }
    return finish_subtraction(ensemble_stats(raw), ensemble_stats(diff), shot_reference);
}

SubtractionReport subtract_transients(std::span<const QuadratureSeries> signal_series,
                                      std::span<const QuadratureSeries> blank_series,
                                      double shot_reference)
{
    if (signal_series.size() != blank_series.size())
        throw StatisticsError("signal and blank runs are not paired one to one");
    std::vector<QuadratureSeries> diff;
    diff.reserve(signal_series.size());
    for (std::size_t i = 0; i < signal_series.size(); ++i) {
        const QuadratureSeries& sig = signal_series[i];
        const QuadratureSeries& blk = blank_series[i];
        if (sig.x.size() != blk.x.size() || sig.window_samples != blk.window_samples)
            throw StatisticsError("paired runs differ in length or timing");
        QuadratureSeries d = sig;
        d.x -= blk.x;
        d.y -= blk.y;
        diff.push_back(std::move(d));
    }
    return finish_subtraction(ensemble_stats(signal_series), ensemble_stats(diff), shot_reference);
}

double shot_noise_calibration(std::span<const QuadratureSeries> series)
{
    if (series.size() < 100)
        throw StatisticsError("shot-noise calibration needs at least 100 runs");
    const std::size_t half = series.size() / 2;
    auto level = [](std::span<const QuadratureSeries> part) {
        const QuadratureStats s = ensemble_stats(part);
        return 0.5 * (s.var_x.mean() + s.var_y.mean());
    };
    const double first = level(series.first(half));
    const double second = level(series.subspan(half));
    const double all = level(series);
    if (std::abs(first - second) > 0.1 * all)
        throw StatisticsError("shot-noise estimate unstable between ensemble halves");
    return all;
}

double shot_noise_calibration(std::span<const HomodyneRecord> blank_runs_no_control, double omega,
                              int n_cycles)
{
    std::vector<QuadratureSeries> series;
    series.reserve(blank_runs_no_control.size());
    for (const auto& r : blank_runs_no_control)
        series.push_back(demodulate(r, omega, n_cycles));
    return shot_noise_calibration(series);
}

cplx complex_area(const QuadratureStats& stats, double t_begin, double t_end)
{
    cplx area{0.0, 0.0};
    for (Index k = 0; k < stats.times.size(); ++k) {
        if (stats.times(k) >= t_begin && stats.times(k) < t_end)
            area += cplx(stats.mean_x(k), stats.mean_y(k));
    }
    return area;
}

double peak_magnitude(const QuadratureStats& stats, double t_begin, double t_end, int smoothing)
{
    const Index bins = stats.times.size();
    const Index width = std::max(1, smoothing);
    double best = 0.0;
    for (Index k = 0; k + width <= bins; ++k) {
        const double centre = stats.times(k + width / 2);
        if (centre < t_begin || centre >= t_end)
            continue;
        double sum = 0.0;
        for (Index j = k; j < k + width; ++j)
            sum += std::hypot(stats.mean_x(j), stats.mean_y(j));
        best = std::max(best, sum / static_cast<double>(width));
    }
    return best;
}

void write_stats_csv(std::ostream& os, const QuadratureStats& stats)
{
    const QuadratureStats s = stats.normalized();
    os << "t [s],mean_x [shot-noise units],mean_y [shot-noise units],"
          "var_x [shot-noise units],var_y [shot-noise units]\n";
    const auto old = os.precision(17);
    for (Index k = 0; k < s.times.size(); ++k)
        os << s.times(k) << ',' << s.mean_x(k) << ',' << s.mean_y(k) << ',' << s.var_x(k) << ','
           << s.var_y(k) << '\n';
    os.precision(old);
}

} // namespace eitmem
