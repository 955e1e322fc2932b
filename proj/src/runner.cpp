#include "eitmem/runner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "eitmem/parallel.hpp"
#include "eitmem/seeding.hpp"
#include "eitmem/sideband.hpp"

namespace eitmem {

namespace {

double record_duration(const StorageSetup& setup)
{
    return setup.timeline.end(setup.pulse);
}

/// Mean of v over windows centred in [t0, t1).
double interval_mean(const Eigen::VectorXd& times, const Eigen::VectorXd& v, double t0, double t1)
{
    double sum = 0.0;
    Index count = 0;
    for (Index k = 0; k < times.size(); ++k) {
        if (times(k) >= t0 && times(k) < t1) {
            sum += v(k);
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

double read_begin(const StorageSetup& setup, double window)
{
    return setup.timeline.switch_on(setup.pulse) - 0.5 * window;
}

} // namespace

ShotNoiseCalibration calibrate_shot_noise(const RunConfig& config, const RunOptions& options)
{
    const StorageSetup setup = resolve_setup(config);
    const AcquisitionConfig acq = resolve_acquisition(config);
    const int n_cycles = resolve_n_cycles(config);
    const Index n = config.sequence.n_calibration;

    SynthesisRequest base;
    base.control = setup.control;
    base.control.mode = ControlEnvelope::Mode::off;
    base.omega = setup.pulse.omega;
    base.duration = record_duration(setup);

    std::vector<QuadratureSeries> series(static_cast<std::size_t>(n));
    parallel_for(n, options.workers, [&](Index i) {
        SynthesisRequest req = base;
        req.seed = derive_seed(config.sequence.master_seed, static_cast<std::uint64_t>(i), Stream::calibration);
        req.meta.realization = static_cast<std::uint64_t>(i);
        series[static_cast<std::size_t>(i)] = demodulate(synthesize_record(req, acq), base.omega, n_cycles);
    });

    ShotNoiseCalibration cal;
    cal.level = shot_noise_calibration(series);
    const auto half = series.size() / 2;
    auto level = [](std::span<const QuadratureSeries> part) {
        const QuadratureStats s = ensemble_stats(part);
        return 0.5 * (s.var_x.mean() + s.var_y.mean());
    };
    const std::span<const QuadratureSeries> all(series);
    cal.first_half = level(all.first(half));
    cal.second_half = level(all.subspan(half));
    cal.stats = ensemble_stats(series);
    cal.stats.shot_reference = cal.level;
    return cal;
}

cplx input_reference_area(const RunConfig& config)
{
    const StorageSetup setup = resolve_setup(config);
    const int n_cycles = resolve_n_cycles(config);
    AcquisitionConfig acq = resolve_acquisition(config);
    acq.noise = false;
    acq.quantize = false;

    StorageOutcome bare;
    bare.grid = {0.0, setup.output_dt,
                 static_cast<Index>(std::ceil(record_duration(setup) / setup.output_dt)) + 1};
    bare.leak_envelope.resize(bare.grid.size);
    bare.retrieved_envelope = Eigen::VectorXcd::Zero(bare.grid.size);
    const PulseEnvelope env = setup.pulse.envelope();
    for (Index i = 0; i < bare.grid.size; ++i)
        bare.leak_envelope(i) = setup.pulse.amplitude * env(bare.grid.time(i));

    SynthesisRequest req;
    req.outcome = &bare;
    req.control = setup.control;
    req.control.mode = ControlEnvelope::Mode::off;
    req.omega = setup.pulse.omega;
    req.duration = record_duration(setup);
    const Eigen::VectorXd trace = synthesize_trace(req, acq);
    const QuadratureSeries s = demodulate(trace, acq.sample_rate, 0.0, req.omega, n_cycles);

    cplx area{0.0, 0.0};
    for (Index k = 0; k < s.times.size(); ++k) {
        if (s.times(k) >= setup.pulse.start_time - 0.5 * s.window
            && s.times(k) < setup.pulse.end_time() + 0.5 * s.window)
            area += cplx(s.x(k), s.y(k));
    }
    return area;
}

AreaEstimate estimate_from_means(const RunConfig& config, const QuadratureStats& subtracted,
                                 double shot_reference)
{
    const StorageSetup setup = resolve_setup(config);
    const double window = resolve_n_cycles(config) * kTwoPi / setup.pulse.omega;
    AreaEstimate e;
    e.input_area = input_reference_area(config);
    // Means are stored in units of sqrt(shot_reference); undo that before comparing.
    e.retrieved_area = std::sqrt(shot_reference)
        * complex_area(subtracted, read_begin(setup, window), record_duration(setup) + window);
    if (std::abs(e.input_area) > 0.0) {
        e.efficiency = std::abs(e.retrieved_area) / std::abs(e.input_area);
        e.phase_shift = std::arg(e.retrieved_area / e.input_area);
    }
    e.retrieved_phase = std::arg(e.retrieved_area);
    return e;
}

SequenceResult run_sequence(const RunConfig& config, const RunOptions& options,
                            const std::optional<ShotNoiseCalibration>& calibration)
{
    config.validate();
    SequenceResult r;
    r.config = config;
    r.setup = resolve_setup(config);
    r.n_cycles = resolve_n_cycles(config);
    const AcquisitionConfig acq = resolve_acquisition(config);
    const double omega = r.setup.pulse.omega;
    r.window = r.n_cycles * kTwoPi / omega;

    r.outcome = store(config.backend, r.setup);
    r.outcome.excess_noise = r.setup.phenomenological.excess_noise;
    if (calibration) {
        r.calibration = *calibration;
    } else if (acq.noise) {
        r.calibration = calibrate_shot_noise(config, options);
    } else {
        // Noiseless records have no vacuum level to measure; keep the nominal unit.
        r.calibration.level = r.calibration.first_half = r.calibration.second_half = 1.0;
    }

    const Index n = config.sequence.n_realizations;
    const std::uint64_t master = config.sequence.master_seed;
    const bool tv = config.benchmark.enabled && std::abs(r.setup.pulse.amplitude) > 0.0;
    const Index n_window = window_samples(omega, r.n_cycles, acq.sample_rate);

    SynthesisRequest base;
    base.control = r.setup.control;
    base.gate = control_envelope(r.setup.control, r.setup.pulse, r.setup.timeline);
    base.omega = omega;
    base.duration = record_duration(r.setup);

    // Analysis window holding the centre of the retrieved pulse.
    const double retrieved_centre = r.outcome.retrieved_start + 0.5 * r.setup.control.ramp
        + 0.5 * r.outcome.retrieved_duration;
    const Index tv_window = static_cast<Index>(std::floor(retrieved_centre / r.window));
    const double rotation = r.outcome.retrieved_phase - r.setup.pulse.phase();

    std::vector<QuadratureSeries> signal(static_cast<std::size_t>(n));
    std::vector<QuadratureSeries> blank(static_cast<std::size_t>(n));
    Eigen::MatrixX2d input_fluct = Eigen::MatrixX2d::Zero(n, 2);
    if (options.keep_records)
        r.records.resize(static_cast<std::size_t>(2 * n));

    parallel_for(n, options.workers, [&](Index i) {
        const auto idx = static_cast<std::uint64_t>(i);
        SynthesisRequest sig = base;
        sig.outcome = &r.outcome;
        sig.seed = derive_seed(master, idx, Stream::signal);
        sig.meta.realization = idx;
        if (tv) {
            std::mt19937_64 rng(derive_seed(master, idx, Stream::input));
            std::normal_distribution<double> normal(0.0, 1.0);
            const double fx = normal(rng);
            const double fy = normal(rng);
            input_fluct(i, 0) = fx;
            input_fluct(i, 1) = fy;
            sig.injection = ModeInjection{tv_window * n_window, n_window, r.outcome.amplitude_efficiency,
                                          rotation, cplx(fx, fy), r.outcome.excess_noise};
        }
        SynthesisRequest blk = base;
        blk.seed = derive_seed(master, idx, Stream::blank);
        blk.meta.realization = idx;

        HomodyneRecord sig_rec = synthesize_record(sig, acq);
        HomodyneRecord blk_rec = synthesize_record(blk, acq);
        signal[static_cast<std::size_t>(i)] = demodulate(sig_rec, omega, r.n_cycles);
        blank[static_cast<std::size_t>(i)] = demodulate(blk_rec, omega, r.n_cycles);
        if (options.keep_records) {
            r.records[static_cast<std::size_t>(2 * i)] = std::move(sig_rec);
            r.records[static_cast<std::size_t>(2 * i + 1)] = std::move(blk_rec);
        }
    });

    const double shot = r.calibration.level;
    r.signal = ensemble_stats(signal);
    r.signal.shot_reference = shot;
    r.blank = ensemble_stats(blank);
    r.blank.shot_reference = shot;
    r.subtraction = subtract_transients(signal, blank, shot);

    const double t_read = read_begin(r.setup, r.window);
    const double t_end = record_duration(r.setup) + r.window;
    const QuadratureStats sig_n = r.signal.normalized();
    const QuadratureStats sub_n = r.subtraction.subtracted.normalized();
    r.signal_variance = {interval_mean(sig_n.times, sig_n.var_x, t_read, t_end),
                         interval_mean(sig_n.times, sig_n.var_y, t_read, t_end)};
    r.subtracted_variance = {interval_mean(sub_n.times, sub_n.var_x, t_read, t_end),
                             interval_mean(sub_n.times, sub_n.var_y, t_read, t_end)};
    r.corrected_variance = r.subtracted_variance - Eigen::Vector2d::Ones();

    const AreaEstimate area = estimate_from_means(config, sub_n, shot);
    r.input_area = area.input_area;
    r.retrieved_area = area.retrieved_area;
    r.efficiency = area.efficiency;
    r.retrieved_phase = area.retrieved_phase;
    r.phase_shift = area.phase_shift;
    const double input_peak = std::abs(r.setup.pulse.amplitude) * 2.0;
    if (input_peak > 0.0)
        r.peak_efficiency = std::sqrt(shot) * peak_magnitude(sub_n, t_read, t_end) / input_peak;

    if (tv) {
        if (tv_window >= r.blank.times.size())
            throw ConfigError("retrieved pulse centre lies beyond the record");
        const cplx alpha = r.setup.pulse.amplitude;
        const cplx blank_mean(r.blank.mean_x(tv_window), r.blank.mean_y(tv_window));
        const cplx unrotate = std::polar(1.0 / std::sqrt(shot), -rotation);
        r.tv_input.resize(n, 2);
        r.tv_output.resize(n, 2);
        for (Index i = 0; i < n; ++i) {
            const auto& s = signal[static_cast<std::size_t>(i)];
            const cplx out = (cplx(s.x(tv_window), s.y(tv_window)) - blank_mean) * unrotate;
            r.tv_input(i, 0) = 2.0 * alpha.real() + input_fluct(i, 0);
            r.tv_input(i, 1) = 2.0 * alpha.imag() + input_fluct(i, 1);
            r.tv_output(i, 0) = out.real();
            r.tv_output(i, 1) = out.imag();
        }
        r.tv = tv_from_samples(r.tv_input, r.tv_output, config.benchmark.margin_sigmas);
    }
    return r;
}

RunConfig sweep_point_config(const RunConfig& config, double value, Index index)
{
    if (!config.sweep)
        throw ConfigError("configuration has no sweep section");
    RunConfig c = config;
    c.sweep.reset();
    c.sequence.master_seed =
        derive_seed(config.sequence.master_seed, static_cast<std::uint64_t>(index), Stream::sweep_point);
    switch (config.sweep->kind) {
    case SweepKind::storage_time:
        c.storage.timeline.hold = value;
        break;
    case SweepKind::sideband_frequency:
        c.storage.pulse.omega = kTwoPi * value;
        if (config.sweep->larmor_tracking)
            c.storage.medium.larmor = 0.5 * kTwoPi * value;
        break;
    case SweepKind::input_phase:
        c.input_phase = value;
        break;
    case SweepKind::larmor:
        c.storage.medium.larmor = kTwoPi * value;
        break;
    case SweepKind::control_power:
    case SweepKind::dual_vs_single:
        c.storage.control.power = value;
        break;
    }
    return c;
}

std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw StatisticsError("line fit needs at least two paired points");
    Eigen::MatrixX2d a(static_cast<Index>(x.size()), 2);
    Eigen::VectorXd b(static_cast<Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        a(static_cast<Index>(i), 0) = x[i];
        a(static_cast<Index>(i), 1) = 1.0;
        b(static_cast<Index>(i)) = y[i];
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
    return {coef(0), coef(1)};
}

std::vector<double> unwrap(std::span<const double> phases)
{
    std::vector<double> out(phases.begin(), phases.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        double d = out[i] - out[i - 1];
        d -= kTwoPi * std::round(d / kTwoPi);
        out[i] = out[i - 1] + d;
    }
    return out;
}

namespace {

void add_fit(SweepResult& result)
{
    const auto& pts = result.points;
    if (pts.size() < 2)
        return;
    std::vector<double> x;
    std::vector<double> y;
    auto phases = [&pts] {
        std::vector<double> p;
        for (const auto& pt : pts)
            p.push_back(pt.retrieved_phase);
        return unwrap(p);
    };
    switch (result.config.sweep->kind) {
    case SweepKind::storage_time: {
        for (const auto& pt : pts) {
            if (pt.efficiency > 0.0) {
                x.push_back(pt.value);
                y.push_back(std::log(pt.efficiency));
            }
        }
        if (x.size() >= 2) {
            const auto [slope, intercept] = fit_line(x, y);
            result.fit.emplace_back("tau_m_fit", -1.0 / slope);
            result.fit.emplace_back("efficiency_at_zero", std::exp(intercept));
        }
        break;
    }
    case SweepKind::input_phase:
        for (const auto& pt : pts)
            x.push_back(pt.value);
        y = phases();
        result.fit.emplace_back("phase_slope", fit_line(x, y).first);
        result.fit.emplace_back("phase_offset", fit_line(x, y).second);
        break;
    case SweepKind::larmor:
        for (const auto& pt : pts)
            x.push_back(pt.value * 1e-3);
        y = phases();
        result.fit.emplace_back("phase_slope_rad_per_khz", fit_line(x, y).first);
        break;
    case SweepKind::sideband_frequency: {
        double lo = pts.front().efficiency;
        double hi = lo;
        double sum = 0.0;
        for (const auto& pt : pts) {
            lo = std::min(lo, pt.efficiency);
            hi = std::max(hi, pt.efficiency);
            sum += pt.efficiency;
        }
        const double mean = sum / static_cast<double>(pts.size());
        result.fit.emplace_back("efficiency_mean", mean);
        result.fit.emplace_back("efficiency_relative_spread", mean > 0.0 ? (hi - lo) / mean : 0.0);
        break;
    }
    case SweepKind::control_power:
        break;
    case SweepKind::dual_vs_single: {
        double below = 0.0;
        for (const auto& pt : pts) {
            if (pt.dual_efficiency && *pt.dual_efficiency < pt.efficiency)
                below += 1.0;
        }
        result.fit.emplace_back("dual_below_single_fraction", below / static_cast<double>(pts.size()));
        break;
    }
    }
}

} // namespace

SweepResult run_sweep(const RunConfig& config, const RunOptions& options)
{
    config.validate();
    if (!config.sweep)
        throw ConfigError("configuration has no sweep section");
    SweepResult result;
    result.config = config;
    std::map<double, ShotNoiseCalibration> calibrations;

    const auto& grid = config.sweep->grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            const RunConfig pc = sweep_point_config(config, grid[i], static_cast<Index>(i));
            pc.validate();
            // The vacuum reference depends only on the sideband frequency.
            const double omega = pc.storage.pulse.omega;
            auto cal = calibrations.find(omega);
            if (cal == calibrations.end()) {
                RunConfig cc = pc;
                cc.sequence.master_seed = config.sequence.master_seed;
                cal = calibrations.emplace(omega, calibrate_shot_noise(cc, options)).first;
            }
            const SequenceResult r = run_sequence(pc, RunOptions{options.workers, false}, cal->second);

            SweepPoint pt;
            pt.value = grid[i];
            pt.efficiency = r.efficiency;
            pt.model_efficiency = r.outcome.amplitude_efficiency;
            pt.retrieved_phase = r.retrieved_phase;
            pt.phase_shift = r.phase_shift;
            pt.var_x = r.corrected_variance(0);
            pt.var_y = r.corrected_variance(1);
            pt.excess = r.setup.phenomenological.excess_noise;
            try {
                pt.fwhm_hz = eit_fwhm(r.setup.control, r.setup.medium);
            } catch (const ConfigError&) {
                pt.fwhm_hz = 0.0;
            }
            pt.tv = r.tv;
            if (config.sweep->kind == SweepKind::dual_vs_single) {
                MediumParams centred = r.setup.medium;
                centred.larmor = 0.0;
                SidebandPair in = SidebandPair::vacuum(config.sweep->dual_frequency);
                in.mean << 1.0, 0.0, 1.0, 0.0;
                const SidebandPair out = dual_sideband_store(in, centred, r.setup.control,
                                                             r.setup.phenomenological,
                                                             r.setup.timeline.hold);
                pt.dual_efficiency = composite_efficiency(in, out);
            }
            result.points.push_back(std::move(pt));
        } catch (const std::exception& e) {
            result.error = "point " + std::to_string(i) + ": " + e.what();
            break;
        }
    }
    add_fit(result);
    return result;
}

} // namespace eitmem
