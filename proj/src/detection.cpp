#include "eitmem/detection.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <type_traits>

namespace eitmem {

void AcquisitionConfig::validate() const
{
    if (!(sample_rate > 0.0))
        throw ConfigError("sample rate must be positive");
    if (bits < 8 || bits > 24)
        throw ConfigError("quantizer depth must lie in [8, 24] bits");
    if (!(full_scale > 0.0))
        throw ConfigError("full scale must be positive");
    if (lo_phase_jitter < 0.0)
        throw ConfigError("LO phase jitter must be non-negative");
    if (shot_noise_cycles < 1)
        throw ConfigError("shot-noise reference window must span at least one cycle");
}

void AcquisitionConfig::validate(double omega) const
{
    validate();
    if (!(omega > 0.0) || !(sample_rate > 2.0 * omega / kTwoPi))
        throw ConfigError("sideband frequency violates the sampling limit");
}

Eigen::VectorXd HomodyneRecord::values() const
{
    if (!quantized)
        return analog;
    Eigen::VectorXd out(static_cast<Index>(samples.size()));
    for (Index i = 0; i < out.size(); ++i)
        out(i) = lsb * static_cast<double>(samples[static_cast<std::size_t>(i)]);
    return out;
}

QuantizedSamples quantize(const Eigen::Ref<const Eigen::VectorXd>& values,
                          const AcquisitionConfig& acq)
{
    acq.validate();
    const double step = acq.lsb();
    const double limit = acq.max_code();
    QuantizedSamples out;
    out.codes.resize(static_cast<std::size_t>(values.size()));
    for (Index i = 0; i < values.size(); ++i) {
        double code = std::nearbyint(values(i) / step);
        if (code > limit || code < -limit) {
            code = std::copysign(limit, code);
            ++out.clipped;
        }
        out.codes[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(code);
    }
    return out;
}

double shot_noise_sigma(double omega, const AcquisitionConfig& acq)
{
    const double reference_samples = acq.shot_noise_cycles * acq.sample_rate * kTwoPi / omega;
    return std::sqrt(0.5 * reference_samples);
}

Eigen::VectorXd control_transient(const ControlEnvelope& gate, double leakage_amp, double omega,
                                  const TimeGrid& grid)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size);
    if (leakage_amp == 0.0 || gate.mode != ControlEnvelope::Mode::switched)
        return out;
    const double scale = leakage_amp * 2.0 * gate.ramp / kPi;
    for (Index i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        const double slope = gate.derivative(t);
        if (slope != 0.0)
            out(i) = scale * slope * std::cos(omega * t);
    }
    return out;
}

Eigen::VectorXd synthesize_trace(const SynthesisRequest& request, const AcquisitionConfig& acq)
{
    acq.validate(request.omega);
    if (!(request.duration > 0.0))
        throw ConfigError("record duration must be positive");

    const TimeGrid grid{0.0, 1.0 / acq.sample_rate,
                        static_cast<Index>(std::ceil(request.duration * acq.sample_rate - 1e-9))};
    std::mt19937_64 rng(request.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    double lo = acq.lo_phase;
    if (acq.lo_phase_jitter > 0.0)
        lo += acq.lo_phase_jitter * normal(rng);

    Eigen::VectorXd cosine(grid.size);
    Eigen::VectorXd sine(grid.size);
    for (Index i = 0; i < grid.size; ++i) {
        const double phase = request.omega * grid.time(i) + lo;
        cosine(i) = std::cos(phase);
        sine(i) = std::sin(phase);
    }

    Eigen::VectorXd trace = Eigen::VectorXd::Zero(grid.size);
    if (request.outcome != nullptr) {
        for (Index i = 0; i < grid.size; ++i) {
            const cplx alpha = request.outcome->field(grid.time(i));
            trace(i) = 2.0 * alpha.real() * cosine(i) + 2.0 * alpha.imag() * sine(i);
        }
    }
    if (request.control.mode == ControlEnvelope::Mode::switched)
        trace += control_transient(request.gate, request.control.leakage_amp, request.omega, grid);

    if (!acq.noise)
        return trace;

    const double sigma = shot_noise_sigma(request.omega, acq);
    Eigen::VectorXd noise(grid.size);
    for (Index i = 0; i < grid.size; ++i)
        noise(i) = sigma * normal(rng);

    if (request.injection) {
        const ModeInjection& mode = *request.injection;
        if (mode.first_sample < 0 || mode.length <= 0 || mode.first_sample + mode.length > grid.size)
            throw ConfigError("mode injection window outside the record");
        if (mode.eta < 0.0 || mode.eta > 1.0 || mode.excess_noise < 0.0)
            throw ConfigError("mode injection needs 0 <= eta <= 1 and excess >= 0");
        auto c = cosine.segment(mode.first_sample, mode.length);
        auto s = sine.segment(mode.first_sample, mode.length);
        auto n = noise.segment(mode.first_sample, mode.length);
        const double norm = 2.0 / static_cast<double>(mode.length);
        const cplx vacuum(norm * c.dot(n), norm * s.dot(n));
        n -= vacuum.real() * c + vacuum.imag() * s;
        const cplx excess(normal(rng), normal(rng));
        const cplx replaced = mode.eta * std::polar(1.0, mode.rotation) * mode.input_fluctuation
            + std::sqrt(1.0 - mode.eta * mode.eta) * vacuum
            + std::sqrt(mode.excess_noise) * excess;
        n += replaced.real() * c + replaced.imag() * s;
    }
    trace += noise;
    return trace;
}

HomodyneRecord synthesize_record(const SynthesisRequest& request, const AcquisitionConfig& acq)
{
    HomodyneRecord record;
    record.sample_rate = acq.sample_rate;
    record.bits = acq.bits;
    record.lsb = acq.lsb();
    record.meta = request.meta;
    record.meta.seed = request.seed;
    record.meta.omega = request.omega;
    record.meta.blank = request.outcome == nullptr;

    Eigen::VectorXd trace = synthesize_trace(request, acq);
    if (!acq.quantize) {
        record.quantized = false;
        record.analog = std::move(trace);
        return record;
    }
    QuantizedSamples q = quantize(trace, acq);
    record.samples = std::move(q.codes);
    record.clipped = q.clipped;
    if (static_cast<double>(q.clipped) > 1e-3 * static_cast<double>(record.samples.size())) {
        std::ostringstream msg;
        msg << "ADC saturation: " << q.clipped << " of " << record.samples.size()
            << " samples clipped (realization " << record.meta.realization << ")";
        throw SaturationError(msg.str());
    }
    return record;
}

namespace {

template <typename T>
void put_le(std::ostream& os, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is)
{
    std::array<unsigned char, sizeof(T)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!is)
        throw std::runtime_error("truncated record file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

std::filesystem::path meta_path(const std::filesystem::path& path)
{
    std::filesystem::path meta = path;
    meta += ".meta";
    return meta;
}

} // namespace

void write_record(const std::filesystem::path& path, const HomodyneRecord& record)
{
    if (!record.quantized)
        throw ConfigError("only quantized records can be exported");
    if (record.bits > 16)
        throw ConfigError("record export stores 16-bit codes; bits must be <= 16");

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    put_le<double>(os, record.sample_rate);
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(record.bits));
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(record.samples.size()));
    for (std::int32_t code : record.samples)
        put_le<std::int16_t>(os, static_cast<std::int16_t>(code));
    if (!os)
        throw std::runtime_error("write failed: " + path.string());

    std::ofstream meta(meta_path(path));
    if (!meta)
        throw std::runtime_error("cannot open " + meta_path(path).string() + " for writing");
    meta.precision(17);
    meta << "t0 = " << record.t0 << '\n'
         << "lsb = " << record.lsb << '\n'
         << "realization = " << record.meta.realization << '\n'
         << "seed = " << record.meta.seed << '\n'
         << "blank = " << (record.meta.blank ? 1 : 0) << '\n'
         << "omega = " << record.meta.omega << '\n'
         << "clipped = " << record.clipped << '\n';
    if (!meta)
        throw std::runtime_error("write failed: " + meta_path(path).string());
}

HomodyneRecord read_record(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    HomodyneRecord record;
    record.sample_rate = get_le<double>(is);
    record.bits = get_le<std::uint16_t>(is);
    const auto count = get_le<std::uint64_t>(is);
    record.samples.resize(count);
    for (auto& code : record.samples)
        code = get_le<std::int16_t>(is);

    std::ifstream meta(meta_path(path));
    if (!meta)
        throw std::runtime_error("missing sidecar " + meta_path(path).string());
    std::string line;
    while (std::getline(meta, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(' ') + 1);
        std::istringstream v(value);
        if (key == "t0")
            v >> record.t0;
        else if (key == "lsb")
            v >> record.lsb;
        else if (key == "realization")
            v >> record.meta.realization;
        else if (key == "seed")
            v >> record.meta.seed;
        else if (key == "blank") {
            int b = 0;
            v >> b;
            record.meta.blank = b != 0;
        } else if (key == "omega")
            v >> record.meta.omega;
        else if (key == "clipped")
            v >> record.clipped;
    }
    return record;
}

} // namespace eitmem
