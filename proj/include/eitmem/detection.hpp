#ifndef EITMEM_DETECTION_HPP
#define EITMEM_DETECTION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eitmem/common.hpp"
#include "eitmem/storage.hpp"

namespace eitmem {

struct AcquisitionConfig {
    double sample_rate = 50e6;
    int bits = 14;
    double full_scale = 256.0; ///< sample value mapped to the largest code
    double lo_phase = 0.0;
    double lo_phase_jitter = 0.0; ///< rms, rad, drawn once per record
    int shot_noise_cycles = 2;    ///< window over which vacuum demodulates to variance 1
    bool noise = true;
    bool quantize = true;

    std::int32_t max_code() const { return (std::int32_t{1} << (bits - 1)) - 1; }
    double lsb() const { return full_scale / static_cast<double>(max_code()); }
    void validate() const;
    /// Also checks the sampling margin for a sideband at omega.
    void validate(double omega) const;
};

struct RecordMeta {
    std::uint64_t realization = 0;
    std::uint64_t seed = 0;
    bool blank = true; ///< no signal field
    double omega = 0.0;
};

/// One digitised realization. Quantized records keep integer codes; the
/// analog path keeps the unquantized samples instead.
struct HomodyneRecord {
    double sample_rate = 50e6;
    int bits = 14;
    double lsb = 1.0;
    double t0 = 0.0;
    bool quantized = true;
    std::vector<std::int32_t> samples;
    Eigen::VectorXd analog;
    Index clipped = 0;
    RecordMeta meta;

    Index size() const { return quantized ? static_cast<Index>(samples.size()) : analog.size(); }
    Eigen::VectorXd values() const;
};

struct QuantizedSamples {
    std::vector<std::int32_t> codes;
    Index clipped = 0;
};

/// Mid-tread uniform quantizer, round half to even, saturating at
/// +-(2^(bits-1) - 1).
QuantizedSamples quantize(const Eigen::Ref<const Eigen::VectorXd>& values,
                          const AcquisitionConfig& acq);

/// Per-sample shot-noise standard deviation: sigma^2 = N_ref / 2 with N_ref
/// the number of samples in `acq.shot_noise_cycles` sideband periods.
double shot_noise_sigma(double omega, const AcquisitionConfig& acq);

/// Beamsplitter-channel substitution in one analysis window: the vacuum
/// component there becomes
///   eta e^{i rotation} (input fluctuation) + sqrt(1 - eta^2) (vacuum) + sqrt(excess) (noise).
struct ModeInjection {
    Index first_sample = 0;
    Index length = 0;
    double eta = 0.0;
    double rotation = 0.0;
    cplx input_fluctuation{0.0, 0.0};
    double excess_noise = 0.0;
};

struct SynthesisRequest {
    const StorageOutcome* outcome = nullptr; ///< null: no signal field
    ControlField control;                    ///< mode off: no control, no transient
    ControlEnvelope gate;
    double omega = kTwoPi * 1.25e6;
    double duration = 0.0;
    std::uint64_t seed = 0;
    RecordMeta meta;
    std::optional<ModeInjection> injection;
};

/// Deterministic control leakage: leakage_amp (2 ramp / pi) d(gate)/dt cos(Omega t).
Eigen::VectorXd control_transient(const ControlEnvelope& gate, double leakage_amp, double omega,
                                  const TimeGrid& grid);

/// Photocurrent before digitisation.
Eigen::VectorXd synthesize_trace(const SynthesisRequest& request, const AcquisitionConfig& acq);

/// Throws SaturationError when more than 0.1% of the samples clip.
HomodyneRecord synthesize_record(const SynthesisRequest& request, const AcquisitionConfig& acq);

/// Little-endian header {sample_rate f64, bits u16, count u64}, count int16
/// codes, plus `<path>.meta` with key = value lines.
void write_record(const std::filesystem::path& path, const HomodyneRecord& record);
HomodyneRecord read_record(const std::filesystem::path& path);

} // namespace eitmem

#endif // EITMEM_DETECTION_HPP
