#ifndef EITMEM_ENVELOPE_HPP
#define EITMEM_ENVELOPE_HPP

#include <string_view>

namespace eitmem {

enum class EnvelopeShape { rectangular, smoothed };

EnvelopeShape parse_envelope_shape(std::string_view name);
std::string_view to_string(EnvelopeShape shape);

/// Signal pulse gate on [start, start + duration). The smoothed shape uses
/// raised-cosine edges of length `ramp` inside the interval.
struct PulseEnvelope {
    EnvelopeShape shape = EnvelopeShape::smoothed;
    double start = 0.0;
    double duration = 5e-6;
    double ramp = 0.2e-6;

    double operator()(double t) const;
    double end() const { return start + duration; }
    void validate() const;
};

/// Control-field gate in [0, 1]. In switched mode the field ramps down
/// centred on `switch_off`, stays dark, and ramps up centred on
/// `switch_off + hold`; both ramps are raised cosines of length `ramp`.
struct ControlEnvelope {
    enum class Mode { switched, always_on, off };

    Mode mode = Mode::switched;
    double switch_off = 0.0;
    double hold = 0.0;
    double ramp = 0.5e-6;

    double operator()(double t) const;
    double derivative(double t) const;
    double switch_on() const { return switch_off + hold; }
    void validate() const;
};

} // namespace eitmem

#endif // EITMEM_ENVELOPE_HPP
