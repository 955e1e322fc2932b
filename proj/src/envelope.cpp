#include "eitmem/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eitmem/common.hpp"

namespace eitmem {

EnvelopeShape parse_envelope_shape(std::string_view name)
{
    if (name == "rectangular")
        return EnvelopeShape::rectangular;
    if (name == "smoothed" || name == "smoothed-rectangular")
        return EnvelopeShape::smoothed;
    throw ConfigError("unknown envelope shape '" + std::string(name) + "'");
}

std::string_view to_string(EnvelopeShape shape)
{
    return shape == EnvelopeShape::rectangular ? "rectangular" : "smoothed";
}

double PulseEnvelope::operator()(double t) const
{
    if (t < start || t >= end())
        return 0.0;
    if (shape == EnvelopeShape::rectangular || ramp <= 0.0)
        return 1.0;
    const double rise = t - start;
    const double fall = end() - t;
    if (rise < ramp)
        return 0.5 * (1.0 - std::cos(kPi * rise / ramp));
    if (fall < ramp)
        return 0.5 * (1.0 - std::cos(kPi * fall / ramp));
    return 1.0;
}

void PulseEnvelope::validate() const
{
    if (!(duration > 0.0))
        throw ConfigError("pulse duration must be positive");
    if (ramp < 0.0 || (shape == EnvelopeShape::smoothed && 2.0 * ramp > duration))
        throw ConfigError("pulse ramp must lie in [0, duration/2]");
}

namespace {

// Falling edge centred on `centre`: 1 before, 0 after.
double falling(double t, double centre, double ramp)
{
    const double half = 0.5 * ramp;
    if (t < centre - half)
        return 1.0;
    if (t >= centre + half)
        return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (t - centre + half) / ramp));
}

double falling_slope(double t, double centre, double ramp)
{
    const double half = 0.5 * ramp;
    if (t < centre - half || t >= centre + half)
        return 0.0;
    return -0.5 * kPi / ramp * std::sin(kPi * (t - centre + half) / ramp);
}

} // namespace

double ControlEnvelope::operator()(double t) const
{
    switch (mode) {
    case Mode::always_on:
        return 1.0;
    case Mode::off:
        return 0.0;
    case Mode::switched:
        break;
    }
    // Overlapping ramps (hold < ramp) are clamped to the unit gate.
    const double value = falling(t, switch_off, ramp) + 1.0 - falling(t, switch_on(), ramp);
    return std::clamp(value, 0.0, 1.0);
}

double ControlEnvelope::derivative(double t) const
{
    if (mode != Mode::switched)
        return 0.0;
    return falling_slope(t, switch_off, ramp) - falling_slope(t, switch_on(), ramp);
}

void ControlEnvelope::validate() const
{
    if (mode != Mode::switched)
        return;
    if (!(ramp > 0.0))
        throw ConfigError("control ramp duration must be positive");
    if (hold < 0.0)
        throw ConfigError("hold time must be non-negative");
}

} // namespace eitmem
