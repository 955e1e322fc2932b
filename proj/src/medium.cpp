#include "eitmem/medium.hpp"

#include <algorithm>
#include <cmath>

namespace eitmem {

namespace {

constexpr double kMinimumWindowDepth = 1e-6;

double imag_chi(double delta, const ControlField& control, const MediumParams& medium)
{
    return std::imag(susceptibility(0.0, delta, control, medium));
}

} // namespace

void validate(const MediumParams& medium)
{
    if (!(medium.optical_depth > 0.0))
        throw ConfigError("optical depth must be positive");
    if (medium.gamma_e < 0.0 || medium.gamma_0 < 0.0)
        throw ConfigError("decay rates must be non-negative");
    if (!(medium.tau_m > 0.0))
        throw ConfigError("memory time constant must be positive");
    if (!(medium.length > 0.0))
        throw ConfigError("cell length must be positive");
    if (!(medium.pumping_efficiency > 0.0 && medium.pumping_efficiency <= 1.0))
        throw ConfigError("pumping efficiency must lie in (0, 1]");
}

double ControlField::rabi() const
{
    return std::sqrt(rabi2_per_watt * power);
}

void ControlField::validate() const
{
    if (power < 0.0)
        throw ConfigError("control power must be non-negative");
    if (!(rabi2_per_watt > 0.0))
        throw ConfigError("Rabi conversion constant must be positive");
    if (mode == ControlEnvelope::Mode::switched && !(ramp > 0.0))
        throw ConfigError("control ramp duration must be positive");
    if (leakage_amp < 0.0)
        throw ConfigError("leakage amplitude must be non-negative");
}

cplx susceptibility(double one_photon_detuning, double two_photon_detuning,
                    const ControlField& control, const MediumParams& medium)
{
    return susceptibility<double>(one_photon_detuning, two_photon_detuning, control.rabi(),
                                  medium.gamma_e, medium.gamma_0);
}

double intensity_transmission(double two_photon_detuning, const ControlField& control,
                              const MediumParams& medium)
{
    return std::exp(-medium.effective_optical_depth()
                    * imag_chi(two_photon_detuning, control, medium));
}

double window_acceptance(double two_photon_detuning, const ControlField& control,
                         const MediumParams& medium)
{
    const double floor = std::exp(-medium.effective_optical_depth());
    const double peak = intensity_transmission(0.0, control, medium) - floor;
    if (peak < kMinimumWindowDepth)
        return 0.0;
    const double value = intensity_transmission(two_photon_detuning, control, medium) - floor;
    return std::max(0.0, value / peak);
}

double eit_fwhm(const ControlField& control, const MediumParams& medium)
{
    if (control.power < 0.0)
        throw ConfigError("control power must be non-negative");
    validate(medium);
    const double floor = std::exp(-medium.effective_optical_depth());
    const double top = intensity_transmission(0.0, control, medium);
    if (top - floor < kMinimumWindowDepth)
        throw ConfigError("no resolvable transparency window");
    const double half = 0.5 * (top + floor);
    auto above = [&](double delta) {
        return intensity_transmission(delta, control, medium) > half;
    };

    // Coarse scan outward for a bracket, then bisect.
    double lo = 0.0;
    double hi = std::max(1.0, 1e-3 * (medium.gamma_0 + control.rabi()));
    while (above(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e3 * (medium.gamma_e + control.rabi()))
            throw ConfigError("transparency window does not close");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) ? lo : hi) = mid;
    }
    return 2.0 * 0.5 * (lo + hi) / kTwoPi;
}

double optical_depth_of_temperature(double celsius)
{
    if (!(celsius >= 30.0 && celsius <= 50.0))
        throw ConfigError("temperature outside the calibrated range [30, 50] C");
    return 6.0 * std::pow(3.0, (celsius - 30.0) / 10.0);
}

} // namespace eitmem
