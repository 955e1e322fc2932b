#ifndef EITMEM_MEDIUM_HPP
#define EITMEM_MEDIUM_HPP

#include <complex>

#include "eitmem/common.hpp"
#include "eitmem/envelope.hpp"

namespace eitmem {

/// Control Rabi frequency squared per watt of control power, rad^2 s^-2 W^-1.
/// Fit parameter: puts the EIT window of the default medium at 0.7 MHz for
/// 10 mW of control power.
inline constexpr double kDefaultRabi2PerWatt = 6.7756e16;

/// Effective Lambda-system ensemble. Rates are angular (rad/s).
struct MediumParams {
    double optical_depth = 18.0;
    double gamma_e = kTwoPi * 2.6e6;  ///< optical coherence decay
    double gamma_0 = 1.0e5;           ///< ground-state coherence decay
    double tau_m = 10e-6;             ///< memory amplitude decay time
    double larmor = kTwoPi * 625e3;   ///< Larmor angular frequency
    double length = 0.03;
    double temperature = 40.0;        ///< cell temperature, Celsius
    double pumping_efficiency = 0.92; ///< population fraction in the signal ground state

    /// Optical depth seen by the effective three-level system.
    double effective_optical_depth() const { return optical_depth * pumping_efficiency; }
};

void validate(const MediumParams& medium);

struct ControlField {
    double power = 10e-3; ///< W
    double rabi2_per_watt = kDefaultRabi2PerWatt;
    double ramp = 0.5e-6; ///< switching ramp length, s
    ControlEnvelope::Mode mode = ControlEnvelope::Mode::switched;
    double leakage_amp = 0.0; ///< peak control transient in the signal channel, shot-noise quadrature units

    /// Peak Rabi angular frequency; rabi^2 is proportional to power.
    double rabi() const;
    void validate() const;
};

/// delta = 2 Omega_L - Omega.
constexpr double two_photon_detuning(double larmor, double omega_sideband)
{
    return 2.0 * larmor - omega_sideband;
}

/// Linear susceptibility of the Lambda system, normalised so that the bare
/// resonant absorption (no control, zero one-photon detuning) has Im chi = 1:
///
///   chi = i Gamma (g0 - i delta) / [(Gamma - i Delta)(g0 - i delta) + rabi^2/4]
template <typename Scalar>
std::complex<Scalar> susceptibility(Scalar one_photon_detuning, Scalar two_photon_detuning,
                                    Scalar rabi, Scalar gamma_e, Scalar gamma_0)
{
    using C = std::complex<Scalar>;
    if (!(gamma_e > Scalar(0)))
        throw ConfigError("susceptibility requires gamma_e > 0");
    const C i(Scalar(0), Scalar(1));
    const C ground = C(gamma_0, -two_photon_detuning);
    const C optical = C(gamma_e, -one_photon_detuning);
    return i * gamma_e * ground / (optical * ground + rabi * rabi / Scalar(4));
}

cplx susceptibility(double one_photon_detuning, double two_photon_detuning,
                    const ControlField& control, const MediumParams& medium);

/// exp(-d Im chi(0, delta)) with the effective optical depth.
double intensity_transmission(double two_photon_detuning, const ControlField& control,
                              const MediumParams& medium);

/// Transmission above the off-window floor, scaled to 1 at delta = 0.
/// Zero when there is no transparency peak.
double window_acceptance(double two_photon_detuning, const ControlField& control,
                         const MediumParams& medium);

/// Full width at half maximum of the transparency peak, in Hz.
/// Throws ConfigError when the peak is shallower than 1e-6.
double eit_fwhm(const ControlField& control, const MediumParams& medium);

/// Calibrated from 6 at 30 C to 18 at 40 C, log-linear, valid on [30, 50] C.
double optical_depth_of_temperature(double celsius);

} // namespace eitmem

#endif // EITMEM_MEDIUM_HPP
