#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "eitmem/medium.hpp"

using namespace eitmem;
using boost::multiprecision::cpp_bin_float_50;

namespace {

// Steady state of the linearised Bloch equations, solved as a 2x2 linear
// system for (P, S) in 50-digit arithmetic. This never evaluates the closed
// fraction used by the library:
//
//   0 = -(Gamma - i Delta) P + i E + i (rabi/2) S
//   0 = -(g0 - i delta) S + i (rabi/2) P
//
// with E = 1; chi = Gamma P is normalised so that the bare resonant line has
// Im chi = 1.
using C50 = std::complex<cpp_bin_float_50>;

C50 oracle_chi(double delta_1, double delta_2, double rabi, double gamma_e, double gamma_0)
{
    using R = cpp_bin_float_50;
    const C50 i(R(0), R(1));
    Eigen::Matrix<C50, 2, 2> a;
    a(0, 0) = -(C50(R(gamma_e), R(0)) - i * R(delta_1));
    a(0, 1) = i * R(rabi) / R(2);
    a(1, 0) = i * R(rabi) / R(2);
    a(1, 1) = -(C50(R(gamma_0), R(0)) - i * R(delta_2));
    Eigen::Matrix<C50, 2, 1> b;
    b << -i, C50(R(0), R(0));
    // Cramer's rule keeps everything in the 50-digit type.
    const C50 det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const C50 p = (b(0) * a(1, 1) - a(0, 1) * b(1)) / det;
    return R(gamma_e) * p;
}

MediumParams lossless()
{
    MediumParams m;
    m.gamma_0 = 0.0;
    return m;
}

} // namespace

TEST(TwoPhotonDetuning, ResonanceAndOffset)
{
    EXPECT_DOUBLE_EQ(two_photon_detuning(kTwoPi * 625e3, kTwoPi * 1.25e6), 0.0);
    EXPECT_DOUBLE_EQ(two_photon_detuning(0.0, 0.0), 0.0);
    EXPECT_NEAR(two_photon_detuning(kTwoPi * 626e3, kTwoPi * 1.25e6) / kTwoPi, 2e3, 1e-6);
}

TEST(Susceptibility, BareLineNormalisation)
{
    MediumParams m;
    ControlField c;
    c.power = 0.0;
    for (double delta : {0.0, 1e5, -3e6}) {
        const cplx chi = susceptibility(0.0, delta, c, m);
        EXPECT_NEAR(chi.imag(), 1.0, 1e-12);
        EXPECT_NEAR(chi.real(), 0.0, 1e-12);
    }
}

TEST(Susceptibility, DarkStateTransparentForEveryOnePhotonDetuning)
{
    const MediumParams m = lossless();
    ControlField c;
    for (double power : {1e-3, 10e-3, 0.1}) {
        c.power = power;
        for (double d1 = -5e7; d1 <= 5e7; d1 += 7.3e6)
            EXPECT_LE(std::abs(susceptibility(d1, 0.0, c, m).imag()), 1e-15);
    }
}

TEST(Susceptibility, MatchesHighPrecisionSteadyState)
{
    const double gamma_e = kTwoPi * 2.6e6;
    struct Case {
        double d1, d2, rabi, g0;
    };
    const std::vector<Case> cases = {
        {0.0, 0.0, kTwoPi * 1e6, 1e3},
        {2e6, -3e4, kTwoPi * 1e6, 1e3},
        {-1e7, 5e5, kTwoPi * 3e6, 1e5},
        {0.0, 1e6, 0.0, 1e5},
    };
    for (const auto& k : cases) {
        const cplx lib = susceptibility(k.d1, k.d2, k.rabi, gamma_e, k.g0);
        const C50 ref = oracle_chi(k.d1, k.d2, k.rabi, gamma_e, k.g0);
        EXPECT_NEAR(lib.real(), static_cast<double>(ref.real()), 1e-13);
        EXPECT_NEAR(lib.imag(), static_cast<double>(ref.imag()), 1e-13);
    }
}

TEST(Susceptibility, LongDoubleInstantiationAgrees)
{
    const double g = kTwoPi * 2.6e6;
    const auto a = susceptibility<long double>(1e6L, 2e4L, 6e6L, (long double)g, 1e3L);
    const auto b = susceptibility<double>(1e6, 2e4, 6e6, g, 1e3);
    EXPECT_NEAR(static_cast<double>(a.imag()), b.imag(), 1e-14);
}

TEST(Susceptibility, RealPartVanishesWithFiniteSlopeAtLineCentre)
{
    const MediumParams m = lossless();
    ControlField c;
    EXPECT_NEAR(susceptibility(0.0, 0.0, c, m).real(), 0.0, 1e-15);

    const double h = 1.0;
    const double fd = (susceptibility(h, 0.0, c, m).real() - susceptibility(-h, 0.0, c, m).real()) / (2 * h);
    // At delta = 0 the coherence fixes chi = 0 for every Delta, so the slope
    // along Delta alone is zero; the dispersive slope lives along the signal
    // frequency, where Delta and delta move together.
    EXPECT_NEAR(fd, 0.0, 1e-15);
    auto along_signal = [&](double s) { return susceptibility(s, s, c, m).real(); };
    const double slope = (along_signal(h) - along_signal(-h)) / (2 * h);
    // chi(s, s) = Gamma s / (rabi^2/4 - i Gamma s - s^2) ~ 4 Gamma s / rabi^2.
    const double expected = 4.0 * m.gamma_e / (c.rabi() * c.rabi());
    EXPECT_NE(slope, 0.0);
    EXPECT_NEAR(slope / expected, 1.0, 1e-6);
}

TEST(EitWindow, PowerZeroHasNoWindow)
{
    ControlField c;
    c.power = 0.0;
    EXPECT_THROW(eit_fwhm(c, MediumParams{}), ConfigError);
}

TEST(EitWindow, DefaultCalibrationBelowOneMegahertz)
{
    const double w = eit_fwhm(ControlField{}, MediumParams{});
    EXPECT_NEAR(w, 0.7e6, 0.02e6);
    EXPECT_LT(w, 1e6);
}

TEST(EitWindow, StrictlyIncreasingInPower)
{
    ControlField c;
    double last = 0.0;
    for (int k = 0; k < 20; ++k) {
        c.power = 1e-3 + k * (140e-3 - 1e-3) / 19.0;
        const double w = eit_fwhm(c, MediumParams{});
        EXPECT_GT(w, last) << "power " << c.power;
        last = w;
    }
}

TEST(EitWindow, DoublesWithRabiSquaredInWeakAbsorption)
{
    // Independent scan of exp(-d Im chi) on a fine delta grid.
    MediumParams m;
    m.gamma_0 = 0.0;
    m.optical_depth = 0.05;
    auto scan = [&](double power) {
        ControlField c;
        c.power = power;
        auto t = [&](double d) { return std::exp(-m.effective_optical_depth() * susceptibility(0.0, d, c, m).imag()); };
        const double top = t(0.0);
        const double floor = t(1e12);
        const double half = 0.5 * (top + floor);
        double d = 0.0;
        const double step = kTwoPi * 50.0;
        while (t(d) > half)
            d += step;
        return 2.0 * d / kTwoPi;
    };
    const double w1 = scan(5e-3);
    const double w2 = scan(10e-3);
    EXPECT_NEAR(w2 / w1, 2.0, 0.02);
    ControlField c;
    c.power = 10e-3;
    EXPECT_NEAR(eit_fwhm(c, m) / w2, 1.0, 1e-3);
}

TEST(EitWindow, AcceptanceAtHalfWidthIsHalf)
{
    MediumParams m;
    ControlField c;
    const double w = eit_fwhm(c, m);
    EXPECT_NEAR(window_acceptance(0.0, c, m), 1.0, 1e-12);
    EXPECT_NEAR(window_acceptance(kTwoPi * w / 2, c, m), 0.5, 1e-3);
    EXPECT_LT(window_acceptance(kTwoPi * w, c, m), 0.5);
}

TEST(OpticalDepth, TemperatureAnchors)
{
    EXPECT_NEAR(optical_depth_of_temperature(30.0), 6.0, 1e-12);
    EXPECT_NEAR(optical_depth_of_temperature(40.0), 18.0, 1e-12);
    EXPECT_NEAR(optical_depth_of_temperature(35.0), 6.0 * std::sqrt(3.0), 1e-12);
    double last = 0.0;
    for (double t = 30.0; t <= 50.0; t += 0.5) {
        const double d = optical_depth_of_temperature(t);
        EXPECT_GT(d, last);
        last = d;
    }
    EXPECT_THROW(optical_depth_of_temperature(20.0), ConfigError);
}

TEST(Medium, ValidationRejectsInconsistentParameters)
{
    MediumParams m;
    m.optical_depth = 0.0;
    EXPECT_THROW(validate(m), ConfigError);
    m = MediumParams{};
    m.tau_m = 0.0;
    EXPECT_THROW(validate(m), ConfigError);
    m = MediumParams{};
    m.gamma_0 = -1.0;
    EXPECT_THROW(validate(m), ConfigError);
    EXPECT_NO_THROW(validate(MediumParams{}));
}

TEST(Medium, RabiSquaredProportionalToPower)
{
    ControlField a;
    ControlField b;
    a.power = 3e-3;
    b.power = 12e-3;
    EXPECT_NEAR(b.rabi() * b.rabi() / (a.rabi() * a.rabi()), 4.0, 1e-12);
}
