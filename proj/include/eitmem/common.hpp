#ifndef EITMEM_COMMON_HPP
#define EITMEM_COMMON_HPP

#include <complex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace eitmem {

using cplx = std::complex<double>;
using Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform sampling grid: sample i sits at t0 + i*dt.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    Index size = 0;

    double time(Index i) const { return t0 + dt * static_cast<double>(i); }
    double end() const { return time(size); }
};

/// Invalid or physically inconsistent parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// ADC clipping above the tolerated fraction of samples.
class SaturationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integrator step outside the resolved regime.
class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid refinement changed the result by more than the tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Estimator inputs that cannot produce a meaningful statistic.
class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace eitmem

#endif // EITMEM_COMMON_HPP
