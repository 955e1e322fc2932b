#ifndef EITMEM_SIDEBAND_HPP
#define EITMEM_SIDEBAND_HPP

#include <cstdint>

#include "eitmem/common.hpp"
#include "eitmem/medium.hpp"
#include "eitmem/storage.hpp"

namespace eitmem {

/// Gaussian state of the +Omega and -Omega sidebands. Ordering of the mean
/// and covariance is (x+, y+, x-, y-); vacuum has unit variance per
/// quadrature per sideband.
template <typename Scalar>
struct SidebandPairT {
    using Vector = Eigen::Matrix<Scalar, 4, 1>;
    using Matrix = Eigen::Matrix<Scalar, 4, 4>;

    Vector mean = Vector::Zero();
    Matrix cov = Matrix::Identity();
    Scalar omega = Scalar(kTwoPi * 1.25e6);

    static SidebandPairT vacuum(Scalar omega)
    {
        SidebandPairT p;
        p.omega = omega;
        return p;
    }
    Scalar x_plus() const { return mean(0); }
    Scalar y_plus() const { return mean(1); }
    Scalar x_minus() const { return mean(2); }
    Scalar y_minus() const { return mean(3); }
};

using SidebandPair = SidebandPairT<double>;

/// Weights selecting the cosine (x+ + x-) and sine (y+ - y-) photocurrent components.
inline const Eigen::Vector4d kCosineWeights{1.0, 0.0, 1.0, 0.0};
inline const Eigen::Vector4d kSineWeights{0.0, 1.0, 0.0, -1.0};
/// Field quadratures at the sideband frequency: X(Omega) = x+ + x-, Y(Omega) = y+ + y-.
inline const Eigen::Vector4d kAmplitudeWeights{1.0, 0.0, 1.0, 0.0};
inline const Eigen::Vector4d kPhaseWeights{0.0, 1.0, 0.0, 1.0};

/// (x+ + x-) cos(Omega t) + (y+ - y-) sin(Omega t) of the mean quadratures.
template <typename Scalar>
Scalar compose_photocurrent(const SidebandPairT<Scalar>& pair, Scalar t)
{
    using std::cos;
    using std::sin;
    return (pair.mean(0) + pair.mean(2)) * cos(pair.omega * t)
        + (pair.mean(1) - pair.mean(3)) * sin(pair.omega * t);
}

/// Photocurrent sampled at t0 + i / sample_rate.
Eigen::VectorXd compose_record(const SidebandPair& pair, double sample_rate, double t0, Index count);

/// Variance of w . (x+, y+, x-, y-).
inline double combined_variance(const SidebandPair& pair, const Eigen::Vector4d& w)
{
    return w.dot(pair.cov * w);
}

/// Demodulated (X, Y) variances of the photocurrent. In the reporting
/// convention (combined_units) the combined two-sideband vacuum is 1, which
/// halves the per-sideband sum.
Eigen::Vector2d single_sideband_variance(const SidebandPair& pair, bool combined_units = true);

/// Two-mode squeezed sidebands: var(X(Omega)) = e^{-2r}, var(Y(Omega)) = e^{2r}
/// in reporting units.
SidebandPair squeezed_pair(double r, double omega = kTwoPi * 1.25e6);

/// var(x+ + x-) + var(y+ - y-); any separable state has at least 4.
double duan_sum(const SidebandPair& pair);
inline constexpr double kDuanBound = 4.0;

/// Uncertainty principle cov + iJ >= 0 within tol.
bool is_physical(const SidebandPair& pair, double tol = 1e-9);

/// Smallest symplectic eigenvalue of the partially transposed covariance;
/// below 1 means the sidebands are entangled.
double min_ppt_eigenvalue(const SidebandPair& pair);

/// Attenuation, rotation and added noise acting on one sideband:
/// (x, y) -> eta R(rotation) (x, y), noise (1 - eta^2 + excess) per quadrature.
struct SidebandChannel {
    double eta = 1.0;
    double rotation = 0.0;
    double excess = 0.0;
};

SidebandPair apply_channels(const SidebandPair& pair, const SidebandChannel& plus,
                            const SidebandChannel& minus);

/// Channel for a sideband at signed frequency omega_signed through the
/// phenomenological memory: delta = 2 Omega_L - omega_signed.
SidebandChannel storage_channel(double omega_signed, double hold, const MediumParams& medium,
                                const ControlField& control, const PhenomenologicalModel& model);

/// Both sidebands in one ensemble, detunings 2 Omega_L -+ Omega.
SidebandPair dual_sideband_store(const SidebandPair& pair, const MediumParams& medium,
                                 const ControlField& control, const PhenomenologicalModel& model,
                                 double hold);

/// Memory configuration for one ensemble of the two-ensemble scheme.
struct EnsembleMemory {
    MediumParams medium;
    ControlField control;
    PhenomenologicalModel model;
};

/// Ensemble A stores +Omega with Omega_L = Omega/2, ensemble B stores -Omega
/// with Omega_L = -Omega/2; ideal lossless separation and recombination.
SidebandPair two_ensemble_store(const SidebandPair& pair, EnsembleMemory a, EnsembleMemory b,
                                double hold);

/// Same with explicit channels (the Larmor-tuned memories reduce to these).
SidebandPair two_ensemble_store(const SidebandPair& pair, const SidebandChannel& a,
                                const SidebandChannel& b);

/// |out| / |in| of the demodulated mean photocurrent components.
double composite_efficiency(const SidebandPair& in, const SidebandPair& out);

/// n draws of (x+, y+, x-, y-) from the Gaussian state, one per row.
Eigen::MatrixX4d sample_quadratures(const SidebandPair& pair, Index n, std::uint64_t seed);

/// Monte-Carlo version of apply_channels on given input draws.
Eigen::MatrixX4d sample_channels(const Eigen::Ref<const Eigen::MatrixX4d>& input,
                                 const SidebandChannel& plus, const SidebandChannel& minus,
                                 std::uint64_t seed);

} // namespace eitmem

#endif // EITMEM_SIDEBAND_HPP
