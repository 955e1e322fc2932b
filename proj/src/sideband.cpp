#include "eitmem/sideband.hpp"

#include <cmath>
#include <random>

namespace eitmem {

namespace {

Eigen::Matrix4d symplectic_form()
{
    Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
    j(0, 1) = j(2, 3) = 1.0;
    j(1, 0) = j(3, 2) = -1.0;
    return j;
}

Eigen::Matrix2d rotation(double theta)
{
    return Eigen::Rotation2Dd(theta).toRotationMatrix();
}

Eigen::Matrix4d channel_gain(const SidebandChannel& plus, const SidebandChannel& minus)
{
    Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
    k.topLeftCorner<2, 2>() = plus.eta * rotation(plus.rotation);
    k.bottomRightCorner<2, 2>() = minus.eta * rotation(minus.rotation);
    return k;
}

Eigen::Vector4d channel_noise(const SidebandChannel& plus, const SidebandChannel& minus)
{
    const double np = 1.0 - plus.eta * plus.eta + plus.excess;
    const double nm = 1.0 - minus.eta * minus.eta + minus.excess;
    return {np, np, nm, nm};
}

void check(const SidebandChannel& c)
{
    if (!(c.eta >= 0.0 && c.eta <= 1.0) || c.excess < 0.0)
        throw ConfigError("sideband channel needs 0 <= eta <= 1 and excess >= 0");
}

/// Matrix square root of a positive semidefinite covariance.
Eigen::Matrix4d covariance_root(const Eigen::Matrix4d& cov)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cov);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw StatisticsError("covariance is not positive semidefinite");
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

} // namespace

Eigen::VectorXd compose_record(const SidebandPair& pair, double sample_rate, double t0, Index count)
{
    const Eigen::ArrayXd phase =
        pair.omega * (t0 + Eigen::ArrayXd::LinSpaced(count, 0.0, static_cast<double>(count - 1)) / sample_rate);
    return ((pair.x_plus() + pair.x_minus()) * phase.cos()
            + (pair.y_plus() - pair.y_minus()) * phase.sin())
        .matrix();
}

Eigen::Vector2d single_sideband_variance(const SidebandPair& pair, bool combined_units)
{
    const double scale = combined_units ? 0.5 : 1.0;
    return {scale * combined_variance(pair, kCosineWeights), scale * combined_variance(pair, kSineWeights)};
}

SidebandPair squeezed_pair(double r, double omega)
{
    SidebandPair p = SidebandPair::vacuum(omega);
    const double c = std::cosh(2.0 * r);
    const double s = std::sinh(2.0 * r);
    p.cov.diagonal().setConstant(c);
    p.cov(0, 2) = p.cov(2, 0) = -s;
    p.cov(1, 3) = p.cov(3, 1) = s;
    return p;
}

double duan_sum(const SidebandPair& pair)
{
    return combined_variance(pair, kCosineWeights) + combined_variance(pair, kSineWeights);
}

bool is_physical(const SidebandPair& pair, double tol)
{
    const Eigen::Matrix4cd m = pair.cov.cast<cplx>() + cplx(0.0, 1.0) * symplectic_form().cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

double min_ppt_eigenvalue(const SidebandPair& pair)
{
    const Eigen::Vector4d flip{1.0, 1.0, 1.0, -1.0};
    const Eigen::Matrix4d pt = flip.asDiagonal() * pair.cov * flip.asDiagonal();
    // Symplectic eigenvalues are the moduli of the eigenvalues of J * cov.
    const Eigen::Vector4cd ev = (symplectic_form() * pt).eigenvalues();
    return ev.cwiseAbs().minCoeff();
}

SidebandPair apply_channels(const SidebandPair& pair, const SidebandChannel& plus,
                            const SidebandChannel& minus)
{
    check(plus);
    check(minus);
    const Eigen::Matrix4d k = channel_gain(plus, minus);
    SidebandPair out = pair;
    out.mean = k * pair.mean;
    out.cov = k * pair.cov * k.transpose();
    out.cov.diagonal() += channel_noise(plus, minus);
    return out;
}

SidebandChannel storage_channel(double omega_signed, double hold, const MediumParams& medium,
                                const ControlField& control, const PhenomenologicalModel& model)
{
    validate(medium);
    control.validate();
    model.validate();
    if (hold < 0.0)
        throw ConfigError("hold time must be non-negative");
    const double delta = two_photon_detuning(medium.larmor, omega_signed);
    SidebandChannel c;
    c.eta = model.eta0 * std::exp(-hold / medium.tau_m) * window_acceptance(delta, control, medium);
    c.rotation = delta * hold;
    c.excess = model.excess_noise;
    return c;
}

SidebandPair dual_sideband_store(const SidebandPair& pair, const MediumParams& medium,
                                 const ControlField& control, const PhenomenologicalModel& model,
                                 double hold)
{
    return apply_channels(pair, storage_channel(pair.omega, hold, medium, control, model),
                          storage_channel(-pair.omega, hold, medium, control, model));
}

SidebandPair two_ensemble_store(const SidebandPair& pair, EnsembleMemory a, EnsembleMemory b,
                                double hold)
{
    a.medium.larmor = 0.5 * pair.omega;
    b.medium.larmor = -0.5 * pair.omega;
    return two_ensemble_store(pair, storage_channel(pair.omega, hold, a.medium, a.control, a.model),
                              storage_channel(-pair.omega, hold, b.medium, b.control, b.model));
}

SidebandPair two_ensemble_store(const SidebandPair& pair, const SidebandChannel& a,
                                const SidebandChannel& b)
{
    return apply_channels(pair, a, b);
}

double composite_efficiency(const SidebandPair& in, const SidebandPair& out)
{
    const double norm_in = std::hypot(kCosineWeights.dot(in.mean), kSineWeights.dot(in.mean));
    if (!(norm_in > 0.0))
        throw StatisticsError("composite efficiency needs a non-zero input modulation");
    return std::hypot(kCosineWeights.dot(out.mean), kSineWeights.dot(out.mean)) / norm_in;
}

Eigen::MatrixX4d sample_quadratures(const SidebandPair& pair, Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixX4d z(n, 4);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < 4; ++j)
            z(i, j) = normal(rng);
    return (z * covariance_root(pair.cov).transpose()).rowwise() + pair.mean.transpose();
}

Eigen::MatrixX4d sample_channels(const Eigen::Ref<const Eigen::MatrixX4d>& input,
                                 const SidebandChannel& plus, const SidebandChannel& minus,
                                 std::uint64_t seed)
{
    check(plus);
    check(minus);
    SidebandPair noise = SidebandPair::vacuum(0.0);
    noise.cov = channel_noise(plus, minus).asDiagonal();
    return input * channel_gain(plus, minus).transpose() + sample_quadratures(noise, input.rows(), seed);
}

} // namespace eitmem
