#ifndef EITMEM_BENCHMARK_HPP
#define EITMEM_BENCHMARK_HPP

#include <iosfwd>
#include <string>
#include <string_view>

#include "eitmem/common.hpp"

namespace eitmem {

enum class Verdict { quantum, classical, inconclusive };

std::string_view to_string(Verdict verdict);

/// Signal-to-noise ratio 4 alpha^2 / V of one quadrature.
double snr(double alpha, double variance);

/// Per-quadrature transmission R_out / R_in.
double transmission(double snr_in, double snr_out);

/// V_out - cov^2 / V_in, with cov the centred input-output covariance.
double conditional_variance(double v_out, double cov_in_out, double v_in);

/// Linear law through (0.02, 1.01) and (0.08, 1.04): 1 + T/2, T in [0, 2].
double classical_bound(double t_total);

struct ChannelExpectation {
    double t_total = 0.0;
    double v = 0.0;
};

/// Beamsplitter channel of amplitude transmission eta plus excess noise on a
/// coherent input.
ChannelExpectation channel_expectations(double eta, double excess);

/// quantum below the classical bound by more than margin, classical above it
/// by more than margin, otherwise inconclusive.
Verdict verdict(double t_total, double v, double margin);

/// Moments of one quadrature. alpha = mean / 2, variances in shot-noise units.
struct QuadratureMoments {
    double alpha_in = 0.0;
    double v_in = 1.0;
    double alpha_out = 0.0;
    double v_out = 1.0;
    double cov = 0.0;
};

struct TVReport {
    double t_x = 0.0;
    double t_y = 0.0;
    double t_total = 0.0;
    double v_x = 0.0;
    double v_y = 0.0;
    double v_geo = 0.0;
    double v_classical = 0.0;
    Verdict verdict = Verdict::inconclusive;
    QuadratureMoments x;
    QuadratureMoments y;
    double se_t = 0.0; ///< standard error of t_total
    double se_v = 0.0; ///< standard error of v_geo
    double margin = 0.0;
    Index n_samples = 0;
};

/// Assemble a report from quadrature moments; margin feeds the verdict.
TVReport tv_report(const QuadratureMoments& x, const QuadratureMoments& y, double margin);

/// T-V estimate from paired per-realization quadratures (shot-noise units,
/// output already rotated back by the memory phase). Columns of `input` and
/// `output` are X and Y. Standard errors come from a blocked jackknife and
/// the verdict margin is margin_sigmas times the standard error of
/// V - V_class(T).
TVReport tv_from_samples(const Eigen::Ref<const Eigen::MatrixX2d>& input,
                         const Eigen::Ref<const Eigen::MatrixX2d>& output, double margin_sigmas = 3.0);

/// Experiment-style estimate using only the nominal coherent input (alpha_in
/// per quadrature, V_in = 1): the covariance is replaced by the mean gain
/// alpha_out / alpha_in.
TVReport tv_from_nominal_input(double alpha_in_x, double alpha_in_y,
                               const Eigen::Ref<const Eigen::MatrixX2d>& output,
                               double margin_sigmas = 3.0);

/// key = value lines.
void write_report(std::ostream& os, const TVReport& report);

std::string csv_header_tv();
std::string csv_row_tv(const TVReport& report);

} // namespace eitmem

#endif // EITMEM_BENCHMARK_HPP
