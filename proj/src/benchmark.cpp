#include "eitmem/benchmark.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

namespace eitmem {

std::string_view to_string(Verdict verdict)
{
    switch (verdict) {
    case Verdict::quantum:
        return "quantum";
    case Verdict::classical:
        return "classical";
    case Verdict::inconclusive:
        break;
    }
    return "inconclusive";
}

double snr(double alpha, double variance)
{
    if (!(variance > 0.0))
        throw StatisticsError("SNR needs a positive variance");
    return 4.0 * alpha * alpha / variance;
}

double transmission(double snr_in, double snr_out)
{
    if (!(snr_in > 0.0))
        throw StatisticsError("transmission needs a non-zero input SNR");
    return snr_out / snr_in;
}

double conditional_variance(double v_out, double cov_in_out, double v_in)
{
    if (!(v_in > 0.0))
        throw StatisticsError("conditional variance needs a positive input variance");
    const double v = v_out - cov_in_out * cov_in_out / v_in;
    if (v < -1e-9)
        throw StatisticsError("conditional variance negative: inconsistent moments");
    return v;
}

double classical_bound(double t_total)
{
    if (!(t_total >= 0.0 && t_total <= 2.0))
        throw StatisticsError("classical bound defined for 0 <= T <= 2");
    return 1.0 + 0.5 * t_total;
}

ChannelExpectation channel_expectations(double eta, double excess)
{
    const double v_out = 1.0 + excess;
    return {2.0 * eta * eta / v_out, v_out - eta * eta};
}

Verdict verdict(double t_total, double v, double margin)
{
    const double bound = classical_bound(t_total);
    if (v < bound - margin)
        return Verdict::quantum;
    if (v > bound + margin)
        return Verdict::classical;
    return Verdict::inconclusive;
}

TVReport tv_report(const QuadratureMoments& x, const QuadratureMoments& y, double margin)
{
    TVReport r;
    r.x = x;
    r.y = y;
    r.t_x = transmission(snr(x.alpha_in, x.v_in), snr(x.alpha_out, x.v_out));
    r.t_y = transmission(snr(y.alpha_in, y.v_in), snr(y.alpha_out, y.v_out));
    r.t_total = r.t_x + r.t_y;
    r.v_x = conditional_variance(x.v_out, x.cov, x.v_in);
    r.v_y = conditional_variance(y.v_out, y.cov, y.v_in);
    r.v_geo = std::sqrt(r.v_x * r.v_y);
    r.v_classical = classical_bound(r.t_total);
    r.margin = margin;
    r.verdict = verdict(r.t_total, r.v_geo, margin);
    return r;
}

namespace {

QuadratureMoments moments(const Eigen::Ref<const Eigen::VectorXd>& in,
                          const Eigen::Ref<const Eigen::VectorXd>& out)
{
    const double n = static_cast<double>(in.size());
    const double mi = in.mean();
    const double mo = out.mean();
    const Eigen::ArrayXd di = in.array() - mi;
    const Eigen::ArrayXd dout = out.array() - mo;
    return {0.5 * mi, di.square().sum() / n, 0.5 * mo, dout.square().sum() / n,
            (di * dout).sum() / n};
}

struct Estimate {
    double t = 0.0;
    double v = 0.0;
    double gap = 0.0; ///< v - classical_bound(t)
};

Estimate estimate_of(const TVReport& r)
{
    return {r.t_total, r.v_geo, r.v_geo - r.v_classical};
}

constexpr Index kJackknifeBlocks = 20;

/// Delete-one-block jackknife standard errors.
std::array<double, 3> jackknife(Index n, const std::function<Estimate(Index, Index)>& leave_out)
{
    const Index blocks = std::min(kJackknifeBlocks, n);
    std::vector<Estimate> partial;
    partial.reserve(static_cast<std::size_t>(blocks));
    for (Index b = 0; b < blocks; ++b)
        partial.push_back(leave_out(b * n / blocks, (b + 1) * n / blocks));
    Estimate mean;
    for (const auto& e : partial) {
        mean.t += e.t;
        mean.v += e.v;
        mean.gap += e.gap;
    }
    const double g = static_cast<double>(blocks);
    mean.t /= g;
    mean.v /= g;
    mean.gap /= g;
    std::array<double, 3> ss{0.0, 0.0, 0.0};
    for (const auto& e : partial) {
        ss[0] += (e.t - mean.t) * (e.t - mean.t);
        ss[1] += (e.v - mean.v) * (e.v - mean.v);
        ss[2] += (e.gap - mean.gap) * (e.gap - mean.gap);
    }
    const double scale = (g - 1.0) / g;
    return {std::sqrt(scale * ss[0]), std::sqrt(scale * ss[1]), std::sqrt(scale * ss[2])};
}

Eigen::MatrixX2d without_rows(const Eigen::Ref<const Eigen::MatrixX2d>& m, Index begin, Index end)
{
    Eigen::MatrixX2d out(m.rows() - (end - begin), 2);
    out.topRows(begin) = m.topRows(begin);
    out.bottomRows(m.rows() - end) = m.bottomRows(m.rows() - end);
    return out;
}

TVReport from_samples(const Eigen::Ref<const Eigen::MatrixX2d>& input,
                      const Eigen::Ref<const Eigen::MatrixX2d>& output)
{
    return tv_report(moments(input.col(0), output.col(0)), moments(input.col(1), output.col(1)), 0.0);
}

TVReport from_nominal(double ax, double ay, const Eigen::Ref<const Eigen::MatrixX2d>& output)
{
    auto quad = [&output](double alpha_in, Index c) {
        QuadratureMoments q;
        q.alpha_in = alpha_in;
        q.v_in = 1.0;
        q.alpha_out = 0.5 * output.col(c).mean();
        q.v_out = (output.col(c).array() - output.col(c).mean()).square().mean();
        q.cov = alpha_in != 0.0 ? q.alpha_out / alpha_in : 0.0;
        return q;
    };
    return tv_report(quad(ax, 0), quad(ay, 1), 0.0);
}

void finish(TVReport& r, const std::array<double, 3>& se, double margin_sigmas, Index n)
{
    r.se_t = se[0];
    r.se_v = se[1];
    r.margin = margin_sigmas * se[2];
    r.verdict = verdict(r.t_total, r.v_geo, r.margin);
    r.n_samples = n;
}

} // namespace

TVReport tv_from_samples(const Eigen::Ref<const Eigen::MatrixX2d>& input,
                         const Eigen::Ref<const Eigen::MatrixX2d>& output, double margin_sigmas)
{
    const Index n = input.rows();
    if (output.rows() != n)
        throw StatisticsError("input and output samples are not paired");
    if (n < 2 * kJackknifeBlocks)
        throw StatisticsError("T-V estimate needs at least 40 paired samples");
    TVReport r = from_samples(input, output);
    const auto se = jackknife(n, [&](Index b, Index e) {
        return estimate_of(from_samples(without_rows(input, b, e), without_rows(output, b, e)));
    });
    finish(r, se, margin_sigmas, n);
    return r;
}

TVReport tv_from_nominal_input(double alpha_in_x, double alpha_in_y,
                               const Eigen::Ref<const Eigen::MatrixX2d>& output, double margin_sigmas)
{
    const Index n = output.rows();
    if (n < 2 * kJackknifeBlocks)
        throw StatisticsError("T-V estimate needs at least 40 samples");
    TVReport r = from_nominal(alpha_in_x, alpha_in_y, output);
    const auto se = jackknife(n, [&](Index b, Index e) {
        return estimate_of(from_nominal(alpha_in_x, alpha_in_y, without_rows(output, b, e)));
    });
    finish(r, se, margin_sigmas, n);
    return r;
}

void write_report(std::ostream& os, const TVReport& r)
{
    const auto old = os.precision(10);
    os << "t_x = " << r.t_x << '\n'
       << "t_y = " << r.t_y << '\n'
       << "t_total = " << r.t_total << '\n'
       << "t_total_se = " << r.se_t << '\n'
       << "v_x = " << r.v_x << '\n'
       << "v_y = " << r.v_y << '\n'
       << "v_geo = " << r.v_geo << '\n'
       << "v_geo_se = " << r.se_v << '\n'
       << "v_classical = " << r.v_classical << '\n'
       << "margin = " << r.margin << '\n'
       << "verdict = " << to_string(r.verdict) << '\n'
       << "alpha_in_x = " << r.x.alpha_in << '\n'
       << "alpha_in_y = " << r.y.alpha_in << '\n'
       << "v_in_x = " << r.x.v_in << '\n'
       << "v_in_y = " << r.y.v_in << '\n'
       << "alpha_out_x = " << r.x.alpha_out << '\n'
       << "alpha_out_y = " << r.y.alpha_out << '\n'
       << "v_out_x = " << r.x.v_out << '\n'
       << "v_out_y = " << r.y.v_out << '\n'
       << "cov_x = " << r.x.cov << '\n'
       << "cov_y = " << r.y.cov << '\n'
       << "n_samples = " << r.n_samples << '\n';
    os.precision(old);
}

std::string csv_header_tv()
{
    return "T,T_se,V,V_se,V_x,V_y,V_classical,margin,verdict";
}

std::string csv_row_tv(const TVReport& r)
{
    std::ostringstream os;
    os.precision(10);
    os << r.t_total << ',' << r.se_t << ',' << r.v_geo << ',' << r.se_v << ',' << r.v_x << ','
       << r.v_y << ',' << r.v_classical << ',' << r.margin << ',' << to_string(r.verdict);
    return os.str();
}

} // namespace eitmem
