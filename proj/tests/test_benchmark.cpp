#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "eitmem/benchmark.hpp"

using namespace eitmem;

namespace {

struct Ensemble {
    Eigen::MatrixX2d in;
    Eigen::MatrixX2d out;
};

// Coherent input of amplitude alpha on both quadratures through
// out = eta in + sqrt(1 - eta^2) vacuum + sqrt(excess) noise.
Ensemble beamsplitter(double eta, double excess, double alpha, Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Ensemble e{Eigen::MatrixX2d(n, 2), Eigen::MatrixX2d(n, 2)};
    for (Index i = 0; i < n; ++i) {
        for (int q = 0; q < 2; ++q) {
            const double in = 2.0 * alpha + normal(rng);
            e.in(i, q) = in;
            e.out(i, q) = eta * in + std::sqrt(1.0 - eta * eta) * normal(rng)
                + std::sqrt(excess) * normal(rng);
        }
    }
    return e;
}

} // namespace

TEST(Snr, Examples)
{
    EXPECT_DOUBLE_EQ(snr(1.0, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(snr(0.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(snr(0.5, 2.0), 0.5);
    EXPECT_THROW(snr(1.0, 0.0), StatisticsError);
}

TEST(Transmission, OperatingPoints)
{
    auto t_total = [](double eta) {
        const double r_in = snr(10.0, 1.0);
        const double r_out = snr(eta * 10.0, 1.0);
        return 2.0 * transmission(r_in, r_out);
    };
    EXPECT_NEAR(t_total(0.10), 0.02, 1e-15);
    EXPECT_NEAR(t_total(0.21), 0.0882, 1e-15);
    EXPECT_NEAR(t_total(1.0), 2.0, 1e-15);
    EXPECT_THROW(transmission(0.0, 1.0), StatisticsError);
}

TEST(ConditionalVariance, OperatingPoints)
{
    EXPECT_NEAR(conditional_variance(1.0, 0.10, 1.0), 0.99, 1e-15);
    EXPECT_NEAR(conditional_variance(1.02, 0.10, 1.0), 1.01, 1e-15);
    EXPECT_NEAR(conditional_variance(1.0, 0.21, 1.0), 0.9559, 1e-15);
    EXPECT_THROW(conditional_variance(0.5, 1.0, 1.0), StatisticsError);
    EXPECT_THROW(conditional_variance(1.0, 0.1, 0.0), StatisticsError);
}

TEST(ClassicalBound, AnchorsAndRange)
{
    EXPECT_DOUBLE_EQ(classical_bound(0.02), 1.01);
    EXPECT_DOUBLE_EQ(classical_bound(0.08), 1.04);
    EXPECT_DOUBLE_EQ(classical_bound(0.0), 1.0);
    EXPECT_THROW(classical_bound(-0.1), StatisticsError);
    EXPECT_THROW(classical_bound(2.5), StatisticsError);
}

TEST(ChannelExpectations, Examples)
{
    auto e = channel_expectations(0.10, 0.0);
    EXPECT_NEAR(e.t_total, 0.02, 1e-15);
    EXPECT_NEAR(e.v, 0.99, 1e-15);
    e = channel_expectations(0.0, 0.0);
    EXPECT_EQ(e.t_total, 0.0);
    EXPECT_EQ(e.v, 1.0);
    e = channel_expectations(1.0, 0.0);
    EXPECT_EQ(e.t_total, 2.0);
    EXPECT_EQ(e.v, 0.0);
}

TEST(Verdict, Examples)
{
    EXPECT_EQ(verdict(0.02, 0.99, 0.005), Verdict::quantum);
    EXPECT_EQ(verdict(0.08, 1.07, 0.005), Verdict::classical);
    EXPECT_EQ(verdict(0.02, 1.01, 0.005), Verdict::inconclusive);
    EXPECT_EQ(to_string(Verdict::quantum), "quantum");
}

TEST(Verdict, MonotoneInConditionalVariance)
{
    auto rank = [](Verdict v) {
        return v == Verdict::quantum ? 0 : v == Verdict::inconclusive ? 1 : 2;
    };
    for (double t : {0.0, 0.02, 0.08, 0.5}) {
        int last = 0;
        for (double v = 0.9; v < 1.2; v += 0.001) {
            const int r = rank(verdict(t, v, 0.01));
            EXPECT_GE(r, last);
            last = r;
        }
    }
}

TEST(TvFromSamples, MatchesChannelExpectationsOnGrid)
{
    std::uint64_t seed = 100;
    for (double eta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (double excess : {0.0, 0.02, 0.1}) {
            const Ensemble e = beamsplitter(eta, excess, 5.0, 2000, ++seed);
            const TVReport r = tv_from_samples(e.in, e.out);
            const ChannelExpectation x = channel_expectations(eta, excess);
            EXPECT_NEAR(r.t_total, x.t_total, 3.0 * r.se_t) << "eta " << eta << " excess " << excess;
            EXPECT_NEAR(r.v_geo, x.v, 3.0 * r.se_v) << "eta " << eta << " excess " << excess;
            EXPECT_NEAR(r.t_total, r.t_x + r.t_y, 1e-15);
            EXPECT_NEAR(r.v_geo, std::sqrt(r.v_x * r.v_y), 1e-15);
            EXPECT_EQ(r.n_samples, 2000);
        }
    }
}

TEST(TvFromSamples, StandardErrorShrinksWithEnsembleSize)
{
    const Ensemble small = beamsplitter(0.3, 0.0, 5.0, 1000, 1);
    const Ensemble large = beamsplitter(0.3, 0.0, 5.0, 16000, 2);
    const TVReport a = tv_from_samples(small.in, small.out);
    const TVReport b = tv_from_samples(large.in, large.out);
    EXPECT_NEAR(a.se_v / b.se_v, 4.0, 1.2);
    EXPECT_NEAR(tv_from_samples(small.in, small.out, 6.0).margin / a.margin, 2.0, 1e-12);
}

TEST(TvFromSamples, TooFewSamplesRejected)
{
    const Ensemble e = beamsplitter(0.3, 0.0, 5.0, 20, 1);
    EXPECT_THROW(tv_from_samples(e.in, e.out), StatisticsError);
}

TEST(TvFromNominalInput, AgreesForCoherentInput)
{
    const Ensemble e = beamsplitter(0.5, 0.0, 5.0, 4000, 9);
    const TVReport r = tv_from_nominal_input(5.0, 5.0, e.out);
    const ChannelExpectation x = channel_expectations(0.5, 0.0);
    EXPECT_NEAR(r.t_total, x.t_total, 0.02);
    EXPECT_NEAR(r.v_geo, x.v, 0.05);
}

TEST(Report, KeyValueAndCsv)
{
    const Ensemble e = beamsplitter(0.3, 0.0, 5.0, 400, 4);
    const TVReport r = tv_from_samples(e.in, e.out);
    std::ostringstream os;
    write_report(os, r);
    EXPECT_NE(os.str().find("verdict = "), std::string::npos);
    EXPECT_NE(os.str().find("t_total = "), std::string::npos);
    const std::string header = csv_header_tv();
    const std::string row = csv_row_tv(r);
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}
