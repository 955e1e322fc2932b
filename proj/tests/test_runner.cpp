#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "eitmem/config.hpp"
#include "eitmem/parallel.hpp"
#include "eitmem/report.hpp"
#include "eitmem/runner.hpp"
#include "eitmem/seeding.hpp"

using namespace eitmem;
namespace fs = std::filesystem;

namespace {

RunConfig preset(const std::string& name)
{
    return load_config(fs::path(EITMEM_CONFIG_DIR) / (name + ".json"));
}

RunConfig small(const std::string& name, Index n = 200)
{
    RunConfig c = preset(name);
    c.sequence.n_realizations = n;
    c.sequence.n_calibration = std::max<Index>(n, 100);
    return c;
}

const Artifact& find(const ArtifactSet& set, const std::string& name)
{
    for (const auto& a : set.files)
        if (a.name == name)
            return a;
    throw std::runtime_error("missing artifact " + name);
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("eitmem_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Config, CommentsAcceptedAndUnknownKeysRejected)
{
    const RunConfig c = parse_config("// header\n{ \"name\": \"x\", /* inline */ \"seed\": 7 }");
    EXPECT_EQ(c.name, "x");
    EXPECT_EQ(c.sequence.master_seed, 7u);
    EXPECT_THROW(parse_config("{ \"nmae\": \"x\" }"), ConfigError);
    EXPECT_THROW(parse_config("{ \"medium\": { \"tau\": 1 } }"), ConfigError);
    EXPECT_THROW(parse_config("{ \"medium\": [1, 2] }"), ConfigError);
    EXPECT_THROW(parse_config("{ broken"), ConfigError);
}

TEST(Config, DumpParseRoundTrip)
{
    for (const auto& entry : fs::directory_iterator(EITMEM_CONFIG_DIR)) {
        const RunConfig c = load_config(entry.path());
        const std::string text = dump_config(c);
        EXPECT_EQ(dump_config(parse_config(text)), text) << entry.path();
        // A manifest loads as a configuration.
        EXPECT_EQ(dump_config(parse_config(dump_manifest(c, "run"))), text) << entry.path();
    }
}

TEST(Config, RejectsInconsistentSettings)
{
    RunConfig c = preset("fig2");
    c.storage.pulse.omega = kTwoPi * 21e6; // above 80% of Nyquist
    EXPECT_THROW(c.validate(), ConfigError);
    c = preset("fig2");
    c.storage.pulse.ramp = 1e-8; // edges faster than the sampling allows
    EXPECT_THROW(c.validate(), ConfigError);
    c = preset("tv_low_power");
    c.acquisition.noise = false;
    EXPECT_THROW(c.validate(), ConfigError);
    c = preset("fig2");
    c.sequence.n_calibration = 50;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_NO_THROW(preset("fig2").validate());
}

TEST(Config, RecordLeadIsWholeWindows)
{
    const RunConfig c = preset("fig2");
    const StorageSetup s = resolve_setup(c);
    const double window = resolve_n_cycles(c) * kTwoPi / s.pulse.omega;
    const double k = s.pulse.start_time / window;
    EXPECT_NEAR(k, std::round(k), 1e-9);
    EXPECT_GE(s.pulse.start_time, c.sequence.lead);
}

TEST(Seeding, StreamsAreDistinct)
{
    EXPECT_NE(derive_seed(1, 0, Stream::signal), derive_seed(1, 0, Stream::blank));
    EXPECT_NE(derive_seed(1, 0, Stream::signal), derive_seed(1, 1, Stream::signal));
    EXPECT_NE(derive_seed(1, 0, Stream::signal), derive_seed(2, 0, Stream::signal));
    EXPECT_EQ(derive_seed(5, 9, Stream::input), derive_seed(5, 9, Stream::input));
}

TEST(Parallel, EveryIndexOnceAndLowestErrorRethrown)
{
    std::vector<int> hits(1000, 0);
    parallel_for(1000, 4, [&](Index i) { ++hits[static_cast<std::size_t>(i)]; });
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    try {
        parallel_for(100, 3, [](Index i) {
            if (i == 17 || i == 60)
                throw std::runtime_error(std::to_string(i));
        });
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "17");
    }
}

TEST(Csv, Rfc4180Quoting)
{
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
    EXPECT_EQ(csv_line({"a", "b,c"}), "a,\"b,c\"\n");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(RunSequence, NominalDefaultsGiveTenPercentWithLeakPeak)
{
    const SequenceResult r = run_sequence(small("fig2", 300), RunOptions{});
    EXPECT_NEAR(r.efficiency, 0.10, 0.01);
    EXPECT_NEAR(r.calibration.level, 1.0, 3.0 * std::sqrt(2.0 / 300));
    // Leak peak during the pulse, retrieval after the control returns.
    const QuadratureStats m = r.subtraction.subtracted.normalized();
    const double pulse_mid = r.setup.pulse.start_time + 0.5 * r.setup.pulse.duration;
    const double on = r.setup.timeline.switch_on(r.setup.pulse);
    const double leak = peak_magnitude(m, pulse_mid - 1e-6, pulse_mid + 1e-6);
    const double dark = peak_magnitude(m, r.setup.pulse.end_time() + 2e-6, on - 1e-6);
    const double retrieved = peak_magnitude(m, on, on + r.setup.pulse.duration);
    EXPECT_GT(leak, retrieved);
    EXPECT_GT(retrieved, 5.0 * dark);
}

TEST(RunSequence, VacuumInputHasNoPeaks)
{
    RunConfig c = small("fig2", 300);
    c.input_power = 0.0;
    const SequenceResult r = run_sequence(c, RunOptions{});
    const QuadratureStats m = r.subtraction.subtracted.normalized();
    const double tol = 4.0 * std::sqrt(2.0 / 300);
    EXPECT_LT(m.mean_x.cwiseAbs().maxCoeff(), tol * 1.5);
    EXPECT_NEAR(r.corrected_variance(0), 1.0, 0.1);
    EXPECT_NEAR(r.corrected_variance(1), 1.0, 0.1);
}

TEST(RunSequence, PairedRecordsShareTransientButNotNoise)
{
    RunConfig c = small("fig5", 4);
    c.sequence.n_calibration = 100;
    const SequenceResult r = run_sequence(c, RunOptions{1, true});
    ASSERT_EQ(r.records.size(), 8u);
    for (std::size_t i = 0; i < 4; ++i) {
        const HomodyneRecord& sig = r.records[2 * i];
        const HomodyneRecord& blk = r.records[2 * i + 1];
        EXPECT_FALSE(sig.meta.blank);
        EXPECT_TRUE(blk.meta.blank);
        EXPECT_EQ(sig.meta.realization, blk.meta.realization);
        EXPECT_NE(sig.meta.seed, blk.meta.seed);
    }
    // Noise-free replay: the blank partner is the transient alone.
    RunConfig quiet = c;
    quiet.acquisition.noise = false;
    quiet.acquisition.quantize = false;
    quiet.input_power = 0.0;
    const SequenceResult q = run_sequence(quiet, RunOptions{1, true});
    for (std::size_t i = 0; i + 1 < q.records.size(); i += 2)
        EXPECT_EQ(q.records[i].analog, q.records[i + 1].analog);
}

TEST(RunSequence, ConditionalVarianceIndependentOfFullScale)
{
    RunConfig a = small("tv_low_power", 400);
    RunConfig b = a;
    b.acquisition.full_scale = 1024.0;
    const SequenceResult ra = run_sequence(a, RunOptions{});
    const SequenceResult rb = run_sequence(b, RunOptions{});
    ASSERT_TRUE(ra.tv && rb.tv);
    EXPECT_NEAR(ra.tv->v_geo, rb.tv->v_geo, 2e-3);
    EXPECT_NEAR(ra.tv->t_total, rb.tv->t_total, 2e-4);
}

TEST(Artifacts, DeterministicAcrossWorkerCounts)
{
    const RunConfig c = small("tv_low_power", 200);
    const ArtifactSet one = sequence_artifacts(run_sequence(c, RunOptions{1, false}));
    const ArtifactSet four = sequence_artifacts(run_sequence(c, RunOptions{4, false}));
    ASSERT_EQ(one.files.size(), four.files.size());
    for (std::size_t i = 0; i < one.files.size(); ++i) {
        EXPECT_EQ(one.files[i].name, four.files[i].name);
        EXPECT_EQ(one.files[i].content, four.files[i].content) << one.files[i].name;
    }
}

TEST(Artifacts, ManifestReproducesRun)
{
    const RunConfig c = small("fig2", 150);
    const ArtifactSet first = sequence_artifacts(run_sequence(c, RunOptions{}));
    const RunConfig again = parse_config(find(first, "manifest.json").content);
    const ArtifactSet second = sequence_artifacts(run_sequence(again, RunOptions{2, false}));
    for (std::size_t i = 0; i < first.files.size(); ++i)
        EXPECT_EQ(first.files[i].content, second.files[i].content) << first.files[i].name;
}

TEST(Artifacts, EmitWritesFilesAndEmptySetLeavesNothing)
{
    const fs::path out = scratch("emit");
    EXPECT_THROW(emit_report(out, ArtifactSet{}), StatisticsError);
    EXPECT_FALSE(fs::exists(out));

    const RunConfig c = small("tv_low_power", 100);
    const SequenceResult r = run_sequence(c, RunOptions{1, true});
    const ArtifactSet set = sequence_artifacts(r);
    emit_report(out, set);
    for (const auto& a : set.files)
        EXPECT_EQ(slurp(out / a.name), a.content) << a.name;
    EXPECT_TRUE(fs::exists(out / "records"));
    EXPECT_FALSE(fs::exists(fs::path(out.string() + ".staging")));

    // Re-rendering from disk reproduces the efficiency and T-V numbers.
    const std::string text = rerender_report(out);
    const auto at = text.find("\nefficiency = ");
    ASSERT_NE(at, std::string::npos);
    EXPECT_NEAR(std::stod(text.substr(at + 14)), r.efficiency, 1e-12);
    EXPECT_NE(text.find("verdict = "), std::string::npos);
    fs::remove_all(out);
}

TEST(Sweep, FourPointsGiveFourRows)
{
    RunConfig c = small("fig3a", 100);
    c.sweep->grid = {4e-6, 8e-6, 12e-6, 16e-6};
    const SweepResult r = run_sweep(c, RunOptions{});
    EXPECT_FALSE(r.error);
    const std::string csv = find(sweep_artifacts(r), "sweep.csv").content;
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Sweep, FailingPointLeavesMarkerRow)
{
    RunConfig c = small("fig3b", 100);
    c.sweep->grid = {1.0e6, 1.25e6, 1.3e6};
    const SweepResult r = run_sweep(c, RunOptions{});
    ASSERT_TRUE(r.error.has_value());
    EXPECT_EQ(r.points.size(), 2u);
    const std::string csv = find(sweep_artifacts(r), "sweep.csv").content;
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_NE(csv.find("\nFAILED,"), std::string::npos);
}

TEST(Sweep, PointSeedsDeriveFromIndex)
{
    const RunConfig c = preset("fig3a");
    EXPECT_NE(sweep_point_config(c, 5e-6, 0).sequence.master_seed,
              sweep_point_config(c, 5e-6, 1).sequence.master_seed);
    EXPECT_EQ(sweep_point_config(c, 5e-6, 1).sequence.master_seed,
              derive_seed(c.sequence.master_seed, 1, Stream::sweep_point));
}

TEST(Fits, LineAndUnwrap)
{
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{1, 3, 5, 7};
    const auto [slope, intercept] = fit_line(x, y);
    EXPECT_NEAR(slope, 2.0, 1e-14);
    EXPECT_NEAR(intercept, 1.0, 1e-14);
    const std::vector<double> wrapped{3.0, -3.0, -2.5};
    const auto u = unwrap(wrapped);
    EXPECT_NEAR(u[1], -3.0 + kTwoPi, 1e-14);
    EXPECT_NEAR(u[2], -2.5 + kTwoPi, 1e-14);
}
