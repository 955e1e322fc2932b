#include "eitmem/report.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace eitmem {

namespace fs = std::filesystem;

std::string csv_field(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_line(const std::vector<std::string>& fields)
{
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0)
            line += ',';
        line += csv_field(fields[i]);
    }
    line += '\n';
    return line;
}

std::string format_number(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::string stats_csv(const QuadratureStats& stats)
{
    std::ostringstream os;
    write_stats_csv(os, stats);
    return os.str();
}

class KeyValues {
public:
    void add(std::string key, double value) { lines_ << key << " = " << format_number(value) << '\n'; }
    void add(std::string key, std::string_view value) { lines_ << key << " = " << value << '\n'; }
    void raw(const std::string& text) { lines_ << text; }
    std::string str() const { return lines_.str(); }

private:
    std::ostringstream lines_;
};

std::string tv_text(const TVReport& tv)
{
    std::ostringstream os;
    write_report(os, tv);
    return os.str();
}

std::vector<std::string> tv_fields(const std::optional<TVReport>& tv)
{
    if (!tv)
        return std::vector<std::string>(9);
    return {format_number(tv->t_total), format_number(tv->se_t), format_number(tv->v_geo),
            format_number(tv->se_v),   format_number(tv->v_x),  format_number(tv->v_y),
            format_number(tv->v_classical), format_number(tv->margin), std::string(to_string(tv->verdict))};
}

} // namespace

ArtifactSet sequence_artifacts(const SequenceResult& r)
{
    ArtifactSet set;
    set.files.push_back({"manifest.json", dump_manifest(r.config, "run")});

    KeyValues kv;
    kv.add("name", r.config.name);
    kv.add("backend", to_string(r.outcome.backend));
    kv.add("seed", std::to_string(r.config.sequence.master_seed));
    kv.add("n_realizations", std::to_string(r.config.sequence.n_realizations));
    kv.add("n_calibration", std::to_string(r.config.sequence.n_calibration));
    kv.add("sideband_frequency_hz", r.setup.pulse.omega / kTwoPi);
    kv.add("n_cycles", std::to_string(r.n_cycles));
    kv.add("input_amplitude", std::abs(r.setup.pulse.amplitude));
    kv.add("input_phase", r.setup.pulse.phase());
    kv.add("shot_reference", r.calibration.level);
    kv.add("shot_reference_first_half", r.calibration.first_half);
    kv.add("shot_reference_second_half", r.calibration.second_half);
    kv.add("efficiency", r.efficiency);
    kv.add("efficiency_model", r.outcome.amplitude_efficiency);
    kv.add("efficiency_peak", r.peak_efficiency);
    kv.add("retrieved_phase", r.retrieved_phase);
    kv.add("phase_shift", r.phase_shift);
    kv.add("var_x_signal", r.signal_variance(0));
    kv.add("var_y_signal", r.signal_variance(1));
    kv.add("var_x_subtracted", r.subtracted_variance(0));
    kv.add("var_y_subtracted", r.subtracted_variance(1));
    kv.add("var_x_corrected", r.corrected_variance(0));
    kv.add("var_y_corrected", r.corrected_variance(1));
    kv.add("excess_noise", r.outcome.excess_noise);
    if (r.tv)
        kv.raw(tv_text(*r.tv));
    set.files.push_back({"summary.txt", kv.str()});

    set.files.push_back({"stats_signal.csv", stats_csv(r.signal.normalized())});
    set.files.push_back({"stats_blank.csv", stats_csv(r.blank.normalized())});
    set.files.push_back({"stats_subtracted.csv", stats_csv(r.subtraction.subtracted.normalized())});
    set.files.push_back({"stats_calibration.csv", stats_csv(r.calibration.stats.normalized())});
    if (r.tv) {
        std::string csv = csv_line({"x_in", "y_in", "x_out", "y_out"});
        for (Index i = 0; i < r.tv_input.rows(); ++i)
            csv += csv_line({format_number(r.tv_input(i, 0)), format_number(r.tv_input(i, 1)),
                             format_number(r.tv_output(i, 0)), format_number(r.tv_output(i, 1))});
        set.files.push_back({"tv_samples.csv", csv});
    }
    set.records = r.records;
    return set;
}

ArtifactSet sweep_artifacts(const SweepResult& r)
{
    if (r.points.empty() && !r.error)
        throw StatisticsError("sweep produced no results");
    ArtifactSet set;
    set.files.push_back({"manifest.json", dump_manifest(r.config, "sweep")});

    std::vector<std::string> header{"value", "efficiency", "model_efficiency", "retrieved_phase",
                                    "phase_shift", "var_x", "var_y", "fwhm_hz", "excess",
                                    "dual_efficiency", "T", "T_se", "V", "V_se", "V_x", "V_y",
                                    "V_classical", "margin", "verdict"};
    std::string csv = csv_line(header);
    for (const auto& pt : r.points) {
        std::vector<std::string> row{format_number(pt.value),         format_number(pt.efficiency),
                                     format_number(pt.model_efficiency), format_number(pt.retrieved_phase),
                                     format_number(pt.phase_shift),   format_number(pt.var_x),
                                     format_number(pt.var_y),         format_number(pt.fwhm_hz),
                                     format_number(pt.excess),
                                     pt.dual_efficiency ? format_number(*pt.dual_efficiency) : ""};
        for (auto& f : tv_fields(pt.tv))
            row.push_back(std::move(f));
        csv += csv_line(row);
    }
    if (r.error) {
        std::vector<std::string> marker(header.size());
        marker[0] = "FAILED";
        marker[1] = *r.error;
        csv += csv_line(marker);
    }
    set.files.push_back({"sweep.csv", csv});

    KeyValues kv;
    kv.add("name", r.config.name);
    kv.add("kind", to_string(r.config.sweep->kind));
    kv.add("backend", to_string(r.config.backend));
    kv.add("seed", std::to_string(r.config.sequence.master_seed));
    kv.add("points", std::to_string(r.points.size()));
    for (const auto& [key, value] : r.fit)
        kv.add(key, value);
    kv.add("status", r.error ? "failed" : "complete");
    if (r.error)
        kv.add("error", *r.error);
    set.files.push_back({"summary.txt", kv.str()});
    return set;
}

ArtifactSet calibration_artifacts(const RunConfig& config, const ShotNoiseCalibration& calibration,
                                  const StorageOutcome& phenomenological,
                                  const std::optional<StorageOutcome>& propagation)
{
    ArtifactSet set;
    set.files.push_back({"manifest.json", dump_manifest(config, "calibrate")});
    KeyValues kv;
    kv.add("n_calibration", std::to_string(config.sequence.n_calibration));
    kv.add("shot_reference", calibration.level);
    kv.add("shot_reference_first_half", calibration.first_half);
    kv.add("shot_reference_second_half", calibration.second_half);
    kv.add("efficiency_phenom", phenomenological.amplitude_efficiency);
    kv.add("phase_phenom", phenomenological.retrieved_phase);
    if (propagation) {
        kv.add("efficiency_propagate", propagation->amplitude_efficiency);
        kv.add("phase_propagate", propagation->retrieved_phase);
        kv.add("energy_residual_propagate", propagation->energy.residual());
        if (phenomenological.amplitude_efficiency > 0.0)
            kv.add("efficiency_ratio", propagation->amplitude_efficiency / phenomenological.amplitude_efficiency);
    }
    set.files.push_back({"calibration.txt", kv.str()});
    set.files.push_back({"stats_calibration.csv", stats_csv(calibration.stats.normalized())});
    return set;
}

void emit_report(const fs::path& out, const ArtifactSet& artifacts)
{
    if (artifacts.files.empty())
        throw StatisticsError("nothing to write to " + out.string());
    fs::path target = out.empty() ? fs::path(".") : out;
    const fs::path staging = fs::absolute(target).lexically_normal().concat(".staging");
    std::error_code ec;
    fs::remove_all(staging, ec);
    try {
        fs::create_directories(staging);
        for (const auto& a : artifacts.files) {
            std::ofstream os(staging / a.name, std::ios::binary);
            os << a.content;
            if (!os)
                throw std::runtime_error("cannot write " + (target / a.name).string());
        }
        if (!artifacts.records.empty()) {
            fs::create_directories(staging / "records");
            for (const auto& rec : artifacts.records) {
                std::ostringstream name;
                name << (rec.meta.blank ? "blank_" : "signal_") << rec.meta.realization << ".bin";
                write_record(staging / "records" / name.str(), rec);
            }
        }
        fs::create_directories(target);
        for (const auto& entry : fs::directory_iterator(staging)) {
            const fs::path dest = target / entry.path().filename();
            if (fs::is_directory(dest))
                fs::remove_all(dest);
            fs::rename(entry.path(), dest);
        }
        fs::remove_all(staging);
    } catch (const fs::filesystem_error& e) {
        fs::remove_all(staging, ec);
        throw std::runtime_error(std::string("writing ") + target.string() + ": " + e.what());
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
}

namespace {

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path)
{
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<double> row;
        std::istringstream fields(line);
        std::string f;
        while (std::getline(fields, f, ','))
            row.push_back(std::stod(f));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::map<std::string, std::string> read_key_values(const fs::path& path)
{
    std::istringstream in(read_file(path));
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos)
            kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

} // namespace

std::string rerender_report(const fs::path& dir)
{
    const RunConfig config = load_config(dir / "manifest.json");
    const auto summary = read_key_values(dir / "summary.txt");
    const auto shot = summary.find("shot_reference");
    if (shot == summary.end())
        throw std::runtime_error((dir / "summary.txt").string() + " has no shot_reference");

    const auto rows = read_numeric_csv(dir / "stats_subtracted.csv");
    QuadratureStats stats;
    const auto n = static_cast<Index>(rows.size());
    stats.times.resize(n);
    stats.mean_x.resize(n);
    stats.mean_y.resize(n);
    stats.var_x.resize(n);
    stats.var_y.resize(n);
    for (Index k = 0; k < n; ++k) {
        const auto& row = rows[static_cast<std::size_t>(k)];
        if (row.size() != 5)
            throw std::runtime_error("stats_subtracted.csv: expected 5 columns");
        stats.times(k) = row[0];
        stats.mean_x(k) = row[1];
        stats.mean_y(k) = row[2];
        stats.var_x(k) = row[3];
        stats.var_y(k) = row[4];
    }
    const AreaEstimate area = estimate_from_means(config, stats, std::stod(shot->second));

    KeyValues kv;
    kv.add("name", config.name);
    kv.add("backend", to_string(config.backend));
    kv.add("efficiency", area.efficiency);
    kv.add("retrieved_phase", area.retrieved_phase);
    kv.add("phase_shift", area.phase_shift);
    const fs::path tv_path = dir / "tv_samples.csv";
    if (fs::exists(tv_path)) {
        const auto tv_rows = read_numeric_csv(tv_path);
        Eigen::MatrixX2d in(static_cast<Index>(tv_rows.size()), 2);
        Eigen::MatrixX2d out(static_cast<Index>(tv_rows.size()), 2);
        for (std::size_t i = 0; i < tv_rows.size(); ++i) {
            const auto& row = tv_rows[i];
            if (row.size() != 4)
                throw std::runtime_error("tv_samples.csv: expected 4 columns");
            in.row(static_cast<Index>(i)) << row[0], row[1];
            out.row(static_cast<Index>(i)) << row[2], row[3];
        }
        kv.raw(tv_text(tv_from_samples(in, out, config.benchmark.margin_sigmas)));
    }
    return kv.str();
}

} // namespace eitmem
