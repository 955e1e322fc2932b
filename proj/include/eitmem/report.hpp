#ifndef EITMEM_REPORT_HPP
#define EITMEM_REPORT_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eitmem/runner.hpp"

namespace eitmem {

/// One output file, rendered in memory before anything touches the disk.
struct Artifact {
    std::string name;
    std::string content;
};

struct ArtifactSet {
    std::vector<Artifact> files;
    std::vector<HomodyneRecord> records; ///< written under records/ when non-empty
};

/// RFC-4180 field: quoted when it holds a comma, quote or line break.
std::string csv_field(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

/// Shortest round-trip decimal rendering.
std::string format_number(double value);

ArtifactSet sequence_artifacts(const SequenceResult& result);
ArtifactSet sweep_artifacts(const SweepResult& result);
ArtifactSet calibration_artifacts(const RunConfig& config, const ShotNoiseCalibration& calibration,
                                  const StorageOutcome& phenomenological,
                                  const std::optional<StorageOutcome>& propagation);

/// Writes every artifact into `out`. Files are staged in a sibling directory
/// and moved into place only after all of them were written; an empty set
/// throws without creating anything.
void emit_report(const std::filesystem::path& out, const ArtifactSet& artifacts);

/// Recomputes efficiency, phases and the T-V report of a saved run from its
/// manifest, summary and CSV files.
std::string rerender_report(const std::filesystem::path& dir);

} // namespace eitmem

#endif // EITMEM_REPORT_HPP
