#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "eitmem/report.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend;
    std::string out = "eitmem-out";
    int workers = 1;
    bool dump_records = false;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config)
{
    auto* cfg = cmd->add_option("--config", f.config, "run configuration (JSON, comments allowed)");
    if (needs_config)
        cfg->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "master seed, overrides the configuration");
    cmd->add_option("--backend", f.backend, "storage backend")->check(CLI::IsMember({"phenom", "propagate"}));
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--dump-records", f.dump_records, "also write binary homodyne records");
}

eitmem::RunConfig load(const Flags& f)
{
    eitmem::RunConfig config = eitmem::load_config(f.config);
    if (f.seed)
        config.sequence.master_seed = *f.seed;
    if (f.backend)
        config.backend = eitmem::parse_backend(*f.backend);
    config.validate();
    return config;
}

int run(const Flags& f)
{
    const eitmem::RunConfig config = load(f);
    const auto result = eitmem::run_sequence(config, {f.workers, f.dump_records});
    const auto artifacts = eitmem::sequence_artifacts(result);
    eitmem::emit_report(f.out, artifacts);
    std::cout << artifacts.files[1].content;
    return 0;
}

int sweep(const Flags& f)
{
    const eitmem::RunConfig config = load(f);
    if (!config.sweep)
        throw eitmem::ConfigError(f.config + ": no sweep section");
    const auto result = eitmem::run_sweep(config, {f.workers, false});
    const auto artifacts = eitmem::sweep_artifacts(result);
    eitmem::emit_report(f.out, artifacts);
    std::cout << artifacts.files.back().content;
    if (result.error) {
        std::cerr << "eitmem: sweep stopped at " << *result.error << '\n';
        return 1;
    }
    return 0;
}

int calibrate(const Flags& f)
{
    const eitmem::RunConfig config = load(f);
    const auto cal = eitmem::calibrate_shot_noise(config, {f.workers, false});
    const eitmem::StorageSetup setup = eitmem::resolve_setup(config);
    const auto phenom = eitmem::store(eitmem::Backend::phenomenological, setup);
    std::optional<eitmem::StorageOutcome> prop;
    if (config.backend == eitmem::Backend::propagation)
        prop = eitmem::store(eitmem::Backend::propagation, setup);
    const auto artifacts = eitmem::calibration_artifacts(config, cal, phenom, prop);
    eitmem::emit_report(f.out, artifacts);
    std::cout << artifacts.files[1].content;
    return 0;
}

int report(const Flags& f)
{
    std::cout << eitmem::rerender_report(f.out);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Single-sideband EIT quantum memory simulator"};
    app.require_subcommand(1);
    Flags flags;
    add_common(app.add_subcommand("run", "one timed sequence with its ensembles"), flags, true);
    add_common(app.add_subcommand("sweep", "parameter sweep named in the configuration"), flags, true);
    add_common(app.add_subcommand("calibrate", "shot-noise level and backend cross-check"), flags, true);
    add_common(app.add_subcommand("report", "re-render a saved run from --out"), flags, false);
    CLI11_PARSE(app, argc, argv);

    try {
        const std::string verb = app.get_subcommands().front()->get_name();
        if (verb == "run")
            return run(flags);
        if (verb == "sweep")
            return sweep(flags);
        if (verb == "calibrate")
            return calibrate(flags);
        return report(flags);
    } catch (const eitmem::ConfigError& e) {
        std::cerr << "eitmem: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "eitmem: " << e.what() << '\n';
        return 1;
    }
}
