#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "irsbf/harness/config.hpp"
#include "irsbf/harness/experiment.hpp"
#include "irsbf/harness/records.hpp"

namespace {

using namespace irsbf;
using namespace irsbf::harness;

enum Exit { ok = 0, config_error = 2, io_error = 3, numerical_failure = 4 };

struct CommonOptions {
    std::string config;
    std::string profile = "desk";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
    std::string out;
    bool no_timing = false;
    bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "JSON file with scenario, optimizer and sweep sections");
    cmd->add_option("--profile", o.profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", o.seed, "Master seed; trial t uses seed + t");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per grid point");
    cmd->add_option("--threads", o.threads, "Worker threads");
    cmd->add_option("--out", o.out, "Output CSV path")->required();
    cmd->add_flag("--no-timing", o.no_timing, "Write wall_time_ms = 0 so reruns are byte-identical");
    cmd->add_flag("--print-config", o.print_config, "Print the effective configuration to stderr");
}

HarnessConfig resolve(const CommonOptions& o)
{
    HarnessConfig cfg = profile(o.profile);
    if (!o.config.empty())
        cfg = load_config(cfg, o.config);
    if (o.seed)
        cfg.sweep.seed = *o.seed;
    if (o.trials)
        cfg.sweep.trials = *o.trials;
    if (o.threads)
        cfg.sweep.threads = *o.threads;
    if (o.no_timing)
        cfg.sweep.record_timing = false;
    cfg.validate();
    return cfg;
}

int run_sweep(SweepKind kind, const CommonOptions& o)
{
    const HarnessConfig cfg = resolve(o);
    if (o.print_config)
        std::cerr << to_json(cfg) << '\n';
    const auto points = sweep_points(kind, cfg);
    CsvWriter writer(o.out);
    const auto stats = run_points(points, cfg, [&](const TrialSpec&, std::uint64_t, const TrialOutcome& outcome) {
        for (const auto& f : outcome.failures)
            std::cerr << "numerical failure: " << f << '\n';
        writer.write(outcome.records);
    });
    std::cerr << to_string(kind) << ": " << stats.trials << " trials, " << stats.records << " rows, " << stats.failures
              << " failed runs -> " << o.out << '\n';
    return stats.failures > 0 ? numerical_failure : ok;
}

int run_summarize(const std::string& csv, const std::string& out)
{
    const auto rows = summarize(read_records(csv));
    if (out.empty()) {
        write_summary(std::cout, rows);
        return ok;
    }
    std::ofstream file(out, std::ios::trunc);
    if (!file)
        throw IoError("cannot open '" + out + "' for writing");
    write_summary(file, rows);
    if (!file)
        throw IoError("write to '" + out + "' failed");
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint active/passive beamforming for IRS-aided multiuser MIMO: Monte Carlo experiments"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        SweepKind kind;
    };
    const Sub subs[] = {{"run", "Single scenario, all four methods", SweepKind::Run},
                        {"sweep-nmse", "WSR versus channel-estimation NMSE", SweepKind::Nmse},
                        {"sweep-power", "WSR versus transmit power", SweepKind::Power},
                        {"sweep-irs-position", "WSR versus IRS x coordinate", SweepKind::IrsPosition}};
    CommonOptions opts[std::size(subs)];
    CLI::App* cmds[std::size(subs)];
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        cmds[i] = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmds[i], opts[i]);
    }

    std::string csv_in;
    std::string summary_out;
    auto* summ = app.add_subcommand("summarize", "Mean and 95% CI per (sweep, value, method, bits)");
    summ->add_option("csv", csv_in, "Sweep CSV")->required();
    summ->add_option("--out", summary_out, "Write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*summ)
            return run_summarize(csv_in, summary_out);
        for (std::size_t i = 0; i < std::size(subs); ++i)
            if (*cmds[i])
                return run_sweep(subs[i].kind, opts[i]);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return io_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
    return ok;
}
