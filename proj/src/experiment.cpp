#include "irsbf/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace irsbf::harness {

const char* to_string(Method m)
{
    switch (m) {
    case Method::MM: return "MM";
    case Method::SCA: return "SCA";
    case Method::FixedIRS: return "FixedIRS";
    case Method::NoIRS: return "NoIRS";
    }
    return "?";
}

Method parse_method(std::string_view name)
{
    for (Method m : all_methods)
        if (name == to_string(m))
            return m;
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

const char* to_string(SweepKind k)
{
    switch (k) {
    case SweepKind::Run: return "run";
    case SweepKind::Nmse: return "nmse";
    case SweepKind::Power: return "power";
    case SweepKind::IrsPosition: return "irs_position";
    }
    return "?";
}

TrialOutcome run_trial(const TrialSpec& spec, const OptimizerConfig& opt, std::uint64_t seed, bool record_timing)
{
    using clock = std::chrono::steady_clock;
    auto scenario_rng = make_stream(seed, 0);
    Problem<double> base = make_problem<double>(spec.scenario, scenario_rng);

    TrialOutcome out;
    for (int bits : spec.bits) {
        Problem<double> p = base;
        p.dims.bits = bits;
        for (Method m : all_methods) {
            OptimizerConfig cfg = opt;
            cfg.method = m == Method::SCA ? PassiveMethod::SCA : PassiveMethod::MM;
            auto init_rng = make_stream(seed, 1);
            const auto start = clock::now();
            try {
                RunResult<double> r;
                switch (m) {
                case Method::MM:
                case Method::SCA: r = run_joint_design(cfg, p, init_rng); break;
                case Method::FixedIRS: r = run_baseline_fixed_irs(cfg, p, init_rng); break;
                case Method::NoIRS: r = run_baseline_no_irs(cfg, p, init_rng); break;
                }
                const double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
                out.records.push_back({spec.sweep_name, spec.sweep_value, m, bits, seed, r.rate, r.iterations,
                                       record_timing ? ms : 0.0});
            } catch (const NumericalError& e) {
                out.failures.push_back(spec.sweep_name + "=" + std::to_string(spec.sweep_value) + " method=" +
                                       to_string(m) + " bits=" + std::to_string(bits) + " seed=" + std::to_string(seed) +
                                       ": " + e.what());
            }
        }
    }
    return out;
}

std::vector<TrialSpec> sweep_points(SweepKind kind, const HarnessConfig& cfg)
{
    cfg.validate();
    const auto& sw = cfg.sweep;
    std::vector<TrialSpec> points;
    switch (kind) {
    case SweepKind::Run:
        points.push_back({"run", cfg.scenario.nmse, cfg.scenario, {cfg.scenario.dims.bits}});
        break;
    case SweepKind::Nmse:
        for (double v : sw.nmse_grid) {
            TrialSpec t{"nmse", v, cfg.scenario, sw.nmse_bits};
            t.scenario.nmse = v;
            points.push_back(std::move(t));
        }
        break;
    case SweepKind::Power:
        for (double v : sw.power_grid_dbm) {
            TrialSpec t{"power", v, cfg.scenario, sw.power_bits};
            t.scenario.pt_dbm = v;
            points.push_back(std::move(t));
        }
        break;
    case SweepKind::IrsPosition:
        for (double v : sw.irs_x_grid) {
            TrialSpec t{"irs_position", v, cfg.scenario, sw.position_bits};
            t.scenario.irs_pos[0] = v;
            t.scenario.validate();
            points.push_back(std::move(t));
        }
        break;
    }
    return points;
}

SweepStats run_points(const std::vector<TrialSpec>& points, const HarnessConfig& cfg, const OutcomeSink& sink)
{
    cfg.validate();
    const std::size_t trials = static_cast<std::size_t>(cfg.sweep.trials);
    const std::size_t total = points.size() * trials;
    SweepStats stats;
    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total || abort.load())
                return;
            const TrialSpec& spec = points[i / trials];
            const std::uint64_t seed = cfg.sweep.seed + i % trials;
            try {
                const TrialOutcome outcome = run_trial(spec, cfg.optimizer, seed, cfg.sweep.record_timing);
                std::lock_guard lock(sink_mutex);
                ++stats.trials;
                stats.records += outcome.records.size();
                stats.failures += outcome.failures.size();
                if (sink)
                    sink(spec, seed, outcome);
            } catch (...) {
                std::lock_guard lock(sink_mutex);
                if (!error)
                    error = std::current_exception();
                abort = true;
                return;
            }
        }
    };

    const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.sweep.threads), total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
    return stats;
}

} // namespace irsbf::harness
