#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "irsbf/harness/config.hpp"

namespace irsbf::harness {

enum class Method { MM, SCA, FixedIRS, NoIRS };

inline constexpr std::array<Method, 4> all_methods{Method::MM, Method::SCA, Method::FixedIRS, Method::NoIRS};

const char* to_string(Method m);
/// Throws ConfigError for names outside MM, SCA, FixedIRS, NoIRS.
Method parse_method(std::string_view name);

/// One CSV row.
struct SweepRecord {
    std::string sweep_name;
    double sweep_value = 0;
    Method method = Method::MM;
    int bits = 0;
    std::uint64_t seed = 0;
    double wsr_bps_hz = 0;
    int outer_iterations = 0;
    double wall_time_ms = 0;
};

/// A scenario to evaluate at each listed phase resolution.
struct TrialSpec {
    std::string sweep_name;
    double sweep_value = 0;
    ScenarioConfig scenario;
    std::vector<int> bits;
};

struct TrialOutcome {
    std::vector<SweepRecord> records;
    /// One message per method run that hit a numerical error; those runs have no record.
    std::vector<std::string> failures;
};

/// One channel draw from make_stream(seed, 0), shared by every method and every
/// entry of spec.bits; every run starts from the same make_stream(seed, 1) stream.
/// Records come out ordered by bits, then MM, SCA, FixedIRS, NoIRS.
TrialOutcome run_trial(const TrialSpec& spec, const OptimizerConfig& opt, std::uint64_t seed, bool record_timing);

enum class SweepKind { Run, Nmse, Power, IrsPosition };

/// CSV name of a sweep: run, nmse, power, irs_position.
const char* to_string(SweepKind k);

/// The grid points of a sweep. Run is the single point described by cfg.scenario.
std::vector<TrialSpec> sweep_points(SweepKind kind, const HarnessConfig& cfg);

struct SweepStats {
    std::size_t trials = 0;
    std::size_t records = 0;
    std::size_t failures = 0;
};

/// Called once per finished trial, never concurrently.
using OutcomeSink = std::function<void(const TrialSpec&, std::uint64_t seed, const TrialOutcome&)>;

/// Runs every (point, trial) pair on cfg.sweep.threads workers. Trial t of every
/// point uses seed cfg.sweep.seed + t. With one thread the sink sees points in
/// order, trials ascending.
SweepStats run_points(const std::vector<TrialSpec>& points, const HarnessConfig& cfg, const OutcomeSink& sink);

} // namespace irsbf::harness
