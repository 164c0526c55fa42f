#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "irsbf/bcd_optimizer.hpp"
#include "irsbf/channel_sim.hpp"

namespace irsbf::harness {

/// Grids and run controls for the Monte Carlo sweeps.
struct SweepConfig {
    std::vector<double> nmse_grid{0.0, 0.02, 0.05, 0.1};
    std::vector<int> nmse_bits{0, 2};
    std::vector<double> power_grid_dbm{-10.0, -5.0, 0.0, 5.0, 10.0};
    std::vector<int> power_bits{2};
    std::vector<double> irs_x_grid{50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0};
    std::vector<int> position_bits{2};
    int trials = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    /// When false every row carries wall_time_ms = 0, so reruns are byte-identical.
    bool record_timing = true;

    void validate() const;
};

struct HarnessConfig {
    ScenarioConfig scenario;
    OptimizerConfig optimizer;
    SweepConfig sweep;

    void validate() const;
};

/// "desk": M=4 N=16 Nr=2 K=2 Ns=2, 100 trials. "paper": M=8 N=100 Nr=2 K=3 Ns=2, 1000 trials.
HarnessConfig profile(const std::string& name);

/// Overlays a JSON document with optional sections scenario, optimizer and sweep
/// onto `base`. Unknown keys and ill-typed values throw ConfigError.
HarnessConfig apply_json(HarnessConfig base, const std::string& text);

/// apply_json on the contents of a file; an unreadable file throws IoError.
HarnessConfig load_config(HarnessConfig base, const std::string& path);

/// The configuration as JSON, in the same layout apply_json accepts.
std::string to_json(const HarnessConfig& cfg);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace irsbf::harness
