#include "irsbf/harness/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace irsbf::harness {

using nlohmann::json;

namespace {

using Setter = std::function<void(const json&)>;

template <class T> Setter bind(T& field)
{
    return [&field](const json& v) { field = v.get<T>(); };
}

Setter bind_point(Point2& p)
{
    return [&p](const json& v) {
        const auto xy = v.get<std::vector<double>>();
        if (xy.size() != 2)
            throw ConfigError("config: coordinates must have two elements");
        p = {xy[0], xy[1]};
    };
}

void apply_section(const json& obj, const std::string& path, const std::map<std::string, Setter>& fields)
{
    if (!obj.is_object())
        throw ConfigError("config: '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        const std::string name = path.empty() ? key : path + "." + key;
        const auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("config: unknown key '" + name + "'");
        try {
            it->second(value);
        } catch (const json::exception& e) {
            throw ConfigError("config: bad value for '" + name + "': " + e.what());
        }
    }
}

void apply_dims(const json& obj, SystemDims& d)
{
    apply_section(obj, "scenario.dims",
                  {{"M", bind(d.M)}, {"N", bind(d.N)}, {"Nr", bind(d.Nr)}, {"K", bind(d.K)}, {"Ns", bind(d.Ns)},
                   {"bits", bind(d.bits)}});
}

void apply_scenario(const json& obj, ScenarioConfig& s)
{
    apply_section(obj, "scenario",
                  {{"bs_pos", bind_point(s.bs_pos)},
                   {"irs_pos", bind_point(s.irs_pos)},
                   {"ue_center", bind_point(s.ue_center)},
                   {"ue_radius", bind(s.ue_radius)},
                   {"pt_dbm", bind(s.pt_dbm)},
                   {"bandwidth_hz", bind(s.bandwidth_hz)},
                   {"noise_psd_dbm_hz", bind(s.noise_psd_dbm_hz)},
                   {"rician_nu", bind(s.rician_nu)},
                   {"nmse", bind(s.nmse)},
                   {"bs_axis", bind_point(s.bs_axis)},
                   {"irs_axis", bind_point(s.irs_axis)},
                   {"ue_axis", bind_point(s.ue_axis)},
                   {"weight_mode",
                    [](const json& v) {
                        if (v.get<std::string>() != "inverse-direct-path-loss")
                            throw ConfigError("config: scenario.weight_mode must be 'inverse-direct-path-loss'");
                    }},
                   {"dims", [&s](const json& v) { apply_dims(v, s.dims); }}});
}

void apply_optimizer(const json& obj, OptimizerConfig& o)
{
    auto& a = o.armijo;
    apply_section(obj, "optimizer",
                  {{"max_outer", bind(o.max_outer)},
                   {"rel_tol", bind(o.rel_tol)},
                   {"passive_steps_per_outer", bind(o.passive_steps_per_outer)},
                   {"quantize_each_iteration", bind(o.quantize_each_iteration)},
                   {"carry_continuous_phases", bind(o.carry_continuous_phases)},
                   {"continuous_phases", bind(o.continuous_phases)},
                   {"patience", bind(o.patience)},
                   {"dual_power_tol", bind(o.dual_power_tol)},
                   {"armijo", [&a](const json& v) {
                        apply_section(v, "optimizer.armijo",
                                      {{"beta0", bind(a.beta0)},
                                       {"growth", bind(a.growth)},
                                       {"sufficient_decrease", bind(a.sufficient_decrease)},
                                       {"max_backtracks", bind(a.max_backtracks)}});
                    }}});
}

void apply_sweep(const json& obj, SweepConfig& s)
{
    apply_section(obj, "sweep",
                  {{"nmse_grid", bind(s.nmse_grid)},
                   {"nmse_bits", bind(s.nmse_bits)},
                   {"power_grid_dbm", bind(s.power_grid_dbm)},
                   {"power_bits", bind(s.power_bits)},
                   {"irs_x_grid", bind(s.irs_x_grid)},
                   {"position_bits", bind(s.position_bits)},
                   {"trials", bind(s.trials)},
                   {"seed", bind(s.seed)},
                   {"threads", bind(s.threads)},
                   {"record_timing", bind(s.record_timing)}});
}

json point_json(const Point2& p) { return json::array({p[0], p[1]}); }

} // namespace

void SweepConfig::validate() const
{
    if (trials < 1)
        throw ConfigError("sweep: trials must be >= 1");
    if (threads < 1)
        throw ConfigError("sweep: threads must be >= 1");
    for (double v : nmse_grid)
        if (!(v >= 0) || v >= 1)
            throw ConfigError("sweep: nmse_grid values must lie in [0, 1)");
    for (double v : power_grid_dbm)
        if (!std::isfinite(v))
            throw ConfigError("sweep: power_grid_dbm values must be finite");
    for (double v : irs_x_grid)
        if (!std::isfinite(v))
            throw ConfigError("sweep: irs_x_grid values must be finite");
    for (const auto* bits : {&nmse_bits, &power_bits, &position_bits}) {
        if (bits->empty())
            throw ConfigError("sweep: bit lists must not be empty");
        for (int b : *bits)
            if (b < 0 || b > 16)
                throw ConfigError("sweep: bits must lie in [0, 16]");
    }
}

void HarnessConfig::validate() const
{
    scenario.validate();
    optimizer.validate();
    sweep.validate();
}

HarnessConfig profile(const std::string& name)
{
    HarnessConfig cfg;
    cfg.scenario.nmse = 0.05;
    if (name == "desk") {
        cfg.scenario.dims = {4, 16, 2, 2, 2, 2};
        cfg.sweep.trials = 100;
    } else if (name == "paper") {
        cfg.scenario.dims = {8, 100, 2, 3, 2, 2};
        cfg.sweep.trials = 1000;
    } else {
        throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
    }
    return cfg;
}

HarnessConfig apply_json(HarnessConfig base, const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    apply_section(doc, "",
                  {{"scenario", [&](const json& v) { apply_scenario(v, base.scenario); }},
                   {"optimizer", [&](const json& v) { apply_optimizer(v, base.optimizer); }},
                   {"sweep", [&](const json& v) { apply_sweep(v, base.sweep); }}});
    base.validate();
    return base;
}

HarnessConfig load_config(HarnessConfig base, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return apply_json(std::move(base), text.str());
}

std::string to_json(const HarnessConfig& cfg)
{
    const auto& s = cfg.scenario;
    const auto& o = cfg.optimizer;
    const auto& w = cfg.sweep;
    json doc;
    doc["scenario"] = {{"bs_pos", point_json(s.bs_pos)},
                       {"irs_pos", point_json(s.irs_pos)},
                       {"ue_center", point_json(s.ue_center)},
                       {"ue_radius", s.ue_radius},
                       {"pt_dbm", s.pt_dbm},
                       {"bandwidth_hz", s.bandwidth_hz},
                       {"noise_psd_dbm_hz", s.noise_psd_dbm_hz},
                       {"rician_nu", s.rician_nu},
                       {"nmse", s.nmse},
                       {"bs_axis", point_json(s.bs_axis)},
                       {"irs_axis", point_json(s.irs_axis)},
                       {"ue_axis", point_json(s.ue_axis)},
                       {"weight_mode", "inverse-direct-path-loss"},
                       {"dims",
                        {{"M", s.dims.M}, {"N", s.dims.N}, {"Nr", s.dims.Nr}, {"K", s.dims.K}, {"Ns", s.dims.Ns},
                         {"bits", s.dims.bits}}}};
    doc["optimizer"] = {{"max_outer", o.max_outer},
                        {"rel_tol", o.rel_tol},
                        {"passive_steps_per_outer", o.passive_steps_per_outer},
                        {"quantize_each_iteration", o.quantize_each_iteration},
                        {"carry_continuous_phases", o.carry_continuous_phases},
                        {"continuous_phases", o.continuous_phases},
                        {"patience", o.patience},
                        {"dual_power_tol", o.dual_power_tol},
                        {"armijo",
                         {{"beta0", o.armijo.beta0},
                          {"growth", o.armijo.growth},
                          {"sufficient_decrease", o.armijo.sufficient_decrease},
                          {"max_backtracks", o.armijo.max_backtracks}}}};
    doc["sweep"] = {{"nmse_grid", w.nmse_grid},       {"nmse_bits", w.nmse_bits},
                    {"power_grid_dbm", w.power_grid_dbm}, {"power_bits", w.power_bits},
                    {"irs_x_grid", w.irs_x_grid},     {"position_bits", w.position_bits},
                    {"trials", w.trials},             {"seed", w.seed},
                    {"threads", w.threads},           {"record_timing", w.record_timing}};
    return doc.dump(2);
}

} // namespace irsbf::harness
