#include "fixcon/cli.hpp"

#include "fixcon/analysis.hpp"
#include "fixcon/config.hpp"
#include "fixcon/lemma_oracles.hpp"
#include "fixcon/simulate.hpp"
#include "fixcon/trace_io.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#ifndef FIXCON_VERSION
#define FIXCON_VERSION "0.0.0"
#endif

namespace fixcon {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version()
{
    return FIXCON_VERSION;
}

std::string sweep_key(const std::string& parameter)
{
    if (parameter == "ic_scale")
        return "initial.output_scale";
    if (parameter == "dt")
        return "sim.dt";
    return parameter;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void print_gain_report(const ControllerGains& gains, std::ostream& out)
{
    std::size_t total = 0;
    for (std::size_t i = 0; i < gains.per_agent.size(); ++i)
        for (std::size_t j = 0; j < gains.per_agent[i].size(); ++j) {
            const GainReport r = validate_gains(gains.per_agent[i][j], j + 1);
            for (const auto& c : r.checks)
                if (!c.passed) {
                    out << "warning: agent " << i + 1 << " step " << j + 1 << ": " << c.condition << " violated ("
                        << c.detail << ")\n";
                    ++total;
                }
        }
    out << "gain validation: " << total << " warning(s)\n";
}

bool print_topology_report(const Topology& topology, std::ostream& out)
{
    const AssumptionReport r = check_assumptions(topology);
    out << "topology: " << topology.followers() << " followers, pinned=" << (r.pinned ? "yes" : "no")
        << ", reachable=" << (r.reachable ? "yes" : "no") << ", min singular value of L~=" << r.min_singular_value
        << "\n";
    if (!r.unreachable.empty()) {
        out << "  unreachable followers:";
        for (auto i : r.unreachable)
            out << ' ' << i + 1;
        out << "\n";
    }
    return r.ok();
}

void write_manifest(const fs::path& dir, const std::string& config, const std::vector<std::string>& commands,
                    double wall)
{
    const json m = {{"config", config},
                    {"out", dir.string()},
                    {"commands", commands},
                    {"versions", {{"fixcon", version()}, {"compiler", __VERSION__}, {"cxx_standard", __cplusplus}}},
                    {"wall_seconds", wall}};
    write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<std::string> with_stride(std::vector<std::string> overrides, const std::optional<std::size_t>& stride)
{
    if (stride)
        overrides.push_back("sim.record_stride=" + std::to_string(*stride));
    return overrides;
}

void write_outputs(const fs::path& dir, const ExperimentConfig& cfg, const SimulationTrace& trace, RunSummary& summary)
{
    fs::create_directories(dir);
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    write_file_atomic(dir / "trace.csv", csv.str());
    write_file_atomic(dir / "summary.json", sidecar_json(cfg, summary).dump(2) + "\n");
}

void print_settling(const RunSummary& s, std::ostream& out)
{
    out << "settling times (|y_i - y_0| < " << s.settling_threshold << "):";
    for (std::size_t i = 0; i < s.settling.size(); ++i) {
        out << " y" << i + 1 << "=";
        if (s.settling[i])
            out << std::setprecision(4) << *s.settling[i] << "s";
        else
            out << "not settled";
    }
    out << "\n";
    out << "T_max bound: " << s.bounds.stated.t_max << " s (exponents p, q), " << s.bounds.derived.t_max
        << " s (exponents (p+1)/2, (q+1)/2)\n";
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err)
{
    const auto start = Clock::now();
    std::optional<ExperimentConfig> cfg;
    try {
        cfg = load_config(opts.config, with_stride(opts.overrides, opts.stride));
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitConfigInvalid;
    }
    if (!print_topology_report(cfg->sim.topology, out)) {
        err << "error: topology violates the spanning-tree/pinning assumption\n";
        return kExitConfigInvalid;
    }
    print_gain_report(cfg->sim.gains, out);

    SimulationTrace trace;
    try {
        trace = simulate(cfg->sim);
    } catch (const IntegrationError& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitIntegrationFailure;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitConfigInvalid;
    }

    RunSummary summary = summarize(*cfg, trace);
    summary.wall_seconds = seconds_since(start);
    try {
        write_outputs(opts.out, *cfg, trace, summary);
        write_manifest(opts.out, opts.config.string(), {"run"}, seconds_since(start));
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitConfigInvalid;
    }
    print_settling(summary, out);
    out << "wrote " << (opts.out / "trace.csv").string() << " (" << trace.samples.size() << " samples)\n";
    return kExitOk;
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err)
{
    const auto start = Clock::now();
    if (opts.values.empty()) {
        err << "error: sweep needs at least one value\n";
        return kExitConfigInvalid;
    }
    const std::string key = sweep_key(opts.parameter);
    std::vector<ExperimentConfig> cfgs;
    try {
        for (const auto& v : opts.values) {
            auto overrides = with_stride(opts.overrides, opts.stride);
            overrides.push_back(key + "=" + v);
            cfgs.push_back(load_config(opts.config, overrides));
        }
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitConfigInvalid;
    }
    if (!print_topology_report(cfgs.front().sim.topology, out)) {
        err << "error: topology violates the spanning-tree/pinning assumption\n";
        return kExitConfigInvalid;
    }
    print_gain_report(cfgs.front().sim.gains, out);

    std::vector<SimulationConfig> sims;
    for (const auto& c : cfgs)
        sims.push_back(c.sim);
    const auto results = batch_simulate(sims, opts.threads);

    const std::size_t followers = cfgs.front().sim.topology.followers();
    std::ostringstream table;
    table << std::setprecision(15) << opts.parameter;
    for (std::size_t i = 1; i <= followers; ++i)
        table << ",settle" << i;
    table << ",settle_max,final_max_error,status\n";

    int status = kExitOk;
    std::vector<std::optional<double>> max_settle(results.size());
    for (std::size_t k = 0; k < results.size(); ++k) {
        const fs::path dir = opts.out / ("run_" + std::to_string(k + 1));
        table << opts.values[k];
        if (!results[k].ok()) {
            err << "error: " << opts.parameter << "=" << opts.values[k] << ": " << results[k].error << "\n";
            for (std::size_t i = 0; i <= followers + 1; ++i)
                table << ",";
            table << ",failed\n";
            status = kExitIntegrationFailure;
            continue;
        }
        RunSummary s = summarize(cfgs[k], *results[k].trace);
        try {
            write_outputs(dir, cfgs[k], *results[k].trace, s);
        } catch (const std::exception& ex) {
            err << "error: " << ex.what() << "\n";
            return kExitConfigInvalid;
        }
        bool all = true;
        double worst = 0.0;
        for (const auto& v : s.settling) {
            table << ",";
            if (v) {
                table << *v;
                worst = std::max(worst, *v);
            } else {
                all = false;
            }
        }
        table << ",";
        if (all) {
            table << worst;
            max_settle[k] = worst;
        }
        table << "," << s.final_max_tracking_error << ",ok\n";
    }
    fs::create_directories(opts.out);
    write_file_atomic(opts.out / "settling.csv", table.str());
    out << table.str();

    // Step-size studies: successive differences of the final states.
    if (key == "sim.dt" && results.size() >= 2) {
        std::ostringstream conv;
        conv << std::setprecision(6) << "dt_coarse,dt_fine,max_final_difference,observed_order\n";
        std::optional<double> prev_diff;
        std::optional<double> prev_ratio;
        for (std::size_t k = 0; k + 1 < results.size(); ++k) {
            if (!results[k].ok() || !results[k + 1].ok())
                continue;
            const auto& a = results[k].trace->samples.back().states;
            const auto& b = results[k + 1].trace->samples.back().states;
            double diff = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i)
                for (std::size_t j = 0; j < a[i].size(); ++j)
                    diff = std::max(diff, std::abs(a[i][j] - b[i][j]));
            const double h0 = cfgs[k].sim.dt;
            const double h1 = cfgs[k + 1].sim.dt;
            conv << h0 << "," << h1 << "," << diff << ",";
            if (prev_diff && prev_ratio && diff > 0.0)
                conv << std::log(*prev_diff / diff) / std::log(*prev_ratio);
            conv << "\n";
            prev_diff = diff;
            prev_ratio = h0 / h1;
        }
        write_file_atomic(opts.out / "convergence.csv", conv.str());
        out << "convergence report:\n" << conv.str();
    }

    if (opts.parameter == "ic_scale") {
        double lo = INFINITY, hi = 0.0;
        bool all = true;
        for (const auto& v : max_settle) {
            if (!v) {
                all = false;
                continue;
            }
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
        }
        if (all && lo > 0.0)
            out << "settling-time spread (max/min): " << hi / lo << "\n";
    }

    std::vector<std::string> commands;
    for (const auto& v : opts.values)
        commands.push_back("run " + key + "=" + v);
    write_manifest(opts.out, opts.config.string(), commands, seconds_since(start));
    return status;
}

int cmd_validate(const fs::path& config, const std::vector<std::string>& overrides, std::ostream& out,
                 std::ostream& err)
{
    std::optional<ExperimentConfig> cfg;
    try {
        cfg = load_config(config, overrides);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitConfigInvalid;
    }
    const bool topo_ok = print_topology_report(cfg->sim.topology, out);
    print_gain_report(cfg->sim.gains, out);
    for (std::size_t i = 0; i < cfg->sim.followers.size(); ++i) {
        const auto bad = cfg->sim.followers[i].violated_bounds(cfg->sim.horizon);
        for (auto k : bad)
            out << "warning: follower " << i + 1 << " layer " << k + 1 << " exceeds its declared disturbance bound\n";
    }
    if (!topo_ok) {
        err << "error: topology violates the spanning-tree/pinning assumption\n";
        return kExitConfigInvalid;
    }
    return kExitOk;
}

int cmd_lemmas(const LemmaOptions& opts, std::ostream& out)
{
    const SweepSummary sweeps[] = {
        sweep_lemma2(opts.trials, opts.seed),
        sweep_young(opts.trials, opts.seed + 1),
        sweep_lemma4(opts.trials, opts.seed + 2),
        sweep_lemma5(opts.trials, opts.seed + 3),
    };
    bool ok = true;
    for (const auto& s : sweeps) {
        out << std::left << std::setw(8) << s.name << " seed=" << s.seed << " trials=" << s.trials
            << " failures=" << s.failures << " min relative slack=" << std::setprecision(6) << s.min_relative_slack
            << "\n";
        ok = ok && s.failures == 0;
    }
    return ok ? kExitOk : kExitLemmaViolated;
}

}  // namespace fixcon
