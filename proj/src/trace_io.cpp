#include "fixcon/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fixcon {

using nlohmann::json;

std::string indexed_column(const std::string& prefix, std::size_t agent, std::size_t step)
{
    if (agent > 9 || step > 9)
        return prefix + std::to_string(agent) + "_" + std::to_string(step);
    return prefix + std::to_string(agent) + std::to_string(step);
}

std::vector<std::string> trace_columns(std::size_t followers, std::size_t layers)
{
    std::vector<std::string> c{"t", "y0"};
    for (std::size_t i = 1; i <= followers; ++i)
        c.push_back("y" + std::to_string(i));
    for (std::size_t i = 1; i <= followers; ++i)
        c.push_back("e" + std::to_string(i));
    for (std::size_t i = 1; i <= followers; ++i)
        c.push_back(indexed_column("z", i, 1));
    for (std::size_t i = 1; i <= followers; ++i)
        for (std::size_t j = 2; j <= layers; ++j)
            c.push_back(indexed_column("z", i, j));
    for (std::size_t i = 1; i <= followers; ++i)
        c.push_back("u" + std::to_string(i));
    for (const char* prefix : {"alpha", "wc", "wa", "theta", "d"})
        for (std::size_t i = 1; i <= followers; ++i)
            for (std::size_t j = 1; j <= layers; ++j)
                c.push_back(indexed_column(prefix, i, j));
    return c;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace)
{
    const std::size_t N = trace.followers;
    const std::size_t n = trace.layers;
    const auto cols = trace_columns(N, n);
    for (std::size_t k = 0; k < cols.size(); ++k)
        out << (k ? "," : "") << cols[k];
    out << '\n';

    std::ostringstream row;
    row << std::setprecision(15);
    for (const auto& s : trace.samples) {
        row.str("");
        row << s.t << ',' << s.leader_output();
        for (std::size_t i = 0; i < N; ++i)
            row << ',' << s.output(i);
        for (std::size_t i = 0; i < N; ++i)
            row << ',' << s.e[i];
        for (std::size_t i = 0; i < N; ++i)
            row << ',' << s.tracking_error(i);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 1; j < n; ++j)
                row << ',' << s.signal[i][j];
        for (std::size_t i = 0; i < N; ++i)
            row << ',' << s.u[i];
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row << ',' << s.alpha[i][j];
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row << ',' << s.weights[i][j].critic.norm();
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row << ',' << s.weights[i][j].actor.norm();
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row << ',' << s.weights[i][j].theta.norm();
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row << ',' << std::abs(s.weights[i][j].dist);
        out << row.str() << '\n';
    }
}

std::size_t CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw std::out_of_range("no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

namespace {

// Keeps empty cells, including a trailing one.
std::vector<std::string> split_cells(const std::string& line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos)
            return cells;
        start = comma + 1;
    }
}

}  // namespace

CsvTable read_csv(std::istream& in)
{
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
        return t;
    t.header = split_cells(line);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        for (const auto& cell : split_cells(line))
            row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
        if (row.size() != t.header.size())
            throw std::runtime_error("csv row has " + std::to_string(row.size()) + " cells, header has " +
                                     std::to_string(t.header.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

json gain_report_json(const ControllerGains& gains)
{
    json agents = json::array();
    std::size_t warnings = 0;
    for (std::size_t i = 0; i < gains.per_agent.size(); ++i)
        for (std::size_t j = 0; j < gains.per_agent[i].size(); ++j) {
            const GainReport r = validate_gains(gains.per_agent[i][j], j + 1);
            json checks = json::array();
            for (const auto& c : r.checks) {
                checks.push_back({{"id", c.id}, {"condition", c.condition}, {"passed", c.passed}, {"detail", c.detail}});
                warnings += c.passed ? 0 : 1;
            }
            agents.push_back({{"agent", i + 1}, {"step", j + 1}, {"warnings", r.warnings()}, {"checks", checks}});
        }
    return {{"total_warnings", warnings}, {"entries", agents}};
}

json topology_report_json(const Topology& topology)
{
    const AssumptionReport r = check_assumptions(topology);
    json unreachable = json::array();
    for (auto i : r.unreachable)
        unreachable.push_back(i + 1);
    return {{"pinned", r.pinned},
            {"reachable", r.reachable},
            {"invertible", r.invertible},
            {"unreachable", unreachable},
            {"min_singular_value", r.min_singular_value},
            {"ok", r.ok()}};
}

RunSummary summarize(const ExperimentConfig& config, const SimulationTrace& trace)
{
    RunSummary s;
    s.settling_threshold = config.analysis.settling_threshold;
    s.settling = settling_time(trace, s.settling_threshold);
    s.bounds = aggregated_bound(config.sim.gains, trace.layers, trace.followers);
    s.structural_residual = structural_identity_residual(trace, build_laplacian(config.sim.topology).ltilde);
    if (!trace.samples.empty())
        for (std::size_t i = 0; i < trace.followers; ++i)
            s.final_max_tracking_error =
                std::max(s.final_max_tracking_error, std::abs(trace.samples.back().tracking_error(i)));
    return s;
}

namespace {

json bound_json(const FixedTimeBound& b)
{
    return {{"t_max", b.t_max}, {"k_p_eff", b.k_p_eff}, {"k_q_eff", b.k_q_eff}, {"p", b.p}, {"q", b.q}};
}

}  // namespace

json sidecar_json(const ExperimentConfig& config, const RunSummary& summary)
{
    json settling = json::array();
    for (const auto& v : summary.settling)
        settling.push_back(v ? json(*v) : json(nullptr));

    json radii = nullptr;
    if (config.analysis.c_aggregate) {
        const auto& g = config.sim.gains;
        double kp = summary.bounds.stated.k_p_eff;
        double kq = summary.bounds.stated.k_q_eff;
        const double lambda = build_laplacian(config.sim.topology).min_singular_value;
        const ConvergenceRadii r = omega_radii(*config.analysis.c_aggregate, kp, kq, g.exponents.p, g.exponents.q,
                                               config.analysis.vartheta, lambda);
        radii = {{"c_aggregate", r.c_aggregate}, {"vartheta", r.vartheta}, {"omega_e", r.omega_e}, {"omega_z", r.omega_z}};
    }

    const auto& ts = config.sim.topology;
    return {{"name", config.name},
            {"config", config.raw},
            {"topology", topology_report_json(ts)},
            {"gain_validation", gain_report_json(config.sim.gains)},
            {"settling",
             {{"threshold", summary.settling_threshold},
              {"times", settling},
              {"all_settled", std::all_of(summary.settling.begin(), summary.settling.end(),
                                          [](const auto& v) { return v.has_value(); })}}},
            {"bounds", {{"stated", bound_json(summary.bounds.stated)}, {"derived", bound_json(summary.bounds.derived)}}},
            {"radii", radii},
            {"structural_identity_residual", summary.structural_residual},
            {"final_max_tracking_error", summary.final_max_tracking_error},
            {"wall_seconds", summary.wall_seconds}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

}  // namespace fixcon
