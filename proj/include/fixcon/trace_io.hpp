#pragma once

#include "fixcon/adaptation.hpp"
#include "fixcon/analysis.hpp"
#include "fixcon/config.hpp"
#include "fixcon/simulate.hpp"
#include "fixcon/topology.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fixcon {

/// Column name for a per-agent, per-step series: "z12" for agent 1 step 2,
/// with an underscore separator ("z12_3") once either index exceeds 9.
std::string indexed_column(const std::string& prefix, std::size_t agent, std::size_t step);

/// Trace CSV columns, in order:
///   t, y0, y1..yN, e1..eN, z11..zN1, z12..zNn (virtual errors of steps
///   2..n), u1..uN, alpha11..alphaNn, wc11.., wa11.., theta11.., d11..
/// where wc/wa/theta are Euclidean norms of the step weight vectors and d
/// is |d^|. Agent and step indices are 1-based.
std::vector<std::string> trace_columns(std::size_t followers, std::size_t layers);

/// One row per recorded sample, 15 significant digits.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a column; throws std::out_of_range if absent.
    std::size_t column(const std::string& name) const;
};

/// Empty cells read as NaN.
CsvTable read_csv(std::istream& in);

nlohmann::json gain_report_json(const ControllerGains& gains);
nlohmann::json topology_report_json(const Topology& topology);

struct RunSummary {
    std::vector<std::optional<double>> settling;
    double settling_threshold = 0.1;
    AggregatedBounds bounds;
    double structural_residual = 0.0;
    double final_max_tracking_error = 0.0;
    double wall_seconds = 0.0;
};

RunSummary summarize(const ExperimentConfig& config, const SimulationTrace& trace);

/// Sidecar metadata: config echo, gain-validation report, topology report,
/// settling summary and bound values.
nlohmann::json sidecar_json(const ExperimentConfig& config, const RunSummary& summary);

/// Writes via a temporary file in the same directory and renames it into
/// place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fixcon
