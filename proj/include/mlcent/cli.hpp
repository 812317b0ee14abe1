#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mlcent/centrality.hpp"
#include "mlcent/ingest.hpp"

namespace mlcent::cli {

enum class OutputFormat { Csv, Json };
enum class RunMode { Exact, Krylov, Both };

/// Absolute alpha, or c / lambda_max when written as `<c>rel`.
struct AlphaSpec {
    double value = 0.5;
    bool relative = true;

    static AlphaSpec parse(std::string_view text);
    std::string str() const;
};

struct RunConfig {
    std::optional<std::filesystem::path> input;
    std::optional<std::string> builtin;
    bool strict = false;

    MeasureKind measure = MeasureKind::TotalCommunicability;
    AlphaSpec alpha;
    double beta = 1.0;
    int m = 10;
    int block_size = kDefaultBlockSize;
    RunMode mode = RunMode::Exact;
    Augmentation augment = Augmentation::None;
    ShiftConvention shift = ShiftConvention::Unshifted;
    /// Subgraph measures only; empty means every node-layer pair.
    std::vector<TensorIndex> nodes;

    OutputFormat format = OutputFormat::Csv;
    int precision = 4;
    int top = 10;
    /// Krylov mode: search m = 1.. for the first m whose top-k equals that of m - 1.
    bool stabilize = false;
    int m_max = 10;
    Eigen::Index dense_cap = kDefaultDenseCap;

    /// Throws DomainError on inconsistent settings.
    void validate() const;
};

MeasureKind parse_measure(std::string_view name);
RunMode parse_mode(std::string_view name);
Augmentation parse_augmentation(std::string_view name);
/// "i:l" pairs separated by commas, e.g. "2:2,1:1".
std::vector<TensorIndex> parse_node_list(std::string_view text);
std::string to_string(RunMode mode);
std::string to_string(Augmentation augment);

/// One output row. `krylov` is set only when both modes were run, in which
/// case `score` holds the exact value.
struct ReportRow {
    TensorIndex index;
    double score = 0.0;
    std::optional<double> krylov;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// The serialized form of a rank run.
struct ReportDocument {
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<ReportRow> scores;      ///< flattened (layer-major) order
    std::vector<TensorIndex> ranking;   ///< top-k, best first
    nlohmann::ordered_json diagnostics; ///< null when absent

    friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

/// Scores rounded to `precision` decimals.
std::string to_json(const ReportDocument& doc, int precision);
ReportDocument parse_report_json(std::string_view text);
/// Header row, then one record per ranked node in ranking order.
std::string to_csv(const ReportDocument& doc, int precision);

NetworkFile load_input(const RunConfig& config);

ReportDocument run_rank(const RunConfig& config);
std::string cmd_rank(const RunConfig& config);

struct ConvergencePoint {
    int m = 0;
    double error = 0.0;
    bool breakdown = false;
};
std::vector<ConvergencePoint> run_convergence(const RunConfig& config);
std::string cmd_convergence(const RunConfig& config);

std::string cmd_info(const RunConfig& config);

} // namespace mlcent::cli
