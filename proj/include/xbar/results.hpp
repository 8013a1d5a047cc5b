#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "xbar/experiments.hpp"

namespace xbar {

inline constexpr const char* kResultsHeader =
    "size,kind,study,input_a,input_b,delay_ns,avg_power_uW,energy_pJ,rm_pct,logical_correct";

/// One CSV line (no newline). Fields that do not apply to the study are empty;
/// a failed run has logical_correct = error and no measurements.
std::string format_row(const ExperimentReport& r);

void write_results(std::ostream& os, const std::vector<ExperimentReport>& rows);
std::vector<ExperimentReport> read_results(std::istream& is);

/// Appends rows to a CSV file as they arrive, header first.
class ResultsWriter {
public:
    explicit ResultsWriter(const std::filesystem::path& path);
    void append(const ExperimentReport& r);

private:
    std::ofstream out_;
};

/// Writes delay_vs_size.svg, power_vs_size.svg and rm_vs_size.svg into out_dir
/// and returns their paths. Throws ValidationError on an empty table.
std::vector<std::filesystem::path> render_plots(const std::vector<ExperimentReport>& table,
                                                const std::filesystem::path& out_dir);

}  // namespace xbar
