#include "xbar/results.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace xbar {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double parse_num(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ValidationError("results: bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string format_row(const ExperimentReport& r) {
    std::string s = std::to_string(r.size) + "," + to_string(r.kind) + "," + to_string(r.study) + ",";
    if (r.inputs) s += std::to_string(r.inputs->a) + "," + std::to_string(r.inputs->b);
    else s += ",";
    if (r.error) return s + ",,,,,error";

    const bool gate = r.study == Study::Delay || r.study == Study::Power;
    const bool timed = gate || r.study == Study::Cell;
    s += "," + (timed ? fmt(r.delay * 1e9) : std::string());
    s += "," + (gate ? fmt(r.avg_power * 1e6) : std::string());
    s += "," + (gate ? fmt(r.energy * 1e12) : std::string());
    s += "," + (r.study == Study::Readout ? fmt(r.readout_margin * 100.0) : std::string());
    s += std::string(",") + (r.logical_correct ? "true" : "false");
    return s;
}

void write_results(std::ostream& os, const std::vector<ExperimentReport>& rows) {
    os << kResultsHeader << "\n";
    for (const auto& r : rows) os << format_row(r) << "\n";
}

std::vector<ExperimentReport> read_results(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("results: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) throw ValidationError("results: unexpected header");
    std::vector<ExperimentReport> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != 10) throw ValidationError("results: line " + std::to_string(lineno) + " needs 10 fields");
        try {
            ExperimentReport r;
            r.size = std::stoi(f[0]);
            if (f[1] == "1R") r.kind = CellKind::R1;
            else if (f[1] == "1S1R") r.kind = CellKind::S1R1;
            else throw ValidationError("bad kind '" + f[1] + "'");
            const auto st = parse_study(f[2]);
            if (!st) throw ValidationError("bad study '" + f[2] + "'");
            r.study = *st;
            if (!f[3].empty()) r.inputs = NorInputs{std::stoi(f[3]), std::stoi(f[4])};
            if (f[9] == "error") {
                r.error = "failed";
            } else {
                r.delay = f[5].empty() ? kNeverSwitched : parse_num(f[5]) * 1e-9;
                r.avg_power = parse_num(f[6]) * 1e-6;
                r.energy = parse_num(f[7]) * 1e-12;
                r.readout_margin = parse_num(f[8]) / 100.0;
                r.logical_correct = f[9] == "true";
            }
            rows.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw ValidationError("results: line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

ResultsWriter::ResultsWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ValidationError("cannot write " + path.string());
    out_ << kResultsHeader << "\n" << std::flush;
}

void ResultsWriter::append(const ExperimentReport& r) { out_ << format_row(r) << "\n" << std::flush; }

}  // namespace xbar
