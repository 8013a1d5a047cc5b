#pragma once

#include <filesystem>
#include <string>

#include "xbar/experiments.hpp"

namespace xbar {

struct IvConfig {
    double v_max = 4.0;   ///< positive sweep apex [V]
    double v_min = -2.0;  ///< negative sweep apex [V]
    double rate = 1e8;    ///< sweep rate [V/s]
    int steps = 400;      ///< points per sweep leg

    bool operator==(const IvConfig&) const = default;
};

struct OutputConfig {
    std::string dir = "results";
    bool csv = true;
    bool svg = true;

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    ExperimentConfig experiment;
    SweepPlan plan{{4, 8, 16, 32, 64},
                   {CellKind::R1, CellKind::S1R1},
                   {Study::Cell, Study::Delay, Study::Power, Study::Readout},
                   all_nor_inputs()};
    IvConfig iv;
    OutputConfig output;
    int threads = 1;

    bool operator==(const RunConfig&) const = default;
    void validate() const;
};

/// Parse structured configuration text. Missing keys keep their defaults;
/// unknown keys and malformed values raise ParseError with the offending
/// position; semantic violations raise ValidationError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Full configuration as text; `parse_config(render_config(c)) == c`.
std::string render_config(const RunConfig& cfg, bool comments = true);

/// Device block only, for writing fitted parameters back.
std::string render_device_fragment(const RunConfig& cfg);

std::string to_token(CellKind k);
CellKind parse_kind(const std::string& s);

}  // namespace xbar
