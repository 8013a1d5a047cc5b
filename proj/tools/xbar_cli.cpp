// xbar: command-line front end for the crossbar simulator.
//
//   xbar sweep --sizes 4,8,16 --kind both --out results
//   xbar fit --config run.yaml
//   xbar iv | netlist | readout | plot
//
// Failures print one line on stderr:
//   xbar-error category=<usage|validation|parse|solver|io> exit=<code> [line=L col=C] msg="..."

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "xbar/config.hpp"
#include "xbar/results.hpp"

namespace fs = std::filesystem;
using namespace xbar;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kSolver = 3 };

struct Flags {
    std::string config;
    std::string out;
    std::string sizes;
    std::string kind;
    int threads = 0;
    double dt = 0.0;
    bool verbose = false;
    bool defaults = false;
    std::string inputs = "00";
    std::string table;
};

void error_line(const char* category, int code, const std::string& msg, int line = 0, int col = 0) {
    std::string m;
    for (char c : msg) {
        if (c == '"' || c == '\\') m += '\\';
        m += c == '\n' ? ' ' : c;
    }
    std::fprintf(stderr, "xbar-error category=%s exit=%d", category, code);
    if (line > 0) std::fprintf(stderr, " line=%d col=%d", line, col);
    std::fprintf(stderr, " msg=\"%s\"\n", m.c_str());
}

std::vector<int> parse_sizes(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw ValidationError("--sizes: bad entry '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("--sizes: empty list");
    return out;
}

RunConfig resolve(const Flags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (!f.sizes.empty()) cfg.plan.sizes = parse_sizes(f.sizes);
    if (!f.kind.empty()) {
        if (f.kind == "both") cfg.plan.kinds = {CellKind::R1, CellKind::S1R1};
        else cfg.plan.kinds = {parse_kind(f.kind)};
    }
    if (f.threads > 0) cfg.threads = f.threads;
    if (f.dt > 0) cfg.experiment.solver.dt = f.dt;
    if (!f.out.empty()) cfg.output.dir = f.out;
    else if (const char* env = std::getenv("XBAR_OUT_DIR"); env && *env) cfg.output.dir = env;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const RunConfig& cfg) {
    fs::path d(cfg.output.dir);
    fs::create_directories(d);
    return d;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << text;
}

std::string ns(double t) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g ns", t * 1e9);
    return b;
}

int cmd_fit(const Flags& f) {
    RunConfig cfg = resolve(f);
    auto& rram = cfg.experiment.device.rram;
    rram = fit_switching_rates(cfg.experiment.fit, rram);
    const fs::path p = out_dir(cfg) / "device_fit.yaml";
    write_text(p, render_device_fragment(cfg));
    std::printf("k_set   = %.9g 1/s\nk_reset = %.9g 1/s\n", rram.k_set, rram.k_reset);
    std::printf("SET  %s at %g V\n", ns(simulated_switch_time(rram, cfg.experiment.fit.v_pulse_set, 1e-13, 1e-7)).c_str(),
                cfg.experiment.fit.v_pulse_set);
    std::printf("RESET %s at %g V\n",
                ns(simulated_switch_time(rram, cfg.experiment.fit.v_pulse_reset, 1e-13, 1e-7)).c_str(),
                cfg.experiment.fit.v_pulse_reset);
    std::printf("wrote %s\n", p.string().c_str());
    return kOk;
}

int run_table(const RunConfig& cfg, const SweepPlan& plan, const fs::path& csv, bool verbose) {
    std::size_t done = 0;
    std::unique_ptr<ResultsWriter> writer;
    if (cfg.output.csv) writer = std::make_unique<ResultsWriter>(csv);
    const auto rows = run_sweep(plan, cfg.experiment, cfg.threads, [&](const ExperimentReport& r) {
        if (writer) writer->append(r);
        ++done;
        if (verbose) {
            std::fprintf(stderr, "[%zu] %s\n", done, format_row(r).c_str());
            if (r.error) std::fprintf(stderr, "      %s\n", r.error->c_str());
        }
    });
    int failures = 0;
    for (const auto& r : rows) failures += r.error ? 1 : 0;
    if (cfg.output.csv) std::printf("wrote %s (%zu rows)\n", csv.string().c_str(), rows.size());
    if (cfg.output.svg && !rows.empty())
        for (const auto& p : render_plots(rows, csv.parent_path())) std::printf("wrote %s\n", p.string().c_str());
    if (failures > 0) {
        error_line("solver", kSolver, std::to_string(failures) + " of " + std::to_string(rows.size()) + " runs failed");
        return kSolver;
    }
    return kOk;
}

int cmd_sweep(const Flags& f) {
    const RunConfig cfg = resolve(f);
    return run_table(cfg, cfg.plan, out_dir(cfg) / "results.csv", f.verbose);
}

int cmd_readout(const Flags& f) {
    const RunConfig cfg = resolve(f);
    SweepPlan plan = cfg.plan;
    plan.studies = {Study::Readout};
    RunConfig c = cfg;
    c.output.svg = false;
    const int rc = run_table(c, plan, out_dir(cfg) / "readout.csv", f.verbose);
    return rc;
}

int cmd_iv(const Flags& f) {
    const RunConfig cfg = resolve(f);
    const auto& iv = cfg.iv;
    const auto& dev = cfg.experiment.device;
    CellStated st{{dev.rram.w_reset}, SelectorMode::Off};
    std::ostringstream os;
    os << "volts,amperes\n";
    bool first = true;
    for (auto [a, b] : {std::pair{0.0, iv.v_max}, {iv.v_max, 0.0}, {0.0, iv.v_min}, {iv.v_min, 0.0}}) {
        const auto leg = iv_sweep(dev, st, a, b, iv.rate, iv.steps);
        for (std::size_t k = first ? 0 : 1; k < leg.points.size(); ++k) {
            char line[64];
            std::snprintf(line, sizeof line, "%.9g,%.9g\n", leg.points[k].v, leg.points[k].i);
            os << line;
        }
        st = leg.final_state;
        first = false;
    }
    const fs::path p = out_dir(cfg) / "iv.csv";
    write_text(p, os.str());
    std::printf("wrote %s\n", p.string().c_str());
    return kOk;
}

int cmd_netlist(const Flags& f) {
    const RunConfig cfg = resolve(f);
    if (f.inputs.size() != 2 || (f.inputs[0] != '0' && f.inputs[0] != '1') || (f.inputs[1] != '0' && f.inputs[1] != '1'))
        throw ValidationError("--inputs must be two bits, e.g. 01");
    const NorInputs in{f.inputs[0] - '0', f.inputs[1] - '0'};
    const fs::path dir = out_dir(cfg);
    for (int n : cfg.plan.sizes) {
        for (CellKind kind : cfg.plan.kinds) {
            ArraySpec spec = cfg.experiment.array;
            spec.rows = spec.cols = n;
            spec.kind = kind;
            const std::set<int> active{n / 2};
            const CircuitGraph g = build_nor_array(n, kind, in, active, cfg.experiment);
            const LineBias bias = magic_bias(spec, place_magic_cells(spec), cfg.experiment.v_magic,
                                             cfg.experiment.v_iso_wl, cfg.experiment.v_iso_bl, active);
            const fs::path p = dir / ("nor" + f.inputs + "_" + to_token(kind) + "_" + std::to_string(n) + ".sp");
            write_text(p, export_netlist(g, bias));
            std::printf("wrote %s\n", p.string().c_str());
        }
    }
    return kOk;
}

int cmd_plot(const Flags& f) {
    const RunConfig cfg = resolve(f);
    const fs::path dir = out_dir(cfg);
    const fs::path table = f.table.empty() ? dir / "results.csv" : fs::path(f.table);
    std::ifstream in(table);
    if (!in) throw ValidationError("cannot open results table " + table.string());
    for (const auto& p : render_plots(read_results(in), dir)) std::printf("wrote %s\n", p.string().c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crossbar array simulator: MAGIC NOR delay, power and readout margin for 1R and 1S1R arrays"};
    app.require_subcommand(0, 1);
    Flags f;
    app.add_flag("--defaults", f.defaults, "Print the default configuration with notes and exit");

    auto common = [&f](CLI::App* s) {
        s->add_option("--config", f.config, "Configuration file");
        s->add_option("--out", f.out, "Output directory (default: $XBAR_OUT_DIR, then output.dir)");
        s->add_option("--sizes", f.sizes, "Comma-separated array sizes, e.g. 4,8,16");
        s->add_option("--kind", f.kind, "Cell kind")->check(CLI::IsMember({"1r", "1s1r", "both"}));
        s->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
        s->add_option("--dt", f.dt, "Transient step [s]")->check(CLI::PositiveNumber);
        s->add_flag("-v,--verbose", f.verbose, "Per-run progress on stderr");
    };
    std::map<std::string, std::function<int(const Flags&)>> handlers{
        {"fit", cmd_fit}, {"sweep", cmd_sweep}, {"readout", cmd_readout},
        {"iv", cmd_iv},   {"netlist", cmd_netlist}, {"plot", cmd_plot}};
    const std::map<std::string, std::string> help{
        {"fit", "Fit VTEAM switching rates to the target SET/RESET times; writes device_fit.yaml"},
        {"sweep", "Run the configured studies; writes results.csv and SVG plots"},
        {"readout", "Readout margin versus size; writes readout.csv"},
        {"iv", "Quasi-static I-V loop of one 1S1R cell; writes iv.csv"},
        {"netlist", "SPICE decks of the MAGIC NOR arrays"},
        {"plot", "Render SVG plots from a results table"}};
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, text] : help) {
        CLI::App* s = app.add_subcommand(name, text);
        common(s);
        subs[name] = s;
    }
    subs["netlist"]->add_option("--inputs", f.inputs, "Gate inputs as two bits (default 00)");
    subs["plot"]->add_option("--table", f.table, "Results table (default <out>/results.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        error_line("usage", kUsage, e.what());
        return kUsage;
    }

    try {
        if (f.defaults) {
            std::fputs(render_config(RunConfig{}).c_str(), stdout);
            return kOk;
        }
        for (const auto& [name, s] : subs)
            if (s->parsed()) return handlers.at(name)(f);
        std::fputs(app.help().c_str(), stderr);
        error_line("usage", kUsage, "a subcommand is required");
        return kUsage;
    } catch (const ParseError& e) {
        error_line("parse", kValidation, e.what(), e.line(), e.column());
        return kValidation;
    } catch (const ValidationError& e) {
        error_line("validation", kValidation, e.what());
        return kValidation;
    } catch (const SolverError& e) {
        error_line("solver", kSolver, std::string(to_string(e.kind())) + ": " + e.what());
        return kSolver;
    } catch (const std::exception& e) {
        error_line("io", kValidation, e.what());
        return kValidation;
    }
}
