#include "xbar/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace xbar {

std::string to_token(CellKind k) { return k == CellKind::R1 ? "1r" : "1s1r"; }

CellKind parse_kind(const std::string& s) {
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "1r" || t == "r1") return CellKind::R1;
    if (t == "1s1r" || t == "s1r1") return CellKind::S1R1;
    throw ValidationError("unknown cell kind '" + s + "' (expected 1r or 1s1r)");
}

void RunConfig::validate() const {
    experiment.validate();
    plan.validate();
    if (!(iv.v_max > 0 && iv.v_min < 0)) throw ValidationError("iv: requires v_min < 0 < v_max");
    if (!(iv.rate > 0)) throw ValidationError("iv: rate must be > 0");
    if (iv.steps < 1) throw ValidationError("iv: steps must be >= 1");
    if (output.dir.empty()) throw ValidationError("output: dir must not be empty");
    if (threads < 1) throw ValidationError("threads must be >= 1");
}

namespace {

[[noreturn]] void fail(const YAML::Node& at, const std::string& what) {
    const YAML::Mark m = at.Mark();
    if (m.is_null()) throw ParseError(what, 0, 0);
    throw ParseError(what, m.line + 1, m.column + 1);
}

// Opens a mapping section and rejects keys it does not know about.
class Section {
public:
    Section(const YAML::Node& node, std::string path, std::initializer_list<const char*> keys)
        : node_(node), path_(std::move(path)) {
        if (!node_ || node_.IsNull()) return;
        if (!node_.IsMap()) fail(node_, path_ + ": expected a mapping");
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string k = it->first.as<std::string>();
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                fail(it->first, "unknown key '" + qualified(k) + "'");
        }
    }

    YAML::Node child(const char* key) const {
        if (!node_ || node_.IsNull()) return YAML::Node();
        return node_[key];
    }
    std::string qualified(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    template <typename T>
    void read(const char* key, T& out) const {
        const YAML::Node v = child(key);
        if (!v || v.IsNull()) return;
        if (!v.IsScalar()) fail(v, qualified(key) + ": expected a scalar");
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            fail(v, qualified(key) + ": cannot convert '" + v.Scalar() + "'");
        }
    }

    template <typename F>
    void read_with(const char* key, F&& convert) const {
        const YAML::Node v = child(key);
        if (!v || v.IsNull()) return;
        try {
            convert(v);
        } catch (const ValidationError& e) {
            fail(v, qualified(key) + ": " + e.what());
        } catch (const YAML::Exception&) {
            fail(v, qualified(key) + ": malformed value");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
};

std::vector<std::string> scalar_list(const YAML::Node& v) {
    if (!v.IsSequence()) throw ValidationError("expected a list");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(e.as<std::string>());
    return out;
}

NorInputs parse_inputs(const std::string& s) {
    if (s.size() != 2 || (s[0] != '0' && s[0] != '1') || (s[1] != '0' && s[1] != '1'))
        throw ValidationError("inputs are written as two bits, e.g. \"01\"");
    return {s[0] - '0', s[1] - '0'};
}

const char* fill_token(const ExperimentConfig& e) {
    if (e.background == StatePattern::Fill::Checkerboard) return "checkerboard";
    return e.uniform_background == ResistiveState::LRS ? "lrs" : "hrs";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
    RunConfig cfg;
    if (!root || root.IsNull()) {
        cfg.validate();
        return cfg;
    }

    const Section top(root, "", {"device", "fit", "array", "solver", "experiment", "iv", "output"});

    const Section device(top.child("device"), "device", {"selector", "vteam"});
    auto& sel = cfg.experiment.device.selector;
    const Section s(device.child("selector"), "device.selector", {"v_th", "v_hold", "r_on", "alpha_s", "beta_s", "v_s"});
    s.read("v_th", sel.v_th);
    s.read("v_hold", sel.v_hold);
    s.read("r_on", sel.r_on);
    s.read("alpha_s", sel.alpha_s);
    s.read("beta_s", sel.beta_s);
    s.read("v_s", sel.v_s);
    auto& vt = cfg.experiment.device.rram;
    const Section v(device.child("vteam"), "device.vteam",
                    {"k_set", "k_reset", "alpha_set", "alpha_reset", "v_set", "v_reset", "w_set", "w_reset", "lambda",
                     "r_lrs"});
    v.read("k_set", vt.k_set);
    v.read("k_reset", vt.k_reset);
    v.read("alpha_set", vt.alpha_set);
    v.read("alpha_reset", vt.alpha_reset);
    v.read("v_set", vt.v_set);
    v.read("v_reset", vt.v_reset);
    v.read("w_set", vt.w_set);
    v.read("w_reset", vt.w_reset);
    v.read("lambda", vt.lambda);
    v.read("r_lrs", vt.r_lrs);

    auto& fit = cfg.experiment.fit;
    const Section f(top.child("fit"), "fit", {"t_set", "t_reset", "v_pulse_set", "v_pulse_reset"});
    f.read("t_set", fit.t_set);
    f.read("t_reset", fit.t_reset);
    f.read("v_pulse_set", fit.v_pulse_set);
    f.read("v_pulse_reset", fit.v_pulse_reset);

    auto& arr = cfg.experiment.array;
    const Section a(top.child("array"), "array",
                    {"sizes", "kinds", "r_wire_wl", "r_wire_bl", "c_cell", "bl_driver", "wl_driver", "r_driver",
                     "background"});
    a.read_with("sizes", [&](const YAML::Node& n) {
        cfg.plan.sizes.clear();
        for (const auto& t : scalar_list(n)) {
            try {
                cfg.plan.sizes.push_back(std::stoi(t));
            } catch (const std::logic_error&) {
                throw ValidationError("size '" + t + "' is not an integer");
            }
        }
    });
    a.read_with("kinds", [&](const YAML::Node& n) {
        cfg.plan.kinds.clear();
        for (const auto& t : scalar_list(n)) cfg.plan.kinds.push_back(parse_kind(t));
    });
    a.read("r_wire_wl", arr.r_wire_wl);
    a.read("r_wire_bl", arr.r_wire_bl);
    a.read("c_cell", arr.c_cell);
    a.read("r_driver", arr.r_driver);
    a.read_with("bl_driver", [&](const YAML::Node& n) {
        const auto t = n.as<std::string>();
        if (t == "top") arr.bl_driver = BitlineEnd::Top;
        else if (t == "bottom") arr.bl_driver = BitlineEnd::Bottom;
        else throw ValidationError("expected top or bottom");
    });
    a.read_with("wl_driver", [&](const YAML::Node& n) {
        const auto t = n.as<std::string>();
        if (t == "left") arr.wl_driver = WordlineEnd::Left;
        else if (t == "right") arr.wl_driver = WordlineEnd::Right;
        else throw ValidationError("expected left or right");
    });
    a.read_with("background", [&](const YAML::Node& n) {
        const auto t = n.as<std::string>();
        auto& e = cfg.experiment;
        if (t == "checkerboard") e.background = StatePattern::Fill::Checkerboard;
        else if (t == "hrs") e.background = StatePattern::Fill::Uniform, e.uniform_background = ResistiveState::HRS;
        else if (t == "lrs") e.background = StatePattern::Fill::Uniform, e.uniform_background = ResistiveState::LRS;
        else throw ValidationError("expected checkerboard, hrs or lrs");
    });

    auto& sol = cfg.experiment.solver;
    const Section so(top.child("solver"), "solver",
                     {"dt", "newton_vtol", "newton_itol", "max_newton_iters", "max_mode_resolves", "ramp_time",
                      "ramp_step"});
    so.read("dt", sol.dt);
    so.read("newton_vtol", sol.newton_vtol);
    so.read("newton_itol", sol.newton_itol);
    so.read("max_newton_iters", sol.max_newton_iters);
    so.read("max_mode_resolves", sol.max_mode_resolves);
    so.read("ramp_time", sol.ramp_time);
    so.read("ramp_step", sol.ramp_step);

    auto& ex = cfg.experiment;
    const Section e(top.child("experiment"), "experiment",
                    {"studies", "inputs", "v_magic", "v_iso_wl", "v_iso_bl", "t_op", "v_read", "r_sense",
                     "delay_criterion", "threads"});
    e.read_with("studies", [&](const YAML::Node& n) {
        cfg.plan.studies.clear();
        for (const auto& t : scalar_list(n)) {
            const auto st = parse_study(t);
            if (!st) throw ValidationError("unknown study '" + t + "'");
            cfg.plan.studies.push_back(*st);
        }
    });
    e.read_with("inputs", [&](const YAML::Node& n) {
        cfg.plan.inputs.clear();
        for (const auto& t : scalar_list(n)) cfg.plan.inputs.push_back(parse_inputs(t));
    });
    e.read("v_magic", ex.v_magic);
    e.read("v_iso_wl", ex.v_iso_wl);
    e.read("v_iso_bl", ex.v_iso_bl);
    e.read("t_op", ex.t_op);
    e.read("v_read", ex.v_read);
    e.read("r_sense", ex.r_sense);
    e.read("delay_criterion", ex.delay_criterion);
    e.read("threads", cfg.threads);

    const Section iv(top.child("iv"), "iv", {"v_max", "v_min", "rate", "steps"});
    iv.read("v_max", cfg.iv.v_max);
    iv.read("v_min", cfg.iv.v_min);
    iv.read("rate", cfg.iv.rate);
    iv.read("steps", cfg.iv.steps);

    const Section o(top.child("output"), "output", {"dir", "csv", "svg"});
    o.read("dir", cfg.output.dir);
    o.read("csv", cfg.output.csv);
    o.read("svg", cfg.output.svg);

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Writer {
public:
    explicit Writer(bool comments) : comments_(comments) {}

    void section(const char* name, int indent = 0) { os_ << pad(indent) << name << ":\n"; }
    void value(int indent, const char* key, const std::string& v, const char* note = nullptr) {
        os_ << pad(indent) << key << ": " << v;
        if (comments_ && note) os_ << "  # " << note;
        os_ << "\n";
    }
    void value(int indent, const char* key, double v, const char* note = nullptr) { value(indent, key, num(v), note); }
    void value(int indent, const char* key, int v, const char* note = nullptr) {
        value(indent, key, std::to_string(v), note);
    }
    void comment(const char* text) {
        if (comments_) os_ << "# " << text << "\n";
    }
    std::string str() const { return os_.str(); }

private:
    static std::string pad(int n) { return std::string(static_cast<std::size_t>(n), ' '); }
    bool comments_;
    std::ostringstream os_;
};

template <typename T, typename F>
std::string flow(const std::vector<T>& v, F&& fmt) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

void write_device(Writer& w, const RunConfig& cfg) {
    const auto& sel = cfg.experiment.device.selector;
    const auto& vt = cfg.experiment.device.rram;
    w.section("device");
    w.section("selector", 2);
    w.value(4, "v_th", sel.v_th, "[V] OFF->ON threshold (reference)");
    w.value(4, "v_hold", sel.v_hold, "[V] ON->OFF hold level (design: ON state sustainable with ohmic ON branch)");
    w.value(4, "r_on", sel.r_on, "[ohm] ON resistance (reference)");
    w.value(4, "alpha_s", sel.alpha_s, "[V] OFF-branch slope (design)");
    w.value(4, "beta_s", sel.beta_s, "[ohm] OFF-branch prefactor (design)");
    w.value(4, "v_s", sel.v_s, "[V] OFF-branch offset (design)");
    w.section("vteam", 2);
    w.value(4, "k_set", vt.k_set, "[1/s] fitted to the SET time");
    w.value(4, "k_reset", vt.k_reset, "[1/s] fitted to the RESET time");
    w.value(4, "alpha_set", vt.alpha_set, "(design: linear overdrive)");
    w.value(4, "alpha_reset", vt.alpha_reset, "(design: linear overdrive)");
    w.value(4, "v_set", vt.v_set, "[V] SET threshold (reference)");
    w.value(4, "v_reset", vt.v_reset, "[V] RESET threshold (reference)");
    w.value(4, "w_set", vt.w_set, "state bound at LRS (design)");
    w.value(4, "w_reset", vt.w_reset, "state bound at HRS (design)");
    w.value(4, "lambda", vt.lambda, "ln(R_HRS/R_LRS), R_HRS = 1 Mohm (derived)");
    w.value(4, "r_lrs", vt.r_lrs, "[ohm] LRS resistance (derived from the 5 kohm NOR(1,1) input pair)");
}

}  // namespace

std::string render_config(const RunConfig& cfg, bool comments) {
    Writer w(comments);
    w.comment("xbar run configuration. Notes mark each default as a reference operating");
    w.comment("point of the modeled devices/study, derived from those, or a design choice.");
    write_device(w, cfg);

    const auto& fit = cfg.experiment.fit;
    w.section("fit");
    w.value(2, "t_set", fit.t_set, "[s] measured full SET time (reference)");
    w.value(2, "t_reset", fit.t_reset, "[s] measured full RESET time (reference)");
    w.value(2, "v_pulse_set", fit.v_pulse_set, "[V] SET fitting pulse (reference)");
    w.value(2, "v_pulse_reset", fit.v_pulse_reset, "[V] RESET fitting pulse (reference)");

    const auto& arr = cfg.experiment.array;
    w.section("array");
    w.value(2, "sizes", flow(cfg.plan.sizes, [](int n) { return std::to_string(n); }),
            "(design: 4..64 by default; 128..512 are long runs)");
    w.value(2, "kinds", flow(cfg.plan.kinds, [](CellKind k) { return to_token(k); }), "1r and/or 1s1r");
    w.value(2, "r_wire_wl", arr.r_wire_wl, "[ohm/segment] (design: typical interconnect)");
    w.value(2, "r_wire_bl", arr.r_wire_bl, "[ohm/segment] (design: typical interconnect)");
    w.value(2, "c_cell", arr.c_cell, "[F] per cell, wordline rail to ground (design)");
    w.value(2, "bl_driver", std::string(arr.bl_driver == BitlineEnd::Top ? "top" : "bottom"), "top | bottom");
    w.value(2, "wl_driver", std::string(arr.wl_driver == WordlineEnd::Left ? "left" : "right"), "left | right");
    w.value(2, "r_driver", arr.r_driver, "[ohm] source resistance of every driver (design: ideal)");
    w.value(2, "background", std::string(fill_token(cfg.experiment)),
            "checkerboard | hrs | lrs (reference: half LRS, half HRS)");

    const auto& sol = cfg.experiment.solver;
    w.section("solver");
    w.value(2, "dt", sol.dt, "[s] fixed step (design)");
    w.value(2, "newton_vtol", sol.newton_vtol, "[V] (design)");
    w.value(2, "newton_itol", sol.newton_itol, "[A] (design)");
    w.value(2, "max_newton_iters", sol.max_newton_iters, "(design)");
    w.value(2, "max_mode_resolves", sol.max_mode_resolves, "(design)");
    w.value(2, "ramp_time", sol.ramp_time, "[s] quasi-static DC ramp (design)");
    w.value(2, "ramp_step", sol.ramp_step, "[s] DC ramp point spacing (design)");

    const auto& ex = cfg.experiment;
    w.section("experiment");
    w.value(2, "studies", flow(cfg.plan.studies, [](Study s) { return std::string(to_string(s)); }),
            "cell | delay | power | readout");
    w.value(2, "inputs", flow(cfg.plan.inputs, [](NorInputs in) {
                return "\"" + std::to_string(in.a) + std::to_string(in.b) + "\"";
            }), "NOR input pairs, 1 = LRS");
    w.value(2, "v_magic", ex.v_magic, "[V] (reference)");
    w.value(2, "v_iso_wl", ex.v_iso_wl, "[V] (reference)");
    w.value(2, "v_iso_bl", ex.v_iso_bl, "[V] (reference)");
    w.value(2, "t_op", ex.t_op, "[s] operation window (reference)");
    w.value(2, "v_read", ex.v_read, "[V] (reference)");
    w.value(2, "r_sense", ex.r_sense, "[ohm] sqrt(R_LRS*R_HRS) (reference)");
    w.value(2, "delay_criterion", ex.delay_criterion, "fraction of the state excursion (design)");
    w.value(2, "threads", cfg.threads, "sweep worker threads");

    w.section("iv");
    w.value(2, "v_max", cfg.iv.v_max, "[V] (design)");
    w.value(2, "v_min", cfg.iv.v_min, "[V] (design)");
    w.value(2, "rate", cfg.iv.rate, "[V/s] (design)");
    w.value(2, "steps", cfg.iv.steps, "points per leg (design)");

    w.section("output");
    w.value(2, "dir", "\"" + cfg.output.dir + "\"", "overridden by --out or XBAR_OUT_DIR");
    w.value(2, "csv", std::string(cfg.output.csv ? "true" : "false"));
    w.value(2, "svg", std::string(cfg.output.svg ? "true" : "false"));
    return w.str();
}

std::string render_device_fragment(const RunConfig& cfg) {
    Writer w(true);
    w.comment("Fitted device parameters. Merge into a run configuration or pass with --config.");
    write_device(w, cfg);
    const auto& fit = cfg.experiment.fit;
    w.section("fit");
    w.value(2, "t_set", fit.t_set);
    w.value(2, "t_reset", fit.t_reset);
    w.value(2, "v_pulse_set", fit.v_pulse_set);
    w.value(2, "v_pulse_reset", fit.v_pulse_reset);
    return w.str();
}

}  // namespace xbar
