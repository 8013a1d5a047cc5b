#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "xbar/results.hpp"

namespace xbar {

namespace {

struct Series {
    std::string label;
    std::string color;
    bool dashed = false;
    std::vector<std::pair<double, double>> points;  // (size, value)
};

struct Chart {
    std::string title;
    std::string y_label;
    bool log_y = false;
    std::optional<double> threshold;
    std::string threshold_label;
    std::vector<Series> series;
};

constexpr double kW = 640, kH = 420, kLeft = 80, kRight = 190, kTop = 40, kBottom = 60;

std::string f2(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return b;
}

std::string tick(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%g", v);
    return b;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

std::string render(const Chart& c) {
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& s : c.series)
        for (auto [x, y] : s.points) {
            if (!std::isfinite(y) || (c.log_y && y <= 0)) continue;
            x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y), y_hi = std::max(y_hi, y);
        }
    if (c.threshold) y_lo = std::min(y_lo, *c.threshold), y_hi = std::max(y_hi, *c.threshold);
    const bool empty = !std::isfinite(x_lo);
    if (empty) x_lo = 4, x_hi = 512, y_lo = c.log_y ? 1 : 0, y_hi = c.log_y ? 10 : 1;

    const double lx_lo = std::log2(x_lo) - 0.3, lx_hi = std::log2(x_hi) + 0.3;
    double ylo, yhi;
    if (c.log_y) {
        ylo = std::floor(std::log10(y_lo));
        yhi = std::ceil(std::log10(y_hi));
        if (yhi <= ylo) yhi = ylo + 1;
    } else {
        ylo = std::min(0.0, y_lo);
        yhi = y_hi > ylo ? y_hi * 1.1 : ylo + 1;
    }
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (std::log2(x) - lx_lo) / (lx_hi - lx_lo) * pw; };
    auto py = [&](double y) {
        const double t = c.log_y ? (std::log10(y) - ylo) / (yhi - ylo) : (y - ylo) / (yhi - ylo);
        return kTop + (1 - t) * ph;
    };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(c.title)
      << "</text>\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int e = static_cast<int>(std::ceil(lx_lo)); e <= static_cast<int>(std::floor(lx_hi)); ++e) {
        const double x = std::ldexp(1.0, e);
        o << "<line x1=\"" << f2(px(x)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << f2(px(x)) << "\" y2=\"" << kTop
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << f2(px(x)) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << tick(x)
          << "</text>\n";
    }
    const int n_ticks = c.log_y ? static_cast<int>(yhi - ylo) : 5;
    for (int k = 0; k <= n_ticks; ++k) {
        const double y = c.log_y ? std::pow(10.0, ylo + k) : ylo + (yhi - ylo) * k / n_ticks;
        o << "<line x1=\"" << kLeft << "\" y1=\"" << f2(py(y)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << f2(py(y))
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << kLeft - 6 << "\" y=\"" << f2(py(y) + 4) << "\" text-anchor=\"end\">" << tick(y)
          << "</text>\n";
    }
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 18
      << "\" text-anchor=\"middle\">Array size N (N x N)</text>\n";
    o << "<text transform=\"translate(20," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(c.y_label) << "</text>\n";

    if (c.threshold) {
        const double y = py(*c.threshold);
        o << "<line x1=\"" << kLeft << "\" y1=\"" << f2(y) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << f2(y)
          << "\" stroke=\"#c00\" stroke-dasharray=\"6,4\"/>\n";
        o << "<text x=\"" << kLeft + pw - 4 << "\" y=\"" << f2(y - 5) << "\" text-anchor=\"end\" fill=\"#c00\">"
          << escape(c.threshold_label) << "</text>\n";
    }
    if (empty)
        o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\">no data</text>\n";

    double ly = kTop + 10;
    for (const auto& s : c.series) {
        std::string path;
        for (auto [x, y] : s.points) {
            if (!std::isfinite(y) || (c.log_y && y <= 0)) continue;
            path += (path.empty() ? "M" : " L") + f2(px(x)) + "," + f2(py(y));
        }
        const std::string dash = s.dashed ? " stroke-dasharray=\"5,3\"" : "";
        if (!path.empty())
            o << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << dash
              << "/>\n";
        for (auto [x, y] : s.points) {
            if (!std::isfinite(y) || (c.log_y && y <= 0)) continue;
            o << "<circle cx=\"" << f2(px(x)) << "\" cy=\"" << f2(py(y)) << "\" r=\"3\" fill=\"" << s.color
              << "\"/>\n";
        }
        const double lx = kLeft + pw + 12;
        o << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly << "\" stroke=\""
          << s.color << "\" stroke-width=\"2\"" << dash << "/>\n";
        o << "<text x=\"" << lx + 28 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
        ly += 18;
    }
    o << "</svg>\n";
    return o.str();
}

const char* color_of(CellKind k) { return k == CellKind::R1 ? "#1f77b4" : "#d62728"; }

// Mean over the rows that fall into one (kind, input class) bucket per size.
Series bucket(const std::vector<ExperimentReport>& t, Study study, CellKind kind, bool want_nor00, bool want_11,
              double ExperimentReport::*field, double scale, std::string label, bool dashed) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto& r : t) {
        if (r.error || r.study != study || r.kind != kind || !r.inputs) continue;
        const bool is00 = *r.inputs == NorInputs{0, 0};
        const bool is11 = *r.inputs == NorInputs{1, 1};
        if (want_nor00 != is00) continue;
        if (!want_nor00 && want_11 != is11) continue;
        auto& [sum, n] = acc[r.size];
        sum += r.*field * scale;
        ++n;
    }
    Series s{std::move(label), color_of(kind), dashed, {}};
    for (auto& [size, p] : acc) s.points.emplace_back(size, p.first / p.second);
    return s;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << text;
}

}  // namespace

std::vector<std::filesystem::path> render_plots(const std::vector<ExperimentReport>& table,
                                                const std::filesystem::path& out_dir) {
    if (table.empty()) throw ValidationError("plot: results table is empty");
    std::filesystem::create_directories(out_dir);

    Chart delay{"MAGIC NOR switching delay", "Switching delay (ns)", false, std::nullopt, "", {}};
    Chart power{"MAGIC NOR power, half the rows active", "Average power (uW)", true, std::nullopt, "", {}};
    Chart rm{"Readout margin", "Readout margin (%)", false, 10.0, "10% threshold", {}};
    for (CellKind k : {CellKind::R1, CellKind::S1R1}) {
        const std::string kn = to_string(k);
        delay.series.push_back(bucket(table, Study::Delay, k, false, false, &ExperimentReport::delay, 1e9,
                                      kn + " NOR(0,1)/(1,0)", false));
        delay.series.push_back(
            bucket(table, Study::Delay, k, false, true, &ExperimentReport::delay, 1e9, kn + " NOR(1,1)", true));
        power.series.push_back(
            bucket(table, Study::Power, k, true, false, &ExperimentReport::avg_power, 1e6, kn + " NOR(0,0)", true));
        Series other{kn + " other inputs", color_of(k), false, {}};
        std::map<int, std::pair<double, int>> acc;
        for (const auto& r : table)
            if (!r.error && r.study == Study::Power && r.kind == k && r.inputs && !(*r.inputs == NorInputs{0, 0})) {
                acc[r.size].first += r.avg_power * 1e6;
                ++acc[r.size].second;
            }
        for (auto& [size, p] : acc) other.points.emplace_back(size, p.first / p.second);
        power.series.push_back(std::move(other));

        Series s{kn, color_of(k), false, {}};
        for (const auto& r : table)
            if (!r.error && r.study == Study::Readout && r.kind == k) s.points.emplace_back(r.size, r.readout_margin * 100);
        std::sort(s.points.begin(), s.points.end());
        rm.series.push_back(std::move(s));
    }

    std::vector<std::filesystem::path> files{out_dir / "delay_vs_size.svg", out_dir / "power_vs_size.svg",
                                             out_dir / "rm_vs_size.svg"};
    write_file(files[0], render(delay));
    write_file(files[1], render(power));
    write_file(files[2], render(rm));
    return files;
}

}  // namespace xbar
