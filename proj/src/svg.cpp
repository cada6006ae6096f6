#include "hergm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "hergm/format.hpp"
#include "hergm/version.hpp"

namespace hergm {

namespace {

constexpr double kPanelW = 320, kPanelH = 240, kMargin = 45;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void settle() {
        if (!std::isfinite(lo)) {
            lo = 0;
            hi = 1;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

void render_panel(const SvgPanel& p, double x0, std::ostream& out) {
    Range rx, ry;
    for (const auto& s : p.series) {
        for (double v : s.x)
            rx.add(v);
        for (const auto* vs : {&s.y, &s.lower, &s.upper})
            for (double v : *vs)
                ry.add(v);
    }
    rx.settle();
    ry.settle();
    const double left = x0 + kMargin, right = x0 + kPanelW - 10, top = 30, bottom = kPanelH - kMargin + 30;
    auto px = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * (right - left); };
    auto py = [&](double v) { return bottom - (v - ry.lo) / (ry.hi - ry.lo) * (bottom - top); };

    out << "<g>\n<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
        << "\" height=\"" << num(bottom - top) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<text x=\"" << num((left + right) / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(p.title) << "</text>\n";
    out << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(bottom + 32)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(p.xlabel) << "</text>\n";
    out << "<text x=\"" << num(x0 + 12) << "\" y=\"" << num((top + bottom) / 2) << "\" font-size=\"11\" "
        << "text-anchor=\"middle\" transform=\"rotate(-90 " << num(x0 + 12) << ' ' << num((top + bottom) / 2)
        << ")\">" << escape(p.ylabel) << "</text>\n";
    for (double v : {rx.lo, rx.hi})
        out << "<text x=\"" << num(px(v)) << "\" y=\"" << num(bottom + 14)
            << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(format_double(v)) << "</text>\n";
    for (double v : {ry.lo, ry.hi})
        out << "<text x=\"" << num(left - 4) << "\" y=\"" << num(py(v) + 4)
            << "\" text-anchor=\"end\" font-size=\"10\">" << escape(format_double(v)) << "</text>\n";

    for (std::size_t si = 0; si < p.series.size(); ++si) {
        const auto& s = p.series[si];
        const char* color = kColors[si % 6];
        if (!s.lower.empty()) {
            std::string fwd, back;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.lower[i]) || !std::isfinite(s.upper[i]))
                    continue;
                fwd += num(px(s.x[i])) + "," + num(py(s.upper[i])) + " ";
                back = num(px(s.x[i])) + "," + num(py(s.lower[i])) + " " + back;
            }
            out << "<polygon points=\"" << fwd << back << "\" fill=\"" << color
                << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        }
        std::string pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
        out << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>\n";
        out << "<text x=\"" << num(right - 4) << "\" y=\"" << num(top + 14 + 13 * double(si))
            << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << color << "\">" << escape(s.name) << "</text>\n";
    }
    out << "</g>\n";
}

}  // namespace

void render_svg(const std::vector<SvgPanel>& panels, const std::string& title, std::ostream& out) {
    const double width = kPanelW * double(std::max<std::size_t>(1, panels.size()));
    const double height = kPanelH + 40;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    out << "<!-- hergm-kit " << kVersion << " -->\n";
    out << "<title>" << escape(title) << "</title>\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        render_panel(panels[i], kPanelW * double(i), out);
    out << "</svg>\n";
}

void plot_gof(const GofReport& r, std::ostream& out) {
    std::vector<SvgPanel> panels;
    for (const auto& p : r.panels) {
        SvgPanel panel{p.name + " (coverage " + num(p.coverage) + ")", p.name == "model" ? "term" : "bin", "count",
                       {}};
        SvgSeries sim{"simulated", {}, p.median, p.lower, p.upper, true};
        SvgSeries obs{"observed", {}, p.observed, {}, {}, false};
        for (std::size_t b = 0; b < p.observed.size(); ++b) {
            sim.x.push_back(double(b));
            obs.x.push_back(double(b));
        }
        panel.series = {sim, obs};
        panels.push_back(std::move(panel));
    }
    render_svg(panels, "GOF " + r.model, out);
}

void plot_misrate(const MisrateResult& r, std::ostream& out) {
    SvgPanel panel{"mis-clustering rate", "nodes per cluster", "mean rate", {}};
    std::vector<double> levels;
    for (const auto& c : r.cells)
        if (std::find(levels.begin(), levels.end(), c.transitivity) == levels.end())
            levels.push_back(c.transitivity);
    for (double t : levels) {
        SvgSeries s{"t=" + format_double(t), {}, {}, {}, {}, false};
        for (const auto& c : r.cells)
            if (c.transitivity == t) {
                s.x.push_back(double(c.n_per_cluster));
                s.y.push_back(c.mean_rate);
            }
        panel.series.push_back(std::move(s));
    }
    render_svg({panel}, "misrate experiment", out);
}

void plot_sensitivity(const SensitivityResult& r, std::ostream& out) {
    std::vector<std::string> quantities;
    for (const auto& s : r.summary)
        if (s.quantity.rfind("bias:", 0) == 0 &&
            std::find(quantities.begin(), quantities.end(), s.quantity) == quantities.end())
            quantities.push_back(s.quantity);
    std::vector<SvgPanel> panels;
    for (const auto& q : quantities) {
        SvgPanel panel{q, "rho", "mean bias", {}};
        std::map<std::string, std::size_t> at;
        for (const auto& s : r.summary) {
            if (s.quantity != q)
                continue;
            auto it = at.find(s.cluster);
            if (it == at.end()) {
                it = at.emplace(s.cluster, panel.series.size()).first;
                panel.series.push_back(SvgSeries{"cluster " + s.cluster, {}, {}, {}, {}, false});
            }
            panel.series[it->second].x.push_back(s.rho);
            panel.series[it->second].y.push_back(s.mean);
        }
        panels.push_back(std::move(panel));
    }
    render_svg(panels, "sensitivity experiment", out);
}

void plot_score(const ScoreExperimentResult& r, std::ostream& out) {
    SvgPanel panel{"mis-clustering rate", "scenario", "mean rate", {}};
    for (const std::string method : {"score", "eigenvector"}) {
        SvgSeries s{method, {}, {}, {}, {}, method == "eigenvector"};
        double i = 0;
        for (const auto& row : r.summary)
            if (row.method == method) {
                s.x.push_back(i++);
                s.y.push_back(row.mean_rate);
            }
        panel.series.push_back(std::move(s));
    }
    render_svg({panel}, "score experiment", out);
}

}  // namespace hergm
