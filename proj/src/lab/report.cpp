#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "uawr/error.hpp"
#include "uawr/hash.hpp"
#include "uawr/lab.hpp"

namespace uawr::lab {

void Report::add(std::string name, std::string content) {
    for (auto& a : artifacts) {
        if (a.name == name) {
            a.content = std::move(content);
            return;
        }
    }
    artifacts.push_back({std::move(name), std::move(content)});
}

const Artifact* Report::find(const std::string& name) const {
    for (const auto& a : artifacts) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

void write_report(const Report& report, const std::filesystem::path& out, const std::string& config_digest) {
    std::filesystem::create_directories(out);
    const auto manifest_path = out / "manifest.json";
    nlohmann::ordered_json entries = nlohmann::ordered_json::object();
    if (std::filesystem::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        try {
            const auto old = nlohmann::ordered_json::parse(in);
            if (old.contains("artifacts")) {
                for (const auto& e : old["artifacts"]) entries[e["name"].get<std::string>()] = e;
            }
        } catch (const nlohmann::json::exception&) {
            // unreadable manifest: rebuilt from this report
        }
    }
    for (const auto& a : report.artifacts) {
        const auto path = out / a.name;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << a.content;
        if (!f) throw std::runtime_error("write failed: " + path.string());
        nlohmann::ordered_json e;
        e["name"] = a.name;
        e["sha256"] = sha256_hex(a.content);
        e["bytes"] = a.content.size();
        e["config"] = config_digest;
        entries[a.name] = e;
    }
    std::vector<std::string> names;
    for (auto it = entries.begin(); it != entries.end(); ++it) names.push_back(it.key());
    std::sort(names.begin(), names.end());
    nlohmann::ordered_json manifest;
    manifest["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& n : names) manifest["artifacts"].push_back(entries[n]);
    std::ofstream f(manifest_path, std::ios::binary);
    f << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& o, const PlotLabels& labels) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(kWidth / 2 - kRight / 2 + kLeft / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(labels.title) << "</text>\n";
}

void axes(std::ostringstream& o, const Frame& f, const PlotLabels& labels, bool x_ticks) {
    const double xa = kLeft, xb = kWidth - kRight, ya = kHeight - kBottom, yb = kTop;
    o << "<line class=\"axis\" x1=\"" << num(xa) << "\" y1=\"" << num(ya) << "\" x2=\"" << num(xb) << "\" y2=\""
      << num(ya) << "\" stroke=\"black\"/>\n";
    o << "<line class=\"axis\" x1=\"" << num(xa) << "\" y1=\"" << num(ya) << "\" x2=\"" << num(xa) << "\" y2=\""
      << num(yb) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = f.y0 + (f.y1 - f.y0) * k / 4.0;
        o << "<text x=\"" << num(xa - 6) << "\" y=\"" << num(f.py(v) + 4) << "\" text-anchor=\"end\">" << num(v)
          << "</text>\n";
    }
    if (x_ticks) {
        for (int k = 0; k <= 4; ++k) {
            const double v = f.x0 + (f.x1 - f.x0) * k / 4.0;
            o << "<text x=\"" << num(f.px(v)) << "\" y=\"" << num(ya + 18) << "\" text-anchor=\"middle\">" << num(v)
              << "</text>\n";
        }
    }
    o << "<text x=\"" << num((xa + xb) / 2) << "\" y=\"" << num(kHeight - 18) << "\" text-anchor=\"middle\">"
      << escape(labels.x) << "</text>\n";
    o << "<text x=\"18\" y=\"" << num((ya + yb) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num((ya + yb) / 2) << ")\">" << escape(labels.y) << "</text>\n";
}

void legend_entry(std::ostringstream& o, std::size_t row, const std::string& color, const std::string& label,
                  bool dashed) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(row);
    const double x = kWidth - kRight + 14;
    o << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 22) << "\" y2=\"" << num(y)
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>\n";
    o << "<text x=\"" << num(x + 28) << "\" y=\"" << num(y + 4) << "\">" << escape(label) << "</text>\n";
}

void padded_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
        return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

}  // namespace

std::string emit_plot(const std::vector<Series>& series, const std::vector<ReferenceLine>& references,
                      const PlotLabels& labels) {
    if (series.empty()) throw std::invalid_argument("emit_plot: no series");
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size()) throw std::invalid_argument("emit_plot: bad series " + s.label);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    for (const auto& r : references) {
        y0 = std::min(y0, r.y);
        y1 = std::max(y1, r.y);
    }
    padded_range(x0, x1);
    padded_range(y0, y1);
    const Frame f{x0, x1, y0, y1};

    std::ostringstream o;
    header(o, labels);
    axes(o, f, labels, true);
    std::size_t row = 0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::string color = kPalette[k % std::size(kPalette)];
        o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i]));
        o << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            o << "<circle class=\"marker\" cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.y[i]))
              << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        }
        legend_entry(o, row++, color, s.label, false);
    }
    for (std::size_t k = 0; k < references.size(); ++k) {
        const auto& r = references[k];
        const std::string color = k == 0 ? "#d62728" : "#555555";
        o << "<line class=\"reference\" x1=\"" << num(kLeft) << "\" y1=\"" << num(f.py(r.y)) << "\" x2=\""
          << num(kWidth - kRight) << "\" y2=\"" << num(f.py(r.y)) << "\" stroke=\"" << color
          << "\" stroke-dasharray=\"4 3\"/>\n";
        legend_entry(o, row++, color, r.label, true);
    }
    o << "</svg>\n";
    return o.str();
}

void emit_plot(const std::vector<Series>& series, const std::vector<ReferenceLine>& references,
               const PlotLabels& labels, const std::filesystem::path& path) {
    const auto svg = emit_plot(series, references, labels);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << svg;
}

std::string emit_bar_chart(const std::vector<std::string>& categories, const std::vector<Series>& series,
                           const PlotLabels& labels) {
    if (series.empty() || categories.empty()) throw std::invalid_argument("emit_bar_chart: nothing to draw");
    double y1 = 0.0;
    for (const auto& s : series) {
        if (s.y.size() != categories.size()) throw std::invalid_argument("emit_bar_chart: bad series " + s.label);
        for (double v : s.y) y1 = std::max(y1, v);
    }
    if (!(y1 > 0.0)) y1 = 1.0;
    const Frame f{0.0, static_cast<double>(categories.size()), 0.0, y1 * 1.1};

    std::ostringstream o;
    header(o, labels);
    axes(o, f, labels, false);
    const double group = f.px(1.0) - f.px(0.0);
    const double bar = group * 0.8 / static_cast<double>(series.size());
    for (std::size_t c = 0; c < categories.size(); ++c) {
        for (std::size_t k = 0; k < series.size(); ++k) {
            const double x = f.px(static_cast<double>(c)) + group * 0.1 + bar * static_cast<double>(k);
            const double top = f.py(series[k].y[c]);
            o << "<rect class=\"bar\" x=\"" << num(x) << "\" y=\"" << num(top) << "\" width=\"" << num(bar)
              << "\" height=\"" << num(f.py(0.0) - top) << "\" fill=\"" << kPalette[k % std::size(kPalette)]
              << "\"/>\n";
        }
        o << "<text x=\"" << num(f.px(static_cast<double>(c) + 0.5)) << "\" y=\"" << num(kHeight - kBottom + 18)
          << "\" text-anchor=\"middle\">" << escape(categories[c]) << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        legend_entry(o, k, kPalette[k % std::size(kPalette)], series[k].label, false);
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace uawr::lab
