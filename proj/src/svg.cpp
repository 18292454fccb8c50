#include "motorlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace motorlab::svg {

namespace {

constexpr double kPanelW = 520.0;
constexpr double kPanelH = 320.0;
constexpr double kLeft = 70.0, kRight = 150.0, kTop = 34.0, kBottom = 48.0;
constexpr std::size_t kMaxPoints = 2000;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string esc(const std::string& s) {
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

std::string fmt(double v, const char* spec = "%.4g") {
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double map(double v) const {
        const double t = log ? std::log10(v) : v;
        return (t - lo) / (hi - lo);
    }
    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

Axis make_axis(std::vector<double> values, bool log) {
    Axis a;
    a.log = log;
    double lo = INFINITY, hi = -INFINITY;
    for (double v : values) {
        if (!a.usable(v)) continue;
        const double t = log ? std::log10(v) : v;
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.5;
        hi += 0.5;
    }
    if (log) {
        lo = std::floor(lo);
        hi = std::ceil(hi);
    } else {
        const double pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    a.lo = lo;
    a.hi = hi;
    return a;
}

// 1-2-5 steps, about six ticks.
std::vector<double> ticks(const Axis& a) {
    std::vector<double> out;
    if (a.log) {
        const int step = std::max(1, static_cast<int>(std::ceil((a.hi - a.lo) / 6.0)));
        for (double e = a.lo; e <= a.hi + 1e-9; e += step) out.push_back(std::pow(10.0, e));
        return out;
    }
    const double raw = (a.hi - a.lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-9 * step; t += step)
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

void draw_frame(std::ostringstream& o, const Panel& p, double x0, double y0, double w, double h) {
    o << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 - 10 << "\" text-anchor=\"middle\" font-size=\"14\">"
      << esc(p.title) << "</text>\n";
    o << "<text x=\"" << x0 + w / 2 << "\" y=\"" << y0 + h + 38 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << esc(p.x_label) << "</text>\n";
    o << "<text transform=\"translate(" << x0 - 52 << ',' << y0 + h / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << esc(p.y_label) << "</text>\n";
}

void draw_lines(std::ostringstream& o, const Panel& p, double x0, double y0, double w, double h) {
    std::vector<double> xs, ys;
    for (const auto& s : p.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const Axis ax = make_axis(xs, p.log_x);
    const Axis ay = make_axis(ys, p.log_y);
    const auto px = [&](double v) { return x0 + w * ax.map(v); };
    const auto py = [&](double v) { return y0 + h * (1.0 - ay.map(v)); };

    for (double t : ticks(ax)) {
        const double x = px(t);
        o << "<line x1=\"" << fmt(x) << "\" y1=\"" << y0 + h << "\" x2=\"" << fmt(x) << "\" y2=\"" << y0 + h + 5
          << "\" stroke=\"#333\"/>\n<text x=\"" << fmt(x) << "\" y=\"" << y0 + h + 18
          << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(t) << "</text>\n";
    }
    for (double t : ticks(ay)) {
        const double y = py(t);
        o << "<line x1=\"" << x0 - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << x0 << "\" y2=\"" << fmt(y)
          << "\" stroke=\"#333\"/>\n<text x=\"" << x0 - 8 << "\" y=\"" << fmt(y + 3)
          << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(t) << "</text>\n";
    }

    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        const char* color = kColors[k % std::size(kColors)];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        const std::size_t stride = std::max<std::size_t>(1, (n + kMaxPoints - 1) / kMaxPoints);
        std::string pts;
        const auto flush = [&] {
            if (pts.empty()) return;
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
              << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts << "\"/>\n";
            pts.clear();
        };
        // Down-sample, but never skip a gap.
        for (std::size_t m = 0; m < n; ++m) {
            if (!ax.usable(s.x[m]) || !ay.usable(s.y[m])) {
                flush();
                continue;
            }
            if (m % stride != 0 && m != n - 1) continue;
            pts += fmt(px(s.x[m]), "%.2f") + "," + fmt(py(s.y[m]), "%.2f") + " ";
            if (s.markers)
                o << "<circle cx=\"" << fmt(px(s.x[m]), "%.2f") << "\" cy=\"" << fmt(py(s.y[m]), "%.2f")
                  << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        flush();
        const double ly = y0 + 14 + 16 * static_cast<double>(k);
        o << "<line x1=\"" << x0 + w + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << x0 + w + 30 << "\" y2=\"" << ly - 4
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
          << "/>\n<text x=\"" << x0 + w + 34 << "\" y=\"" << ly << "\" font-size=\"11\">" << esc(s.label)
          << "</text>\n";
    }
}

void draw_bars(std::ostringstream& o, const Panel& p, double x0, double y0, double w, double h) {
    double top = 0.0;
    for (const auto& b : p.bars)
        if (std::isfinite(b.value)) top = std::max(top, b.value);
    if (top <= 0.0) top = 1.0;
    const double slot = w / static_cast<double>(p.bars.size());
    for (std::size_t k = 0; k < p.bars.size(); ++k) {
        const auto& b = p.bars[k];
        const double v = std::isfinite(b.value) ? std::max(b.value, 0.0) : 0.0;
        const double bh = 0.9 * h * v / top;
        const double bx = x0 + slot * (static_cast<double>(k) + 0.2);
        o << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(y0 + h - bh) << "\" width=\"" << fmt(0.6 * slot)
          << "\" height=\"" << fmt(bh) << "\" fill=\"" << kColors[k % std::size(kColors)] << "\"/>\n";
        o << "<text x=\"" << fmt(bx + 0.3 * slot) << "\" y=\"" << y0 + h + 18
          << "\" text-anchor=\"middle\" font-size=\"10\">" << esc(b.label) << "</text>\n";
        o << "<text x=\"" << fmt(bx + 0.3 * slot) << "\" y=\"" << fmt(y0 + h - bh - 4)
          << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(b.value) << "</text>\n";
    }
}

}  // namespace

std::string render(const Figure& fig) {
    const int cols = std::max(1, fig.columns);
    const int rows = std::max<int>(1, (static_cast<int>(fig.panels.size()) + cols - 1) / cols);
    const double cell_w = kLeft + kPanelW + kRight;
    const double cell_h = kTop + kPanelH + kBottom;
    const double header = 40.0 + 16.0 * static_cast<double>(fig.legend.size() + (fig.timestamp ? 1 : 0));
    const double width = cell_w * cols;
    const double height = header + cell_h * rows;

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"16\" y=\"26\" font-size=\"16\" font-weight=\"bold\">" << esc(fig.title) << "</text>\n";
    double y = 46.0;
    for (const auto& line : fig.legend) {
        o << "<text x=\"16\" y=\"" << y << "\" font-size=\"12\">" << esc(line) << "</text>\n";
        y += 16.0;
    }
    if (fig.timestamp) {
        char buf[64];
        const std::time_t now = std::time(nullptr);
        std::strftime(buf, sizeof buf, "generated %Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        o << "<text x=\"16\" y=\"" << y << "\" font-size=\"12\" fill=\"#666\">" << buf << "</text>\n";
    }

    for (std::size_t k = 0; k < fig.panels.size(); ++k) {
        const auto& p = fig.panels[k];
        const double x0 = cell_w * static_cast<double>(k % cols) + kLeft;
        const double y0 = header + cell_h * static_cast<double>(k / cols) + kTop;
        draw_frame(o, p, x0, y0, kPanelW, kPanelH);
        if (p.bars.empty()) draw_lines(o, p, x0, y0, kPanelW, kPanelH);
        else draw_bars(o, p, x0, y0, kPanelW, kPanelH);
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace motorlab::svg
