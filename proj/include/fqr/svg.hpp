#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fqr/errors.hpp"

namespace fqr::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool line = true;
    bool points = false;
    bool dashed = false;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 880;
    int height = 540;
    bool legend = true;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

inline Range finite_range(const std::vector<const std::vector<double>*>& columns) {
    Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto* col : columns) {
        for (double v : *col) {
            if (!std::isfinite(v)) continue;
            r.lo = std::min(r.lo, v);
            r.hi = std::max(r.hi, v);
        }
    }
    if (!(r.lo <= r.hi)) return {0.0, 1.0};
    if (r.lo == r.hi) {
        const double pad = r.lo == 0.0 ? 1.0 : std::abs(r.lo) * 0.1;
        return {r.lo - pad, r.hi + pad};
    }
    return r;
}

/// Round tick spacing to 1/2/5 times a power of ten.
inline double nice_step(double span, int target_ticks) {
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step = 10.0;
    if (norm <= 1.0) step = 1.0;
    else if (norm <= 2.0) step = 2.0;
    else if (norm <= 5.0) step = 5.0;
    return step * mag;
}

}  // namespace detail

/// Writes a line/scatter chart of the given series. Output is fully
/// deterministic: fixed palette, fixed formatting, no timestamps.
inline void write_chart(std::ostream& out, const std::vector<Series>& series,
                        const ChartOptions& opt) {
    const int margin_left = 72, margin_right = 24, margin_top = 42, margin_bottom = 58;
    const double plot_w = opt.width - margin_left - margin_right;
    const double plot_h = opt.height - margin_top - margin_bottom;

    std::vector<const std::vector<double>*> xcols, ycols;
    for (const auto& s : series) {
        xcols.push_back(&s.x);
        ycols.push_back(&s.y);
    }
    const auto xr = detail::finite_range(xcols);
    const auto yr = detail::finite_range(ycols);

    const auto sx = [&](double v) {
        return margin_left + (v - xr.lo) / (xr.hi - xr.lo) * plot_w;
    };
    const auto sy = [&](double v) {
        return margin_top + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h;
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
        << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty()) {
        out << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"16\">" << detail::escape(opt.title)
            << "</text>\n";
    }

    // Axes and gridlines.
    const double x_step = detail::nice_step(xr.hi - xr.lo, 8);
    const double y_step = detail::nice_step(yr.hi - yr.lo, 6);
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double t = std::ceil(xr.lo / x_step) * x_step; t <= xr.hi + 1e-9 * x_step; t += x_step) {
        const double px = sx(t);
        out << "<line x1=\"" << detail::fmt(px) << "\" y1=\"" << margin_top << "\" x2=\""
            << detail::fmt(px) << "\" y2=\"" << detail::fmt(margin_top + plot_h)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << detail::fmt(px) << "\" y=\"" << detail::fmt(margin_top + plot_h + 16)
            << "\" text-anchor=\"middle\">" << detail::fmt(t) << "</text>\n";
    }
    for (double t = std::ceil(yr.lo / y_step) * y_step; t <= yr.hi + 1e-9 * y_step; t += y_step) {
        const double py = sy(t);
        out << "<line x1=\"" << margin_left << "\" y1=\"" << detail::fmt(py) << "\" x2=\""
            << detail::fmt(margin_left + plot_w) << "\" y2=\"" << detail::fmt(py)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << margin_left - 6 << "\" y=\"" << detail::fmt(py + 4)
            << "\" text-anchor=\"end\">" << detail::fmt(t) << "</text>\n";
    }
    out << "</g>\n";
    out << "<rect x=\"" << margin_left << "\" y=\"" << margin_top << "\" width=\""
        << detail::fmt(plot_w) << "\" height=\"" << detail::fmt(plot_h)
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    // Series.
    for (const auto& s : series) {
        if (s.line && s.x.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
            if (s.dashed) out << " stroke-dasharray=\"6 4\"";
            out << " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << detail::fmt(sx(s.x[i])) << ',' << detail::fmt(sy(s.y[i])) << ' ';
            }
            out << "\"/>\n";
        }
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << "<circle cx=\"" << detail::fmt(sx(s.x[i])) << "\" cy=\""
                    << detail::fmt(sy(s.y[i])) << "\" r=\"3.2\" fill=\"" << s.color << "\"/>\n";
            }
        }
    }

    // Axis labels.
    out << "<g font-family=\"sans-serif\" font-size=\"13\" fill=\"#111\">\n";
    if (!opt.x_label.empty()) {
        out << "<text x=\"" << margin_left + plot_w / 2 << "\" y=\"" << opt.height - 12
            << "\" text-anchor=\"middle\">" << detail::escape(opt.x_label) << "</text>\n";
    }
    if (!opt.y_label.empty()) {
        out << "<text x=\"18\" y=\"" << margin_top + plot_h / 2
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
            << detail::fmt(margin_top + plot_h / 2) << ")\">" << detail::escape(opt.y_label)
            << "</text>\n";
    }
    out << "</g>\n";

    if (opt.legend) {
        double ly = margin_top + 10;
        for (const auto& s : series) {
            if (s.name.empty()) continue;
            out << "<line x1=\"" << margin_left + 10 << "\" y1=\"" << detail::fmt(ly) << "\" x2=\""
                << margin_left + 34 << "\" y2=\"" << detail::fmt(ly) << "\" stroke=\"" << s.color
                << "\" stroke-width=\"2\"";
            if (s.dashed) out << " stroke-dasharray=\"6 4\"";
            out << "/>\n";
            out << "<text x=\"" << margin_left + 40 << "\" y=\"" << detail::fmt(ly + 4)
                << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::escape(s.name)
                << "</text>\n";
            ly += 18;
        }
    }
    out << "</svg>\n";
}

/// Horizontal bar chart of signed values, one bar per category. Used for
/// per-unit influence displays: positive bars to the right, negative left.
inline void write_bar_chart(std::ostream& out, const std::vector<std::string>& categories,
                            const std::vector<double>& values, const ChartOptions& opt) {
    if (categories.size() != values.size()) throw DataError("bar chart inputs differ in length");
    const int margin_left = 76, margin_right = 24, margin_top = 42, margin_bottom = 28;
    const int bar_h = 16, gap = 6;
    const int height = margin_top + margin_bottom + int(categories.size()) * (bar_h + gap);
    const double plot_w = opt.width - margin_left - margin_right;

    double lo = 0.0, hi = 0.0;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) hi = lo + 1.0;
    const auto sx = [&](double v) { return margin_left + (v - lo) / (hi - lo) * plot_w; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << opt.width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty()) {
        out << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"15\">" << detail::escape(opt.title)
            << "</text>\n";
    }
    const double zero_x = sx(0.0);
    out << "<line x1=\"" << detail::fmt(zero_x) << "\" y1=\"" << margin_top << "\" x2=\""
        << detail::fmt(zero_x) << "\" y2=\"" << height - margin_bottom
        << "\" stroke=\"#333\"/>\n";

    double y = margin_top;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const double v = values[i];
        const double x0 = std::min(zero_x, sx(v));
        const double w = std::abs(sx(v) - zero_x);
        const char* color = v >= 0.0 ? "#c23b22" : "#2b6cb0";
        out << "<rect x=\"" << detail::fmt(x0) << "\" y=\"" << detail::fmt(y) << "\" width=\""
            << detail::fmt(w) << "\" height=\"" << bar_h << "\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << margin_left - 6 << "\" y=\"" << detail::fmt(y + bar_h - 3)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::escape(categories[i]) << "</text>\n";
        y += bar_h + gap;
    }
    out << "</svg>\n";
}

inline void save_chart(const std::string& path, const std::vector<Series>& series,
                       const ChartOptions& opt) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file '" + path + "'");
    write_chart(out, series, opt);
}

inline void save_bar_chart(const std::string& path, const std::vector<std::string>& categories,
                           const std::vector<double>& values, const ChartOptions& opt) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file '" + path + "'");
    write_bar_chart(out, categories, values, opt);
}

}  // namespace fqr::svg
