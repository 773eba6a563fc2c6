// Copyright 2026 The pema Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pema/harness/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pema::harness {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

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

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

std::string coord(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
};

std::optional<double> transform(double v, bool log_axis) {
    if (!std::isfinite(v)) return std::nullopt;
    if (!log_axis) return v;
    if (v <= 0.0) return std::nullopt;
    return std::log10(v);
}

double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
    return nice * mag;
}

std::vector<double> ticks(const Range& r, bool log_axis) {
    std::vector<double> out;
    const double step = log_axis ? std::max(1.0, std::round(nice_step(r.hi - r.lo))) : nice_step(r.hi - r.lo);
    for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step) out.push_back(t);
    return out;
}

std::string tick_label(double t, bool log_axis) {
    if (log_axis) return "1e" + num(std::round(t));
    if (std::abs(t) < 1e-12) return "0";
    return num(t);
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, const ChartOptions& opt) {
    struct Prepared {
        const PlotSeries* src;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Prepared> prepared;
    Range xr;
    Range yr;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series '" + s.label + "' has mismatched x/y");
        Prepared p{&s, {}};
        const std::size_t stride = std::max<std::size_t>(1, (s.x.size() + opt.max_points - 1) / opt.max_points);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i % stride != 0 && i + 1 != s.x.size()) continue;
            const auto x = transform(s.x[i], opt.log_x);
            const auto y = transform(s.y[i], opt.log_y);
            if (!x || !y) continue;
            if (opt.y_min && s.y[i] < *opt.y_min) continue;
            if (opt.y_max && s.y[i] > *opt.y_max) continue;
            p.pts.emplace_back(*x, *y);
            xr.add(*x);
            yr.add(*y);
        }
        prepared.push_back(std::move(p));
    }
    if (!xr.valid()) throw std::invalid_argument("svg: nothing to plot");
    for (const auto& [label, v] : opt.reference_lines)
        if (auto y = transform(v, opt.log_y)) yr.add(*y);
    if (opt.y_min) {
        if (auto y = transform(*opt.y_min, opt.log_y)) yr.lo = *y;
    }
    if (opt.y_max) {
        if (auto y = transform(*opt.y_max, opt.log_y)) yr.hi = *y;
    }
    if (xr.hi == xr.lo) xr.hi = xr.lo + 1.0;
    if (yr.hi == yr.lo) {
        yr.lo -= 0.5;
        yr.hi += 0.5;
    }

    const double left = 75.0;
    const double right = 190.0;
    const double top = 40.0;
    const double bottom = 55.0;
    const double pw = opt.width - left - right;
    const double ph = opt.height - top - bottom;
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
        << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        svg << "<text x=\"" << coord(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
            << escape(opt.title) << "</text>\n";

    svg << "<g stroke=\"#ddd\" stroke-width=\"1\">\n";
    const auto xt = ticks(xr, opt.log_x);
    const auto yt = ticks(yr, opt.log_y);
    for (double t : xt)
        svg << "<line x1=\"" << coord(px(t)) << "\" y1=\"" << coord(top) << "\" x2=\"" << coord(px(t)) << "\" y2=\""
            << coord(top + ph) << "\"/>\n";
    for (double t : yt)
        svg << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(py(t)) << "\" x2=\"" << coord(left + pw)
            << "\" y2=\"" << coord(py(t)) << "\"/>\n";
    svg << "</g>\n";
    svg << "<rect x=\"" << coord(left) << "\" y=\"" << coord(top) << "\" width=\"" << coord(pw) << "\" height=\""
        << coord(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : xt)
        svg << "<text x=\"" << coord(px(t)) << "\" y=\"" << coord(top + ph + 16) << "\" text-anchor=\"middle\">"
            << tick_label(t, opt.log_x) << "</text>\n";
    for (double t : yt)
        svg << "<text x=\"" << coord(left - 6) << "\" y=\"" << coord(py(t) + 4) << "\" text-anchor=\"end\">"
            << tick_label(t, opt.log_y) << "</text>\n";
    svg << "<text x=\"" << coord(left + pw / 2) << "\" y=\"" << coord(opt.height - 12.0)
        << "\" text-anchor=\"middle\">" << escape(opt.x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << coord(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(opt.y_label) << "</text>\n";

    for (const auto& [label, v] : opt.reference_lines) {
        const auto y = transform(v, opt.log_y);
        if (!y) continue;
        svg << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(py(*y)) << "\" x2=\"" << coord(left + pw)
            << "\" y2=\"" << coord(py(*y)) << "\" stroke=\"black\" stroke-dasharray=\"2,3\"/>\n";
        svg << "<text x=\"" << coord(left + pw - 4) << "\" y=\"" << coord(py(*y) - 4) << "\" text-anchor=\"end\">"
            << escape(label) << "</text>\n";
    }

    for (std::size_t i = 0; i < prepared.size(); ++i) {
        const auto& p = prepared[i];
        if (p.pts.empty()) continue;
        svg << "<polyline fill=\"none\" stroke=\"" << kPalette[i % kPalette.size()] << "\" stroke-width=\"1.5\"";
        if (p.src->dashed) svg << " stroke-dasharray=\"6,4\"";
        svg << " points=\"";
        for (std::size_t j = 0; j < p.pts.size(); ++j) {
            if (j) svg << ' ';
            svg << coord(px(p.pts[j].first)) << ',' << coord(py(p.pts[j].second));
        }
        svg << "\"/>\n";
    }

    double ly = top + 10.0;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        const auto* s = prepared[i].src;
        const double lx = left + pw + 12.0;
        svg << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly) << "\" x2=\"" << coord(lx + 24) << "\" y2=\""
            << coord(ly) << "\" stroke=\"" << kPalette[i % kPalette.size()] << "\" stroke-width=\"2\""
            << (s->dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        svg << "<text x=\"" << coord(lx + 30) << "\" y=\"" << coord(ly + 4) << "\">" << escape(s->label)
            << "</text>\n";
        ly += 18.0;
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_svg(std::span<const PlotSeries> series, const ChartOptions& options, const std::filesystem::path& path) {
    const std::string text = render_svg(series, options);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("svg: cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("svg: write failed for " + path.string());
}

}  // namespace pema::harness
