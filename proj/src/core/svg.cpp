// Copyright 2026 The nhmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nhmpc {
namespace {

const char* kPalette[] = {"#1a6feb", "#d43f3f", "#2e9e5b", "#946bd6"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Frame {
  // Data window.
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  // Pixel window (y axis flipped).
  double px_lo = 0, px_hi = 1, py_lo = 0, py_hi = 1;

  double map_x(double x) const {
    return px_lo + (x - x_lo) / (x_hi - x_lo) * (px_hi - px_lo);
  }
  double map_y(double y) const {
    return py_hi - (y - y_lo) / (y_hi - y_lo) * (py_hi - py_lo);
  }
};

void pad_window(double& lo, double& hi, double fraction) {
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = fraction * (hi - lo);
  lo -= pad;
  hi += pad;
}

void draw_axes(std::ostringstream& svg, const Frame& f,
               const std::string& x_label, const std::string& y_label) {
  svg << "<rect x=\"" << px(f.px_lo) << "\" y=\"" << px(f.py_lo)
      << "\" width=\"" << px(f.px_hi - f.px_lo) << "\" height=\""
      << px(f.py_hi - f.py_lo)
      << "\" fill=\"#fcfcfa\" stroke=\"#777\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << px(0.5 * (f.px_lo + f.px_hi)) << "\" y=\""
      << px(f.py_hi + 32)
      << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\">"
      << x_label << "</text>\n";
  svg << "<text x=\"" << px(f.px_lo - 40) << "\" y=\""
      << px(0.5 * (f.py_lo + f.py_hi))
      << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\" "
         "transform=\"rotate(-90 "
      << px(f.px_lo - 40) << " " << px(0.5 * (f.py_lo + f.py_hi)) << ")\">"
      << y_label << "</text>\n";
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

void draw_x_ticks(std::ostringstream& svg, const Frame& f, int count) {
  for (int i = 0; i <= count; ++i) {
    const double v = f.x_lo + (f.x_hi - f.x_lo) * i / count;
    const double x = f.map_x(v);
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << px(f.py_hi) << "\" x2=\""
        << px(x) << "\" y2=\"" << px(f.py_hi + 4)
        << "\" stroke=\"#777\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << px(x) << "\" y=\"" << px(f.py_hi + 16)
        << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#444\">"
        << tick_label(v) << "</text>\n";
  }
}

void draw_y_tick(std::ostringstream& svg, const Frame& f, double v,
                 const std::string& label) {
  const double y = f.map_y(v);
  svg << "<line x1=\"" << px(f.px_lo - 4) << "\" y1=\"" << px(y) << "\" x2=\""
      << px(f.px_lo) << "\" y2=\"" << px(y)
      << "\" stroke=\"#777\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << px(f.px_lo) << "\" y1=\"" << px(y) << "\" x2=\""
      << px(f.px_hi) << "\" y2=\"" << px(y)
      << "\" stroke=\"#e5e5e0\" stroke-width=\"0.5\"/>\n";
  svg << "<text x=\"" << px(f.px_lo - 7) << "\" y=\"" << px(y + 3)
      << "\" font-size=\"10\" text-anchor=\"end\" fill=\"#444\">" << label
      << "</text>\n";
}

void draw_polyline(std::ostringstream& svg, const std::string& points,
                   const std::string& color, double width) {
  svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
      << width << "\" stroke-linejoin=\"round\" points=\"" << points
      << "\"/>\n";
}

}  // namespace

std::string render_scenario_svg(const std::vector<PlotSeries>& series,
                                const Vec& setpoint,
                                const std::string& title) {
  if (series.empty() || series[0].trace == nullptr ||
      series[0].trace->rows() == 0)
    throw InvalidArgument("plot needs at least one non-empty trace");

  const double width = 980, height = 520;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << px(width / 2)
      << "\" y=\"24\" font-size=\"15\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\" fill=\"#111\">"
      << title << "</text>\n";

  // ---------------------------------------------------------------- plane
  Frame plane;
  plane.px_lo = 60;
  plane.px_hi = 470;
  plane.py_lo = 50;
  plane.py_hi = 460;
  {
    double x_lo = setpoint.size() > 0 ? setpoint[0] : 0.0;
    double x_hi = x_lo, y_lo = setpoint.size() > 1 ? setpoint[1] : 0.0,
           y_hi = y_lo;
    for (const PlotSeries& s : series) {
      if (!s.trace || s.trace->rows() == 0) continue;
      x_lo = std::min(x_lo, s.trace->states.col(0).minCoeff());
      x_hi = std::max(x_hi, s.trace->states.col(0).maxCoeff());
      y_lo = std::min(y_lo, s.trace->states.col(1).minCoeff());
      y_hi = std::max(y_hi, s.trace->states.col(1).maxCoeff());
    }
    pad_window(x_lo, x_hi, 0.12);
    pad_window(y_lo, y_hi, 0.12);
    // Equal scale on both axes so shapes are faithful.
    const double sx = (plane.px_hi - plane.px_lo) / (x_hi - x_lo);
    const double sy = (plane.py_hi - plane.py_lo) / (y_hi - y_lo);
    if (sx < sy) {
      const double grow = 0.5 * ((plane.py_hi - plane.py_lo) / sx -
                                 (y_hi - y_lo));
      y_lo -= grow;
      y_hi += grow;
    } else {
      const double grow = 0.5 * ((plane.px_hi - plane.px_lo) / sy -
                                 (x_hi - x_lo));
      x_lo -= grow;
      x_hi += grow;
    }
    plane.x_lo = x_lo;
    plane.x_hi = x_hi;
    plane.y_lo = y_lo;
    plane.y_hi = y_hi;
  }
  draw_axes(svg, plane, "x1 [m]", "x2 [m]");
  draw_x_ticks(svg, plane, 5);
  for (int i = 0; i <= 5; ++i)
    draw_y_tick(svg, plane, plane.y_lo + (plane.y_hi - plane.y_lo) * i / 5,
                tick_label(plane.y_lo + (plane.y_hi - plane.y_lo) * i / 5));

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    if (!s.trace || s.trace->rows() == 0) continue;
    const std::string color =
        s.color.empty() ? kPalette[si % 4] : s.color;
    std::string pts;
    for (int k = 0; k < s.trace->rows(); ++k) {
      pts += px(plane.map_x(s.trace->states(k, 0))) + "," +
             px(plane.map_y(s.trace->states(k, 1))) + " ";
    }
    draw_polyline(svg, pts, color, si == 0 ? 1.8 : 1.4);
  }

  // Heading glyphs along the first trace (triangle pointing along x3).
  {
    const ClosedLoopTrace& tr = *series[0].trace;
    const int glyphs = std::min(9, tr.rows());
    const double size = 9.0;
    for (int gi = 0; gi < glyphs; ++gi) {
      const int k = gi * (tr.rows() - 1) / std::max(1, glyphs - 1);
      const double cx = plane.map_x(tr.states(k, 0));
      const double cy = plane.map_y(tr.states(k, 1));
      const double th = tr.states.cols() > 2 ? tr.states(k, 2) : 0.0;
      const double c = std::cos(th), sn = std::sin(th);
      // Pixel y grows downward, so the heading flips sign there.
      auto ptx = [&](double ax, double ay) { return cx + ax * c - ay * sn; };
      auto pty = [&](double ax, double ay) { return cy - ax * sn - ay * c; };
      svg << "<polygon fill=\"" << (series[0].color.empty()
                                        ? kPalette[0]
                                        : series[0].color)
          << "\" fill-opacity=\"0.45\" points=\""
          << px(ptx(size, 0)) << "," << px(pty(size, 0)) << " "
          << px(ptx(-0.5 * size, 0.38 * size)) << ","
          << px(pty(-0.5 * size, 0.38 * size)) << " "
          << px(ptx(-0.5 * size, -0.38 * size)) << ","
          << px(pty(-0.5 * size, -0.38 * size)) << "\"/>\n";
    }
  }

  // Setpoint cross and start dot.
  if (setpoint.size() >= 2) {
    const double cx = plane.map_x(setpoint[0]);
    const double cy = plane.map_y(setpoint[1]);
    svg << "<line x1=\"" << px(cx - 6) << "\" y1=\"" << px(cy) << "\" x2=\""
        << px(cx + 6) << "\" y2=\"" << px(cy)
        << "\" stroke=\"#111\" stroke-width=\"1.6\"/>\n";
    svg << "<line x1=\"" << px(cx) << "\" y1=\"" << px(cy - 6) << "\" x2=\""
        << px(cx) << "\" y2=\"" << px(cy + 6)
        << "\" stroke=\"#111\" stroke-width=\"1.6\"/>\n";
  }
  {
    const ClosedLoopTrace& tr = *series[0].trace;
    svg << "<circle cx=\"" << px(plane.map_x(tr.states(0, 0))) << "\" cy=\""
        << px(plane.map_y(tr.states(0, 1)))
        << "\" r=\"3.5\" fill=\"#111\"/>\n";
  }

  // ------------------------------------------------------- value function
  Frame vf;
  vf.px_lo = 560;
  vf.px_hi = 940;
  vf.py_lo = 50;
  vf.py_hi = 460;
  {
    double t_hi = 1.0, lg_lo = 0.0, lg_hi = 1.0;
    double min_pos = 1e300, max_pos = 0.0;
    for (const PlotSeries& s : series) {
      if (!s.trace || s.trace->rows() == 0) continue;
      t_hi = std::max(t_hi, s.trace->times.back());
      for (double v : s.trace->value) {
        if (v > 0.0) {
          min_pos = std::min(min_pos, v);
          max_pos = std::max(max_pos, v);
        }
      }
    }
    if (max_pos <= 0.0) {
      min_pos = 1e-16;
      max_pos = 1.0;
    }
    lg_lo = std::floor(std::log10(min_pos));
    lg_hi = std::ceil(std::log10(max_pos));
    if (lg_hi - lg_lo < 1.0) lg_hi = lg_lo + 1.0;
    vf.x_lo = 0.0;
    vf.x_hi = t_hi;
    vf.y_lo = lg_lo;
    vf.y_hi = lg_hi;
  }
  draw_axes(svg, vf, "t [s]", "value function V(t)");
  draw_x_ticks(svg, vf, 5);
  {
    const int decades = static_cast<int>(vf.y_hi - vf.y_lo);
    const int step = std::max(1, (decades + 6) / 7);
    for (int e = static_cast<int>(vf.y_lo); e <= static_cast<int>(vf.y_hi);
         e += step) {
      char lab[16];
      std::snprintf(lab, sizeof(lab), "1e%d", e);
      draw_y_tick(svg, vf, static_cast<double>(e), lab);
    }
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    if (!s.trace || s.trace->rows() == 0) continue;
    const std::string color =
        s.color.empty() ? kPalette[si % 4] : s.color;
    std::string pts;
    for (int k = 0; k < s.trace->rows(); ++k) {
      const double v = s.trace->value[k];
      const double lg =
          std::log10(std::max(v, std::pow(10.0, vf.y_lo)));
      pts += px(vf.map_x(s.trace->times[k])) + "," +
             px(vf.map_y(std::clamp(lg, vf.y_lo, vf.y_hi))) + " ";
    }
    draw_polyline(svg, pts, color, 1.8);
    // Legend.
    const double ly = 64 + 18 * si;
    svg << "<line x1=\"" << px(vf.px_lo + 12) << "\" y1=\"" << px(ly)
        << "\" x2=\"" << px(vf.px_lo + 34) << "\" y2=\"" << px(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << px(vf.px_lo + 40) << "\" y=\"" << px(ly + 4)
        << "\" font-size=\"11\" fill=\"#222\">"
        << (s.label.empty() ? ("series " + std::to_string(si + 1)) : s.label)
        << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace nhmpc
