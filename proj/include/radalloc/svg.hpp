#pragma once

#include "radalloc/cbba.hpp"
#include "radalloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace radalloc {

namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

// Renders one step of the world: radars as dots with their range circles,
// targets as triangles, main tracks in green, optional tracks in purple,
// and the bundle uncertainty ellipses outlined in yellow. Output is pure
// text, identical for identical states.
inline std::string svg_snapshot(const std::map<TargetId, Vec2>& truth,
                                const std::vector<RadarAgent>& agents) {
  constexpr double kSize = 800.0;
  constexpr double kMargin = 40.0;

  double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
  bool first = true;
  auto grow = [&](const Vec2& p, double pad) {
    if (first) {
      min_x = p.x() - pad;
      max_x = p.x() + pad;
      min_y = p.y() - pad;
      max_y = p.y() + pad;
      first = false;
      return;
    }
    min_x = std::min(min_x, p.x() - pad);
    max_x = std::max(max_x, p.x() + pad);
    min_y = std::min(min_y, p.y() - pad);
    max_y = std::max(max_y, p.y() + pad);
  };
  for (const auto& agent : agents) {
    grow(agent.config().params.position, agent.config().params.range_max);
  }
  for (const auto& [id, pos] : truth) grow(pos, 100.0);

  const double span = std::max(max_x - min_x, max_y - min_y);
  const double sx0 = 0.5 * (min_x + max_x) - 0.5 * span;
  const double sy0 = 0.5 * (min_y + max_y) - 0.5 * span;
  const double k = (kSize - 2.0 * kMargin) / span;
  auto px = [&](double x) { return kMargin + (x - sx0) * k; };
  auto py = [&](double y) { return kSize - kMargin - (y - sy0) * k; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
         "height=\"800\" viewBox=\"0 0 800 800\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\" "
         "stroke=\"black\"/>\n";
  out << "<line x1=\"" << detail::svg_num(kMargin) << "\" y1=\""
      << detail::svg_num(kSize - kMargin) << "\" x2=\""
      << detail::svg_num(kSize - kMargin) << "\" y2=\""
      << detail::svg_num(kSize - kMargin) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << detail::svg_num(kMargin) << "\" y1=\""
      << detail::svg_num(kSize - kMargin) << "\" x2=\""
      << detail::svg_num(kMargin) << "\" y2=\"" << detail::svg_num(kMargin)
      << "\" stroke=\"black\"/>\n";

  // Track lines under everything else: green for main, purple for optional.
  for (const auto& agent : agents) {
    const Vec2 rp = agent.config().params.position;
    auto draw_links = [&](const std::vector<TargetId>& bundle,
                          const char* color) {
      for (TargetId j : bundle) {
        auto it = truth.find(j);
        if (it == truth.end()) continue;
        out << "<line x1=\"" << detail::svg_num(px(rp.x())) << "\" y1=\""
            << detail::svg_num(py(rp.y())) << "\" x2=\""
            << detail::svg_num(px(it->second.x())) << "\" y2=\""
            << detail::svg_num(py(it->second.y())) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
      }
    };
    draw_links(agent.main_belief().bundle, "green");
    draw_links(agent.optional_belief().bundle, "purple");
  }

  // Uncertainty ellipses of the tracked targets.
  for (const auto& agent : agents) {
    for (TargetId j : agent.main_belief().bundle) {
      auto e = agent.candidate_ellipses().find(j);
      if (e == agent.candidate_ellipses().end()) continue;
      const auto axes = detail::symmetric_eigen(e->second.shape());
      const double rx = e->second.scale() * std::sqrt(axes.lambda_major) * k;
      const double ry = e->second.scale() * std::sqrt(axes.lambda_minor) * k;
      const double angle =
          -std::atan2(axes.major.y(), axes.major.x()) * 180.0 /
          std::numbers::pi;
      out << "<ellipse cx=\"0\" cy=\"0\" rx=\"" << detail::svg_num(rx)
          << "\" ry=\"" << detail::svg_num(ry)
          << "\" fill=\"none\" stroke=\"gold\" transform=\"translate("
          << detail::svg_num(px(e->second.center().x())) << ","
          << detail::svg_num(py(e->second.center().y())) << ") rotate("
          << detail::svg_num(angle) << ")\"/>\n";
    }
  }

  for (const auto& agent : agents) {
    const Vec2 rp = agent.config().params.position;
    out << "<circle cx=\"" << detail::svg_num(px(rp.x())) << "\" cy=\""
        << detail::svg_num(py(rp.y())) << "\" r=\""
        << detail::svg_num(agent.config().params.range_max * k)
        << "\" fill=\"none\" stroke=\"lightblue\"/>\n";
    out << "<circle cx=\"" << detail::svg_num(px(rp.x())) << "\" cy=\""
        << detail::svg_num(py(rp.y()))
        << "\" r=\"5\" fill=\"blue\"/>\n";
  }

  for (const auto& [id, pos] : truth) {
    const double cx = px(pos.x());
    const double cy = py(pos.y());
    out << "<polygon points=\"" << detail::svg_num(cx) << ","
        << detail::svg_num(cy - 6.0) << " " << detail::svg_num(cx - 5.0) << ","
        << detail::svg_num(cy + 5.0) << " " << detail::svg_num(cx + 5.0) << ","
        << detail::svg_num(cy + 5.0) << "\" fill=\"red\"/>\n";
  }

  out << "</svg>\n";
  return out.str();
}

inline void render_snapshot(const std::map<TargetId, Vec2>& truth,
                            const std::vector<RadarAgent>& agents,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write snapshot: " + path);
  }
  out << svg_snapshot(truth, agents);
}

}  // namespace radalloc
