#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gvf3d/scenario.hpp"

namespace gvf3d {

View parse_view(std::string_view name) {
  if (name == "xy") return View::XY;
  if (name == "xz") return View::XZ;
  if (name == "yz") return View::YZ;
  if (name == "iso") return View::Iso;
  throw std::invalid_argument("unknown view '" + std::string(name) + "' (expected xy, xz, yz or iso)");
}

const char* to_string(View v) {
  switch (v) {
    case View::XY: return "xy";
    case View::XZ: return "xz";
    case View::YZ: return "yz";
    case View::Iso: return "iso";
  }
  return "iso";
}

namespace {

constexpr double kWidth = 640, kHeight = 480, kMargin = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vec2 project(const Vec3& p, View view) {
  switch (view) {
    case View::XY: return Vec2(p.x(), p.y());
    case View::XZ: return Vec2(p.x(), p.z());
    case View::YZ: return Vec2(p.y(), p.z());
    case View::Iso: return Vec2((p.x() - p.y()) * std::sqrt(3.0) / 2.0, p.z() - (p.x() + p.y()) / 2.0);
  }
  return Vec2::Zero();
}

const char* axis_names(View view) {
  switch (view) {
    case View::XY: return "xy";
    case View::XZ: return "xz";
    case View::YZ: return "yz";
    case View::Iso: return "  ";
  }
  return "  ";
}

struct Frame {
  double x0, x1, y0, y1;
  double sx(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double sy(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

void pad(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void header(std::ostringstream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
      << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << num(f.sx(x)) << "\" y=\"" << num(kHeight - kMargin + 16)
        << "\" text-anchor=\"middle\">" << label(x) << "</text>\n";
    out << "<text x=\"" << num(kMargin - 6) << "\" y=\"" << num(f.sy(y) + 4) << "\" text-anchor=\"end\">" << label(y)
        << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kHeight / 2 << ")\">" << ylabel << "</text>\n";
}

void polyline(std::ostringstream& out, const std::vector<Vec2>& pts, const Frame& f, const char* color,
              const char* extra = "") {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << extra << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) out << (i ? " " : "") << num(f.sx(pts[i].x())) << "," << num(f.sy(pts[i].y()));
  out << "\"/>\n";
}

}  // namespace

std::string plot_trajectory_svg(const Trajectory& traj, View view, const std::vector<Vec3>& path_points) {
  if (traj.samples.empty()) throw std::runtime_error("no samples");
  std::vector<Vec2> pts, path;
  for (const auto& s : traj.samples) pts.push_back(project(s.position, view));
  for (const auto& p : path_points) path.push_back(project(p, view));

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto* set : {&pts, &path})
    for (const Vec2& p : *set) {
      if (!p.allFinite()) continue;
      x0 = std::min(x0, p.x());
      x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y());
      y1 = std::max(y1, p.y());
    }
  pad(x0, x1);
  pad(y0, y1);
  // Equal scale on both axes.
  const double sx = (x1 - x0) / (kWidth - 2 * kMargin), sy = (y1 - y0) / (kHeight - 2 * kMargin);
  if (sx > sy) {
    const double c = 0.5 * (y0 + y1), h = 0.5 * sx * (kHeight - 2 * kMargin);
    y0 = c - h;
    y1 = c + h;
  } else {
    const double c = 0.5 * (x0 + x1), h = 0.5 * sy * (kWidth - 2 * kMargin);
    x0 = c - h;
    x1 = c + h;
  }
  const Frame f{x0, x1, y0, y1};

  std::ostringstream out;
  header(out, std::string("trajectory (") + to_string(view) + " projection)");
  const char* names = axis_names(view);
  axes(out, f, view == View::Iso ? "(x - y) cos 30" : std::string(1, names[0]),
       view == View::Iso ? "z - (x + y) / 2" : std::string(1, names[1]));
  if (!path.empty()) polyline(out, path, f, "#888888", " stroke-dasharray=\"6 4\"");
  polyline(out, pts, f, "#1f77b4");
  out << "<circle cx=\"" << num(f.sx(pts.front().x())) << "\" cy=\"" << num(f.sy(pts.front().y()))
      << "\" r=\"4\" fill=\"#2ca02c\"/>\n";
  out << "<circle cx=\"" << num(f.sx(pts.back().x())) << "\" cy=\"" << num(f.sy(pts.back().y()))
      << "\" r=\"4\" fill=\"#d62728\"/>\n";
  out << "</svg>\n";
  return out.str();
}

std::string plot_error_svg(const Trajectory& traj) {
  if (traj.samples.empty()) throw std::runtime_error("no samples");
  std::vector<Vec2> e1, e2, en;
  double y0 = 0.0, y1 = 0.0;
  for (const auto& s : traj.samples) {
    e1.emplace_back(s.t, s.e.x());
    e2.emplace_back(s.t, s.e.y());
    en.emplace_back(s.t, s.e_norm);
    for (double v : {s.e.x(), s.e.y(), s.e_norm})
      if (std::isfinite(v)) {
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
  }
  double x0 = traj.samples.front().t, x1 = traj.samples.back().t;
  if (!(x1 > x0)) x1 = x0 + 1.0;
  pad(y0, y1);
  const Frame f{x0, x1, y0, y1};

  std::ostringstream out;
  header(out, "path-following error");
  axes(out, f, "t", "error");
  polyline(out, e1, f, "#1f77b4");
  polyline(out, e2, f, "#ff7f0e");
  polyline(out, en, f, "#000000", " stroke-dasharray=\"4 3\"");
  const char* names[] = {"e1", "e2", "|e|"};
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#000000"};
  for (int i = 0; i < 3; ++i) {
    const double y = kMargin + 16 + 16 * i;
    out << "<line x1=\"" << kWidth - kMargin - 70 << "\" y1=\"" << y - 4 << "\" x2=\"" << kWidth - kMargin - 50
        << "\" y2=\"" << y - 4 << "\" stroke=\"" << colors[i] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kMargin - 44 << "\" y=\"" << y << "\">" << names[i] << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gvf3d
