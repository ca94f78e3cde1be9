#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvf3d/dynamics.hpp"

namespace gvf3d {

namespace {

const std::vector<std::string> kFlowColumns{"t", "x", "y", "z", "e1", "e2", "e_norm", "V", "nke_norm"};
const std::vector<std::string> kAircraftColumns{"t",  "x",  "y",      "z", "theta",    "s",
                                                "e1", "e2", "e_norm", "V", "nke_norm", "beta"};

std::string format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  if (s == "nan" || s == "-nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error("csv row " + std::to_string(row) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<std::string> csv_columns(SystemKind kind) {
  return kind == SystemKind::Aircraft ? kAircraftColumns : kFlowColumns;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const bool aircraft = traj.system == SystemKind::Aircraft;
  const auto cols = csv_columns(traj.system);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const TrajectorySample& s : traj.samples) {
    std::vector<double> row{s.t, s.position.x(), s.position.y(), s.position.z()};
    if (aircraft) {
      row.push_back(s.theta);
      row.push_back(s.airspeed);
    }
    row.insert(row.end(), {s.e.x(), s.e.y(), s.e_norm, s.V, s.nke_norm});
    if (aircraft) row.push_back(s.beta);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format(row[i]);
    out << '\n';
  }
}

Trajectory read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: no samples");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  Trajectory traj;
  if (header == kAircraftColumns) {
    traj.system = SystemKind::Aircraft;
  } else if (header == kFlowColumns) {
    traj.system = SystemKind::Raw;
  } else {
    throw std::runtime_error("csv: unrecognized header '" + line + "'");
  }
  const bool aircraft = traj.system == SystemKind::Aircraft;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw std::runtime_error("csv row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(cells.size()));
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(parse_double(c, row));
    TrajectorySample s;
    std::size_t i = 0;
    s.t = v[i++];
    s.position = Vec3(v[i], v[i + 1], v[i + 2]);
    i += 3;
    if (aircraft) {
      s.theta = v[i++];
      s.airspeed = v[i++];
    }
    s.e = Vec2(v[i], v[i + 1]);
    i += 2;
    s.e_norm = v[i++];
    s.V = v[i++];
    s.nke_norm = v[i++];
    if (aircraft) s.beta = v[i++];
    if (!traj.samples.empty() && !(s.t > traj.samples.back().t))
      throw std::runtime_error("csv row " + std::to_string(row) + ": time not increasing");
    traj.samples.push_back(s);
  }
  if (traj.samples.empty()) throw std::runtime_error("csv: no samples");
  traj.events.push_back(Event{EventKind::Completed, traj.samples.back().t, traj.samples.back().position, ""});
  return traj;
}

}  // namespace gvf3d
