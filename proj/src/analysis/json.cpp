#include <cmath>

#include "gvf3d/analysis.hpp"

namespace gvf3d {

namespace {

nlohmann::json vec(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

// JSON has no infinity; an unbounded estimate is written as null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const SingularSearch& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const SingularPoint& p : s.points) {
    nlohmann::json basin = nlohmann::json::array();
    for (const Vec3& b : p.basin_sample) basin.push_back(vec(b));
    points.push_back({{"location", vec(p.location)},
                      {"residual", p.residual},
                      {"tau_norm", p.tau_norm},
                      {"basin_sample", basin}});
  }
  return {{"points", points}, {"seeds", s.seeds}, {"non_converged", s.non_converged}};
}

nlohmann::json to_json(const AssumptionReport& r) {
  nlohmann::json shells = nlohmann::json::array();
  for (std::size_t i = 0; i < r.kappas.size(); ++i)
    shells.push_back({{"kappa", r.kappas[i]},
                      {"inf_error", number(r.inf_error[i])},
                      {"inf_nke", number(r.inf_nke[i])},
                      {"samples", r.shell_counts[i]}});
  return {{"est_dist_P_C", number(r.est_dist_P_C)},
          {"c_empty", std::isinf(r.est_dist_P_C)},
          {"shells", shells},
          {"box", {{"lo", vec(r.box.lo)}, {"hi", vec(r.box.hi)}}},
          {"n_samples", r.n_samples},
          {"low_confidence", r.low_confidence},
          {"label", r.label}};
}

nlohmann::json to_json(const RateFit& f) {
  return {{"fitted_rate", f.fitted_rate}, {"lambda", f.lambda}, {"theoretical_rate", f.theoretical_rate},
          {"c", f.c},                     {"e0", f.e0},         {"violations", f.violations},
          {"window", f.window}};
}

nlohmann::json to_json(const IssSweep& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const IssEntry& e : s.entries)
    entries.push_back({{"amplitude", e.amplitude},
                       {"bound", e.bound},
                       {"diverged", e.diverged},
                       {"termination", e.termination}});
  return {{"entries", entries}, {"direction", vec(s.direction)}, {"monotone", s.monotone}};
}

}  // namespace gvf3d
