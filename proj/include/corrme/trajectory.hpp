#ifndef CORRME_TRAJECTORY_HPP
#define CORRME_TRAJECTORY_HPP

// Recorded time series of carrier states. The collision engine and the master
// equation integrator both produce this type, so their CSV/JSON files share
// one schema and can be diffed directly.
//
// CSV columns: step,t,<observable names...>,trace,min_eigenvalue

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "corrme/json_io.hpp"
#include "corrme/operator.hpp"

namespace corrme {

struct Observable {
  std::string name;
  Operator op;
};

/// Re Tr(rho O).
inline double expectation(const Operator& rho, const Operator& o) {
  return (rho.matrix().cwiseProduct(o.matrix().transpose())).sum().real();
}

struct TrajectorySample {
  std::size_t step = 0;
  double t = 0.0;
  Operator state;
  std::vector<double> observables;
  double trace = 1.0;
  double min_eigenvalue = 0.0;
};

inline TrajectorySample make_sample(std::size_t step, double t, const Operator& rho,
                                    const std::vector<Observable>& observables) {
  TrajectorySample s{step, t, rho, {}, rho.trace().real(), min_eigenvalue(rho)};
  s.observables.reserve(observables.size());
  for (const auto& o : observables) s.observables.push_back(expectation(rho, o.op));
  return s;
}

struct Trajectory {
  std::string description;
  double step_size = 0.0;
  std::vector<std::string> observable_names;
  std::vector<TrajectorySample> samples;

  const TrajectorySample& back() const { return samples.back(); }
};

namespace detail {
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "step,t";
  for (const auto& n : traj.observable_names) os << ',' << n;
  os << ",trace,min_eigenvalue\n";
  for (const auto& s : traj.samples) {
    os << s.step << ',' << detail::format_double(s.t);
    for (double v : s.observables) os << ',' << detail::format_double(v);
    os << ',' << detail::format_double(s.trace) << ','
       << detail::format_double(s.min_eigenvalue) << '\n';
  }
}

inline Json trajectory_to_json(const Trajectory& traj, bool include_states) {
  Json samples = Json::array();
  for (const auto& s : traj.samples) {
    Json js{{"step", s.step},
            {"t", s.t},
            {"observables", s.observables},
            {"trace", s.trace},
            {"min_eigenvalue", s.min_eigenvalue}};
    if (include_states) js["state"] = operator_to_json(s.state);
    samples.push_back(std::move(js));
  }
  return Json{{"description", traj.description},
              {"step_size", traj.step_size},
              {"observable_names", traj.observable_names},
              {"samples", std::move(samples)}};
}

}  // namespace corrme

#endif  // CORRME_TRAJECTORY_HPP
