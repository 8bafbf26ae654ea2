#ifndef CORRME_INTEGRATOR_HPP
#define CORRME_INTEGRATOR_HPP

// Fixed-step classical Runge-Kutta (order 4) integration of d rho/dt = G(rho)
// on column-vectorized density matrices. Generator schedules are piecewise
// constant and are sampled once per step, at its midpoint, so segment
// boundaries should lie on the step grid.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrme/operator.hpp"
#include "corrme/trajectory.hpp"

namespace corrme {

/// Piecewise-constant generator: generators[k] holds on [starts[k], starts[k+1]).
struct GeneratorSchedule {
  std::vector<double> starts;
  std::vector<Superoperator> generators;

  const Superoperator& at(double t) const {
    if (generators.empty() || starts.size() != generators.size())
      throw std::invalid_argument("GeneratorSchedule: malformed");
    std::size_t k = 0;
    while (k + 1 < starts.size() && t >= starts[k + 1]) ++k;
    return generators[k];
  }
};

namespace detail {

/// Invariant drift beyond this aborts the integration.
inline constexpr double kIntegratorAbort = 1e-6;

inline Trajectory integrate_impl(const std::function<const Superoperator&(double)>& gen_at,
                                 const Operator& rho0, double t_end, double dt,
                                 const std::vector<Observable>& observables,
                                 std::size_t record_stride, std::string description) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  if (!(dt <= t_end * (1.0 + 1e-12)))
    throw std::invalid_argument("integrate: dt must not exceed t_end");
  if (record_stride == 0) record_stride = 1;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  const Dims dims = rho0.dims();

  Trajectory traj;
  traj.description = std::move(description);
  traj.step_size = dt;
  for (const auto& o : observables) traj.observable_names.push_back(o.name);

  auto record = [&](std::size_t n, double t, const Operator& rho) {
    auto s = make_sample(n, t, rho, observables);
    if (s.min_eigenvalue < -kIntegratorAbort)
      throw PropertyViolation("integrate: negative eigenvalue " +
                              std::to_string(s.min_eigenvalue) + " at t=" + std::to_string(t));
    traj.samples.push_back(std::move(s));
  };

  Vector y = vec(rho0);
  record(0, 0.0, rho0);
  const auto n = static_cast<Eigen::Index>(product(dims));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Matrix& g = gen_at(t + 0.5 * dt).matrix();
    const Vector k1 = g * y;
    const Vector k2 = g * (y + 0.5 * dt * k1);
    const Vector k3 = g * (y + 0.5 * dt * k2);
    const Vector k4 = g * (y + dt * k3);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    Eigen::Map<Matrix> rho(y.data(), n, n);
    const Matrix sym = 0.5 * (rho + rho.adjoint());
    rho = sym;
    const double tr_err = std::abs(rho.trace() - Complex(1.0));
    if (tr_err > kIntegratorAbort)
      throw PropertyViolation("integrate: trace drifted by " + std::to_string(tr_err) +
                              " at step " + std::to_string(k + 1));
    const std::size_t step = k + 1;
    if (step % record_stride == 0 || step == steps)
      record(step, static_cast<double>(step) * dt, unvec(y, dims));
  }
  return traj;
}

}  // namespace detail

inline Trajectory integrate(const Superoperator& g, const Operator& rho0, double t_end,
                            double dt, const std::vector<Observable>& observables = {},
                            std::size_t record_stride = 1) {
  if (product(g.in_dims()) != rho0.side())
    throw std::invalid_argument("integrate: generator and state sizes differ");
  return detail::integrate_impl([&](double) -> const Superoperator& { return g; }, rho0,
                                t_end, dt, observables, record_stride, "master equation");
}

inline Trajectory integrate(const GeneratorSchedule& g, const Operator& rho0, double t_end,
                            double dt, const std::vector<Observable>& observables = {},
                            std::size_t record_stride = 1) {
  return detail::integrate_impl([&](double t) -> const Superoperator& { return g.at(t); },
                                rho0, t_end, dt, observables, record_stride,
                                "master equation (time-dependent)");
}

/// Partial trace applied to every sample. Observables are dropped because they
/// were defined on the full space.
inline Trajectory reduced_trajectory(const Trajectory& traj, const std::vector<std::size_t>& keep) {
  Trajectory out;
  out.description = traj.description + " (reduced)";
  out.step_size = traj.step_size;
  out.samples.reserve(traj.samples.size());
  for (const auto& s : traj.samples)
    out.samples.push_back(make_sample(s.step, s.t, partial_trace(s.state, keep), {}));
  return out;
}

}  // namespace corrme

#endif  // CORRME_INTEGRATOR_HPP
