#ifndef CORRME_COLLISION_HPP
#define CORRME_COLLISION_HPP

// Exact discrete simulation of the multipartite collision model.
//
// Carriers S_0..S_{M-1} collide in order with each fresh sub-environment E_j
// (prepared in eta). Every collision is U = exp(-i g dt H) with
// H = sum_l A_l (x) B_l, and the sub-environment undergoes the relaxation
// channel after each collision. Indices are 0-based: carrier c, collision k
// (the collision with E_{k+1}, happening at time tau_{k+1} = (k+1) * interval).

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corrme/channels.hpp"
#include "corrme/operator.hpp"
#include "corrme/trajectory.hpp"

namespace corrme {

using TermList = std::vector<Operator>;

/// Coupling operators A (carrier side) and B (environment side) per carrier.
/// Carrier operators may additionally be indexed by collision.
struct CouplingSpec {
  std::vector<TermList> carrier_ops;  // [carrier][term]
  std::vector<TermList> env_ops;      // [carrier][term]
  std::vector<std::vector<TermList>> indexed_carrier_ops;  // [collision][carrier][term]

  /// Every carrier couples through the same environment operators.
  static CouplingSpec uniform(std::vector<TermList> a, const TermList& b) {
    CouplingSpec s;
    s.env_ops.assign(a.size(), b);
    s.carrier_ops = std::move(a);
    return s;
  }

  std::size_t carriers() const { return carrier_ops.size(); }
  bool collision_indexed() const { return !indexed_carrier_ops.empty(); }

  bool env_uniform() const {
    for (const auto& terms : env_ops) {
      if (terms.size() != env_ops.front().size()) return false;
      for (std::size_t l = 0; l < terms.size(); ++l)
        if (terms[l].matrix() != env_ops.front()[l].matrix()) return false;
    }
    return true;
  }

  const TermList& carrier_terms(std::size_t carrier, std::size_t collision = 0) const {
    if (carrier >= carriers())
      throw std::invalid_argument("carrier index " + std::to_string(carrier) + " out of range");
    if (!collision_indexed()) return carrier_ops[carrier];
    if (collision >= indexed_carrier_ops.size())
      throw std::invalid_argument("collision index " + std::to_string(collision) +
                                  " beyond the indexed couplings (" +
                                  std::to_string(indexed_carrier_ops.size()) + ")");
    return indexed_carrier_ops[collision][carrier];
  }
  const TermList& env_terms(std::size_t carrier) const {
    if (carrier >= env_ops.size())
      throw std::invalid_argument("carrier index " + std::to_string(carrier) + " out of range");
    return env_ops[carrier];
  }

  /// H = sum_l A_l (x) B_l on carrier (x) environment.
  Operator hamiltonian(std::size_t carrier, std::size_t collision = 0) const {
    const auto& a = carrier_terms(carrier, collision);
    const auto& b = env_terms(carrier);
    Operator h = Operator::zero({a.front().side(), b.front().side()});
    for (std::size_t l = 0; l < a.size(); ++l) h += kron(a[l], b[l]);
    return h;
  }

  void validate(const Dims& carrier_dims, std::size_t env_dim,
                double tol = kDefaultTolerance) const {
    if (carriers() != carrier_dims.size() || env_ops.size() != carrier_dims.size())
      throw std::invalid_argument("CouplingSpec: carrier count does not match carrier dims");
    auto check_terms = [&](const TermList& a, const TermList& b, std::size_t c) {
      if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("CouplingSpec: carrier " + std::to_string(c) +
                                    " needs equal, nonzero numbers of A and B terms");
      for (std::size_t l = 0; l < a.size(); ++l) {
        if (a[l].side() != carrier_dims[c] || b[l].side() != env_dim)
          throw std::invalid_argument("CouplingSpec: term " + std::to_string(l) +
                                      " of carrier " + std::to_string(c) +
                                      " has the wrong side");
        if (!a[l].is_hermitian(tol) || !b[l].is_hermitian(tol))
          throw std::invalid_argument("CouplingSpec: coupling operators must be Hermitian");
        if (max_abs(a[l]) == 0.0 || max_abs(b[l]) == 0.0)
          throw std::invalid_argument("CouplingSpec: coupling operators must be nonzero");
      }
    };
    for (std::size_t c = 0; c < carriers(); ++c) check_terms(carrier_ops[c], env_ops[c], c);
    for (const auto& per_collision : indexed_carrier_ops) {
      if (per_collision.size() != carriers())
        throw std::invalid_argument("CouplingSpec: indexed couplings have wrong carrier count");
      for (std::size_t c = 0; c < carriers(); ++c) check_terms(per_collision[c], env_ops[c], c);
    }
  }
};

/// Piecewise-constant Hamiltonian: segment k holds on [starts[k], starts[k+1]),
/// the last segment extends indefinitely. starts[0] must be 0.
struct HamiltonianSchedule {
  std::vector<double> starts;
  std::vector<Operator> hamiltonians;

  static HamiltonianSchedule constant(Operator h) { return {{0.0}, {std::move(h)}}; }

  void validate() const {
    if (starts.empty() || starts.size() != hamiltonians.size() || starts.front() != 0.0)
      throw std::invalid_argument("HamiltonianSchedule: malformed segments");
    for (std::size_t k = 1; k < starts.size(); ++k)
      if (!(starts[k] > starts[k - 1]))
        throw std::invalid_argument("HamiltonianSchedule: segment starts must increase");
    for (const auto& h : hamiltonians)
      if (!h.is_hermitian())
        throw std::invalid_argument("HamiltonianSchedule: Hamiltonians must be Hermitian");
  }

  /// V(t1, t0): ordered product of segment propagators, later times on the left.
  Operator propagator(double t1, double t0) const {
    if (t1 < t0) throw std::invalid_argument("propagator: t1 < t0");
    Operator v = Operator::identity(hamiltonians.front().dims());
    for (std::size_t k = 0; k < starts.size(); ++k) {
      const double lo = std::max(t0, starts[k]);
      const double hi = k + 1 < starts.size() ? std::min(t1, starts[k + 1]) : t1;
      if (hi > lo) v = expm_hermitian(hamiltonians[k], hi - lo) * v;
    }
    return v;
  }
};

struct CollisionConfig {
  Dims carrier_dims;
  std::size_t env_dim = 2;
  double g = 0.0;   // coupling strength, 1/time
  double dt = 0.0;  // collision duration
  std::size_t n_collisions = 0;
  DensityMatrix eta;
  KrausChannel channel;
  CouplingSpec couplings;
  /// Optional free Hamiltonian per carrier; empty vector means none at all.
  std::vector<std::optional<HamiltonianSchedule>> local_hamiltonians;
  /// Spacing of collision times; 0 means dt.
  double collision_interval = 0.0;

  std::size_t carriers() const { return carrier_dims.size(); }
  Dims joint_dims() const {
    Dims d = carrier_dims;
    d.push_back(env_dim);
    return d;
  }
  double interval() const { return collision_interval > 0.0 ? collision_interval : dt; }
  /// Time of the n-th collision (n >= 1); tau_0 = 0.
  double collision_time(std::size_t n) const { return static_cast<double>(n) * interval(); }

  bool has_free_evolution() const {
    for (const auto& h : local_hamiltonians)
      if (h) return true;
    return false;
  }

  void validate() const {
    if (carrier_dims.empty()) throw std::invalid_argument("CollisionConfig: no carriers");
    if (!(g >= 0.0)) throw std::invalid_argument("CollisionConfig: g must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("CollisionConfig: dt must be > 0");
    if (eta.side() != env_dim)
      throw std::invalid_argument("CollisionConfig: eta side differs from env dim");
    if (channel.side() != env_dim)
      throw std::invalid_argument("CollisionConfig: channel side differs from env dim");
    couplings.validate(carrier_dims, env_dim);
    if (!local_hamiltonians.empty()) {
      if (local_hamiltonians.size() != carriers())
        throw std::invalid_argument("CollisionConfig: one local schedule slot per carrier");
      for (std::size_t c = 0; c < carriers(); ++c)
        if (local_hamiltonians[c]) {
          local_hamiltonians[c]->validate();
          if (local_hamiltonians[c]->hamiltonians.front().side() != carrier_dims[c])
            throw std::invalid_argument("CollisionConfig: local Hamiltonian side mismatch");
        }
    }
  }
};

// ---------------------------------------------------------------------------

/// exp(-i g dt H) for the given carrier and collision.
inline Operator collision_unitary(const CollisionConfig& cfg, std::size_t carrier,
                                  std::size_t collision = 0) {
  if (carrier >= cfg.carriers())
    throw std::invalid_argument("collision_unitary: carrier index out of range");
  return expm_hermitian(cfg.couplings.hamiltonian(carrier, collision), cfg.g * cfg.dt);
}

struct AssumptionReport {
  double max_abs_mean = 0.0;  // max |Tr(B M^p(eta))|
  double tolerance = 0.0;
  bool pass = true;
  std::size_t worst_carrier = 0;
  std::size_t worst_term = 0;
  std::size_t worst_power = 0;
};

/// Checks that the environment coupling operators have zero mean in every
/// relaxed environment state the carriers will meet. With uniform B this covers
/// channel powers 0..m_max; with carrier-dependent B, carrier c is checked
/// against M^c(eta) for c < min(M, m_max).
inline AssumptionReport check_assumption(const CollisionConfig& cfg, std::size_t m_max,
                                         double tol = kDefaultTolerance) {
  if (m_max < 1) throw std::invalid_argument("check_assumption: m_max must be >= 1");
  AssumptionReport r;
  r.tolerance = tol;
  auto consider = [&](double v, std::size_t c, std::size_t l, std::size_t p) {
    if (v > r.max_abs_mean) r = {v, tol, true, c, l, p};
  };
  if (cfg.couplings.env_uniform()) {
    Operator state = cfg.eta.op();
    const auto& b = cfg.couplings.env_terms(0);
    for (std::size_t p = 0; p <= m_max; ++p) {
      for (std::size_t l = 0; l < b.size(); ++l)
        consider(std::abs((b[l] * state).trace()), 0, l, p);
      state = cfg.channel.apply(state);
    }
  } else {
    Operator state = cfg.eta.op();
    const std::size_t last = std::min(cfg.carriers(), m_max);
    for (std::size_t c = 0; c < last; ++c) {
      const auto& b = cfg.couplings.env_terms(c);
      for (std::size_t l = 0; l < b.size(); ++l)
        consider(std::abs((b[l] * state).trace()), c, l, c);
      state = cfg.channel.apply(state);
    }
  }
  r.tolerance = tol;
  r.pass = r.max_abs_mean <= tol;
  return r;
}

/// The column superoperator for one sub-environment, acting on
/// carriers (x) environment (environment is the last factor).
class ColumnMap {
 public:
  ColumnMap(const CollisionConfig& cfg, std::size_t collision)
      : joint_dims_(cfg.joint_dims()), carriers_(cfg.carriers()) {
    const std::size_t env = carriers_;
    for (std::size_t c = 0; c < carriers_; ++c)
      unitaries_.push_back(embed(collision_unitary(cfg, c, collision), {c, env}, joint_dims_).matrix());
    for (const auto& k : cfg.channel.kraus())
      kraus_.push_back(embed(k, {env}, joint_dims_).matrix());
    eta_ = cfg.eta.op();
  }

  const Dims& joint_dims() const { return joint_dims_; }

  /// Collision with each carrier in order, each followed by the relaxation channel.
  Operator apply_joint(const Operator& joint) const {
    if (joint.side() != product(joint_dims_))
      throw std::invalid_argument("ColumnMap: joint operator has side " +
                                  std::to_string(joint.side()) + ", expected " +
                                  std::to_string(product(joint_dims_)));
    Matrix r = joint.matrix();
    Matrix tmp;
    for (const auto& u : unitaries_) {
      tmp.noalias() = u * r;
      r.noalias() = tmp * u.adjoint();
      relax(r);
    }
    return {joint_dims_, std::move(r)};
  }

  /// rho -> Tr_E[C(rho (x) eta)].
  Operator step(const Operator& rho) const {
    const Operator out = apply_joint(kron(rho.with_dims(carrier_dims()), eta_));
    return partial_trace(out, carrier_factors());
  }

  Dims carrier_dims() const { return Dims(joint_dims_.begin(), joint_dims_.end() - 1); }
  std::vector<std::size_t> carrier_factors() const {
    std::vector<std::size_t> f(carriers_);
    for (std::size_t c = 0; c < carriers_; ++c) f[c] = c;
    return f;
  }

 private:
  void relax(Matrix& r) const {
    if (kraus_.size() == 1) {
      Matrix tmp = kraus_[0] * r;
      r.noalias() = tmp * kraus_[0].adjoint();
      return;
    }
    Matrix out = Matrix::Zero(r.rows(), r.cols());
    for (const auto& k : kraus_) out.noalias() += k * r * k.adjoint();
    r = std::move(out);
  }

  Dims joint_dims_;
  std::size_t carriers_;
  std::vector<Matrix> unitaries_;
  std::vector<Matrix> kraus_;
  Operator eta_;
};

/// One column step on a joint state of all carriers plus one fresh
/// sub-environment; returns the carrier state.
inline DensityMatrix evolve_column_step(const Operator& joint, const CollisionConfig& cfg,
                                        std::size_t collision = 0) {
  if (joint.dims() != cfg.joint_dims())
    throw std::invalid_argument("evolve_column_step: joint dims " + dims_string(joint.dims()) +
                                " expected " + dims_string(cfg.joint_dims()));
  const ColumnMap col(cfg, collision);
  return DensityMatrix(partial_trace(col.apply_joint(joint), col.carrier_factors()));
}

/// Joint free propagator V_S(t1, t0) over all carriers.
inline Operator free_propagator(const CollisionConfig& cfg, double t1, double t0) {
  std::vector<Operator> factors;
  for (std::size_t c = 0; c < cfg.carriers(); ++c) {
    if (c < cfg.local_hamiltonians.size() && cfg.local_hamiltonians[c])
      factors.push_back(cfg.local_hamiltonians[c]->propagator(t1, t0));
    else
      factors.push_back(Operator::identity({cfg.carrier_dims[c]}));
  }
  return kron(factors);
}

/// Iterates the column recursion n_collisions times. With local Hamiltonians
/// the carriers evolve freely between collisions (lab frame). Samples are taken
/// every record_stride steps and always at the final step; t_n = n * interval.
inline Trajectory simulate(const CollisionConfig& cfg, const DensityMatrix& rho0,
                           const std::vector<Observable>& observables = {},
                           std::size_t record_stride = 1) {
  cfg.validate();
  if (rho0.dims() != cfg.carrier_dims)
    throw std::invalid_argument("simulate: rho0 dims " + dims_string(rho0.dims()) +
                                " expected " + dims_string(cfg.carrier_dims));
  if (record_stride == 0) record_stride = 1;
  Trajectory traj;
  traj.description = "collision model";
  traj.step_size = cfg.interval();
  for (const auto& o : observables) traj.observable_names.push_back(o.name);

  auto record = [&](std::size_t n, const Operator& rho) {
    auto s = make_sample(n, cfg.collision_time(n), rho, observables);
    if (std::abs(s.trace - 1.0) > 1e-8 || s.min_eigenvalue < -1e-8)
      throw PropertyViolation("simulate: state invalid at step " + std::to_string(n) +
                              " (trace " + std::to_string(s.trace) + ", min eigenvalue " +
                              std::to_string(s.min_eigenvalue) + ")");
    traj.samples.push_back(std::move(s));
  };

  Operator rho = rho0.op();
  record(0, rho);
  std::optional<ColumnMap> uniform_map;
  if (!cfg.couplings.collision_indexed()) uniform_map.emplace(cfg, 0);
  const bool free = cfg.has_free_evolution();
  for (std::size_t k = 0; k < cfg.n_collisions; ++k) {
    if (free) {
      const Operator v = free_propagator(cfg, cfg.collision_time(k + 1), cfg.collision_time(k));
      rho = v * rho * v.adjoint();
    }
    rho = uniform_map ? uniform_map->step(rho) : ColumnMap(cfg, k).step(rho);
    const std::size_t n = k + 1;
    if (n % record_stride == 0 || n == cfg.n_collisions) record(n, rho);
  }
  return traj;
}

/// Row decomposition: each carrier in turn collides with all n sub-environments,
/// then every sub-environment relaxes. Only feasible for tiny instances.
inline constexpr std::size_t kRowPathMaxSide = 256;

inline DensityMatrix evolve_row(const CollisionConfig& cfg, const DensityMatrix& rho0,
                                std::size_t n) {
  cfg.validate();
  if (cfg.has_free_evolution())
    throw std::invalid_argument("evolve_row: free evolution is only supported on the column path");
  Dims dims = cfg.carrier_dims;
  for (std::size_t j = 0; j < n; ++j) dims.push_back(cfg.env_dim);
  const std::size_t side = product(dims);
  if (side > kRowPathMaxSide)
    throw std::invalid_argument("evolve_row: joint side " + std::to_string(side) +
                                " exceeds the bound " + std::to_string(kRowPathMaxSide));
  const std::size_t m_count = cfg.carriers();
  Operator joint = rho0.op().with_dims(cfg.carrier_dims);
  for (std::size_t j = 0; j < n; ++j) joint = kron(joint, cfg.eta.op());

  std::vector<std::vector<Matrix>> env_kraus(n);
  for (std::size_t j = 0; j < n; ++j)
    for (const auto& k : cfg.channel.kraus())
      env_kraus[j].push_back(embed(k, {m_count + j}, dims).matrix());

  Matrix r = joint.matrix();
  for (std::size_t c = 0; c < m_count; ++c) {
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix u = embed(collision_unitary(cfg, c, j), {c, m_count + j}, dims).matrix();
      r = u * r * u.adjoint();
    }
    for (std::size_t j = 0; j < n; ++j) {
      Matrix out = Matrix::Zero(r.rows(), r.cols());
      for (const auto& k : env_kraus[j]) out.noalias() += k * r * k.adjoint();
      r = std::move(out);
    }
  }
  std::vector<std::size_t> keep(m_count);
  for (std::size_t c = 0; c < m_count; ++c) keep[c] = c;
  return DensityMatrix(partial_trace(Operator(dims, std::move(r)), keep));
}

/// Couplings in the interaction picture of the local free evolution:
/// A_bar(k) = V^dagger(tau_{k+1}, 0) A V(tau_{k+1}, 0) for collisions k < n_collisions.
inline CouplingSpec interaction_frame_couplings(const CollisionConfig& cfg) {
  if (!cfg.has_free_evolution())
    throw std::invalid_argument("interaction_frame_couplings: no local Hamiltonian schedule");
  CouplingSpec out;
  out.carrier_ops = cfg.couplings.carrier_ops;
  out.env_ops = cfg.couplings.env_ops;
  out.indexed_carrier_ops.resize(cfg.n_collisions);
  for (std::size_t k = 0; k < cfg.n_collisions; ++k) {
    auto& per_carrier = out.indexed_carrier_ops[k];
    per_carrier.resize(cfg.carriers());
    const double tau = cfg.collision_time(k + 1);
    for (std::size_t c = 0; c < cfg.carriers(); ++c) {
      const auto& a = cfg.couplings.carrier_terms(c, k);
      const bool has = c < cfg.local_hamiltonians.size() && cfg.local_hamiltonians[c];
      if (!has) {
        per_carrier[c] = a;
        continue;
      }
      const Operator v = cfg.local_hamiltonians[c]->propagator(tau, 0.0);
      for (const auto& op : a) per_carrier[c].push_back((v.adjoint() * op * v).hermitian_part());
    }
  }
  return out;
}

/// Maps a lab-frame carrier state after n collisions into the interaction frame.
inline Operator to_interaction_frame(const CollisionConfig& cfg, const Operator& rho_lab,
                                     std::size_t n) {
  const Operator v = free_propagator(cfg, cfg.collision_time(n), 0.0);
  return v.adjoint() * rho_lab.with_dims(cfg.carrier_dims) * v;
}

/// The same configuration expressed in the interaction frame: indexed couplings
/// and no free evolution.
inline CollisionConfig interaction_frame_config(const CollisionConfig& cfg) {
  CollisionConfig out = cfg;
  out.couplings = interaction_frame_couplings(cfg);
  out.local_hamiltonians.clear();
  return out;
}

}  // namespace corrme

#endif  // CORRME_COLLISION_HPP
