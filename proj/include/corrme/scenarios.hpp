#ifndef CORRME_SCENARIOS_HPP
#define CORRME_SCENARIOS_HPP

// Scenario configuration, built-in scenarios and the front-end operations used
// by the command-line tool (simulate, generators, converge, verify).
//
// For every sweep entry n the collision parameters are derived, never given:
// dt = t_end / n first, then g = sqrt(gamma / dt), so g^2 dt = gamma.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <numbers>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corrme/channels.hpp"
#include "corrme/collision.hpp"
#include "corrme/generators.hpp"
#include "corrme/integrator.hpp"
#include "corrme/json_io.hpp"
#include "corrme/operator.hpp"
#include "corrme/perturbation.hpp"
#include "corrme/random.hpp"
#include "corrme/trajectory.hpp"

namespace corrme {

/// Malformed or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScenarioConfig {
  std::string name = "explicit";
  Dims carrier_dims;
  std::size_t env_dim = 2;
  CouplingSpec couplings;
  DensityMatrix eta;
  KrausChannel channel;
  DensityMatrix rho0;
  double gamma = 1.0;
  double t_end = 1.0;
  std::vector<std::size_t> sweep{100};
  std::optional<std::size_t> simulate_n;  // defaults to the last sweep entry
  std::vector<Observable> observables;
  std::size_t record_stride = 1;
  double me_dt = 1e-3;
  std::uint64_t seed = 1;
  std::vector<std::optional<HamiltonianSchedule>> local_hamiltonians;
  double collision_interval = 0.0;

  void validate() const {
    if (carrier_dims.empty()) throw ConfigError("scenario: no carriers");
    if (!(gamma > 0.0)) throw ConfigError("scenario: gamma must be > 0");
    if (!(t_end > 0.0)) throw ConfigError("scenario: t_end must be > 0");
    if (!(me_dt > 0.0)) throw ConfigError("scenario: me_dt must be > 0");
    if (sweep.empty()) throw ConfigError("scenario: empty sweep");
    for (auto n : sweep)
      if (n == 0) throw ConfigError("scenario: sweep entries must be >= 1");
    if (rho0.dims() != carrier_dims) throw ConfigError("scenario: rho0 dims do not match carriers");
    try {
      couplings.validate(carrier_dims, env_dim);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (eta.side() != env_dim || channel.side() != env_dim)
      throw ConfigError("scenario: eta/channel do not match env_dim");
    if (const auto cpt = validate_cpt(channel); !cpt.pass)
      throw ConfigError("scenario: channel is not trace preserving (residual " +
                        std::to_string(cpt.residual) + ")");
    for (const auto& o : observables)
      if (o.op.side() != product(carrier_dims))
        throw ConfigError("scenario: observable '" + o.name + "' has the wrong side");
  }
};

struct DerivedCollisionParameters {
  double dt = 0.0;
  double g = 0.0;
};

inline DerivedCollisionParameters derive_parameters(double gamma, double t_end, std::size_t n) {
  if (n == 0) throw std::invalid_argument("derive_parameters: n must be >= 1");
  DerivedCollisionParameters p;
  p.dt = t_end / static_cast<double>(n);
  p.g = std::sqrt(gamma / p.dt);
  return p;
}

inline CollisionConfig make_collision_config(const ScenarioConfig& sc, std::size_t n) {
  CollisionConfig cfg;
  cfg.carrier_dims = sc.carrier_dims;
  cfg.env_dim = sc.env_dim;
  cfg.eta = sc.eta;
  cfg.channel = sc.channel;
  cfg.couplings = sc.couplings;
  cfg.local_hamiltonians = sc.local_hamiltonians;
  cfg.collision_interval = sc.collision_interval;
  cfg.n_collisions = n;
  if (n == 0) {
    cfg.dt = sc.t_end;
    cfg.g = 0.0;
  } else {
    const auto p = derive_parameters(sc.gamma, sc.t_end, n);
    cfg.dt = p.dt;
    cfg.g = p.g;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::vector<std::size_t> parse_args(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto next = s.find(',', pos);
    out.push_back(static_cast<std::size_t>(std::stoul(s.substr(pos, next - pos))));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace detail

/// Named single-factor operators: "sx", "sy", "sz", "id(d)", "annihilation(d)",
/// "creation(d)", "x(d)", "p(d)", "number(d)", "proj(d,k)". Objects may carry a
/// "scale" and either "op" (a name) or "matrix" (explicit [re, im] entries).
inline Operator parse_operator(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "sx") return ops::sigma_x();
    if (s == "sy") return ops::sigma_y();
    if (s == "sz") return ops::sigma_z();
    if (s == "id") return ops::identity(2);
    static const std::regex call(R"(^([a-z_]+)\(([0-9, ]+)\)$)");
    std::smatch m;
    if (std::regex_match(s, m, call)) {
      const std::string fn = m[1];
      const auto args = detail::parse_args(std::regex_replace(std::string(m[2]), std::regex(" "), ""));
      auto need = [&](std::size_t k) {
        if (args.size() != k) throw ConfigError("operator '" + s + "': wrong argument count");
      };
      if (fn == "id") { need(1); return ops::identity(args[0]); }
      if (fn == "annihilation") { need(1); return ops::annihilation(args[0]); }
      if (fn == "creation") { need(1); return ops::creation(args[0]); }
      if (fn == "x") { need(1); return ops::position_quadrature(args[0]); }
      if (fn == "p") { need(1); return ops::momentum_quadrature(args[0]); }
      if (fn == "number") { need(1); return ops::creation(args[0]) * ops::annihilation(args[0]); }
      if (fn == "proj") {
        need(2);
        if (args[1] >= args[0]) throw ConfigError("operator '" + s + "': level out of range");
        return ops::projector(args[0], args[1]);
      }
    }
    throw ConfigError("unknown operator '" + s + "'");
  }
  if (j.is_object()) {
    Operator base = j.contains("op") ? parse_operator(j.at("op")) : operator_from_json(j);
    if (j.contains("scale")) base = complex_from_json(j.at("scale")) * base;
    return base;
  }
  if (j.is_array()) return operator_from_json(j);
  throw ConfigError("cannot parse operator from " + j.dump());
}

/// States: "ground" or "basis(k)", "mixed", {"pure": [amplitudes]},
/// {"product": [state...]} (one per factor), or an explicit matrix.
inline DensityMatrix parse_state(const Json& j, const Dims& dims) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "ground") return DensityMatrix::basis(dims, 0);
    if (s == "mixed") return DensityMatrix::maximally_mixed(dims);
    if (s == "plus" && product(dims) == 2) {
      Vector v(2);
      v << 1.0, 1.0;
      return DensityMatrix::pure(v, dims);
    }
    static const std::regex basis(R"(^basis\(([0-9]+)\)$)");
    std::smatch m;
    if (std::regex_match(s, m, basis)) {
      const auto k = std::stoul(m[1]);
      if (k >= product(dims)) throw ConfigError("state '" + s + "' out of range");
      return DensityMatrix::basis(dims, k);
    }
    throw ConfigError("unknown state '" + s + "'");
  }
  if (j.is_object() && j.contains("pure")) {
    const auto& amps = j.at("pure");
    if (amps.size() != product(dims)) throw ConfigError("pure state has wrong length");
    Vector v(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t i = 0; i < amps.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(amps[i]);
    return DensityMatrix::pure(v, dims);
  }
  if (j.is_object() && j.contains("product")) {
    const auto& parts = j.at("product");
    if (parts.size() != dims.size()) throw ConfigError("product state needs one entry per factor");
    Operator op = parse_state(parts[0], {dims[0]}).op();
    for (std::size_t f = 1; f < dims.size(); ++f) op = kron(op, parse_state(parts[f], {dims[f]}).op());
    return DensityMatrix(op);
  }
  return DensityMatrix(operator_from_json(j).with_dims(dims));
}

inline KrausChannel parse_channel(const Json& j, const DensityMatrix& eta) {
  if (j.is_object() && j.value("kind", "") == "replacer" && !j.contains("eta"))
    return replacer_channel(eta);
  if (j.is_object() && j.value("kind", "") == "unitary" && j.contains("hamiltonian") &&
      j.at("hamiltonian").is_string())
    return unitary_channel(expm_hermitian(parse_operator(j.at("hamiltonian")), j.at("angle").get<double>()));
  return channel_from_json(j);
}

// ---------------------------------------------------------------------------
// Built-in scenarios

inline std::vector<std::string> builtin_names() {
  return {"dephasing-1q", "ad-chain-2q", "rotating-env-2q", "bosonic-fiber", "replacer"};
}

inline Observable carrier_observable(std::string name, const Operator& op, std::size_t carrier,
                                     const Dims& dims) {
  return {std::move(name), embed(op, {carrier}, dims)};
}

/// Built-in scenario with parameters from `params` (p, theta, d, kappa).
inline ScenarioConfig builtin_scenario(const std::string& name, const Json& params = Json::object()) {
  ScenarioConfig sc;
  sc.name = name;
  sc.gamma = 1.0;
  const auto sx = ops::sigma_x();
  const auto sz = ops::sigma_z();
  if (name == "dephasing-1q") {
    sc.carrier_dims = {2};
    sc.env_dim = 2;
    sc.couplings = CouplingSpec::uniform({{sx}}, {sx});
    sc.eta = DensityMatrix::basis({2}, 0);
    sc.channel = identity_channel(2);
    sc.rho0 = DensityMatrix::basis({2}, 0);
    sc.t_end = 0.5;
    sc.sweep = {50, 100, 200, 400};
    sc.observables = {{"p0", ops::projector(2, 0)}, {"sz", sz}};
  } else if (name == "ad-chain-2q" || name == "rotating-env-2q" || name == "replacer") {
    sc.carrier_dims = {2, 2};
    sc.env_dim = 2;
    sc.couplings = CouplingSpec::uniform({{sx}, {sx}}, {sx});
    sc.eta = DensityMatrix::basis({2}, 0);
    sc.t_end = 0.5;
    sc.sweep = {50, 100, 200, 400};
    if (name == "ad-chain-2q") {
      sc.channel = amplitude_damping(params.value("p", 0.75));
      sc.rho0 = DensityMatrix::basis(sc.carrier_dims, 0);
    } else if (name == "rotating-env-2q") {
      const double theta = params.value("theta", std::numbers::pi / 4);
      sc.channel = unitary_channel(expm_hermitian(sz, theta));
      // (|+,0> + |-,1>)/sqrt(2): entangled, with Tr_0[(sx (x) 1) rho] = sz/2.
      Vector v(4);
      const double h = 0.5;
      v << h, h, h, -h;
      sc.rho0 = DensityMatrix::pure(v, sc.carrier_dims);
      sc.t_end = 1.0;
    } else {
      sc.channel = replacer_channel(sc.eta);
      Vector v(4);
      v << 1.0, 1.0, 0.0, 0.0;  // |0,+>
      sc.rho0 = DensityMatrix::pure(v, sc.carrier_dims);
    }
    sc.observables = {carrier_observable("sz0", sz, 0, sc.carrier_dims),
                      carrier_observable("sz1", sz, 1, sc.carrier_dims),
                      {"sx0sx1", kron(sx, sx)}};
  } else if (name == "bosonic-fiber") {
    // Environment modes truncated at d levels; the carriers default to two
    // levels, which is exact for the single-excitation input used here.
    const auto d = params.value("d", std::size_t{4});
    const auto dc = params.value("carrier_d", std::size_t{2});
    const auto m = params.value("carriers", std::size_t{3});
    const double kappa = params.value("kappa", 0.25);
    if (d < 2 || dc < 2) throw ConfigError("bosonic-fiber: truncations must be >= 2");
    if (m < 1) throw ConfigError("bosonic-fiber: need at least one carrier");
    sc.carrier_dims.assign(m, dc);
    sc.env_dim = d;
    const TermList a{ops::position_quadrature(dc), ops::momentum_quadrature(dc)};
    sc.couplings = CouplingSpec::uniform(std::vector<TermList>(m, a),
                                         {ops::position_quadrature(d), ops::momentum_quadrature(d)});
    sc.eta = DensityMatrix::basis({d}, 0);
    sc.channel = lossy_bosonic_channel(d, kappa);
    sc.rho0 = DensityMatrix::basis(sc.carrier_dims, product(sc.carrier_dims) / dc);  // |1,0,...>
    sc.t_end = 0.5;
    sc.sweep = {25, 50, 100, 200};
    const auto num = ops::creation(dc) * ops::annihilation(dc);
    for (std::size_t c = 0; c < m; ++c)
      sc.observables.push_back(carrier_observable("n" + std::to_string(c), num, c, sc.carrier_dims));
  } else {
    throw ConfigError("unknown built-in scenario '" + name + "'");
  }
  return sc;
}

/// Reads a scenario. "scenario" names a built-in (or "explicit"); any other
/// top-level field overrides the built-in default.
inline ScenarioConfig parse_scenario(const Json& j) {
  try {
    const std::string name = j.value("scenario", std::string("explicit"));
    ScenarioConfig sc;
    if (name != "explicit") {
      sc = builtin_scenario(name, j.value("params", Json::object()));
    } else {
      for (const char* key : {"carrier_dims", "env_dim", "couplings", "eta", "channel", "rho0"})
        if (!j.contains(key)) throw ConfigError(std::string("explicit scenario needs '") + key + "'");
    }
    if (j.contains("carrier_dims")) sc.carrier_dims = j.at("carrier_dims").get<Dims>();
    if (j.contains("env_dim")) sc.env_dim = j.at("env_dim").get<std::size_t>();
    if (j.contains("eta")) sc.eta = parse_state(j.at("eta"), {sc.env_dim});
    if (j.contains("channel")) sc.channel = parse_channel(j.at("channel"), sc.eta);
    if (j.contains("couplings")) {
      const auto& c = j.at("couplings");
      std::vector<TermList> a;
      for (const auto& per : c.at("a")) {
        TermList terms;
        for (const auto& op : per) terms.push_back(parse_operator(op));
        a.push_back(std::move(terms));
      }
      const auto& b = c.at("b");
      if (!b.empty() && b[0].is_array() && !b[0].empty() &&
          (b[0][0].is_string() || b[0][0].is_object())) {
        sc.couplings.carrier_ops = std::move(a);
        sc.couplings.env_ops.clear();
        for (const auto& per : b) {
          TermList terms;
          for (const auto& op : per) terms.push_back(parse_operator(op));
          sc.couplings.env_ops.push_back(std::move(terms));
        }
        sc.couplings.indexed_carrier_ops.clear();
      } else {
        TermList shared;
        for (const auto& op : b) shared.push_back(parse_operator(op));
        sc.couplings = CouplingSpec::uniform(std::move(a), shared);
      }
    }
    if (j.contains("rho0")) sc.rho0 = parse_state(j.at("rho0"), sc.carrier_dims);
    if (j.contains("gamma")) sc.gamma = j.at("gamma").get<double>();
    if (j.contains("t_end")) sc.t_end = j.at("t_end").get<double>();
    if (j.contains("sweep")) sc.sweep = j.at("sweep").get<std::vector<std::size_t>>();
    if (j.contains("n")) sc.simulate_n = j.at("n").get<std::size_t>();
    if (j.contains("record_stride")) sc.record_stride = j.at("record_stride").get<std::size_t>();
    if (j.contains("me_dt")) sc.me_dt = j.at("me_dt").get<double>();
    if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("collision_interval")) sc.collision_interval = j.at("collision_interval").get<double>();
    if (j.contains("local_hamiltonians")) {
      sc.local_hamiltonians.clear();
      for (const auto& h : j.at("local_hamiltonians")) {
        if (h.is_null()) sc.local_hamiltonians.emplace_back(std::nullopt);
        else sc.local_hamiltonians.emplace_back(HamiltonianSchedule::constant(parse_operator(h)));
      }
    }
    if (j.contains("observables")) {
      sc.observables.clear();
      for (const auto& o : j.at("observables")) {
        const std::string oname = o.at("name").get<std::string>();
        Operator op = parse_operator(o.contains("op") ? o.at("op") : o.at("matrix"));
        if (o.contains("carrier"))
          sc.observables.push_back(carrier_observable(oname, op, o.at("carrier").get<std::size_t>(), sc.carrier_dims));
        else
          sc.observables.push_back({oname, op.with_dims(sc.carrier_dims)});
      }
    }
    sc.validate();
    return sc;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Operations

inline GeneratorSet scenario_generator(const ScenarioConfig& sc) {
  return full_generator(sc.couplings, sc.eta, sc.channel, sc.gamma, sc.carrier_dims);
}

/// Assumption check against every carrier of the scenario.
inline AssumptionReport scenario_assumption(const ScenarioConfig& sc, double tol = kDefaultTolerance) {
  return check_assumption(make_collision_config(sc, 1), std::max<std::size_t>(1, sc.carrier_dims.size()), tol);
}

inline Trajectory run_master_equation(const ScenarioConfig& sc) {
  const auto steps = std::max<long long>(1, std::llround(std::ceil(sc.t_end / sc.me_dt - 1e-9)));
  const double dt = sc.t_end / static_cast<double>(steps);
  return integrate(scenario_generator(sc).total, sc.rho0.op(), sc.t_end, dt, sc.observables,
                   sc.record_stride);
}

struct ConvergenceEntry {
  std::size_t n = 0;
  double dt = 0.0;
  double g = 0.0;
  double error = 0.0;  // trace distance to the master-equation state at t_end
};

struct ConvergenceReport {
  std::string scenario;
  std::vector<ConvergenceEntry> entries;
  std::optional<double> fitted_order;  // log2(e_n / e_2n) from the last two entries
  bool strictly_decreasing = true;
  AssumptionReport assumption;
};

inline ConvergenceReport run_converge(const ScenarioConfig& sc) {
  sc.validate();
  if (!sc.local_hamiltonians.empty())
    throw ConfigError("converge: local Hamiltonians are not supported (use the interaction frame)");
  ConvergenceReport report;
  report.scenario = sc.name;
  report.assumption = scenario_assumption(sc);
  if (!report.assumption.pass)
    throw PropertyViolation("converge: zero-mean assumption fails, max |<B M^m(eta)>| = " +
                            std::to_string(report.assumption.max_abs_mean));
  const Operator reference = run_master_equation(sc).back().state;

  std::vector<std::future<ConvergenceEntry>> jobs;
  for (const auto n : sc.sweep)
    jobs.push_back(std::async(std::launch::async, [&sc, &reference, n] {
      const auto cfg = make_collision_config(sc, n);
      const auto traj = simulate(cfg, sc.rho0, {}, n);
      return ConvergenceEntry{n, cfg.dt, cfg.g, trace_distance(traj.back().state, reference)};
    }));
  for (auto& j : jobs) report.entries.push_back(j.get());

  for (std::size_t i = 1; i < report.entries.size(); ++i)
    if (!(report.entries[i].error < report.entries[i - 1].error)) report.strictly_decreasing = false;
  if (report.entries.size() >= 2) {
    const auto& a = report.entries[report.entries.size() - 2];
    const auto& b = report.entries.back();
    report.fitted_order = std::log2(a.error / b.error) / std::log2(static_cast<double>(b.n) / a.n);
  }
  return report;
}

inline Json convergence_to_json(const ConvergenceReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back(Json{{"n", e.n}, {"dt", e.dt}, {"g", e.g}, {"error", e.error}});
  Json out{{"scenario", r.scenario},
           {"entries", std::move(entries)},
           {"strictly_decreasing", r.strictly_decreasing},
           {"assumption_max_abs_mean", r.assumption.max_abs_mean}};
  out["fitted_order"] = r.fitted_order ? Json(*r.fitted_order) : Json(nullptr);
  return out;
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& r) {
  os << "n,dt,g,error\n";
  for (const auto& e : r.entries)
    os << e.n << ',' << detail::format_double(e.dt) << ',' << detail::format_double(e.g) << ','
       << detail::format_double(e.error) << '\n';
}

struct SimulationOutput {
  Trajectory collision;
  Trajectory master_equation;
};

inline SimulationOutput run_simulate(const ScenarioConfig& sc) {
  sc.validate();
  const std::size_t n = sc.simulate_n.value_or(sc.sweep.back());
  const auto cfg = make_collision_config(sc, n);
  SimulationOutput out;
  out.collision = simulate(cfg, sc.rho0, sc.observables, sc.record_stride);
  if (n > 0 && sc.local_hamiltonians.empty()) out.master_equation = run_master_equation(sc);
  return out;
}

inline GeneratorSet run_generators(const ScenarioConfig& sc) {
  sc.validate();
  return scenario_generator(sc);
}

struct VerificationReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<ResidualCheck> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Tolerances for the scenario-level checks.
struct VerifyTolerances {
  double first_order = 1e-12;
  double second_order = 1e-10;
  double semicausal = 1e-11;
  double generator = 1e-11;
  double ratio_low = 6.0;
  double ratio_high = 10.0;
};

/// Runs the expansion identities and generator properties on the scenario's
/// rho0 plus `samples` random states/operators drawn from `seed`.
inline VerificationReport run_verify(const ScenarioConfig& sc, std::uint64_t seed,
                                     std::size_t samples = 5, const VerifyTolerances& tol = {}) {
  sc.validate();
  VerificationReport rep;
  rep.scenario = sc.name;
  rep.seed = seed;
  random::Rng rng(seed);
  const auto cfg = make_collision_config(sc, sc.sweep.back());
  const auto assumption = scenario_assumption(sc);
  rep.checks.push_back(make_check("assumption_zero_mean", assumption.max_abs_mean, kDefaultTolerance));
  const auto gen = scenario_generator(sc);

  std::vector<Operator> states{sc.rho0.op()};
  for (std::size_t i = 0; i < samples; ++i) states.push_back(random::density(rng, sc.carrier_dims).op());
  double first = 0.0, second_a = 0.0, second_b = 0.0;
  for (const auto& rho : states) {
    first = std::max(first, verify_first_order(cfg, rho, tol.first_order).value);
    const auto so = verify_second_order(cfg, rho, gen, tol.second_order);
    second_a = std::max(second_a, so.local.value);
    second_b = std::max(second_b, so.cross.value);
  }
  rep.checks.push_back(make_check("first_order_cancellation", first, tol.first_order));
  rep.checks.push_back(make_check("second_order_local", second_a, tol.second_order));
  rep.checks.push_back(make_check("second_order_cross", second_b, tol.second_order));

  double trace_defect = 0.0, herm_defect = 0.0, semicausal = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Operator x = random::hermitian(rng, sc.carrier_dims);
    const Operator y = gen.total.apply(x);
    trace_defect = std::max(trace_defect, std::abs(y.trace()) / std::max(1.0, max_abs(x)));
    herm_defect = std::max(herm_defect, y.hermiticity_defect());
    for (const auto& [key, d] : gen.crosses)
      semicausal = std::max(semicausal, traced_out_residual(d, x, key.second));
  }
  rep.checks.push_back(make_check("generator_trace_annihilating", trace_defect, tol.generator));
  rep.checks.push_back(make_check("generator_hermiticity_preserving", herm_defect, tol.generator));
  rep.checks.push_back(make_check("semicausality", semicausal, tol.semicausal));

  // Remainder orders: ratio under halving of s should be ~8.
  const Operator xj = random::hermitian(rng, cfg.joint_dims());
  const Operator h = embed(cfg.couplings.hamiltonian(0), {0, cfg.carriers()}, cfg.joint_dims());
  const double s0 = 0.02;
  auto within = [&](const std::string& name, double ratio) {
    ResidualCheck c{name, ratio, tol.ratio_high, ratio >= tol.ratio_low && ratio <= tol.ratio_high};
    rep.checks.push_back(c);
  };
  within("unitary_remainder_halving_ratio",
         halving_ratio([&](double s) { return unitary_remainder(h, xj, s); }, s0));
  within("column_remainder_halving_ratio",
         halving_ratio([&](double s) { return column_remainder(cfg, xj, s); }, s0));
  return rep;
}

inline Json verification_to_json(const VerificationReport& r) {
  return Json{{"scenario", r.scenario}, {"seed", r.seed}, {"pass", r.pass()},
              {"checks", checks_to_json(r.checks)}};
}

}  // namespace corrme

#endif  // CORRME_SCENARIOS_HPP
