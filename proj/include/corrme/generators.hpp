#ifndef CORRME_GENERATORS_HPP
#define CORRME_GENERATORS_HPP

// The correlated master equation obtained in the weak-coupling limit of the
// collision model:
//
//   d rho/dt = sum_c L_c(rho) + sum_{c < c'} D_{c,c'}(rho)
//
//   L_c(X)     = 1/2 sum_{l,l'} g_c[l,l'] (2 A_l' X A_l - A_l A_l' X - X A_l A_l')
//   D_{c,c'}(X) = sum_{l,l'} g_{c,c'}[l,l'] A_l [X, A'_l']
//               - conj(g_{c,c'}[l,l']) [X, A'_l'] A_l
//
//   g_c[l,l']      = gamma Tr(B_l B_l' M^c(eta))
//   g_{c,c'}[l,l'] = gamma Tr(B'_l' M^{c'-c}(B_l M^c(eta)))
//
// with 0-based carrier indices, A_l acting on carrier c and A'_l' on c'.

#include <cstddef>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corrme/channels.hpp"
#include "corrme/collision.hpp"
#include "corrme/integrator.hpp"
#include "corrme/json_io.hpp"
#include "corrme/operator.hpp"
#include "corrme/trajectory.hpp"

namespace corrme {

using CarrierPair = std::pair<std::size_t, std::size_t>;

struct CorrelationTensor {
  double gamma = 0.0;
  std::vector<Matrix> local;               // [carrier]
  std::map<CarrierPair, Matrix> cross;     // (c, c') with c < c'
};

struct GeneratorSet {
  Dims carrier_dims;
  std::vector<TermList> carrier_ops;  // A operators the pieces were built from
  CorrelationTensor rates;
  std::vector<Superoperator> locals;
  std::map<CarrierPair, Superoperator> crosses;
  Superoperator total;
};

/// A acting on one carrier, identity on the others.
inline Operator embed_carrier(const Operator& a, std::size_t carrier, const Dims& carrier_dims) {
  return embed(a, {carrier}, carrier_dims);
}

// ---------------------------------------------------------------------------
// Rates

inline constexpr double kRatePsdTolerance = 1e-10;

inline Matrix local_rates(const CouplingSpec& spec, const DensityMatrix& eta,
                          const KrausChannel& channel, std::size_t carrier, double gamma) {
  const auto& b = spec.env_terms(carrier);
  if (b.front().side() != eta.side() || channel.side() != eta.side())
    throw std::invalid_argument("local_rates: environment dimension mismatch");
  const Operator state = channel.apply_power(eta.op(), carrier);
  const auto n = static_cast<Eigen::Index>(b.size());
  Matrix r(n, n);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index lp = 0; lp < n; ++lp) r(l, lp) = gamma * (b[l] * b[lp] * state).trace();

  const Operator rop(r);
  if (!rop.is_hermitian(kRatePsdTolerance))
    throw PropertyViolation("local_rates: rate matrix is not Hermitian");
  const double lmin = min_eigenvalue(rop);
  if (lmin < -kRatePsdTolerance)
    throw PropertyViolation("local_rates: rate matrix has eigenvalue " + std::to_string(lmin));
  return r;
}

/// Rates coupling carrier c to a later carrier c2. B_l M^c(eta) is generally
/// not Hermitian; the channel is applied to it as an arbitrary operator.
inline Matrix cross_rates(const CouplingSpec& spec, const DensityMatrix& eta,
                          const KrausChannel& channel, std::size_t c, std::size_t c2,
                          double gamma) {
  if (c2 <= c) throw std::invalid_argument("cross_rates: requires c2 > c");
  const auto& b = spec.env_terms(c);
  const auto& b2 = spec.env_terms(c2);
  const Operator state = channel.apply_power(eta.op(), c);
  Matrix r(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(b2.size()));
  for (std::size_t l = 0; l < b.size(); ++l) {
    const Operator moved = channel.apply_power(b[l] * state, c2 - c);
    for (std::size_t lp = 0; lp < b2.size(); ++lp)
      r(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp)) =
          gamma * (b2[lp] * moved).trace();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Dissipators

inline Superoperator local_dissipator(const TermList& a, const Matrix& rates, std::size_t carrier,
                                      const Dims& carrier_dims) {
  if (rates.rows() != static_cast<Eigen::Index>(a.size()) || rates.cols() != rates.rows())
    throw std::invalid_argument("local_dissipator: rate matrix does not match term count");
  std::vector<Operator> emb;
  for (const auto& op : a) emb.push_back(embed_carrier(op, carrier, carrier_dims));
  Superoperator out = Superoperator::zero(carrier_dims);
  for (std::size_t l = 0; l < a.size(); ++l)
    for (std::size_t lp = 0; lp < a.size(); ++lp) {
      const Complex r = rates(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp));
      if (r == Complex(0.0)) continue;
      const Operator prod = emb[l] * emb[lp];
      out += r * Superoperator::sandwich(emb[lp], emb[l]);
      out += (-0.5 * r) * (Superoperator::left_multiply(prod) + Superoperator::right_multiply(prod));
    }
  return out;
}

inline Superoperator cross_dissipator(const TermList& a, const TermList& a2, const Matrix& rates,
                                      std::size_t c, std::size_t c2, const Dims& carrier_dims) {
  if (c2 <= c) throw std::invalid_argument("cross_dissipator: requires c2 > c");
  if (rates.rows() != static_cast<Eigen::Index>(a.size()) ||
      rates.cols() != static_cast<Eigen::Index>(a2.size()))
    throw std::invalid_argument("cross_dissipator: rate matrix does not match term counts");
  Superoperator out = Superoperator::zero(carrier_dims);
  for (std::size_t l = 0; l < a.size(); ++l) {
    const Operator x = embed_carrier(a[l], c, carrier_dims);
    for (std::size_t lp = 0; lp < a2.size(); ++lp) {
      const Complex r = rates(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp));
      if (r == Complex(0.0)) continue;
      const Operator y = embed_carrier(a2[lp], c2, carrier_dims);
      // r (x X y - x y X) - conj(r) (X y x - y X x)
      out += r * (Superoperator::sandwich(x, y) - Superoperator::left_multiply(x * y));
      out += (-std::conj(r)) * (Superoperator::right_multiply(y * x) - Superoperator::sandwich(y, x));
    }
  }
  return out;
}

/// Assembles every local and cross term for the couplings of one collision
/// index (0 for uniform couplings).
inline GeneratorSet full_generator(const CouplingSpec& spec, const DensityMatrix& eta,
                                   const KrausChannel& channel, double gamma,
                                   const Dims& carrier_dims, std::size_t collision = 0) {
  if (spec.carriers() != carrier_dims.size())
    throw std::invalid_argument("full_generator: carrier count mismatch");
  GeneratorSet gen;
  gen.carrier_dims = carrier_dims;
  gen.rates.gamma = gamma;
  gen.total = Superoperator::zero(carrier_dims);
  const std::size_t m = carrier_dims.size();
  for (std::size_t c = 0; c < m; ++c) gen.carrier_ops.push_back(spec.carrier_terms(c, collision));
  for (std::size_t c = 0; c < m; ++c) {
    gen.rates.local.push_back(local_rates(spec, eta, channel, c, gamma));
    gen.locals.push_back(local_dissipator(gen.carrier_ops[c], gen.rates.local[c], c, carrier_dims));
    gen.total += gen.locals.back();
  }
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t c2 = c + 1; c2 < m; ++c2) {
      Matrix r = cross_rates(spec, eta, channel, c, c2, gamma);
      auto d = cross_dissipator(gen.carrier_ops[c], gen.carrier_ops[c2], r, c, c2, carrier_dims);
      gen.total += d;
      gen.rates.cross.emplace(CarrierPair{c, c2}, std::move(r));
      gen.crosses.emplace(CarrierPair{c, c2}, std::move(d));
    }
  return gen;
}

struct StationaryRates {
  Matrix rates;
  double fixed_point_distance = 0.0;
  bool near_fixed = true;  // false means the caller's eta0 is not a fixed point
};

/// Cross rates at carrier distance `distance` for an environment sitting in
/// (or converged to) eta0. Uses the environment operators of the first carrier.
inline StationaryRates stationary_rates(const CouplingSpec& spec, const DensityMatrix& eta0,
                                        const KrausChannel& channel, std::size_t distance,
                                        double gamma, double tol = kDefaultTolerance) {
  if (distance == 0)
    throw std::invalid_argument("stationary_rates: distance must be >= 1 (use stationary_local_rates)");
  StationaryRates out;
  out.fixed_point_distance = fixed_point_distance(channel, eta0);
  out.near_fixed = out.fixed_point_distance <= tol;
  const auto& b = spec.env_terms(0);
  const auto n = static_cast<Eigen::Index>(b.size());
  out.rates.resize(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const Operator moved = channel.apply_power(b[l] * eta0.op(), distance);
    for (Eigen::Index lp = 0; lp < n; ++lp) out.rates(l, lp) = gamma * (b[lp] * moved).trace();
  }
  return out;
}

/// Local rates for an environment sitting in eta0 (same index order as local_rates).
inline Matrix stationary_local_rates(const CouplingSpec& spec, const DensityMatrix& eta0,
                                     double gamma) {
  const auto& b = spec.env_terms(0);
  const auto n = static_cast<Eigen::Index>(b.size());
  Matrix r(n, n);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index lp = 0; lp < n; ++lp) r(l, lp) = gamma * (b[l] * b[lp] * eta0.op()).trace();
  return r;
}

/// Generator for the first two carriers alone, rebuilt from the stored rates
/// and coupling operators: L_0 + L_1 + D_{0,1}.
inline Superoperator reduced_two_carrier_generator(const GeneratorSet& gen) {
  if (gen.carrier_dims.size() < 2)
    throw std::invalid_argument("reduced_two_carrier_generator: need at least two carriers");
  const Dims dims{gen.carrier_dims[0], gen.carrier_dims[1]};
  Superoperator out = local_dissipator(gen.carrier_ops[0], gen.rates.local[0], 0, dims);
  out += local_dissipator(gen.carrier_ops[1], gen.rates.local[1], 1, dims);
  out += cross_dissipator(gen.carrier_ops[0], gen.carrier_ops[1], gen.rates.cross.at({0, 1}), 0, 1,
                          dims);
  return out;
}

/// The extra term in d rho_1/dt (second carrier) once carrier 0 is traced out:
/// -2i sum Im(g_{0,1}[l,l']) [A'_l', Tr_0((A_l (x) 1) rho01)].
/// Vanishes whenever the cross rates are real.
inline Operator signaling_correction(const GeneratorSet& gen, const Operator& rho01) {
  const Dims dims{gen.carrier_dims.at(0), gen.carrier_dims.at(1)};
  const Operator rho = rho01.with_dims(dims);
  const Matrix& r = gen.rates.cross.at({0, 1});
  Operator out = Operator::zero({dims[1]});
  for (std::size_t l = 0; l < gen.carrier_ops[0].size(); ++l) {
    const Operator reduced = partial_trace(embed_carrier(gen.carrier_ops[0][l], 0, dims) * rho, {1});
    for (std::size_t lp = 0; lp < gen.carrier_ops[1].size(); ++lp) {
      const double im = r(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp)).imag();
      if (im == 0.0) continue;
      out += Complex(0.0, -2.0 * im) * commutator(gen.carrier_ops[1][lp], reduced);
    }
  }
  return out;
}

/// Largest entry of Tr_{factor}(s(x)); zero for a superoperator whose output
/// vanishes under the partial trace over that carrier.
inline double traced_out_residual(const Superoperator& s, const Operator& x, std::size_t factor) {
  const Operator y = s.apply(x);
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < y.dims().size(); ++f)
    if (f != factor) keep.push_back(f);
  return max_abs(partial_trace(y, keep));
}

/// Piecewise-constant generator for collision-indexed couplings: the couplings
/// of collision k hold on [k * interval, (k+1) * interval).
inline GeneratorSchedule collision_indexed_generators(const CouplingSpec& spec,
                                                      const DensityMatrix& eta,
                                                      const KrausChannel& channel, double gamma,
                                                      const Dims& carrier_dims,
                                                      std::size_t collisions, double interval) {
  GeneratorSchedule sched;
  const std::size_t n = spec.collision_indexed() ? collisions : 1;
  for (std::size_t k = 0; k < n; ++k) {
    sched.starts.push_back(static_cast<double>(k) * interval);
    sched.generators.push_back(full_generator(spec, eta, channel, gamma, carrier_dims, k).total);
  }
  return sched;
}

// ---------------------------------------------------------------------------
// Export

inline Json rates_to_json(const CorrelationTensor& t) {
  Json local = Json::array();
  for (const auto& m : t.local) local.push_back(matrix_to_json(m));
  Json cross = Json::array();
  for (const auto& [key, m] : t.cross)
    cross.push_back(Json{{"m", key.first}, {"m2", key.second}, {"rates", matrix_to_json(m)}});
  return Json{{"gamma", t.gamma}, {"local", std::move(local)}, {"cross", std::move(cross)}};
}

inline Json generators_to_json(const GeneratorSet& gen) {
  Json locals = Json::array();
  for (const auto& s : gen.locals) locals.push_back(matrix_to_json(s.matrix()));
  Json crosses = Json::array();
  for (const auto& [key, s] : gen.crosses)
    crosses.push_back(Json{{"m", key.first}, {"m2", key.second}, {"matrix", matrix_to_json(s.matrix())}});
  return Json{{"carrier_dims", gen.carrier_dims},
              {"vectorization", "column-stacking"},
              {"rates", rates_to_json(gen.rates)},
              {"locals", std::move(locals)},
              {"crosses", std::move(crosses)},
              {"total", matrix_to_json(gen.total.matrix())}};
}

/// CSV rate table: m,m2,l,l2,re,im. Local rates are listed with m2 == m.
inline void write_rate_table(std::ostream& os, const CorrelationTensor& t) {
  os << "m,m2,l,l2,re,im\n";
  auto rows = [&](std::size_t m, std::size_t m2, const Matrix& r) {
    for (Eigen::Index l = 0; l < r.rows(); ++l)
      for (Eigen::Index lp = 0; lp < r.cols(); ++lp)
        os << m << ',' << m2 << ',' << l << ',' << lp << ','
           << detail::format_double(r(l, lp).real()) << ','
           << detail::format_double(r(l, lp).imag()) << '\n';
  };
  for (std::size_t c = 0; c < t.local.size(); ++c) rows(c, c, t.local[c]);
  for (const auto& [key, r] : t.cross) rows(key.first, key.second, r);
}

}  // namespace corrme

#endif  // CORRME_GENERATORS_HPP
