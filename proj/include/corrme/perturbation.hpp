#ifndef CORRME_PERTURBATION_HPP
#define CORRME_PERTURBATION_HPP

// Expansion of the column map in powers of s = g dt, and numerical checks of
// the identities that turn it into the master equation:
//
//   U(X)  = X + s U'(X) + s^2 U''(X) + O(s^3)
//   U'(X) = -i [H, X],   U''(X) = H X H - 1/2 {H^2, X}
//
//   C(X)  = M^M(X) + s C'(X) + s^2 (C''a + C''b)(X) + O(s^3)
//   C'    = sum_c        M^{M-c} U'_c M^c
//   C''a  = sum_c        M^{M-c} U''_c M^c
//   C''b  = sum_{c<c2}   M^{M-c2} U'_c2 M^{c2-c} U'_c M^c
//
// (0-based carriers, M carriers, channel powers acting on the environment).
// Tr_E C'(rho (x) eta) vanishes under the zero-mean condition, while
// Tr_E C''a(rho (x) eta) = sum L_c(rho)/gamma and
// Tr_E C''b(rho (x) eta) = sum D_{c,c2}(rho)/gamma.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "corrme/channels.hpp"
#include "corrme/collision.hpp"
#include "corrme/generators.hpp"
#include "corrme/json_io.hpp"
#include "corrme/operator.hpp"

namespace corrme {

struct UnitaryExpansion {
  Superoperator first;   // U'
  Superoperator second;  // U''
};

inline UnitaryExpansion unitary_expansion_terms(const Operator& h) {
  if (!h.is_hermitian()) throw std::invalid_argument("unitary_expansion_terms: H not Hermitian");
  const Operator h2 = h * h;
  UnitaryExpansion e;
  e.first = Complex(0.0, -1.0) * (Superoperator::left_multiply(h) - Superoperator::right_multiply(h));
  e.second = Superoperator::sandwich(h, h) -
             0.5 * (Superoperator::left_multiply(h2) + Superoperator::right_multiply(h2));
  return e;
}

/// U' and U'' for one carrier's collision Hamiltonian, lifted to carriers (x) env.
inline UnitaryExpansion unitary_expansion_terms(const CollisionConfig& cfg, std::size_t carrier,
                                                std::size_t collision = 0) {
  const Dims joint = cfg.joint_dims();
  return unitary_expansion_terms(
      embed(cfg.couplings.hamiltonian(carrier, collision), {carrier, cfg.carriers()}, joint));
}

struct ColumnExpansion {
  Superoperator zeroth;  // M^M
  Superoperator first;
  Superoperator second_a;
  Superoperator second_b;
};

inline constexpr std::size_t kMaterializeMaxSide = 32;

/// Materializes M^M, C', C''a, C''b as superoperator matrices on carriers (x) env.
inline ColumnExpansion column_expansion(const CollisionConfig& cfg, std::size_t collision = 0) {
  const Dims joint = cfg.joint_dims();
  if (product(joint) > kMaterializeMaxSide)
    throw std::invalid_argument("column_expansion: joint side " + std::to_string(product(joint)) +
                                " exceeds " + std::to_string(kMaterializeMaxSide) +
                                "; use apply_column_expansion");
  const std::size_t m = cfg.carriers();
  std::vector<Operator> env_kraus;
  for (const auto& k : cfg.channel.kraus()) env_kraus.push_back(embed(k, {m}, joint));
  const Superoperator relax = Superoperator::from_kraus(env_kraus);
  std::vector<Superoperator> relax_pow{Superoperator::identity(joint)};
  for (std::size_t p = 1; p <= m; ++p) relax_pow.push_back(relax * relax_pow.back());

  std::vector<UnitaryExpansion> terms;
  for (std::size_t c = 0; c < m; ++c) terms.push_back(unitary_expansion_terms(cfg, c, collision));

  ColumnExpansion e{relax_pow[m], Superoperator::zero(joint), Superoperator::zero(joint),
                    Superoperator::zero(joint)};
  for (std::size_t c = 0; c < m; ++c) {
    e.first += relax_pow[m - c] * terms[c].first * relax_pow[c];
    e.second_a += relax_pow[m - c] * terms[c].second * relax_pow[c];
  }
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t c2 = c + 1; c2 < m; ++c2)
      e.second_b += relax_pow[m - c2] * terms[c2].first * relax_pow[c2 - c] * terms[c].first *
                    relax_pow[c];
  return e;
}

struct ColumnExpansionAction {
  Operator zeroth;  // M^M(x)
  Operator first;
  Operator second_a;
  Operator second_b;
};

/// C'(x), C''a(x), C''b(x) computed by acting on x directly; no superoperator
/// matrices are formed, so this works at any size the column map does.
inline ColumnExpansionAction apply_column_expansion(const CollisionConfig& cfg, const Operator& x,
                                                    std::size_t collision = 0) {
  const Dims joint = cfg.joint_dims();
  if (x.side() != product(joint))
    throw std::invalid_argument("apply_column_expansion: operator side mismatch");
  const std::size_t m = cfg.carriers();
  std::vector<Matrix> env_kraus;
  for (const auto& k : cfg.channel.kraus()) env_kraus.push_back(embed(k, {m}, joint).matrix());
  auto relax = [&](const Matrix& r, std::size_t times) {
    Matrix cur = r;
    for (std::size_t t = 0; t < times; ++t) {
      Matrix out = Matrix::Zero(cur.rows(), cur.cols());
      for (const auto& k : env_kraus) out.noalias() += k * cur * k.adjoint();
      cur = std::move(out);
    }
    return cur;
  };
  std::vector<Matrix> h;
  for (std::size_t c = 0; c < m; ++c)
    h.push_back(embed(cfg.couplings.hamiltonian(c, collision), {c, m}, joint).matrix());
  auto u1 = [&](std::size_t c, const Matrix& r) -> Matrix {
    return Complex(0.0, -1.0) * (h[c] * r - r * h[c]);
  };
  auto u2 = [&](std::size_t c, const Matrix& r) -> Matrix {
    const Matrix h2 = h[c] * h[c];
    return h[c] * r * h[c] - 0.5 * (h2 * r + r * h2);
  };

  const auto n = static_cast<Eigen::Index>(product(joint));
  Matrix first = Matrix::Zero(n, n), second_a = Matrix::Zero(n, n), second_b = Matrix::Zero(n, n);
  Matrix relaxed = x.matrix();  // M^c(x)
  for (std::size_t c = 0; c < m; ++c) {
    const Matrix y = u1(c, relaxed);
    first += relax(y, m - c);
    second_a += relax(u2(c, relaxed), m - c);
    Matrix moved = y;
    for (std::size_t c2 = c + 1; c2 < m; ++c2) {
      moved = relax(moved, 1);  // M^{c2-c}(U'_c M^c x)
      second_b += relax(u1(c2, moved), m - c2);
    }
    relaxed = relax(relaxed, 1);
  }
  return {{joint, std::move(relaxed)},
          {joint, std::move(first)}, {joint, std::move(second_a)}, {joint, std::move(second_b)}};
}

// ---------------------------------------------------------------------------
// Identity checks

struct ResidualCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline ResidualCheck make_check(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

namespace detail {
inline Operator trace_env(const CollisionConfig& cfg, const Operator& joint) {
  std::vector<std::size_t> keep(cfg.carriers());
  for (std::size_t c = 0; c < keep.size(); ++c) keep[c] = c;
  return partial_trace(joint, keep);
}
}  // namespace detail

/// Trace norm of Tr_E C'(rho (x) eta).
inline ResidualCheck verify_first_order(const CollisionConfig& cfg, const Operator& rho,
                                        double tol = 1e-12, std::size_t collision = 0) {
  const Operator joint = kron(rho.with_dims(cfg.carrier_dims), cfg.eta.op());
  const auto e = apply_column_expansion(cfg, joint, collision);
  return make_check("first_order", trace_norm(detail::trace_env(cfg, e.first)), tol);
}

struct SecondOrderChecks {
  ResidualCheck local;  // C''a against sum L / gamma
  ResidualCheck cross;  // C''b against sum D / gamma
};

/// `gen` must be built from the same couplings, eta, channel and collision index.
inline SecondOrderChecks verify_second_order(const CollisionConfig& cfg, const Operator& rho,
                                             const GeneratorSet& gen, double tol = 1e-10,
                                             std::size_t collision = 0) {
  if (!(gen.rates.gamma > 0.0)) throw std::invalid_argument("verify_second_order: gamma must be > 0");
  const Operator r = rho.with_dims(cfg.carrier_dims);
  const auto e = apply_column_expansion(cfg, kron(r, cfg.eta.op()), collision);
  Operator locals = Operator::zero(cfg.carrier_dims);
  for (const auto& l : gen.locals) locals += l.apply(r);
  Operator crosses = Operator::zero(cfg.carrier_dims);
  for (const auto& [key, d] : gen.crosses) crosses += d.apply(r);
  const double inv = 1.0 / gen.rates.gamma;
  return {make_check("second_order_local",
                     trace_norm(detail::trace_env(cfg, e.second_a) - inv * locals), tol),
          make_check("second_order_cross",
                     trace_norm(detail::trace_env(cfg, e.second_b) - inv * crosses), tol)};
}

// ---------------------------------------------------------------------------
// Remainder orders

/// Trace norm of U X U^dagger - (X + s U'X + s^2 U''X), U = exp(-i s H).
inline double unitary_remainder(const Operator& h, const Operator& x, double s) {
  const auto e = unitary_expansion_terms(h);
  const Operator u = expm_hermitian(h, s);
  return trace_norm(u * x * u.adjoint() - (x + s * e.first.apply(x) + (s * s) * e.second.apply(x)));
}

/// Trace norm of C(x) - (M^M x + s C'x + s^2 (C''a + C''b) x) with g dt = s.
inline double column_remainder(const CollisionConfig& cfg, const Operator& x_joint, double s,
                               std::size_t collision = 0) {
  CollisionConfig scaled = cfg;
  scaled.g = s / cfg.dt;
  const auto e = apply_column_expansion(cfg, x_joint, collision);
  const Operator exact = ColumnMap(scaled, collision).apply_joint(x_joint);
  return trace_norm(exact - (e.zeroth + s * e.first + (s * s) * (e.second_a + e.second_b)));
}

/// Trace norm of rho(n+1) - rho(n) - (s^2/gamma) G(rho(n)) for one exact column
/// step at g dt = s. Equals dt times the finite-difference residual, so it is
/// O(s^3) whenever third environment moments are nonzero.
inline double continuum_residual(const CollisionConfig& cfg, const Operator& rho,
                                 const GeneratorSet& gen, double s, std::size_t collision = 0) {
  CollisionConfig scaled = cfg;
  scaled.g = s / cfg.dt;
  const Operator r = rho.with_dims(cfg.carrier_dims);
  const Operator next = ColumnMap(scaled, collision).step(r);
  return trace_norm(next - r - (s * s / gen.rates.gamma) * gen.total.apply(r));
}

/// f(s) / f(s/2); about 8 for a third-order remainder.
inline double halving_ratio(const std::function<double(double)>& f, double s) {
  return f(s) / f(0.5 * s);
}

inline Json checks_to_json(const std::vector<ResidualCheck>& checks) {
  Json out = Json::array();
  for (const auto& c : checks)
    out.push_back(Json{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  return out;
}

}  // namespace corrme

#endif  // CORRME_PERTURBATION_HPP
