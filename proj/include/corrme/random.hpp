#ifndef CORRME_RANDOM_HPP
#define CORRME_RANDOM_HPP

// Seeded random instances for property checks.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "corrme/channels.hpp"
#include "corrme/collision.hpp"
#include "corrme/operator.hpp"

namespace corrme::random {

using Rng = std::mt19937_64;

inline Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline Operator general(Rng& rng, const Dims& dims) {
  const auto n = product(dims);
  return {dims, gaussian_matrix(rng, n, n)};
}

inline Operator hermitian(Rng& rng, const Dims& dims) {
  const Matrix g = gaussian_matrix(rng, product(dims), product(dims));
  return {dims, 0.5 * (g + g.adjoint())};
}

inline Operator hermitian(Rng& rng, std::size_t d) { return hermitian(rng, Dims{d}); }

/// Full-rank mixed state (Ginibre ensemble).
inline DensityMatrix density(Rng& rng, const Dims& dims) {
  const Matrix g = gaussian_matrix(rng, product(dims), product(dims));
  const Matrix p = g * g.adjoint();
  return DensityMatrix(Operator(dims, p / p.trace().real()));
}

inline DensityMatrix pure_state(Rng& rng, const Dims& dims) {
  return DensityMatrix::pure(gaussian_matrix(rng, product(dims), 1).col(0), dims);
}

inline Operator unitary(Rng& rng, std::size_t d) {
  const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, d, d));
  return Operator(Matrix(qr.householderQ()));
}

/// Random CPT map with `count` Kraus operators, from a random isometry.
inline KrausChannel channel(Rng& rng, std::size_t d, std::size_t count) {
  const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, d * count, d));
  const Matrix iso = Matrix(qr.householderQ()).leftCols(static_cast<Eigen::Index>(d));
  std::vector<Operator> kraus;
  for (std::size_t k = 0; k < count; ++k)
    kraus.emplace_back(Matrix(iso.middleRows(static_cast<Eigen::Index>(k * d), static_cast<Eigen::Index>(d))));
  return KrausChannel(std::move(kraus));
}

/// Removes from a Hermitian b its Hilbert-Schmidt components along the given
/// Hermitian states, so that Tr(b sigma) = 0 for each of them.
inline Operator orthogonalize(Operator b, const std::vector<Operator>& states) {
  std::vector<Matrix> basis;
  for (const auto& s : states) {
    Matrix v = s.matrix();
    for (const auto& q : basis) v -= (q.adjoint() * v).trace().real() * q;
    const double norm = std::sqrt((v.adjoint() * v).trace().real());
    if (norm > 1e-12) basis.push_back(v / norm);
  }
  Matrix m = b.matrix();
  for (const auto& q : basis) m -= (q.adjoint() * m).trace().real() * q;
  return {b.dims(), 0.5 * (m + m.adjoint())};
}

struct RandomConfigOptions {
  std::size_t carriers = 2;
  std::size_t carrier_dim = 2;
  std::size_t env_dim = 2;
  std::size_t terms = 1;
  std::size_t kraus_count = 2;
  double g = 1.0;
  double dt = 0.01;
};

/// A random configuration satisfying the zero-mean condition: environment
/// operators are made orthogonal to M^c(eta) for every carrier c.
inline CollisionConfig compliant_config(Rng& rng, const RandomConfigOptions& o) {
  CollisionConfig cfg;
  cfg.carrier_dims.assign(o.carriers, o.carrier_dim);
  cfg.env_dim = o.env_dim;
  cfg.g = o.g;
  cfg.dt = o.dt;
  cfg.n_collisions = 1;
  cfg.eta = density(rng, {o.env_dim});
  cfg.channel = channel(rng, o.env_dim, o.kraus_count);
  std::vector<Operator> states;
  Operator s = cfg.eta.op();
  for (std::size_t c = 0; c < o.carriers; ++c) {
    states.push_back(s);
    s = cfg.channel.apply(s);
  }
  TermList b;
  for (std::size_t l = 0; l < o.terms; ++l) b.push_back(orthogonalize(hermitian(rng, o.env_dim), states));
  std::vector<TermList> a(o.carriers);
  for (auto& terms : a)
    for (std::size_t l = 0; l < o.terms; ++l) terms.push_back(hermitian(rng, o.carrier_dim));
  cfg.couplings = CouplingSpec::uniform(std::move(a), b);
  return cfg;
}

}  // namespace corrme::random

#endif  // CORRME_RANDOM_HPP
