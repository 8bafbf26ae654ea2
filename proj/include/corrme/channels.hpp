#ifndef CORRME_CHANNELS_HPP
#define CORRME_CHANNELS_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corrme/json_io.hpp"
#include "corrme/operator.hpp"

namespace corrme {

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  explicit DensityMatrix(Operator op, double tol = kDefaultTolerance)
      : op_(std::move(op)) {
    if (!op_.is_hermitian(tol))
      throw std::invalid_argument("DensityMatrix: not Hermitian (defect " +
                                  std::to_string(op_.hermiticity_defect()) + ")");
    const double tr_err = std::abs(op_.trace() - Complex(1.0));
    if (tr_err > tol)
      throw std::invalid_argument("DensityMatrix: trace differs from 1 by " +
                                  std::to_string(tr_err));
    const double lmin = min_eigenvalue(op_);
    if (lmin < -tol)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                  std::to_string(lmin));
  }

  /// |psi><psi| for a (not necessarily normalized) vector.
  static DensityMatrix pure(const Vector& psi, Dims dims) {
    const Vector v = psi / psi.norm();
    return DensityMatrix(Operator(std::move(dims), v * v.adjoint()));
  }
  static DensityMatrix basis(Dims dims, std::size_t index) {
    const auto n = static_cast<Eigen::Index>(product(dims));
    Vector v = Vector::Zero(n);
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return pure(v, std::move(dims));
  }
  static DensityMatrix maximally_mixed(Dims dims) {
    const auto n = static_cast<double>(product(dims));
    return DensityMatrix((1.0 / n) * Operator::identity(dims));
  }

  const Operator& op() const { return op_; }
  std::size_t side() const { return op_.side(); }
  const Dims& dims() const { return op_.dims(); }

 private:
  Operator op_;
};

inline DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.op(), b.op()));
}

/// A CPT map stored as Kraus operators. Completeness is not enforced at
/// construction; see validate_cpt.
class KrausChannel {
 public:
  KrausChannel() : kraus_{Operator::identity({1})} {}

  explicit KrausChannel(std::vector<Operator> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw std::invalid_argument("KrausChannel: empty Kraus list");
    for (const auto& k : kraus_)
      if (k.side() != kraus_.front().side())
        throw std::invalid_argument("KrausChannel: Kraus operators differ in side");
  }

  const std::vector<Operator>& kraus() const { return kraus_; }
  std::size_t side() const { return kraus_.front().side(); }
  const Dims& dims() const { return kraus_.front().dims(); }

  /// sum_k K x K^dagger. x need not be Hermitian or positive.
  Operator apply(const Operator& x) const {
    if (x.side() != side())
      throw std::invalid_argument("KrausChannel::apply: operator side " +
                                  std::to_string(x.side()) + " but channel side " +
                                  std::to_string(side()));
    Matrix out = Matrix::Zero(x.side(), x.side());
    for (const auto& k : kraus_) out.noalias() += k.matrix() * x.matrix() * k.matrix().adjoint();
    return {x.dims(), std::move(out)};
  }
  Operator operator()(const Operator& x) const { return apply(x); }

  /// Applies the channel m times.
  Operator apply_power(const Operator& x, std::size_t m) const {
    Operator out = x;
    for (std::size_t i = 0; i < m; ++i) out = apply(out);
    return out;
  }

  Superoperator superoperator() const { return Superoperator::from_kraus(kraus_); }

 private:
  std::vector<Operator> kraus_;
};

struct CptReport {
  double residual = 0.0;  // max-norm of sum K^dagger K - I
  double tolerance = kDefaultTolerance;
  bool pass = false;
};

inline CptReport validate_cpt(const KrausChannel& c, double tol = kDefaultTolerance) {
  Matrix sum = Matrix::Zero(c.side(), c.side());
  for (const auto& k : c.kraus()) sum.noalias() += k.matrix().adjoint() * k.matrix();
  const double r = max_abs(sum - Matrix::Identity(c.side(), c.side()));
  return {r, tol, r <= tol};
}

/// Superoperator of the m-fold composition; identity for m = 0.
inline Superoperator power(const KrausChannel& c, std::size_t m) {
  return power(c.superoperator(), m);
}

// ---------------------------------------------------------------------------
// Constructors

inline KrausChannel identity_channel(std::size_t d) {
  return KrausChannel({Operator::identity({d})});
}

/// Qubit amplitude damping with decay probability p.
inline KrausChannel amplitude_damping(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("amplitude_damping: p must lie in [0,1]");
  Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - p);
  k1(0, 1) = std::sqrt(p);
  return KrausChannel({Operator(k0), Operator(k1)});
}

/// Pure-loss beam splitter of transmissivity kappa restricted to d Fock
/// levels: <n-k|K_k|n> = sqrt(C(n,k) kappa^(n-k) (1-kappa)^k). The truncation
/// keeps exact completeness because K_k only lowers the photon number.
inline KrausChannel lossy_bosonic_channel(std::size_t d, double kappa) {
  if (d < 2) throw std::invalid_argument("lossy_bosonic_channel: need d >= 2");
  if (!(kappa >= 0.0 && kappa <= 1.0))
    throw std::invalid_argument("lossy_bosonic_channel: kappa must lie in [0,1]");
  std::vector<Operator> kraus;
  for (std::size_t k = 0; k < d; ++k) {
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t n = k; n < d; ++n) {
      const double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                                    std::lgamma(n - k + 1.0));
      m(n - k, n) = std::sqrt(binom * std::pow(kappa, static_cast<double>(n - k)) *
                              std::pow(1.0 - kappa, static_cast<double>(k)));
    }
    kraus.emplace_back(std::move(m));
  }
  return KrausChannel(std::move(kraus));
}

/// Sends every operator x to Tr(x) * eta, with Kraus operators
/// sqrt(lambda_i) |e_i><j| from the eigendecomposition of eta.
inline KrausChannel replacer_channel(const DensityMatrix& eta) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(eta.op().hermitian_part().matrix());
  const auto d = static_cast<Eigen::Index>(eta.side());
  std::vector<Operator> kraus;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lambda = std::max(0.0, es.eigenvalues()(i));
    if (lambda <= 1e-15) continue;
    for (Eigen::Index j = 0; j < d; ++j) {
      Matrix m = Matrix::Zero(d, d);
      m.col(j) = std::sqrt(lambda) * es.eigenvectors().col(i);
      kraus.emplace_back(eta.dims(), std::move(m));
    }
  }
  return KrausChannel(std::move(kraus));
}

/// x -> U x U^dagger.
inline KrausChannel unitary_channel(const Operator& u) { return KrausChannel({u}); }

/// Trace distance between c(eta) and eta.
inline double fixed_point_distance(const KrausChannel& c, const DensityMatrix& eta) {
  return trace_distance(c.apply(eta.op()), eta.op());
}

// ---------------------------------------------------------------------------
// JSON

inline Json channel_to_json(const KrausChannel& c) {
  Json kraus = Json::array();
  for (const auto& k : c.kraus()) kraus.push_back(matrix_to_json(k.matrix()));
  return Json{{"kind", "kraus"}, {"dims", c.dims()}, {"kraus", std::move(kraus)}};
}

/// Accepted kinds:
///   {"kind":"kraus", "kraus":[matrix...], "dims":[...]?}
///   {"kind":"lossy", "d":4, "kappa":0.25}
///   {"kind":"replacer", "eta": matrix}
///   {"kind":"unitary", "u": matrix}  or  {"kind":"unitary", "hamiltonian": matrix, "angle": s}
///   {"kind":"amplitude_damping", "p":0.75}
///   {"kind":"identity", "d":2}
inline KrausChannel channel_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "kraus") {
    std::vector<Operator> kraus;
    for (const auto& k : j.at("kraus")) {
      Matrix m = matrix_from_json(k);
      if (j.contains("dims"))
        kraus.emplace_back(j.at("dims").get<Dims>(), std::move(m));
      else
        kraus.emplace_back(std::move(m));
    }
    return KrausChannel(std::move(kraus));
  }
  if (kind == "lossy")
    return lossy_bosonic_channel(j.at("d").get<std::size_t>(), j.at("kappa").get<double>());
  if (kind == "replacer") return replacer_channel(DensityMatrix(operator_from_json(j.at("eta"))));
  if (kind == "unitary") {
    if (j.contains("u")) return unitary_channel(operator_from_json(j.at("u")));
    return unitary_channel(
        expm_hermitian(operator_from_json(j.at("hamiltonian")), j.at("angle").get<double>()));
  }
  if (kind == "amplitude_damping") return amplitude_damping(j.at("p").get<double>());
  if (kind == "identity") return identity_channel(j.at("d").get<std::size_t>());
  throw std::invalid_argument("unknown channel kind '" + kind + "'");
}

}  // namespace corrme

#endif  // CORRME_CHANNELS_HPP
