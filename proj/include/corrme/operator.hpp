#ifndef CORRME_OPERATOR_HPP
#define CORRME_OPERATOR_HPP

// Dense complex operators on tensor-product spaces and the superoperators
// acting on them.
//
// Conventions used throughout the library:
//  * Kronecker products are row-major: in kron(a, b) the first factor is the
//    most significant index.
//  * Operators are vectorized by column stacking, so for X -> L X R the
//    superoperator matrix is kron(R^T, L).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace corrme {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<std::size_t>;

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr Complex kI{0.0, 1.0};

/// Raised when a computed object breaks an invariant it is supposed to hold
/// (trace, positivity, Hermiticity). Bad inputs use std::invalid_argument.
class PropertyViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string dims_string(const Dims& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

class Operator {
 public:
  Operator() : dims_{1}, m_(Matrix::Identity(1, 1)) {}

  Operator(Dims dims, Matrix m) : dims_(std::move(dims)), m_(std::move(m)) {
    if (dims_.empty()) throw std::invalid_argument("Operator: empty dims");
    for (auto d : dims_)
      if (d == 0) throw std::invalid_argument("Operator: zero factor dimension");
    const auto side = static_cast<Eigen::Index>(product(dims_));
    if (m_.rows() != side || m_.cols() != side)
      throw std::invalid_argument("Operator: matrix is " +
                                  std::to_string(m_.rows()) + "x" +
                                  std::to_string(m_.cols()) +
                                  " but dims " + dims_string(dims_) +
                                  " require side " + std::to_string(side));
  }

  /// Single-factor operator.
  explicit Operator(const Matrix& m) : Operator(Dims{static_cast<std::size_t>(m.rows())}, m) {}

  static Operator identity(const Dims& dims) {
    const auto n = static_cast<Eigen::Index>(product(dims));
    return {dims, Matrix::Identity(n, n)};
  }
  static Operator zero(const Dims& dims) {
    const auto n = static_cast<Eigen::Index>(product(dims));
    return {dims, Matrix::Zero(n, n)};
  }
  /// |i><j| on a single factor of dimension d.
  static Operator basis_element(std::size_t d, std::size_t i, std::size_t j) {
    Matrix m = Matrix::Zero(d, d);
    m(i, j) = 1.0;
    return Operator(std::move(m));
  }

  const Dims& dims() const { return dims_; }
  const Matrix& matrix() const { return m_; }
  std::size_t side() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t factors() const { return dims_.size(); }

  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  Complex trace() const { return m_.trace(); }
  Operator adjoint() const { return {dims_, m_.adjoint()}; }
  Operator hermitian_part() const {
    return {dims_, 0.5 * (m_ + m_.adjoint())};
  }
  /// Same entries, different factorization of the same side.
  Operator with_dims(Dims dims) const { return {std::move(dims), m_}; }

  double hermiticity_defect() const { return max_abs(m_ - m_.adjoint()); }
  bool is_hermitian(double tol = kDefaultTolerance) const {
    return hermiticity_defect() <= tol;
  }

  Operator& operator+=(const Operator& o) {
    check_side(o, "+");
    m_ += o.m_;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    check_side(o, "-");
    m_ -= o.m_;
    return *this;
  }
  Operator& operator*=(Complex c) {
    m_ *= c;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator-(const Operator& a) { return {a.dims_, -a.m_}; }
  friend Operator operator*(Complex c, Operator a) { return a *= c; }
  friend Operator operator*(Operator a, Complex c) { return a *= c; }
  friend Operator operator*(double c, Operator a) { return a *= Complex(c); }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.check_side(b, "*");
    return {a.dims_, a.m_ * b.m_};
  }

 private:
  void check_side(const Operator& o, const char* what) const {
    if (o.side() != side())
      throw std::invalid_argument(std::string("Operator ") + what +
                                  ": side mismatch " + std::to_string(side()) +
                                  " vs " + std::to_string(o.side()));
  }

  Dims dims_;
  Matrix m_;
};

inline double max_abs(const Operator& x) { return max_abs(x.matrix()); }

// ---------------------------------------------------------------------------
// Factor index arithmetic

namespace detail {

/// Row-major strides of a multi-index over `dims`.
inline std::vector<std::size_t> strides(const Dims& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t f = dims.size(); f-- > 1;) s[f - 1] = s[f] * dims[f];
  return s;
}

/// Splits every full index into (index over `selected` factors, index over the
/// remaining factors). Both sub-indices are row-major in original factor order
/// for the remainder and in `selected` order for the selection.
struct FactorSplit {
  std::vector<std::size_t> selected_index;
  std::vector<std::size_t> rest_index;
  std::size_t selected_side = 1;
  std::size_t rest_side = 1;

  FactorSplit(const Dims& dims, std::span<const std::size_t> selected) {
    std::vector<bool> is_sel(dims.size(), false);
    for (auto f : selected) {
      if (f >= dims.size())
        throw std::invalid_argument("factor index " + std::to_string(f) +
                                    " out of range for dims " +
                                    dims_string(dims));
      if (is_sel[f])
        throw std::invalid_argument("factor index " + std::to_string(f) +
                                    " repeated");
      is_sel[f] = true;
    }
    Dims rest_dims, sel_dims;
    std::vector<std::size_t> rest_factors;
    for (std::size_t f = 0; f < dims.size(); ++f)
      if (!is_sel[f]) {
        rest_factors.push_back(f);
        rest_dims.push_back(dims[f]);
      }
    for (auto f : selected) sel_dims.push_back(dims[f]);
    selected_side = product(sel_dims);
    rest_side = product(rest_dims);
    const auto sel_strides = strides(sel_dims);
    const auto rest_strides = strides(rest_dims);
    const auto full_strides = strides(dims);
    const std::size_t n = product(dims);
    selected_index.resize(n);
    rest_index.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t s = 0, r = 0;
      for (std::size_t k = 0; k < selected.size(); ++k)
        s += (i / full_strides[selected[k]]) % dims[selected[k]] * sel_strides[k];
      for (std::size_t k = 0; k < rest_factors.size(); ++k)
        r += (i / full_strides[rest_factors[k]]) % dims[rest_factors[k]] *
             rest_strides[k];
      selected_index[i] = s;
      rest_index[i] = r;
    }
  }

  /// full[r][s] = full index with rest index r and selected index s.
  std::vector<std::vector<std::size_t>> by_rest() const {
    std::vector<std::vector<std::size_t>> out(
        rest_side, std::vector<std::size_t>(selected_side));
    for (std::size_t i = 0; i < selected_index.size(); ++i)
      out[rest_index[i]][selected_index[i]] = i;
    return out;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Core operations

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Operator kron(const Operator& a, const Operator& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return {std::move(dims), kron(a.matrix(), b.matrix())};
}

inline Operator kron(std::span<const Operator> ops) {
  if (ops.empty()) throw std::invalid_argument("kron: empty operator list");
  Operator out = ops.front();
  for (std::size_t i = 1; i < ops.size(); ++i) out = kron(out, ops[i]);
  return out;
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their
/// original order; an empty `keep` gives the 1x1 full trace.
inline Operator partial_trace(const Operator& x, std::vector<std::size_t> keep) {
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
    throw std::invalid_argument("partial_trace: repeated factor index");
  const detail::FactorSplit split(x.dims(), keep);
  Dims out_dims;
  for (auto f : keep) out_dims.push_back(x.dims()[f]);
  if (out_dims.empty()) out_dims = {1};
  const auto groups = split.by_rest();
  const auto n = static_cast<Eigen::Index>(split.selected_side);
  Matrix out = Matrix::Zero(n, n);
  const Matrix& m = x.matrix();
  for (const auto& g : groups)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        out(a, b) += m(static_cast<Eigen::Index>(g[a]),
                       static_cast<Eigen::Index>(g[b]));
  return {std::move(out_dims), std::move(out)};
}

/// Lifts `op`, which acts on the listed factors (in the listed order), to the
/// full space with factor dimensions `dims`.
inline Operator embed(const Operator& op, std::span<const std::size_t> factors,
                      const Dims& dims) {
  const detail::FactorSplit split(dims, factors);
  if (split.selected_side != op.side())
    throw std::invalid_argument("embed: operator side " +
                                std::to_string(op.side()) +
                                " does not match selected factors");
  const auto groups = split.by_rest();
  const auto full = static_cast<Eigen::Index>(product(dims));
  Matrix out = Matrix::Zero(full, full);
  const Matrix& m = op.matrix();
  const auto n = static_cast<Eigen::Index>(split.selected_side);
  for (const auto& g : groups)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        out(static_cast<Eigen::Index>(g[a]), static_cast<Eigen::Index>(g[b])) =
            m(a, b);
  return {dims, std::move(out)};
}

inline Operator embed(const Operator& op, std::initializer_list<std::size_t> factors,
                      const Dims& dims) {
  return embed(op, std::span<const std::size_t>(factors.begin(), factors.size()),
               dims);
}

/// exp(-i s h) for Hermitian h, by eigendecomposition.
inline Operator expm_hermitian(const Operator& h, double s,
                               double tol = kDefaultTolerance) {
  if (!h.is_hermitian(tol))
    throw std::invalid_argument("expm_hermitian: input is not Hermitian (defect " +
                                std::to_string(h.hermiticity_defect()) + ")");
  const Eigen::SelfAdjointEigenSolver<Matrix> es(h.hermitian_part().matrix());
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases(i) = std::exp(-kI * (s * es.eigenvalues()(i)));
  const Matrix& v = es.eigenvectors();
  return {h.dims(), v * phases.asDiagonal() * v.adjoint()};
}

enum class Bracket { commutator, anticommutator };

inline Operator bracket(const Operator& a, const Operator& b, Bracket kind) {
  if (a.side() != b.side())
    throw std::invalid_argument("bracket: side mismatch");
  return kind == Bracket::commutator ? a * b - b * a : a * b + b * a;
}
inline Operator commutator(const Operator& a, const Operator& b) {
  return bracket(a, b, Bracket::commutator);
}
inline Operator anticommutator(const Operator& a, const Operator& b) {
  return bracket(a, b, Bracket::anticommutator);
}

inline Eigen::VectorXd hermitian_eigenvalues(const Operator& x) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(x.hermitian_part().matrix(),
                                               Eigen::EigenvaluesOnly)
      .eigenvalues();
}

/// Smallest eigenvalue of the Hermitian part.
inline double min_eigenvalue(const Operator& x) {
  return hermitian_eigenvalues(x).minCoeff();
}

/// Trace norm of a Hermitian (or Hermitian-part of) operator.
inline double trace_norm_hermitian(const Operator& x) {
  return hermitian_eigenvalues(x).cwiseAbs().sum();
}

/// Trace norm of an arbitrary operator (sum of singular values).
inline double trace_norm(const Operator& x) {
  return Eigen::JacobiSVD<Matrix>(x.matrix()).singularValues().sum();
}

/// 1/2 * sum |eig(rho - sigma)|.
inline double trace_distance(const Operator& rho, const Operator& sigma) {
  if (rho.side() != sigma.side())
    throw std::invalid_argument("trace_distance: side mismatch");
  return 0.5 * trace_norm_hermitian(rho - sigma);
}

// ---------------------------------------------------------------------------
// Vectorization and superoperators

/// Column-stacked vec(X).
inline Vector vec(const Operator& x) {
  return Eigen::Map<const Vector>(x.matrix().data(), x.matrix().size());
}

inline Operator unvec(const Vector& v, const Dims& dims) {
  const auto n = static_cast<Eigen::Index>(product(dims));
  if (v.size() != n * n) throw std::invalid_argument("unvec: size mismatch");
  return {dims, Eigen::Map<const Matrix>(v.data(), n, n)};
}

class Superoperator {
 public:
  Superoperator() : Superoperator(Dims{1}, Dims{1}, Matrix::Identity(1, 1)) {}

  Superoperator(Dims in_dims, Dims out_dims, Matrix m)
      : in_dims_(std::move(in_dims)), out_dims_(std::move(out_dims)),
        m_(std::move(m)) {
    const auto in = static_cast<Eigen::Index>(product(in_dims_));
    const auto out = static_cast<Eigen::Index>(product(out_dims_));
    if (m_.rows() != out * out || m_.cols() != in * in)
      throw std::invalid_argument("Superoperator: matrix shape does not match dims");
  }
  Superoperator(Dims dims, Matrix m) : Superoperator(dims, dims, std::move(m)) {}

  static Superoperator identity(const Dims& dims) {
    const auto n = static_cast<Eigen::Index>(product(dims) * product(dims));
    return {dims, Matrix::Identity(n, n)};
  }
  static Superoperator zero(const Dims& dims) {
    const auto n = static_cast<Eigen::Index>(product(dims) * product(dims));
    return {dims, Matrix::Zero(n, n)};
  }
  /// X -> left * X * right.
  static Superoperator sandwich(const Operator& left, const Operator& right) {
    if (left.side() != right.side())
      throw std::invalid_argument("sandwich: side mismatch");
    return {left.dims(), kron(right.matrix().transpose(), left.matrix())};
  }
  static Superoperator left_multiply(const Operator& a) {
    return sandwich(a, Operator::identity(a.dims()));
  }
  static Superoperator right_multiply(const Operator& a) {
    return sandwich(Operator::identity(a.dims()), a);
  }
  static Superoperator from_kraus(std::span<const Operator> kraus) {
    if (kraus.empty()) throw std::invalid_argument("from_kraus: empty list");
    Superoperator out = zero(kraus.front().dims());
    for (const auto& k : kraus) out += sandwich(k, k.adjoint());
    return out;
  }

  const Dims& in_dims() const { return in_dims_; }
  const Dims& out_dims() const { return out_dims_; }
  const Matrix& matrix() const { return m_; }

  Operator apply(const Operator& x) const {
    if (x.side() != product(in_dims_))
      throw std::invalid_argument("Superoperator::apply: input side " +
                                  std::to_string(x.side()) + " expected " +
                                  std::to_string(product(in_dims_)));
    return unvec(m_ * vec(x), out_dims_);
  }
  Operator operator()(const Operator& x) const { return apply(x); }

  /// Hilbert-Schmidt adjoint.
  Superoperator adjoint() const { return {out_dims_, in_dims_, m_.adjoint()}; }

  /// max-norm of adjoint(I_out) - I_in.
  double trace_preservation_defect() const {
    return max_abs(adjoint().apply(Operator::identity(out_dims_)) -
                   Operator::identity(in_dims_));
  }
  bool is_trace_preserving(double tol = kDefaultTolerance) const {
    return trace_preservation_defect() <= tol;
  }

  Superoperator& operator+=(const Superoperator& o) {
    check_shape(o);
    m_ += o.m_;
    return *this;
  }
  Superoperator& operator-=(const Superoperator& o) {
    check_shape(o);
    m_ -= o.m_;
    return *this;
  }
  Superoperator& operator*=(Complex c) {
    m_ *= c;
    return *this;
  }
  friend Superoperator operator+(Superoperator a, const Superoperator& b) {
    return a += b;
  }
  friend Superoperator operator-(Superoperator a, const Superoperator& b) {
    return a -= b;
  }
  friend Superoperator operator*(Complex c, Superoperator a) { return a *= c; }
  friend Superoperator operator*(double c, Superoperator a) {
    return a *= Complex(c);
  }

  /// Composition: (a * b)(X) = a(b(X)).
  friend Superoperator operator*(const Superoperator& a, const Superoperator& b) {
    if (product(a.in_dims_) != product(b.out_dims_))
      throw std::invalid_argument("Superoperator composition: dims mismatch");
    return {b.in_dims_, a.out_dims_, a.m_ * b.m_};
  }

 private:
  void check_shape(const Superoperator& o) const {
    if (o.m_.rows() != m_.rows() || o.m_.cols() != m_.cols())
      throw std::invalid_argument("Superoperator: shape mismatch");
  }

  Dims in_dims_;
  Dims out_dims_;
  Matrix m_;
};

inline Superoperator compose(const Superoperator& after, const Superoperator& before) {
  return after * before;
}

inline Superoperator power(const Superoperator& s, std::size_t m) {
  Superoperator out = Superoperator::identity(s.in_dims());
  for (std::size_t i = 0; i < m; ++i) out = s * out;
  return out;
}

/// Superoperator acting on the listed factors, identity on the rest.
inline Superoperator embed(const Superoperator& s, std::span<const std::size_t> factors,
                           const Dims& dims) {
  // Built column by column from the action on basis elements |i><j|.
  const auto n = static_cast<Eigen::Index>(product(dims));
  Matrix out(n * n, n * n);
  const detail::FactorSplit split(dims, factors);
  const auto groups = split.by_rest();
  const auto sel = static_cast<Eigen::Index>(split.selected_side);
  const Matrix& local_cols = s.matrix();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector col = Vector::Zero(n * n);
      const auto ri = split.rest_index[i], rj = split.rest_index[j];
      const auto si = static_cast<Eigen::Index>(split.selected_index[i]);
      const auto sj = static_cast<Eigen::Index>(split.selected_index[j]);
      const Eigen::Index local = sj * sel + si;
      for (Eigen::Index b = 0; b < sel; ++b)
        for (Eigen::Index a = 0; a < sel; ++a) {
          const Complex v = local_cols(b * sel + a, local);
          if (v == Complex(0.0)) continue;
          const auto ga = static_cast<Eigen::Index>(groups[ri][a]);
          const auto gb = static_cast<Eigen::Index>(groups[rj][b]);
          col(gb * n + ga) = v;
        }
      out.col(j * n + i) = col;
    }
  return {dims, std::move(out)};
}

// ---------------------------------------------------------------------------
// Named single-factor operators

namespace ops {

inline Operator identity(std::size_t d) { return Operator::identity({d}); }

inline Operator sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return Operator(m);
}
inline Operator sigma_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return Operator(m);
}
inline Operator sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return Operator(m);
}
/// Truncated bosonic annihilation operator on d Fock levels.
inline Operator annihilation(std::size_t d) {
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t n = 1; n < d; ++n)
    m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(m);
}
inline Operator creation(std::size_t d) { return annihilation(d).adjoint(); }
/// (a + a^dagger)/sqrt(2), truncated.
inline Operator position_quadrature(std::size_t d) {
  const auto a = annihilation(d);
  return (1.0 / std::sqrt(2.0)) * (a + a.adjoint());
}
/// (a - a^dagger)/(i sqrt(2)), truncated.
inline Operator momentum_quadrature(std::size_t d) {
  const auto a = annihilation(d);
  return Complex(0.0, -1.0 / std::sqrt(2.0)) * (a - a.adjoint());
}
inline Operator projector(std::size_t d, std::size_t k) {
  return Operator::basis_element(d, k, k);
}

}  // namespace ops

}  // namespace corrme

#endif  // CORRME_OPERATOR_HPP
