// Minimal dense complex linear algebra for the tiny Hilbert spaces used by
// the FTAD simulator (dimensions 2, 4 and 8). Row-major storage, value
// semantics, natural logarithms throughout.
//
// Tensor index convention, inherited by every other module: in a product
// space the SYSTEM index is the slow one and the ENVIRONMENT index is the
// fast one, i.e. |s,e> maps to flat index s*dim_E + e.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftadsim {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, Complex(0.0, 0.0)) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
  }

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
    if (entries_.size() != rows_ * cols_) {
      throw std::invalid_argument("ComplexMatrix: entry count does not match dimensions");
    }
    for (const Complex& z : entries_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw std::invalid_argument("ComplexMatrix: entries must be finite");
      }
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> values) {
    ComplexMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<const Complex> data() const { return entries_; }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o, "operator+=");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o, "operator-=");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
    return *this;
  }

  ComplexMatrix& operator*=(Complex z) {
    for (Complex& e : entries_) e *= z;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(Complex z, ComplexMatrix m) { return m *= z; }
  friend ComplexMatrix operator*(ComplexMatrix m, Complex z) { return m *= z; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) {
      throw std::invalid_argument("ComplexMatrix: incompatible shapes in product");
    }
    ComplexMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex(0.0, 0.0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          c(i, j) += aik * b(k, j);
        }
      }
    }
    return c;
  }

  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  void require_same_shape(const ComplexMatrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument(std::string("ComplexMatrix: shape mismatch in ") + op);
    }
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<Complex> entries_;
};

inline ComplexMatrix dagger(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(c, r) = std::conj(m(r, c));
    }
  }
  return out;
}

inline Complex trace(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("trace: matrix must be square");
  }
  Complex t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

inline double max_abs(const ComplexMatrix& m) {
  double v = 0.0;
  for (const Complex& z : m.data()) v = std::max(v, std::abs(z));
  return v;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  double v = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      v = std::max(v, std::abs(a(r, c) - b(r, c)));
    }
  }
  return v;
}

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  return max_abs_diff(a, b) <= tol;
}

// Kronecker product with the (system slow, environment fast) convention.
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar) {
    for (std::size_t ac = 0; ac < a.cols(); ++ac) {
      const Complex av = a(ar, ac);
      if (av == Complex(0.0, 0.0)) continue;
      for (std::size_t br = 0; br < b.rows(); ++br) {
        for (std::size_t bc = 0; bc < b.cols(); ++bc) {
          out(ar * b.rows() + br, ac * b.cols() + bc) = av * b(br, bc);
        }
      }
    }
  }
  return out;
}

// Trace over the fast (environment) qubit of a 4x4 operator on S (x) E.
inline ComplexMatrix partial_trace_env(const ComplexMatrix& m) {
  if (m.rows() != 4 || m.cols() != 4) {
    throw std::invalid_argument("partial_trace_env: expected a 4x4 matrix");
  }
  ComplexMatrix out(2, 2);
  for (std::size_t sr = 0; sr < 2; ++sr) {
    for (std::size_t sc = 0; sc < 2; ++sc) {
      out(sr, sc) = m(2 * sr + 0, 2 * sc + 0) + m(2 * sr + 1, 2 * sc + 1);
    }
  }
  return out;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = r; c < m.cols(); ++c) {
      if (std::abs(m(r, c) - std::conj(m(c, r))) > tol) return false;
    }
  }
  return true;
}

inline bool is_unitary(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs_diff(dagger(m) * m, ComplexMatrix::identity(m.rows())) <= tol;
}

// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
// returned sorted ascending. Adequate for the fixed dimensions <= 8 used
// here; not meant as a general-purpose solver.
inline std::vector<double> eigvals_hermitian(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("eigvals_hermitian: matrix must be square");
  }
  const double scale = std::max(1.0, max_abs(m));
  if (!is_hermitian(m, 1e-12 * scale)) {
    throw std::invalid_argument("eigvals_hermitian: matrix is not Hermitian");
  }
  const std::size_t n = m.rows();
  ComplexMatrix a = m;

  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    }
    if (off <= 1e-15 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-18 * scale) continue;

        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const Complex phase = apq / mag;

        // Rotation angle zeroing the (p,q) element of U^dag A U for
        // U = [[c, -s*phase],[s*conj(phase), c]] on the (p,q) plane.
        const double tau = (aqq - app) / (2.0 * mag);
        const double sign = (tau >= 0.0) ? 1.0 : -1.0;
        const double t = tau - sign * std::sqrt(tau * tau + 1.0);
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // Column update: A <- A U.
        for (std::size_t r = 0; r < n; ++r) {
          const Complex arp = a(r, p);
          const Complex arq = a(r, q);
          a(r, p) = c * arp + s * std::conj(phase) * arq;
          a(r, q) = -s * phase * arp + c * arq;
        }
        // Row update: A <- U^dag A.
        for (std::size_t col = 0; col < n; ++col) {
          const Complex apc = a(p, col);
          const Complex aqc = a(q, col);
          a(p, col) = c * apc + s * phase * aqc;
          a(q, col) = -s * std::conj(phase) * apc + c * aqc;
        }
      }
    }
  }

  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

class PureState {
 public:
  PureState(std::size_t dim, std::vector<Complex> amplitudes, bool subnormalized = false)
      : dim_(dim), amplitudes_(std::move(amplitudes)), subnormalized_(subnormalized) {
    if (dim_ == 0 || amplitudes_.size() != dim_) {
      throw std::invalid_argument("PureState: amplitude count does not match dimension");
    }
    double norm2 = 0.0;
    for (const Complex& z : amplitudes_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw std::invalid_argument("PureState: amplitudes must be finite");
      }
      norm2 += std::norm(z);
    }
    if (!subnormalized_ && std::abs(norm2 - 1.0) > 1e-12) {
      throw std::invalid_argument("PureState: not normalized (pass subnormalized=true to allow)");
    }
  }

  static PureState basis(std::size_t dim, std::size_t k) {
    std::vector<Complex> a(dim, Complex(0.0, 0.0));
    a.at(k) = 1.0;
    return PureState(dim, std::move(a));
  }

  std::size_t dim() const { return dim_; }
  bool subnormalized() const { return subnormalized_; }
  const Complex& amplitude(std::size_t i) const { return amplitudes_.at(i); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }

  double squared_norm() const {
    double n = 0.0;
    for (const Complex& z : amplitudes_) n += std::norm(z);
    return n;
  }

 private:
  std::size_t dim_;
  std::vector<Complex> amplitudes_;
  bool subnormalized_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw std::invalid_argument("DensityMatrix: matrix must be square");
    }
    if (!is_hermitian(matrix_, 1e-12)) {
      throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    }
    if (std::abs(trace(matrix_) - Complex(1.0, 0.0)) > 1e-12) {
      throw std::invalid_argument("DensityMatrix: trace must be 1");
    }
    for (double ev : eigvals_hermitian(matrix_)) {
      if (ev < -1e-10) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
      }
    }
  }

  static DensityMatrix diagonal(std::span<const double> populations) {
    return DensityMatrix(ComplexMatrix::diagonal(populations));
  }

  static DensityMatrix from_pure(const PureState& psi) {
    ComplexMatrix m(psi.dim(), psi.dim());
    for (std::size_t r = 0; r < psi.dim(); ++r) {
      for (std::size_t c = 0; c < psi.dim(); ++c) {
        m(r, c) = psi.amplitude(r) * std::conj(psi.amplitude(c));
      }
    }
    return DensityMatrix(std::move(m));
  }

  std::size_t dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

// Von Neumann entropy -tr(rho ln rho) in nats, with the 0*ln(0) = 0
// convention. Eigenvalues in [-1e-10, 0) are clipped to zero; anything more
// negative is treated as an invalid state.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double ev : eigvals_hermitian(rho.matrix())) {
    if (ev < -1e-10) {
      throw std::invalid_argument("von_neumann_entropy: negative eigenvalue beyond tolerance");
    }
    if (ev > 0.0) s -= ev * std::log(ev);
  }
  return std::max(s, 0.0);
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix x(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  return x;
}

// Rescales a matrix by a unit phase so its largest-magnitude entry becomes
// real and positive. Used where two routes agree only up to a global phase
// (the blocked-path operators and the dilation-extracted Kraus operators).
inline ComplexMatrix phase_normalized(const ComplexMatrix& m) {
  double best = 0.0;
  Complex pivot(0.0, 0.0);
  for (const Complex& z : m.data()) {
    if (std::abs(z) > best) {
      best = std::abs(z);
      pivot = z;
    }
  }
  if (best == 0.0) return m;
  return m * (std::conj(pivot) / best);
}

}  // namespace ftadsim
