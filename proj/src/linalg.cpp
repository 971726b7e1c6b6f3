#include "lcsr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "lcsr/errors.hpp"

namespace lcsr {

DenseMatrix::DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw DimensionMismatch("negative matrix dimension");
  data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows < 0 || cols < 0) throw DimensionMismatch("negative matrix dimension");
  if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionMismatch("matrix data size does not match " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw NonFiniteValue("non-finite matrix entry");
  }
}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(r * c));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) throw DimensionMismatch("ragged matrix rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::from_columns(int rows, const std::vector<std::vector<double>>& columns) {
  DenseMatrix m(rows, static_cast<int>(columns.size()));
  for (int c = 0; c < m.cols(); ++c) {
    const auto& col = columns[static_cast<std::size_t>(c)];
    if (static_cast<int>(col.size()) != rows) throw DimensionMismatch("column length mismatch");
    for (int r = 0; r < rows; ++r) {
      if (!std::isfinite(col[static_cast<std::size_t>(r)])) throw NonFiniteValue("non-finite matrix entry");
      m(r, c) = col[static_cast<std::size_t>(r)];
    }
  }
  return m;
}

std::size_t DenseMatrix::index(int r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw DimensionMismatch("matrix index out of range");
  return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
}

std::vector<double> DenseMatrix::row(int r) const {
  std::vector<double> out(static_cast<std::size_t>(cols_));
  for (int c = 0; c < cols_; ++c) out[static_cast<std::size_t>(c)] = (*this)(r, c);
  return out;
}

std::vector<double> DenseMatrix::column(int c) const {
  std::vector<double> out(static_cast<std::size_t>(rows_));
  for (int r = 0; r < rows_; ++r) out[static_cast<std::size_t>(r)] = (*this)(r, c);
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double DenseMatrix::max_abs() const { return lcsr::max_abs(data_); }

double DenseMatrix::frobenius_norm() const { return norm2(data_); }

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product dimension mismatch");
  DenseMatrix p(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) p(i, j) += aik * b(k, j);
    }
  }
  return p;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix sum dimension mismatch");
  DenseMatrix s = a;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) s(i, j) += b(i, j);
  }
  return s;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix difference dimension mismatch");
  DenseMatrix s = a;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) s(i, j) -= b(i, j);
  }
  return s;
}

std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x) {
  if (static_cast<int>(x.size()) != a.cols()) throw DimensionMismatch("matrix-vector dimension mismatch");
  std::vector<double> y(static_cast<std::size_t>(a.rows()), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

SubspaceBasis::SubspaceBasis(int ambient_dim, std::vector<std::vector<double>> vectors, double tol)
    : ambient_dim_(ambient_dim), vectors_(std::move(vectors)) {
  for (const auto& v : vectors_) {
    if (static_cast<int>(v.size()) != ambient_dim_) throw DimensionMismatch("basis vector length mismatch");
  }
  if (!vectors_.empty() && rank(DenseMatrix::from_columns(ambient_dim_, vectors_), tol) != dim()) {
    throw PreconditionFailed("subspace basis vectors are linearly dependent");
  }
}

SubspaceBasis SubspaceBasis::whole_space(int n) {
  std::vector<std::vector<double>> e;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    e.push_back(std::move(v));
  }
  return SubspaceBasis(n, std::move(e));
}

DenseMatrix SubspaceBasis::as_columns() const { return DenseMatrix::from_columns(ambient_dim_, vectors_); }

RowEchelon row_reduce(const DenseMatrix& a, double tol) {
  RowEchelon out{a, {}, 0.0, 0.0};
  DenseMatrix& m = out.reduced;
  const double scale = a.max_abs();
  if (scale == 0.0) return out;
  const double threshold = tol * scale;
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int best = row;
    for (int r = row + 1; r < m.rows(); ++r) {
      if (std::abs(m(r, col)) > std::abs(m(best, col))) best = r;
    }
    const double pivot = std::abs(m(best, col));
    if (pivot <= threshold) {
      out.largest_rejected = std::max(out.largest_rejected, pivot);
      for (int r = row; r < m.rows(); ++r) m(r, col) = 0.0;
      continue;
    }
    if (best != row) {
      for (int c = 0; c < m.cols(); ++c) std::swap(m(row, c), m(best, c));
    }
    const double p = m(row, col);
    for (int c = col; c < m.cols(); ++c) m(row, c) /= p;
    for (int r = 0; r < m.rows(); ++r) {
      if (r == row) continue;
      const double f = m(r, col);
      if (f == 0.0) continue;
      for (int c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
      m(r, col) = 0.0;
    }
    out.smallest_pivot = out.pivot_cols.empty() ? pivot : std::min(out.smallest_pivot, pivot);
    out.pivot_cols.push_back(col);
    ++row;
  }
  return out;
}

int rank(const DenseMatrix& a, double tol) { return static_cast<int>(row_reduce(a, tol).pivot_cols.size()); }

SubspaceBasis null_space(const DenseMatrix& a, double tol) {
  const RowEchelon e = row_reduce(a, tol);
  std::vector<bool> is_pivot(static_cast<std::size_t>(a.cols()), false);
  for (int c : e.pivot_cols) is_pivot[static_cast<std::size_t>(c)] = true;
  std::vector<std::vector<double>> basis;
  for (int f = 0; f < a.cols(); ++f) {
    if (is_pivot[static_cast<std::size_t>(f)]) continue;
    std::vector<double> v(static_cast<std::size_t>(a.cols()), 0.0);
    v[static_cast<std::size_t>(f)] = 1.0;
    for (std::size_t r = 0; r < e.pivot_cols.size(); ++r) {
      v[static_cast<std::size_t>(e.pivot_cols[r])] = -e.reduced(static_cast<int>(r), f);
    }
    const double n = norm2(v);
    for (double& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  SubspaceBasis out(a.cols());
  // Free-column construction guarantees independence; skip the rank re-check.
  return basis.empty() ? out : SubspaceBasis(a.cols(), std::move(basis), 0.0);
}

std::vector<double> solve_linear(const DenseMatrix& a, std::span<const double> b, double tol) {
  const int n = a.rows();
  if (a.cols() != n) throw DimensionMismatch("solve_linear needs a square matrix");
  if (static_cast<int>(b.size()) != n) throw DimensionMismatch("right-hand side length mismatch");
  DenseMatrix aug(n, n + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = a(i, j);
    if (!std::isfinite(b[static_cast<std::size_t>(i)])) throw NonFiniteValue("non-finite right-hand side");
    aug(i, n) = b[static_cast<std::size_t>(i)];
  }
  const double scale = a.max_abs();
  if (scale == 0.0) throw SingularError("solve_linear: zero matrix", 0.0);
  const double threshold = tol * scale;
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(aug(r, col)) > std::abs(aug(best, col))) best = r;
    }
    const double pivot = std::abs(aug(best, col));
    if (pivot <= threshold) {
      throw SingularError("solve_linear: matrix singular to tolerance (pivot " + std::to_string(pivot) + ")",
                          pivot);
    }
    if (best != col) {
      for (int c = 0; c <= n; ++c) std::swap(aug(col, c), aug(best, c));
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = aug(r, col) / aug(col, col);
      if (f == 0.0) continue;
      for (int c = col; c <= n; ++c) aug(r, c) -= f * aug(col, c);
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = aug(i, n);
    for (int j = i + 1; j < n; ++j) acc -= aug(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = acc / aug(i, i);
  }
  return x;
}

double determinant(const DenseMatrix& a) {
  const int n = a.rows();
  if (a.cols() != n) throw DimensionMismatch("determinant needs a square matrix");
  DenseMatrix m = a;
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m(r, col)) > std::abs(m(best, col))) best = r;
    }
    if (m(best, col) == 0.0) return 0.0;
    if (best != col) {
      for (int c = 0; c < n; ++c) std::swap(m(col, c), m(best, c));
      det = -det;
    }
    det *= m(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      for (int c = col; c < n; ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

std::vector<std::vector<double>> orthonormalize(const std::vector<std::vector<double>>& vectors, double tol) {
  std::vector<std::vector<double>> q;
  double scale = 0.0;
  for (const auto& v : vectors) scale = std::max(scale, norm2(v));
  for (const auto& v : vectors) {
    std::vector<double> w = v;
    for (const auto& e : q) {
      const double c = dot(w, e);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * e[i];
    }
    // Second pass restores orthogonality lost to cancellation.
    for (const auto& e : q) {
      const double c = dot(w, e);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * e[i];
    }
    const double n = norm2(w);
    if (n <= tol * std::max(scale, 1e-300)) continue;
    for (double& x : w) x /= n;
    q.push_back(std::move(w));
  }
  return q;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& s) {
  const int n = s.rows();
  if (s.cols() != n) throw DimensionMismatch("eigenvalues need a square matrix");
  DenseMatrix a = s;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-300) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double principal_angle_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionMismatch("principal angles: ambient dimension mismatch");
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("principal angles: subspace dimensions " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  }
  const int k = a.dim();
  if (k == 0) return 0.0;
  const auto qa = orthonormalize(a.vectors());
  const auto qb = orthonormalize(b.vectors());
  if (static_cast<int>(qa.size()) != k || static_cast<int>(qb.size()) != k) {
    throw PreconditionFailed("principal angles: basis lost rank during orthonormalization");
  }
  // M = Qa^T Qb; cosines are the singular values of M, and the sines come from
  // R = Qa - Qb M^T with R^T R = I - M M^T. Using both keeps small angles accurate.
  DenseMatrix m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) m(i, j) = dot(qa[static_cast<std::size_t>(i)], qb[static_cast<std::size_t>(j)]);
  }
  const int n = a.ambient_dim();
  std::vector<std::vector<double>> r(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < k; ++i) {
    for (int x = 0; x < n; ++x) {
      double v = qa[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
      for (int j = 0; j < k; ++j) v -= m(i, j) * qb[static_cast<std::size_t>(j)][static_cast<std::size_t>(x)];
      r[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)] = v;
    }
  }
  DenseMatrix rtr(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) rtr(i, j) = dot(r[static_cast<std::size_t>(i)], r[static_cast<std::size_t>(j)]);
  }
  const DenseMatrix mmt = m * m.transpose();
  const double sin2 = std::max(symmetric_eigenvalues(rtr).back(), 0.0);
  const double cos2 = std::max(symmetric_eigenvalues(mmt).front(), 0.0);
  return std::atan2(std::sqrt(sin2), std::sqrt(cos2));
}

double max_image_norm(const DenseMatrix& a, const SubspaceBasis& basis) {
  double worst = 0.0;
  for (const auto& v : basis.vectors()) worst = std::max(worst, norm2(a * std::span<const double>(v)));
  return worst;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot product length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<Jet2> jet_solve(std::vector<Jet2> a, std::vector<Jet2> b, int n, int m) {
  if (static_cast<int>(a.size()) != n * n || static_cast<int>(b.size()) != n * m) {
    throw DimensionMismatch("jet_solve: operand sizes");
  }
  auto A = [&](int r, int c) -> Jet2& { return a[static_cast<std::size_t>(r * n + c)]; };
  auto B = [&](int r, int c) -> Jet2& { return b[static_cast<std::size_t>(r * m + c)]; };
  double scale = 0.0;
  for (const auto& x : a) scale = std::max(scale, std::abs(x.value()));
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(A(r, col).value()) > std::abs(A(best, col).value())) best = r;
    }
    const double pivot = std::abs(A(best, col).value());
    if (pivot <= kPivotTolerance * scale || scale == 0.0) {
      throw SingularError("jet_solve: matrix singular to tolerance", pivot);
    }
    if (best != col) {
      for (int c = 0; c < n; ++c) std::swap(A(col, c), A(best, c));
      for (int c = 0; c < m; ++c) std::swap(B(col, c), B(best, c));
    }
    const Jet2 inv_p = inv(A(col, col));
    for (int c = 0; c < n; ++c) A(col, c) *= inv_p;
    for (int c = 0; c < m; ++c) B(col, c) *= inv_p;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet2 f = A(r, col);
      for (int c = 0; c < n; ++c) A(r, c) -= f * A(col, c);
      for (int c = 0; c < m; ++c) B(r, c) -= f * B(col, c);
    }
  }
  return b;
}

}  // namespace lcsr
