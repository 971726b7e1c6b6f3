#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "lcsr/jet.hpp"

namespace lcsr {

/// Global pivot tolerance for row reduction, relative to the largest entry.
inline constexpr double kPivotTolerance = 1e-10;

/// Small dense row-major matrix. Entries are always finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols);
  DenseMatrix(int rows, int cols, std::vector<double> row_major);

  static DenseMatrix identity(int n);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Matrix whose columns are the given vectors (all of length `rows`).
  static DenseMatrix from_columns(int rows, const std::vector<std::vector<double>>& columns);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  double operator()(int r, int c) const { return data_[index(r, c)]; }
  double& operator()(int r, int c) { return data_[index(r, c)]; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double> row(int r) const;
  std::vector<double> column(int c) const;

  DenseMatrix transpose() const;
  double max_abs() const;
  double frobenius_norm() const;

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
  friend std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x);

 private:
  std::size_t index(int r, int c) const;

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Basis of a linear subspace of R^n. Vectors are linearly independent.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  explicit SubspaceBasis(int ambient_dim) : ambient_dim_(ambient_dim) {}
  /// Verifies independence by rank at `tol`; throws PreconditionFailed otherwise.
  SubspaceBasis(int ambient_dim, std::vector<std::vector<double>> vectors, double tol = kPivotTolerance);

  static SubspaceBasis whole_space(int n);

  int ambient_dim() const noexcept { return ambient_dim_; }
  int dim() const noexcept { return static_cast<int>(vectors_.size()); }
  const std::vector<std::vector<double>>& vectors() const noexcept { return vectors_; }
  /// ambient_dim x dim matrix with the basis vectors as columns.
  DenseMatrix as_columns() const;

 private:
  int ambient_dim_ = 0;
  std::vector<std::vector<double>> vectors_;
};

struct RowEchelon {
  DenseMatrix reduced;           // reduced row echelon form
  std::vector<int> pivot_cols;   // one per nonzero row
  double smallest_pivot = 0.0;   // smallest accepted pivot magnitude (0 if none)
  double largest_rejected = 0.0; // largest pivot candidate treated as zero
};

/// Gauss-Jordan elimination with partial pivoting. Pivots at or below
/// tol * max|A| are treated as zero.
RowEchelon row_reduce(const DenseMatrix& a, double tol = kPivotTolerance);

int rank(const DenseMatrix& a, double tol = kPivotTolerance);

/// Unit-norm basis of {v : A v = 0}; empty when A has full column rank.
SubspaceBasis null_space(const DenseMatrix& a, double tol = kPivotTolerance);

/// Solves the square system A x = b. Throws SingularError carrying the
/// offending pivot magnitude when A is singular to tolerance.
std::vector<double> solve_linear(const DenseMatrix& a, std::span<const double> b,
                                 double tol = kPivotTolerance);

double determinant(const DenseMatrix& a);

/// Modified Gram-Schmidt; drops vectors that become numerically dependent.
std::vector<std::vector<double>> orthonormalize(const std::vector<std::vector<double>>& vectors,
                                                double tol = kPivotTolerance);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& s);

/// Largest principal angle between two subspaces of equal dimension
/// (0 iff the spans coincide).
double principal_angle_distance(const SubspaceBasis& a, const SubspaceBasis& b);

/// max over basis vectors v of |A v|.
double max_image_norm(const DenseMatrix& a, const SubspaceBasis& basis);

double norm2(std::span<const double> v);
double max_abs(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

/// Square jet matrix solve A X = B (A: n x n, B: n x m, both row-major).
/// Gauss-Jordan with partial pivoting on jet values.
std::vector<Jet2> jet_solve(std::vector<Jet2> a, std::vector<Jet2> b, int n, int m);

}  // namespace lcsr
