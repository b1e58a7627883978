#pragma once

#include <cstddef>
#include <vector>

#include "mvb/rational.hpp"

namespace mvb {

using Vector = std::vector<Rational>;

Vector zeros(std::size_t n);
Vector basis_vector(std::size_t n, std::size_t i);
bool is_zero(const Vector& v);
Vector add(const Vector& a, const Vector& b);
Vector scaled(const Rational& s, const Vector& v);

// Dense rows x cols matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<Rational>& data() const { return data_; }

  Vector apply(const Vector& v) const;
  Vector column(std::size_t c) const;
  void set_column(std::size_t c, const Vector& v);
  bool is_identity() const;
  bool is_zero() const;

  friend bool operator==(const Matrix& a, const Matrix& b) = default;
  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

// Multilinear map V_1 x ... x V_k -> W. Entries are row-major with the
// output index slowest and the last input fastest.
class MultiTensor {
 public:
  MultiTensor() = default;
  MultiTensor(std::size_t out_dim, std::vector<std::size_t> in_dims);
  MultiTensor(std::size_t out_dim, std::vector<std::size_t> in_dims, std::vector<Rational> entries);
  static MultiTensor from_matrix(const Matrix& m);
  static MultiTensor identity(std::size_t n);

  std::size_t out_dim() const { return out_; }
  const std::vector<std::size_t>& in_dims() const { return in_; }
  std::size_t arity() const { return in_.size(); }
  std::size_t in_volume() const;  // product of in_dims
  const std::vector<Rational>& entries() const { return entries_; }
  std::vector<Rational>& entries() { return entries_; }

  Rational& at(std::size_t out, std::size_t flat_in) { return entries_[out * in_volume_ + flat_in]; }
  const Rational& at(std::size_t out, std::size_t flat_in) const {
    return entries_[out * in_volume_ + flat_in];
  }

  Matrix as_matrix() const;  // requires arity 1
  bool is_zero() const;
  bool is_identity() const;
  bool same_shape(const MultiTensor& o) const { return out_ == o.out_ && in_ == o.in_; }

  MultiTensor& operator+=(const MultiTensor& o);
  MultiTensor operator-() const;

  friend bool operator==(const MultiTensor& a, const MultiTensor& b) {
    return a.out_ == b.out_ && a.in_ == b.in_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t out_ = 0;
  std::vector<std::size_t> in_;
  std::size_t in_volume_ = 1;
  std::vector<Rational> entries_;
};

Vector apply(const MultiTensor& T, const std::vector<const Vector*>& args);
Vector apply(const MultiTensor& T, const std::vector<Vector>& args);
// Adds T(args) into out.
void apply_accumulate(const MultiTensor& T, const std::vector<const Vector*>& args, Vector& out);

// Linear algebra on one-block tensors / matrices; all exact.
std::size_t rank(const Matrix& A);
std::vector<Vector> kernel_basis(const Matrix& A);
bool image_contains(const Matrix& A, const Vector& v);
Vector solve_linear(const Matrix& A, const Vector& b);
Matrix inverse(const Matrix& A);

Vector solve_linear(const MultiTensor& A, const Vector& b);
std::vector<Vector> kernel_basis(const MultiTensor& A);
bool image_contains(const MultiTensor& A, const Vector& v);

// Column-wise matrix of a linear map given by its images of basis vectors.
Matrix matrix_from_columns(std::size_t rows, const std::vector<Vector>& columns);

}  // namespace mvb
