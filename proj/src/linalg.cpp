#include "mvb/linalg.hpp"

#include <numeric>

#include "mvb/errors.hpp"

namespace mvb {

Vector zeros(std::size_t n) { return Vector(n); }

Vector basis_vector(std::size_t n, std::size_t i) {
  Vector v(n);
  v.at(i) = 1;
  return v;
}

bool is_zero(const Vector& v) {
  for (const auto& x : v)
    if (!x.is_zero()) return false;
  return true;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector sizes differ");
  Vector r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vector scaled(const Rational& s, const Vector& v) {
  Vector r(v);
  for (auto& x : r) x *= s;
  return r;
}

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

Vector Matrix::apply(const Vector& v) const {
  if (v.size() != cols_) throw DimensionMismatch("matrix/vector size mismatch");
  Vector r(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (!data_[i * cols_ + j].is_zero()) r[i].add_product(data_[i * cols_ + j], v[j]);
  return r;
}

Vector Matrix::column(std::size_t c) const {
  Vector r(rows_);
  for (std::size_t i = 0; i < rows_; ++i) r[i] = (*this)(i, c);
  return r;
}

void Matrix::set_column(std::size_t c, const Vector& v) {
  if (v.size() != rows_) throw DimensionMismatch("column size mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, c) = v[i];
}

bool Matrix::is_identity() const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if ((*this)(i, j) != Rational(i == j ? 1 : 0)) return false;
  return true;
}

bool Matrix::is_zero() const { return mvb::is_zero(data_); }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product size mismatch");
  Matrix r(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Rational& x = a(i, k);
      if (x.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) r(i, j).add_product(x, b(k, j));
    }
  return r;
}

MultiTensor::MultiTensor(std::size_t out_dim, std::vector<std::size_t> in_dims)
    : out_(out_dim), in_(std::move(in_dims)) {
  in_volume_ = in_volume();
  entries_.assign(out_ * in_volume_, Rational());
}

MultiTensor::MultiTensor(std::size_t out_dim, std::vector<std::size_t> in_dims,
                         std::vector<Rational> entries)
    : out_(out_dim), in_(std::move(in_dims)), entries_(std::move(entries)) {
  in_volume_ = in_volume();
  if (entries_.size() != out_ * in_volume_)
    throw DimensionMismatch("tensor has " + std::to_string(entries_.size()) + " entries, expected " +
                            std::to_string(out_ * in_volume_));
}

MultiTensor MultiTensor::from_matrix(const Matrix& m) {
  return MultiTensor(m.rows(), {m.cols()}, m.data());
}

MultiTensor MultiTensor::identity(std::size_t n) { return from_matrix(Matrix::identity(n)); }

std::size_t MultiTensor::in_volume() const {
  std::size_t v = 1;
  for (auto d : in_) v *= d;
  return v;
}

Matrix MultiTensor::as_matrix() const {
  if (in_.size() != 1) throw DimensionMismatch("tensor is not a matrix");
  Matrix m(out_, in_[0]);
  for (std::size_t i = 0; i < out_; ++i)
    for (std::size_t j = 0; j < in_[0]; ++j) m(i, j) = entries_[i * in_[0] + j];
  return m;
}

bool MultiTensor::is_zero() const { return mvb::is_zero(entries_); }

bool MultiTensor::is_identity() const {
  return in_.size() == 1 && in_[0] == out_ && as_matrix().is_identity();
}

MultiTensor& MultiTensor::operator+=(const MultiTensor& o) {
  if (!same_shape(o)) throw DimensionMismatch("tensor shapes differ");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
  return *this;
}

MultiTensor MultiTensor::operator-() const {
  MultiTensor r(*this);
  for (auto& x : r.entries_) x = -x;
  return r;
}

void apply_accumulate(const MultiTensor& T, const std::vector<const Vector*>& args, Vector& out) {
  const auto& dims = T.in_dims();
  if (args.size() != dims.size()) throw DimensionMismatch("tensor arity mismatch");
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (args[i]->size() != dims[i])
      throw DimensionMismatch("argument " + std::to_string(i) + " has size " +
                              std::to_string(args[i]->size()) + ", expected " +
                              std::to_string(dims[i]));
  if (out.size() != T.out_dim()) throw DimensionMismatch("output size mismatch");
  const std::size_t vol = T.in_volume();
  if (vol == 0 || T.out_dim() == 0) return;
  for (const auto* a : args)
    if (is_zero(*a)) return;
  // weight of every flat input index: product of the argument coordinates
  std::vector<Rational> w(1, Rational(1));
  for (const auto* a : args) {
    std::vector<Rational> next;
    next.reserve(w.size() * a->size());
    for (const auto& x : w)
      for (const auto& y : *a) next.push_back(x * y);
    w.swap(next);
  }
  const auto& e = T.entries();
  for (std::size_t o = 0; o < T.out_dim(); ++o) {
    const Rational* row = e.data() + o * vol;
    for (std::size_t j = 0; j < vol; ++j)
      if (!w[j].is_zero() && !row[j].is_zero()) out[o].add_product(row[j], w[j]);
  }
}

Vector apply(const MultiTensor& T, const std::vector<const Vector*>& args) {
  Vector out(T.out_dim());
  apply_accumulate(T, args, out);
  return out;
}

Vector apply(const MultiTensor& T, const std::vector<Vector>& args) {
  std::vector<const Vector*> p;
  for (const auto& a : args) p.push_back(&a);
  return mvb::apply(T, p);
}

namespace {

// Integer rows obtained by clearing denominators row by row.
std::vector<std::vector<mpz_class>> integer_rows(const Matrix& A, const Vector* rhs,
                                                 const Matrix* rhs_block) {
  const std::size_t extra = rhs ? 1 : (rhs_block ? rhs_block->cols() : 0);
  std::vector<std::vector<mpz_class>> M(A.rows(), std::vector<mpz_class>(A.cols() + extra));
  for (std::size_t i = 0; i < A.rows(); ++i) {
    mpz_class l = 1;
    auto take = [&](const Rational& x) { mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.raw().get_den_mpz_t()); };
    for (std::size_t j = 0; j < A.cols(); ++j) take(A(i, j));
    if (rhs) take((*rhs)[i]);
    if (rhs_block)
      for (std::size_t j = 0; j < extra; ++j) take((*rhs_block)(i, j));
    auto conv = [&](const Rational& x) { return mpz_class(x.raw().get_num() * (l / x.raw().get_den())); };
    for (std::size_t j = 0; j < A.cols(); ++j) M[i][j] = conv(A(i, j));
    if (rhs) M[i][A.cols()] = conv((*rhs)[i]);
    if (rhs_block)
      for (std::size_t j = 0; j < extra; ++j) M[i][A.cols() + j] = conv((*rhs_block)(i, j));
  }
  return M;
}

// Fraction-free (Bareiss) forward elimination restricted to the first
// `pivot_cols` columns. Returns pivot columns; M becomes row echelon.
std::vector<std::size_t> bareiss(std::vector<std::vector<mpz_class>>& M, std::size_t pivot_cols) {
  const std::size_t rows = M.size();
  const std::size_t cols = rows ? M[0].size() : 0;
  std::vector<std::size_t> pivots;
  mpz_class prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && M[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(M[p], M[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        mpz_class t = M[r][c] * M[i][j] - M[i][c] * M[r][j];
        mpz_divexact(M[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      M[i][c] = 0;
    }
    prev = M[r][c];
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

// Back substitution on an echelon system; free variables take the given values.
Vector back_substitute(const std::vector<std::vector<mpz_class>>& M,
                       const std::vector<std::size_t>& pivots, std::size_t n,
                       std::size_t rhs_col, bool has_rhs, const Vector& free_values) {
  Vector x(free_values);
  x.resize(n);
  for (std::size_t k = pivots.size(); k-- > 0;) {
    const std::size_t c = pivots[k];
    Rational s = has_rhs ? Rational(mpq_class(M[k][rhs_col])) : Rational();
    for (std::size_t j = c + 1; j < n; ++j)
      if (M[k][j] != 0) s -= Rational(mpq_class(M[k][j])) * x[j];
    x[c] = s / Rational(mpq_class(M[k][c]));
  }
  return x;
}

}  // namespace

std::size_t rank(const Matrix& A) {
  auto M = integer_rows(A, nullptr, nullptr);
  return bareiss(M, A.cols()).size();
}

std::vector<Vector> kernel_basis(const Matrix& A) {
  auto M = integer_rows(A, nullptr, nullptr);
  auto pivots = bareiss(M, A.cols());
  std::vector<bool> is_pivot(A.cols(), false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<Vector> basis;
  for (std::size_t f = 0; f < A.cols(); ++f) {
    if (is_pivot[f]) continue;
    Vector free(A.cols());
    free[f] = 1;
    basis.push_back(back_substitute(M, pivots, A.cols(), 0, false, free));
  }
  return basis;
}

bool image_contains(const Matrix& A, const Vector& v) {
  if (v.size() != A.rows()) throw DimensionMismatch("vector size does not match matrix rows");
  auto M = integer_rows(A, &v, nullptr);
  auto pivots = bareiss(M, A.cols() + 1);
  return pivots.empty() || pivots.back() != A.cols();
}

// Some solution of A x = b, free variables set to zero.
Vector solve_linear(const Matrix& A, const Vector& b) {
  if (b.size() != A.rows()) throw DimensionMismatch("right-hand side size mismatch");
  auto M = integer_rows(A, &b, nullptr);
  auto pivots = bareiss(M, A.cols() + 1);
  if (!pivots.empty() && pivots.back() == A.cols()) throw SingularMatrix("system has no solution");
  return back_substitute(M, pivots, A.cols(), A.cols(), true, Vector(A.cols()));
}

Matrix inverse(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("inverse needs a square matrix");
  const std::size_t n = A.rows();
  Matrix I = Matrix::identity(n);
  auto M = integer_rows(A, nullptr, &I);
  auto pivots = bareiss(M, n);
  if (pivots.size() != n) throw SingularMatrix("matrix is singular");
  Matrix R(n, n);
  for (std::size_t c = 0; c < n; ++c)
    R.set_column(c, back_substitute(M, pivots, n, n + c, true, Vector(n)));
  return R;
}

Vector solve_linear(const MultiTensor& A, const Vector& b) { return solve_linear(A.as_matrix(), b); }
std::vector<Vector> kernel_basis(const MultiTensor& A) { return kernel_basis(A.as_matrix()); }
bool image_contains(const MultiTensor& A, const Vector& v) { return image_contains(A.as_matrix(), v); }

Matrix matrix_from_columns(std::size_t rows, const std::vector<Vector>& columns) {
  Matrix m(rows, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) m.set_column(c, columns[c]);
  return m;
}

}  // namespace mvb
