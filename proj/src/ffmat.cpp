#include "estimlab/ffmat.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace estimlab::ffmat {

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) return false;
  }
  return true;
}

PrimeField::PrimeField(std::uint32_t q) : q_(q) {
  if (!is_prime(q)) {
    throw std::invalid_argument("q must be prime (got " + std::to_string(q) + ")");
  }
}

Elem PrimeField::inv(Elem a) const {
  if (a % q_ == 0) throw std::domain_error("zero has no inverse in F_q");
  std::int64_t r0 = q_, r1 = a, s0 = 0, s1 = 1;
  while (r1 != 0) {
    const std::int64_t t = r0 / r1;
    std::int64_t tmp = r0 - t * r1;
    r0 = r1;
    r1 = tmp;
    tmp = s0 - t * s1;
    s0 = s1;
    s1 = tmp;
  }
  return reduce(s0);
}

// ---------------------------------------------------------------- vectors

FieldVector::FieldVector(PrimeField field, std::size_t dim) : field_(field), values_(dim, 0) {}

FieldVector::FieldVector(PrimeField field, std::vector<Elem> values)
    : field_(field), values_(std::move(values)) {
  for (Elem v : values_) {
    if (v >= field_.order()) throw std::out_of_range("field element outside [0, q)");
  }
}

FieldVector FieldVector::unit(PrimeField field, std::size_t dim, std::size_t index) {
  FieldVector v(field, dim);
  v.values_.at(index) = 1;
  return v;
}

void FieldVector::set(std::size_t i, Elem v) {
  if (v >= field_.order()) throw std::out_of_range("field element outside [0, q)");
  values_.at(i) = v;
}

bool FieldVector::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](Elem v) { return v == 0; });
}

std::size_t FieldVector::weight() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](Elem v) { return v != 0; }));
}

Elem FieldVector::dot(const FieldVector& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("dot: dimension mismatch");
  std::uint64_t acc = 0;
  const std::uint64_t q = field_.order();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc = (acc + static_cast<std::uint64_t>(values_[i]) * other.values_[i]) % q;
  }
  return static_cast<Elem>(acc);
}

FieldVector FieldVector::plus(const FieldVector& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("plus: dimension mismatch");
  FieldVector out(field_, dim());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out.values_[i] = field_.add(values_[i], other.values_[i]);
  }
  return out;
}

FieldVector FieldVector::scaled(Elem c) const {
  FieldVector out(field_, dim());
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = field_.mul(values_[i], c);
  return out;
}

std::string FieldVector::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? "," : "") << values_[i];
  os << ')';
  return os.str();
}

// --------------------------------------------------------------- matrices

FieldMatrix::FieldMatrix(PrimeField field, std::size_t rows, std::size_t cols)
    : field_(field), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

FieldMatrix::FieldMatrix(PrimeField field, std::size_t rows, std::size_t cols,
                         std::vector<Elem> data)
    : field_(field), rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("matrix data size mismatch");
  for (Elem v : data_) {
    if (v >= field_.order()) throw std::out_of_range("field element outside [0, q)");
  }
}

FieldMatrix FieldMatrix::identity(PrimeField field, std::size_t n) {
  FieldMatrix m(field, n, n);
  for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1;
  return m;
}

FieldMatrix FieldMatrix::from_rows(PrimeField field, const std::vector<std::vector<Elem>>& rows) {
  if (rows.empty()) throw std::invalid_argument("from_rows: need at least one row");
  const std::size_t cols = rows.front().size();
  std::vector<Elem> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw std::invalid_argument("from_rows: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return FieldMatrix(field, rows.size(), cols, std::move(data));
}

FieldMatrix FieldMatrix::stack(PrimeField field, std::size_t cols,
                               std::span<const FieldVector> rows) {
  FieldMatrix m(field, rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].dim() != cols) throw std::invalid_argument("stack: dimension mismatch");
    std::copy(rows[r].values().begin(), rows[r].values().end(), m.data_.begin() + r * cols);
  }
  return m;
}

void FieldMatrix::set(std::size_t r, std::size_t c, Elem v) {
  if (v >= field_.order()) throw std::out_of_range("field element outside [0, q)");
  if (r >= rows_ || c >= cols_) throw std::out_of_range("matrix index");
  data_[r * cols_ + c] = v;
}

FieldVector FieldMatrix::row(std::size_t r) const {
  auto s = row_span(r);
  return FieldVector(field_, std::vector<Elem>(s.begin(), s.end()));
}

FieldMatrix FieldMatrix::select_columns(std::span<const std::size_t> columns) const {
  FieldMatrix out(field_, rows_, columns.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out.data_[r * columns.size() + j] = data_[r * cols_ + columns[j]];
    }
  }
  return out;
}

FieldMatrix FieldMatrix::with_row(const FieldVector& extra) const {
  if (extra.dim() != cols_) throw std::invalid_argument("with_row: dimension mismatch");
  FieldMatrix out(field_, rows_ + 1, cols_);
  std::copy(data_.begin(), data_.end(), out.data_.begin());
  std::copy(extra.values().begin(), extra.values().end(), out.data_.begin() + rows_ * cols_);
  return out;
}

FieldMatrix FieldMatrix::transposed() const {
  FieldMatrix out(field_, cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out.data_[c * rows_ + r] = data_[r * cols_ + c];
  }
  return out;
}

FieldVector FieldMatrix::apply(const FieldVector& v) const {
  if (v.dim() != cols_) throw std::invalid_argument("apply: dimension mismatch");
  const std::uint64_t q = field_.order();
  std::vector<Elem> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::uint64_t acc = 0;
    for (std::size_t c = 0; c < cols_; ++c) {
      acc = (acc + static_cast<std::uint64_t>(data_[r * cols_ + c]) * v[c]) % q;
    }
    out[r] = static_cast<Elem>(acc);
  }
  return FieldVector(field_, std::move(out));
}

// ------------------------------------------------------------ elimination

namespace {

// Reduced row echelon form, in place, on a rows x stride buffer. Only the
// first pivot_cols columns are eligible as pivots (the rest is an augmented
// right-hand side). Returns pivot columns in row order.
std::vector<std::size_t> rref(const PrimeField& f, std::vector<Elem>& a, std::size_t rows,
                              std::size_t stride, std::size_t pivot_cols) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p * stride + c] == 0) ++p;
    if (p == rows) continue;
    if (p != r) {
      std::swap_ranges(a.begin() + p * stride, a.begin() + (p + 1) * stride,
                       a.begin() + r * stride);
    }
    const Elem inv = f.inv(a[r * stride + c]);
    for (std::size_t j = c; j < stride; ++j) a[r * stride + j] = f.mul(a[r * stride + j], inv);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      const Elem factor = a[i * stride + c];
      if (factor == 0) continue;
      for (std::size_t j = c; j < stride; ++j) {
        a[i * stride + j] = f.sub(a[i * stride + j], f.mul(factor, a[r * stride + j]));
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t rank(const FieldMatrix& m) {
  // Forward elimination only; no back substitution needed for the rank.
  const PrimeField& f = m.field();
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<Elem> a(m.data().begin(), m.data().end());
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p * cols + c] == 0) ++p;
    if (p == rows) continue;
    if (p != r) {
      std::swap_ranges(a.begin() + p * cols, a.begin() + (p + 1) * cols, a.begin() + r * cols);
    }
    const Elem inv = f.inv(a[r * cols + c]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      const Elem factor = f.mul(a[i * cols + c], inv);
      if (factor == 0) continue;
      for (std::size_t j = c; j < cols; ++j) {
        a[i * cols + j] = f.sub(a[i * cols + j], f.mul(factor, a[r * cols + j]));
      }
    }
    ++r;
  }
  return r;
}

std::vector<FieldVector> null_space_basis(const FieldMatrix& m) {
  const PrimeField& f = m.field();
  const std::size_t cols = m.cols();
  std::vector<Elem> a(m.data().begin(), m.data().end());
  const auto pivots = rref(f, a, m.rows(), cols, cols);

  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;

  std::vector<FieldVector> basis;
  basis.reserve(cols - pivots.size());
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    FieldVector v(f, cols);
    v.set(free, 1);
    for (std::size_t i = 0; i < pivots.size(); ++i) v.set(pivots[i], f.neg(a[i * cols + free]));
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<FieldVector> solve_particular(const FieldMatrix& m, const FieldVector& y) {
  if (y.dim() != m.rows()) throw std::invalid_argument("solve_particular: y.dim != rows");
  const PrimeField& f = m.field();
  const std::size_t rows = m.rows(), cols = m.cols(), stride = cols + 1;
  std::vector<Elem> a(rows * stride);
  for (std::size_t r = 0; r < rows; ++r) {
    auto src = m.row_span(r);
    std::copy(src.begin(), src.end(), a.begin() + r * stride);
    a[r * stride + cols] = y[r];
  }
  const auto pivots = rref(f, a, rows, stride, cols);
  for (std::size_t r = pivots.size(); r < rows; ++r) {
    if (a[r * stride + cols] != 0) return std::nullopt;
  }
  FieldVector x(f, cols);
  for (std::size_t i = 0; i < pivots.size(); ++i) x.set(pivots[i], a[i * stride + cols]);
  return x;
}

std::optional<AffineSolution> solve_affine(const FieldMatrix& m, const FieldVector& y) {
  if (y.dim() != m.rows()) throw std::invalid_argument("solve_affine: y.dim != rows");
  const PrimeField& f = m.field();
  const std::size_t rows = m.rows(), cols = m.cols(), stride = cols + 1;
  std::vector<Elem> a(rows * stride);
  for (std::size_t r = 0; r < rows; ++r) {
    auto src = m.row_span(r);
    std::copy(src.begin(), src.end(), a.begin() + r * stride);
    a[r * stride + cols] = y[r];
  }
  const auto pivots = rref(f, a, rows, stride, cols);
  for (std::size_t r = pivots.size(); r < rows; ++r) {
    if (a[r * stride + cols] != 0) return std::nullopt;
  }
  AffineSolution out{FieldVector(f, cols), {}};
  for (std::size_t i = 0; i < pivots.size(); ++i) out.particular.set(pivots[i], a[i * stride + cols]);

  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  out.kernel.reserve(cols - pivots.size());
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    FieldVector v(f, cols);
    v.set(free, 1);
    for (std::size_t i = 0; i < pivots.size(); ++i) v.set(pivots[i], f.neg(a[i * stride + free]));
    out.kernel.push_back(std::move(v));
  }
  return out;
}

bool in_row_span(const FieldMatrix& m, const FieldVector& v) {
  if (v.dim() != m.cols()) throw std::invalid_argument("in_row_span: dimension mismatch");
  return rank(m.with_row(v)) == rank(m);
}

FieldMatrix random_matrix(const PrimeField& field, std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<Elem> data(rows * cols);
  const std::uint64_t q = field.order();
  for (auto& e : data) e = static_cast<Elem>(rng.uniform_below(q));
  return FieldMatrix(field, rows, cols, std::move(data));
}

}  // namespace estimlab::ffmat
