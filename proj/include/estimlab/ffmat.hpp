#pragma once

// Dense linear algebra over prime fields F_q.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "estimlab/rng.hpp"

namespace estimlab::ffmat {

using Elem = std::uint32_t;

/// The field Z/qZ for a prime q. Construction rejects composite q.
class PrimeField {
 public:
  explicit PrimeField(std::uint32_t q);

  std::uint32_t order() const noexcept { return q_; }

  Elem reduce(std::int64_t v) const noexcept {
    const std::int64_t r = v % static_cast<std::int64_t>(q_);
    return static_cast<Elem>(r < 0 ? r + q_ : r);
  }
  Elem add(Elem a, Elem b) const noexcept {
    const std::uint32_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  Elem sub(Elem a, Elem b) const noexcept { return a >= b ? a - b : a + q_ - b; }
  Elem neg(Elem a) const noexcept { return a == 0 ? 0 : q_ - a; }
  Elem mul(Elem a, Elem b) const noexcept {
    return static_cast<Elem>((static_cast<std::uint64_t>(a) * b) % q_);
  }
  /// Multiplicative inverse via extended Euclid. a must be nonzero.
  Elem inv(Elem a) const;

  bool operator==(const PrimeField&) const = default;

 private:
  std::uint32_t q_;
};

bool is_prime(std::uint64_t n) noexcept;

class FieldVector {
 public:
  FieldVector(PrimeField field, std::size_t dim);
  /// Entries must already lie in [0, q).
  FieldVector(PrimeField field, std::vector<Elem> values);

  static FieldVector unit(PrimeField field, std::size_t dim, std::size_t index);

  const PrimeField& field() const noexcept { return field_; }
  std::size_t dim() const noexcept { return values_.size(); }
  Elem operator[](std::size_t i) const { return values_[i]; }
  void set(std::size_t i, Elem v);
  std::span<const Elem> values() const noexcept { return values_; }

  bool is_zero() const noexcept;
  std::size_t weight() const noexcept;  // number of nonzero entries
  Elem dot(const FieldVector& other) const;
  FieldVector plus(const FieldVector& other) const;
  FieldVector scaled(Elem c) const;

  std::string to_string() const;

  bool operator==(const FieldVector& o) const noexcept { return values_ == o.values_; }
  /// Lexicographic order on the coefficient encoding.
  std::strong_ordering operator<=>(const FieldVector& o) const noexcept {
    return values_ <=> o.values_;
  }

 private:
  PrimeField field_;
  std::vector<Elem> values_;
};

/// Row-major dense matrix. A matrix may have zero rows (an empty sample).
class FieldMatrix {
 public:
  FieldMatrix(PrimeField field, std::size_t rows, std::size_t cols);
  FieldMatrix(PrimeField field, std::size_t rows, std::size_t cols, std::vector<Elem> data);

  static FieldMatrix identity(PrimeField field, std::size_t n);
  static FieldMatrix from_rows(PrimeField field, const std::vector<std::vector<Elem>>& rows);
  static FieldMatrix stack(PrimeField field, std::size_t cols, std::span<const FieldVector> rows);

  const PrimeField& field() const noexcept { return field_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Elem at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, Elem v);
  std::span<const Elem> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  FieldVector row(std::size_t r) const;
  std::span<const Elem> data() const noexcept { return data_; }

  FieldMatrix select_columns(std::span<const std::size_t> columns) const;
  FieldMatrix with_row(const FieldVector& extra) const;
  FieldMatrix transposed() const;
  /// M * v.
  FieldVector apply(const FieldVector& v) const;

  bool operator==(const FieldMatrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  PrimeField field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Elem> data_;
};

std::size_t rank(const FieldMatrix& m);

/// Basis of {v : m v = 0}; exactly cols - rank(m) vectors.
std::vector<FieldVector> null_space_basis(const FieldMatrix& m);

/// Some v with m v = y, or nullopt if the system is inconsistent.
std::optional<FieldVector> solve_particular(const FieldMatrix& m, const FieldVector& y);

/// Full solution set of m v = y from a single elimination.
struct AffineSolution {
  FieldVector particular;
  std::vector<FieldVector> kernel;  // basis of null(m)
};
std::optional<AffineSolution> solve_affine(const FieldMatrix& m, const FieldVector& y);

/// True iff v is a linear combination of the rows of m.
bool in_row_span(const FieldMatrix& m, const FieldVector& v);

/// Entries i.i.d. uniform on F_q, drawn row-major.
FieldMatrix random_matrix(const PrimeField& field, std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace estimlab::ffmat
