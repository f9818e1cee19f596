#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "estimlab/exactprob.hpp"
#include "estimlab/ffmat.hpp"

namespace estimlab::testutil {

using exactprob::Rational;

inline Rational q_(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline ffmat::FieldVector vec(const ffmat::PrimeField& f, std::vector<ffmat::Elem> v) {
  return ffmat::FieldVector(f, std::move(v));
}

// Every matrix of the given shape over F_q, row-major counting order.
template <class Fn>
void for_each_matrix(const ffmat::PrimeField& f, std::size_t rows, std::size_t cols, Fn&& fn) {
  const std::size_t cells = rows * cols;
  std::vector<ffmat::Elem> data(cells, 0);
  for (;;) {
    fn(ffmat::FieldMatrix(f, rows, cols, data));
    std::size_t i = 0;
    while (i < cells && ++data[i] == f.order()) data[i++] = 0;
    if (i == cells) return;
  }
}

// |observed - expected| <= 3 sd for a binomial proportion.
inline bool within_3sigma(std::uint64_t hits, std::uint64_t n, double p) {
  const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n));
  return std::fabs(static_cast<double>(hits) / static_cast<double>(n) - p) <= 3 * sd + 1e-12;
}

}  // namespace estimlab::testutil
