#pragma once

// A shattered domain {0, ..., d-1} with binary labels: every labeling is a
// hypothesis, and each labeling with the uniform marginal is a distribution.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "estimlab/exactprob.hpp"
#include "estimlab/rng.hpp"

namespace estimlab::shattered {

using exactprob::Rational;

struct Labeling {
  std::vector<std::uint8_t> bits;

  std::size_t d() const noexcept { return bits.size(); }
  bool operator==(const Labeling&) const = default;
  auto operator<=>(const Labeling& o) const noexcept { return bits <=> o.bits; }

  /// Index I in [0, 2^d): bit j of I is bits[j]. d <= 63.
  std::uint64_t index() const;
  static Labeling from_index(std::size_t d, std::uint64_t index);
};

struct DomainSample {
  std::vector<std::uint32_t> points;
  std::vector<std::uint8_t> labels;

  std::size_t size() const noexcept { return points.size(); }
  /// Number of distinct points.
  std::size_t distinct() const;
};

/// Labeling with i.i.d. fair bits, then n points i.i.d. uniform on [0, d), labeled by it.
std::pair<Labeling, DomainSample> draw_instance(std::size_t d, std::size_t n, Rng& rng);
DomainSample draw_sample(const Labeling& truth, std::size_t n, Rng& rng);

/// Hamming distance / d.
Rational true_loss(const Labeling& h, const Labeling& truth);
bool is_consistent(const Labeling& h, const DomainSample& s);
/// Fraction of sample points h mislabels.
Rational empirical_loss(const Labeling& h, const DomainSample& s);

/// P(unseen point gets label 1) = coin_num / coin_den.
struct Coin {
  std::uint64_t num = 1;
  std::uint64_t den = 2;
};

/// Seen points keep their label, unseen points get independent coin flips.
/// Throws Unrealizable on a sample that labels one point both ways.
Labeling erm_uniform(const DomainSample& s, std::size_t d, Rng& rng, Coin coin = {});

/// Exact P(erm_uniform(s) == h).
Rational erm_output_prob(const DomainSample& s, const Labeling& h, Coin coin = {});

/// (d - m) / (2d).
Rational expected_erm_loss(std::size_t d, std::size_t m);

struct P1P2Report {
  bool equal;
  Rational max_discrepancy;
  std::size_t cells;  // (S, h) pairs compared
};

inline constexpr std::uint64_t kP1P2Guard = std::uint64_t{1} << 17;

/// Exhaustive comparison of the joint laws of (S, h_I) and (S, ERM(S)).
/// Throws GuardExceeded when 2^d (2d)^n 2^d exceeds the guard.
P1P2Report verify_p1_equals_p2(std::size_t d, std::size_t n, Coin coin = {},
                               std::uint64_t guard = kP1P2Guard);

}  // namespace estimlab::shattered
