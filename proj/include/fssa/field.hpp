#pragma once

// Prime-field arithmetic modulo a prime q < 2^64, with 128-bit intermediates.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fssa/bytes.hpp"
#include "fssa/error.hpp"

#if !defined(__SIZEOF_INT128__)
#error "fssa requires compiler support for unsigned __int128"
#endif

namespace fssa {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

namespace detail {

inline u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

inline u64 powmod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

}  // namespace detail

// Deterministic Miller-Rabin; the first twelve prime bases are exact for
// every n < 2^64.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  static constexpr u64 kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : kBases) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : kBases) {
    u64 x = detail::powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

struct FieldElement {
  u64 value = 0;

  friend bool operator==(FieldElement, FieldElement) = default;
  friend auto operator<=>(FieldElement, FieldElement) = default;
};

// Modulus descriptor. Only constructible for primes.
class FieldParams {
 public:
  static FieldParams from_prime(u64 q) {
    require(q >= 2, "field modulus must be >= 2");
    require(is_prime_u64(q), "field modulus must be prime");
    return FieldParams(q);
  }

  u64 modulus() const noexcept { return q_; }
  std::size_t byte_width() const noexcept { return byte_width_; }

  FieldElement element(u64 v) const { return FieldElement{v % q_}; }
  FieldElement zero() const noexcept { return FieldElement{0}; }
  FieldElement one() const noexcept { return FieldElement{1}; }

  bool contains(FieldElement a) const noexcept { return a.value < q_; }

  friend bool operator==(const FieldParams&, const FieldParams&) = default;

 private:
  explicit FieldParams(u64 q)
      : q_(q), byte_width_((static_cast<std::size_t>(std::bit_width(q)) + 7) / 8) {}

  u64 q_;
  std::size_t byte_width_;
};

inline FieldElement fe_add(FieldElement a, FieldElement b, const FieldParams& fp) {
  const u64 q = fp.modulus();
  const u64 s = a.value + b.value;
  // Wraparound is only possible for q > 2^63; the comparison catches it.
  return FieldElement{(s >= q || s < a.value) ? s - q : s};
}

inline FieldElement fe_neg(FieldElement a, const FieldParams& fp) {
  return FieldElement{a.value == 0 ? 0 : fp.modulus() - a.value};
}

inline FieldElement fe_sub(FieldElement a, FieldElement b, const FieldParams& fp) {
  return fe_add(a, fe_neg(b, fp), fp);
}

inline FieldElement fe_mul(FieldElement a, FieldElement b, const FieldParams& fp) {
  return FieldElement{detail::mulmod(a.value, b.value, fp.modulus())};
}

inline FieldElement fe_pow(FieldElement a, u64 exp, const FieldParams& fp) {
  return FieldElement{detail::powmod(a.value, exp, fp.modulus())};
}

// Fermat inverse a^(q-2).
inline FieldElement fe_inv(FieldElement a, const FieldParams& fp) {
  require(a.value % fp.modulus() != 0, "zero has no multiplicative inverse");
  return fe_pow(a, fp.modulus() - 2, fp);
}

// Sum of products with a single reduction per block of terms. The block
// length is the largest count whose partial sum cannot overflow 128 bits.
inline FieldElement fe_dot(std::span<const FieldElement> a,
                           std::span<const FieldElement> b,
                           const FieldParams& fp) {
  require(a.size() == b.size(), "dot product of mismatched lengths");
  const u64 q = fp.modulus();
  if (q <= (u64{1} << 32)) {
    // Products fit in 64 bits; accumulate in a plain u64.
    const u64 qm1 = q - 1;
    const u64 block = qm1 == 0 ? a.size() : std::max<u64>(1, UINT64_MAX / (qm1 * qm1));
    u64 acc = 0;
    u64 reduced = 0;
    u64 count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      acc += a[i].value * b[i].value;
      if (++count == block) {
        reduced = (reduced + acc % q) % q;
        acc = 0;
        count = 0;
      }
    }
    return FieldElement{(reduced + acc % q) % q};
  }
  const u128 qm1 = q - 1;
  const u128 block = std::max<u128>(1, ~u128{0} / (qm1 * qm1));
  u128 acc = 0;
  u64 reduced = 0;
  u128 count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<u128>(a[i].value) * b[i].value;
    if (++count == block) {
      reduced = fe_add(FieldElement{reduced}, FieldElement{static_cast<u64>(acc % q)}, fp).value;
      acc = 0;
      count = 0;
    }
  }
  return fe_add(FieldElement{reduced}, FieldElement{static_cast<u64>(acc % q)}, fp);
}

// Horner evaluation; coeffs[0] is the constant term.
inline FieldElement poly_eval(std::span<const FieldElement> coeffs, FieldElement x,
                              const FieldParams& fp) {
  require(!coeffs.empty(), "polynomial needs at least one coefficient");
  FieldElement acc = fp.zero();
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = fe_add(fe_mul(acc, x, fp), *it, fp);
  }
  return acc;
}

// d x t matrix taking (f(p_1), ..., f(p_t)) to the low coefficients
// (s_0, ..., s_{d-1}) of the unique degree-<t polynomial f. Row-major.
class ReconMatrix {
 public:
  ReconMatrix() = default;
  ReconMatrix(std::size_t rows, std::size_t cols, std::vector<FieldElement> entries,
              std::vector<FieldElement> points)
      : rows_(rows), cols_(cols), entries_(std::move(entries)), points_(std::move(points)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<FieldElement>& points() const noexcept { return points_; }

  FieldElement at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  std::span<const FieldElement> row(std::size_t r) const {
    return std::span<const FieldElement>(entries_).subspan(r * cols_, cols_);
  }

  std::vector<FieldElement> apply(std::span<const FieldElement> shares,
                                  const FieldParams& fp) const {
    require(shares.size() == cols_, "share vector length must equal matrix width");
    std::vector<FieldElement> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = fe_dot(row(r), shares, fp);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<FieldElement> entries_;
  std::vector<FieldElement> points_;
};

// Lagrange form: with M(x) = prod_k (x - p_k), the basis polynomial for p_j
// is (M(x) / (x - p_j)) / prod_{k != j} (p_j - p_k). Entry (i, j) is the x^i
// coefficient of that basis polynomial. O(t^2) field operations overall.
inline ReconMatrix build_recon_matrix(std::span<const FieldElement> points, std::size_t d,
                                      const FieldParams& fp) {
  const std::size_t t = points.size();
  require(d > 0, "secret length d must be positive");
  require(d <= t, "secret length d cannot exceed the number of points");
  {
    std::vector<u64> sorted;
    sorted.reserve(t);
    for (auto p : points) {
      require(fp.contains(p), "evaluation point not reduced modulo q");
      require(p.value != 0, "evaluation point must be nonzero");
      sorted.push_back(p.value);
    }
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "evaluation points must be distinct");
  }

  // master[k] is the x^k coefficient of M(x), degree t.
  std::vector<FieldElement> master(t + 1, fp.zero());
  master[0] = fp.one();
  for (std::size_t k = 0; k < t; ++k) {
    const FieldElement neg_p = fe_neg(points[k], fp);
    for (std::size_t i = k + 1; i > 0; --i) {
      master[i] = fe_add(master[i - 1], fe_mul(master[i], neg_p, fp), fp);
    }
    master[0] = fe_mul(master[0], neg_p, fp);
  }

  std::vector<FieldElement> entries(d * t);
  std::vector<FieldElement> quotient(t);
  for (std::size_t j = 0; j < t; ++j) {
    // Synthetic division of M(x) by (x - p_j).
    const FieldElement p = points[j];
    FieldElement carry = fp.zero();
    for (std::size_t i = t; i > 0; --i) {
      carry = fe_add(master[i], fe_mul(carry, p, fp), fp);
      quotient[i - 1] = carry;
    }
    const FieldElement denom_inv = fe_inv(poly_eval(quotient, p, fp), fp);
    for (std::size_t i = 0; i < d; ++i) {
      entries[i * t + j] = fe_mul(quotient[i], denom_inv, fp);
    }
  }
  return ReconMatrix(d, t, std::move(entries),
                     std::vector<FieldElement>(points.begin(), points.end()));
}

// Smallest prime q >= n(B - 1) + 1, so that sums of n inputs in [0, B)
// never wrap modulo q.
inline FieldParams find_field_modulus(u64 n, u64 bound) {
  require(n >= 1, "need at least one client");
  require(bound >= 2, "input bound B must be >= 2");
  const u128 range = static_cast<u128>(n) * (bound - 1) + 1;
  require(range <= UINT64_MAX, "n(B-1)+1 exceeds the 64-bit modulus budget");
  u64 q = static_cast<u64>(range);
  while (!is_prime_u64(q)) {
    require(q != UINT64_MAX, "no 64-bit prime at or above n(B-1)+1");
    ++q;
  }
  return FieldParams::from_prime(q);
}

inline void write_element(ByteWriter& w, FieldElement a, const FieldParams& fp) {
  w.uint_le(a.value, fp.byte_width());
}

inline FieldElement read_element(ByteReader& r, const FieldParams& fp) {
  const u64 v = r.uint_le(fp.byte_width());
  require(v < fp.modulus(), "encoded field element not reduced");
  return FieldElement{v};
}

}  // namespace fssa
