#pragma once

// (t, d, n) ramp secret sharing over a prime field, built on Shamir's
// polynomial: f(x) = s_0 + ... + s_{d-1} x^{d-1} + a_d x^d + ... + a_{t-1} x^{t-1}
// with a_d..a_{t-1} uniform. Party u holds f(u). Any t shares determine the
// secret; any t - d shares are independent of it.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "fssa/error.hpp"
#include "fssa/field.hpp"
#include "fssa/random.hpp"

namespace fssa {

using ClientIndex = std::uint32_t;

struct RampParams {
  std::size_t t = 0;
  std::size_t d = 0;
  std::size_t n = 0;
  FieldParams fp = FieldParams::from_prime(2);
  // Admits d == t (no random coefficients, no privacy). Benchmarking only.
  bool degenerate_privacy_ok = false;

  static RampParams make(std::size_t t, std::size_t d, std::size_t n, const FieldParams& fp,
                         bool degenerate_privacy_ok = false) {
    require(d > 0, "ramp sharing needs d > 0");
    require(d < t || (d == t && degenerate_privacy_ok),
            "ramp sharing needs d < t (d == t only with degenerate privacy)");
    require(t <= n, "threshold t cannot exceed n");
    require(n <= fp.modulus() - 1, "n must be at most q - 1 (distinct nonzero points)");
    return RampParams{t, d, n, fp, degenerate_privacy_ok};
  }

  std::size_t random_coeffs() const noexcept { return t - d; }
};

struct Share {
  ClientIndex point = 0;
  FieldElement value;

  friend bool operator==(const Share&, const Share&) = default;
};

// One share per party, sorted by point.
struct ShareBundle {
  std::vector<Share> shares;

  FieldElement at(ClientIndex point) const {
    auto it = std::lower_bound(shares.begin(), shares.end(), point,
                               [](const Share& s, ClientIndex p) { return s.point < p; });
    require(it != shares.end() && it->point == point, "no share for requested point");
    return it->value;
  }

  friend bool operator==(const ShareBundle&, const ShareBundle&) = default;
};

namespace detail {

inline std::vector<ClientIndex> default_points(std::size_t n) {
  std::vector<ClientIndex> pts(n);
  std::iota(pts.begin(), pts.end(), ClientIndex{1});
  return pts;
}

inline void check_points(std::span<const ClientIndex> points, const FieldParams& fp) {
  std::vector<ClientIndex> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "duplicate evaluation point");
  for (ClientIndex p : sorted) {
    require(p != 0 && p < fp.modulus(), "evaluation point must lie in [1, q)");
  }
}

// Low d coefficients from the (zero-padded) secret, then the random tail.
inline std::vector<FieldElement> sharing_poly(const RampParams& rp,
                                              std::span<const FieldElement> secret,
                                              std::span<const FieldElement> tail) {
  require(!secret.empty(), "secret must have at least one coordinate");
  require(secret.size() <= rp.d, "secret longer than d");
  require(tail.size() >= rp.random_coeffs(), "too few random coefficients");
  std::vector<FieldElement> coeffs(rp.t, rp.fp.zero());
  for (std::size_t i = 0; i < secret.size(); ++i) {
    require(rp.fp.contains(secret[i]), "secret coordinate not reduced modulo q");
    coeffs[i] = secret[i];
  }
  for (std::size_t i = 0; i < rp.random_coeffs(); ++i) {
    require(rp.fp.contains(tail[i]), "random coefficient not reduced modulo q");
    coeffs[rp.d + i] = tail[i];
  }
  return coeffs;
}

inline ShareBundle evaluate_at(std::span<const FieldElement> coeffs,
                               std::span<const ClientIndex> points, const FieldParams& fp) {
  ShareBundle out;
  out.shares.reserve(points.size());
  for (ClientIndex p : points) {
    out.shares.push_back(Share{p, poly_eval(coeffs, fp.element(p), fp)});
  }
  std::sort(out.shares.begin(), out.shares.end(),
            [](const Share& a, const Share& b) { return a.point < b.point; });
  return out;
}

}  // namespace detail

// Deterministic mode: the t - d high coefficients are given explicitly.
inline ShareBundle rss_share(const RampParams& rp, std::span<const FieldElement> secret,
                             std::span<const FieldElement> explicit_coeffs,
                             std::span<const ClientIndex> points) {
  detail::check_points(points, rp.fp);
  return detail::evaluate_at(detail::sharing_poly(rp, secret, explicit_coeffs), points, rp.fp);
}

inline ShareBundle rss_share(const RampParams& rp, std::span<const FieldElement> secret,
                             std::span<const FieldElement> explicit_coeffs) {
  const auto pts = detail::default_points(rp.n);
  return rss_share(rp, secret, explicit_coeffs, pts);
}

inline ShareBundle rss_share(const RampParams& rp, std::span<const FieldElement> secret,
                             RandomSource& rng, std::span<const ClientIndex> points) {
  std::vector<FieldElement> tail(rp.random_coeffs());
  for (auto& a : tail) a = rng.uniform_element(rp.fp);
  return rss_share(rp, secret, tail, points);
}

inline ShareBundle rss_share(const RampParams& rp, std::span<const FieldElement> secret,
                             RandomSource& rng) {
  const auto pts = detail::default_points(rp.n);
  return rss_share(rp, secret, rng, pts);
}

// Uses the t shares with the smallest points.
inline std::vector<FieldElement> rss_recon(const RampParams& rp, std::span<const Share> shares) {
  std::vector<Share> sorted(shares.begin(), shares.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Share& a, const Share& b) { return a.point < b.point; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    require(sorted[i].point != sorted[i - 1].point, "duplicate share point");
  }
  if (sorted.size() < rp.t) {
    fail(ErrorCode::kInsufficientShares, "have " + std::to_string(sorted.size()) +
                                             " shares, threshold is " + std::to_string(rp.t));
  }
  std::vector<FieldElement> points(rp.t);
  std::vector<FieldElement> values(rp.t);
  for (std::size_t i = 0; i < rp.t; ++i) {
    require(sorted[i].point != 0 && sorted[i].point < rp.fp.modulus(), "invalid share point");
    require(rp.fp.contains(sorted[i].value), "share value not reduced modulo q");
    points[i] = FieldElement{sorted[i].point};
    values[i] = sorted[i].value;
  }
  return build_recon_matrix(points, rp.d, rp.fp).apply(values, rp.fp);
}

inline std::vector<FieldElement> rss_recon(const RampParams& rp, const ShareBundle& bundle) {
  return rss_recon(rp, std::span<const Share>(bundle.shares));
}

// Field sum of shares held at one common point.
inline Share share_sum(std::span<const Share> at_point, const FieldParams& fp) {
  require(!at_point.empty(), "share_sum needs at least one share");
  Share out{at_point.front().point, fp.zero()};
  for (const Share& s : at_point) {
    require(s.point == out.point, "share_sum over mismatched points");
    require(fp.contains(s.value), "share value not reduced modulo q");
    out.value = fe_add(out.value, s.value, fp);
  }
  return out;
}

// Pointwise share_sum across bundles over the same point set.
inline ShareBundle bundle_sum(std::span<const ShareBundle> bundles, const FieldParams& fp) {
  require(!bundles.empty(), "bundle_sum needs at least one bundle");
  ShareBundle out = bundles.front();
  for (std::size_t b = 1; b < bundles.size(); ++b) {
    require(bundles[b].shares.size() == out.shares.size(), "bundles over different point sets");
    for (std::size_t i = 0; i < out.shares.size(); ++i) {
      const Share pair[2] = {out.shares[i], bundles[b].shares[i]};
      out.shares[i] = share_sum(pair, fp);
    }
  }
  return out;
}

// Evaluates degree-<t polynomials at a fixed point set using a precomputed
// power table; the protocol's sharing hot path.
class ShareEvaluator {
 public:
  ShareEvaluator(std::span<const ClientIndex> points, std::size_t t, const FieldParams& fp)
      : points_(points.begin(), points.end()), t_(t), fp_(fp), powers_(points.size() * t) {
    detail::check_points(points, fp);
    for (std::size_t k = 0; k < points_.size(); ++k) {
      FieldElement x = fp.element(points_[k]);
      FieldElement p = fp.one();
      for (std::size_t j = 0; j < t; ++j) {
        powers_[k * t + j] = p;
        p = fe_mul(p, x, fp);
      }
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<ClientIndex>& points() const noexcept { return points_; }

  // coeffs has exactly t entries; out receives one share per point, in
  // point order.
  void evaluate(std::span<const FieldElement> coeffs, std::span<FieldElement> out) const {
    require(coeffs.size() == t_, "coefficient count must equal t");
    require(out.size() == points_.size(), "output span must hold one share per point");
    for (std::size_t k = 0; k < points_.size(); ++k) {
      out[k] = fe_dot(std::span<const FieldElement>(powers_).subspan(k * t_, t_), coeffs, fp_);
    }
  }

 private:
  std::vector<ClientIndex> points_;
  std::size_t t_;
  FieldParams fp_;
  std::vector<FieldElement> powers_;
};

// Textbook per-coordinate Shamir (d = 1) used as an independent oracle for
// the chunked pipeline: every client Shamir-shares each coordinate, each
// client adds up the shares it receives, and the first t summed shares are
// interpolated at zero with directly computed Lagrange weights.
inline std::vector<FieldElement> naive_aggregate_oracle(
    std::span<const std::vector<std::uint64_t>> inputs, std::size_t t, const FieldParams& fp,
    RandomSource& rng) {
  require(!inputs.empty(), "oracle needs at least one input");
  const std::size_t n = inputs.size();
  const std::size_t m = inputs.front().size();
  for (const auto& x : inputs) require(x.size() == m, "input vectors differ in length");
  require(t >= 1 && n >= t, "oracle needs at least t clients");
  require(n < fp.modulus(), "too many clients for the field");

  // Lagrange weights at zero for points 1..t.
  std::vector<FieldElement> weight(t);
  for (std::size_t j = 1; j <= t; ++j) {
    FieldElement num = fp.one();
    FieldElement den = fp.one();
    for (std::size_t k = 1; k <= t; ++k) {
      if (k == j) continue;
      num = fe_mul(num, fe_neg(fp.element(k), fp), fp);
      den = fe_mul(den, fe_sub(fp.element(j), fp.element(k), fp), fp);
    }
    weight[j - 1] = fe_mul(num, fe_inv(den, fp), fp);
  }

  std::vector<FieldElement> out(m);
  std::vector<FieldElement> held(n);
  std::vector<FieldElement> poly(t);
  for (std::size_t e = 0; e < m; ++e) {
    std::fill(held.begin(), held.end(), fp.zero());
    for (std::size_t c = 0; c < n; ++c) {
      poly[0] = fp.element(inputs[c][e]);
      for (std::size_t j = 1; j < t; ++j) poly[j] = rng.uniform_element(fp);
      for (std::size_t u = 1; u <= n; ++u) {
        held[u - 1] = fe_add(held[u - 1], poly_eval(poly, fp.element(u), fp), fp);
      }
    }
    FieldElement acc = fp.zero();
    for (std::size_t j = 0; j < t; ++j) acc = fe_add(acc, fe_mul(weight[j], held[j], fp), fp);
    out[e] = acc;
  }
  return out;
}

inline constexpr std::uint64_t kHistogramEnumerationCap = 1'000'000;

// Exact distribution of the shares seen at view_points, over every
// assignment of the t - d random coefficients.
inline std::map<std::vector<std::uint64_t>, std::uint64_t> share_view_histogram(
    const RampParams& rp, std::span<const FieldElement> secret,
    std::span<const ClientIndex> view_points) {
  require(view_points.size() <= rp.random_coeffs(),
          "view larger than t - d is outside the perfect-security regime");
  detail::check_points(view_points, rp.fp);
  const std::uint64_t q = rp.fp.modulus();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < rp.random_coeffs(); ++i) {
    require(total <= kHistogramEnumerationCap / q, "enumeration cap q^(t-d) <= 10^6 exceeded");
    total *= q;
  }

  std::vector<FieldElement> tail(rp.random_coeffs(), rp.fp.zero());
  auto coeffs = detail::sharing_poly(rp, secret, tail);
  std::map<std::vector<std::uint64_t>, std::uint64_t> hist;
  std::vector<std::uint64_t> view(view_points.size());
  for (std::uint64_t iter = 0; iter < total; ++iter) {
    // Odometer over the random tail.
    std::uint64_t r = iter;
    for (std::size_t i = 0; i < rp.random_coeffs(); ++i) {
      coeffs[rp.d + i] = FieldElement{r % q};
      r /= q;
    }
    for (std::size_t k = 0; k < view_points.size(); ++k) {
      view[k] = poly_eval(coeffs, rp.fp.element(view_points[k]), rp.fp).value;
    }
    ++hist[view];
  }
  return hist;
}

}  // namespace fssa
