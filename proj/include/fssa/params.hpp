#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fssa/error.hpp"
#include "fssa/field.hpp"
#include "fssa/key_agreement.hpp"
#include "fssa/ramp.hpp"

namespace fssa {

// Public parameters shared by the server and every client.
struct Params {
  SecurityLevel lambda = SecurityLevel::kProduction;
  std::size_t n = 0;
  std::size_t t = 0;
  std::size_t d = 0;
  FieldParams fp = FieldParams::from_prime(2);
  std::uint64_t bound = 2;  // inputs lie in [0, bound)
  std::size_t m = 0;
  std::size_t chunk_count = 0;
  GroupParams gp = ka_setup(SecurityLevel::kTest);
  bool degenerate_privacy_ok = false;
  // One ciphertext per (sender, recipient, chunk) instead of per
  // (sender, recipient).
  bool per_chunk_ciphertexts = false;

  RampParams ramp() const { return RampParams::make(t, d, n, fp, degenerate_privacy_ok); }
};

struct ParamOptions {
  SecurityLevel lambda = SecurityLevel::kProduction;
  std::optional<std::uint64_t> modulus;  // any prime >= n(B-1)+1
  bool degenerate_privacy_ok = false;
  bool per_chunk_ciphertexts = false;
};

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Validates and assembles parameters from explicit (n, t, d).
inline Params make_params(std::size_t n, std::size_t t, std::size_t d, std::size_t m,
                          std::uint64_t bound, const ParamOptions& opt = {}) {
  require(n >= 1, "n must be positive");
  require(m >= 1, "vector length m must be positive");
  require(bound >= 2, "input bound B must be >= 2");
  require(d > 0 && d <= t && t <= n, "need 0 < d <= t <= n");
  require(d < t || opt.degenerate_privacy_ok, "d == t requires the degenerate-privacy flag");
  FieldParams fp = find_field_modulus(n, bound);
  if (opt.modulus) {
    fp = FieldParams::from_prime(*opt.modulus);
    const u128 range = static_cast<u128>(n) * (bound - 1) + 1;
    require(range <= fp.modulus(), "modulus override violates n(B-1)+1 <= q");
  }
  Params p;
  p.lambda = opt.lambda;
  p.n = n;
  p.t = t;
  p.d = d;
  p.fp = fp;
  p.bound = bound;
  p.m = m;
  p.chunk_count = ceil_div(m, d);
  p.gp = ka_setup(opt.lambda);
  p.degenerate_privacy_ok = opt.degenerate_privacy_ok;
  p.per_chunk_ciphertexts = opt.per_chunk_ciphertexts;
  return p;
}

// floor / ceil of rate * n that ignore binary-representation noise, so that
// 0.3 * 100 counts as exactly 30.
inline std::size_t rate_floor(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}
inline std::size_t rate_ceil(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9));
}

// t = n - floor(rho n); d = t - ceil(gamma n), clamped to t - 1 unless the
// degenerate-privacy flag allows d == t.
inline Params plan_parameters(std::size_t n, std::size_t m, std::uint64_t bound, double rho,
                              double gamma, const ParamOptions& opt = {}) {
  require(n >= 2, "need at least two clients");
  require(m >= 1, "vector length m must be positive");
  require(rho >= 0.0 && rho < 1.0, "dropout rate must lie in [0, 1)");
  require(gamma >= 0.0 && gamma < 1.0, "corruption rate must lie in [0, 1)");
  require(rho + gamma < 1.0, "dropout + corruption rate must be < 1");
  const std::size_t dropouts = rate_floor(rho, n);
  const std::size_t corrupt = rate_ceil(gamma, n);
  require(dropouts < n, "dropout rate leaves no clients");
  const std::size_t t = n - dropouts;
  const long long raw_d = static_cast<long long>(t) - static_cast<long long>(corrupt);
  long long d = opt.degenerate_privacy_ok ? raw_d : std::min(raw_d, static_cast<long long>(t) - 1);
  require(d > 0, "rates too aggressive: d = " + std::to_string(d) + " <= 0");
  return make_params(n, t, static_cast<std::size_t>(d), m, bound, opt);
}

// Splits x into ceil(m/d) chunks of length d; the last one is zero-padded.
inline std::vector<std::vector<FieldElement>> chunk_vector(std::span<const std::uint64_t> x,
                                                           std::size_t d, std::uint64_t bound,
                                                           const FieldParams& fp) {
  require(d > 0, "chunk length must be positive");
  require(bound <= fp.modulus(), "input bound exceeds the field");
  std::vector<std::vector<FieldElement>> chunks(ceil_div(x.size(), d),
                                                std::vector<FieldElement>(d, fp.zero()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] < bound, "input entry " + std::to_string(i) + " outside [0, B)");
    chunks[i / d][i % d] = FieldElement{x[i]};
  }
  return chunks;
}

}  // namespace fssa
