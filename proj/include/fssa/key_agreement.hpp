#pragma once

// Diffie-Hellman key agreement with a hashed shared secret:
// s_{u,v} = SHA-256(encode(pk_v ^ sk_u)).
//
// Two groups are supported: NIST P-256 (production) and a small
// multiplicative group modulo a prime (test), small enough to enumerate.

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "fssa/bytes.hpp"
#include "fssa/error.hpp"
#include "fssa/field.hpp"
#include "fssa/hash.hpp"
#include "fssa/random.hpp"

namespace fssa {

enum class SecurityLevel { kProduction, kTest };

inline std::string_view to_string(SecurityLevel level) {
  return level == SecurityLevel::kProduction ? "production" : "test";
}

inline SecurityLevel parse_security_level(std::string_view s) {
  if (s == "production") return SecurityLevel::kProduction;
  if (s == "test") return SecurityLevel::kTest;
  fail(ErrorCode::kInvalidArgument, "unknown security level '" + std::string(s) + "'");
}

namespace detail {

struct BnFree {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct BnCtxFree {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct PointFree {
  void operator()(EC_POINT* p) const { EC_POINT_clear_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnFree>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxFree>;
using PointPtr = std::unique_ptr<EC_POINT, PointFree>;

inline void ossl_check(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kInternal, what);
}

inline BnPtr bn_from_be(ByteView b) {
  BnPtr out(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
  ossl_check(out != nullptr, "BN_bin2bn failed");
  return out;
}

inline Bytes bn_to_be(const BIGNUM* bn, std::size_t width) {
  Bytes out(width);
  ossl_check(BN_bn2binpad(bn, out.data(), static_cast<int>(width)) == static_cast<int>(width),
             "BN_bn2binpad failed");
  return out;
}

inline Bytes u64_to_be(std::uint64_t v, std::size_t width) {
  Bytes out(width);
  for (std::size_t i = 0; i < width; ++i) out[width - 1 - i] = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}

inline std::uint64_t be_to_u64(ByteView b) {
  std::uint64_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

}  // namespace detail

class GroupParams {
 public:
  static GroupParams p256() {
    GroupParams gp;
    gp.level_ = SecurityLevel::kProduction;
    EC_GROUP* g = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
    detail::ossl_check(g != nullptr, "P-256 group unavailable");
    gp.curve_ = std::shared_ptr<const EC_GROUP>(g, [](const EC_GROUP* p) {
      EC_GROUP_free(const_cast<EC_GROUP*>(p));
    });
    return gp;
  }

  // Multiplicative group mod prime p generated by g, with the given order.
  static GroupParams modp(std::uint64_t p, std::uint64_t g, std::uint64_t order) {
    require(is_prime_u64(p), "test group modulus must be prime");
    require(g > 1 && g < p, "generator out of range");
    require(order > 1 && (p - 1) % order == 0, "order must divide p - 1");
    require(detail::powmod(g, order, p) == 1, "generator order mismatch");
    // g has exact order `order` iff g^(order/r) != 1 for every prime r | order.
    std::uint64_t rest = order;
    for (std::uint64_t r = 2; r * r <= rest; ++r) {
      if (rest % r != 0) continue;
      require(detail::powmod(g, order / r, p) != 1, "generator order mismatch");
      while (rest % r == 0) rest /= r;
    }
    if (rest > 1) require(detail::powmod(g, order / rest, p) != 1, "generator order mismatch");
    GroupParams gp;
    gp.level_ = SecurityLevel::kTest;
    gp.p_ = p;
    gp.g_ = g;
    gp.order_ = order;
    gp.width_ = (static_cast<std::size_t>(std::bit_width(p)) + 7) / 8;
    return gp;
  }

  SecurityLevel level() const noexcept { return level_; }
  bool is_curve() const noexcept { return curve_ != nullptr; }
  const EC_GROUP* curve() const noexcept { return curve_.get(); }

  std::uint64_t modulus() const noexcept { return p_; }
  std::uint64_t generator() const noexcept { return g_; }
  std::uint64_t order() const noexcept { return order_; }

  // Length of the canonical public-key encoding.
  std::size_t public_key_size() const noexcept { return is_curve() ? 33 : width_; }
  std::size_t scalar_size() const noexcept { return is_curve() ? 32 : width_; }

 private:
  GroupParams() = default;

  SecurityLevel level_ = SecurityLevel::kTest;
  std::shared_ptr<const EC_GROUP> curve_;
  std::uint64_t p_ = 0;
  std::uint64_t g_ = 0;
  std::uint64_t order_ = 0;
  std::size_t width_ = 0;
};

inline GroupParams ka_setup(SecurityLevel level) {
  switch (level) {
    case SecurityLevel::kProduction: return GroupParams::p256();
    case SecurityLevel::kTest: return GroupParams::modp(23, 5, 22);
  }
  fail(ErrorCode::kInvalidArgument, "unknown security level");
}

inline GroupParams ka_setup(std::string_view level) { return ka_setup(parse_security_level(level)); }

// Canonical encoding: compressed SEC1 point for P-256, fixed-width
// big-endian integer for the test group.
struct PublicKey {
  Bytes encoding;
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
  friend auto operator<=>(const PublicKey&, const PublicKey&) = default;
};

struct KeyPair {
  Bytes secret;  // big-endian scalar in [1, order)
  PublicKey pub;
};

struct SharedKey {
  std::array<std::uint8_t, 32> bytes{};
  friend bool operator==(const SharedKey&, const SharedKey&) = default;
};

namespace detail {

inline PointPtr decode_point(const GroupParams& gp, ByteView enc, BN_CTX* ctx) {
  require(enc.size() == 33, "P-256 public key must be 33 bytes");
  PointPtr pt(EC_POINT_new(gp.curve()));
  ossl_check(pt != nullptr, "EC_POINT_new failed");
  require(EC_POINT_oct2point(gp.curve(), pt.get(), enc.data(), enc.size(), ctx) == 1,
          "public key is not a valid P-256 point");
  require(EC_POINT_is_at_infinity(gp.curve(), pt.get()) == 0, "public key is the identity");
  require(EC_POINT_is_on_curve(gp.curve(), pt.get(), ctx) == 1, "public key not on curve");
  return pt;
}

inline Bytes encode_point(const GroupParams& gp, const EC_POINT* pt, BN_CTX* ctx) {
  Bytes out(33);
  ossl_check(EC_POINT_point2oct(gp.curve(), pt, POINT_CONVERSION_COMPRESSED, out.data(),
                                out.size(), ctx) == 33,
             "EC_POINT_point2oct failed");
  return out;
}

inline std::uint64_t decode_modp(const GroupParams& gp, ByteView enc) {
  require(enc.size() == gp.public_key_size(), "test-group public key has wrong width");
  const std::uint64_t y = be_to_u64(enc);
  require(y >= 1 && y < gp.modulus(), "public key out of range");
  require(powmod(y, gp.order(), gp.modulus()) == 1, "public key not in the generated subgroup");
  return y;
}

}  // namespace detail

// Checks group membership; throws InvalidArgument otherwise.
inline void validate_public_key(const GroupParams& gp, const PublicKey& pk) {
  if (gp.is_curve()) {
    detail::BnCtxPtr ctx(BN_CTX_new());
    detail::decode_point(gp, pk.encoding, ctx.get());
  } else {
    detail::decode_modp(gp, pk.encoding);
  }
}

// Key pair from a caller-chosen scalar (tests and golden vectors).
inline KeyPair ka_from_secret(const GroupParams& gp, ByteView secret_be) {
  KeyPair kp;
  if (gp.is_curve()) {
    detail::BnCtxPtr ctx(BN_CTX_new());
    auto x = detail::bn_from_be(secret_be);
    const BIGNUM* order = EC_GROUP_get0_order(gp.curve());
    require(!BN_is_zero(x.get()) && BN_cmp(x.get(), order) < 0, "secret scalar out of range");
    detail::PointPtr pub(EC_POINT_new(gp.curve()));
    detail::ossl_check(EC_POINT_mul(gp.curve(), pub.get(), x.get(), nullptr, nullptr, ctx.get()) == 1,
                       "EC_POINT_mul failed");
    kp.secret = detail::bn_to_be(x.get(), gp.scalar_size());
    kp.pub.encoding = detail::encode_point(gp, pub.get(), ctx.get());
  } else {
    const std::uint64_t x = detail::be_to_u64(secret_be);
    require(secret_be.size() <= 8 && x >= 1 && x < gp.order(), "secret scalar out of range");
    kp.secret = detail::u64_to_be(x, gp.scalar_size());
    kp.pub.encoding =
        detail::u64_to_be(detail::powmod(gp.generator(), x, gp.modulus()), gp.public_key_size());
  }
  return kp;
}

inline KeyPair ka_from_secret(const GroupParams& gp, std::uint64_t x) {
  return ka_from_secret(gp, detail::u64_to_be(x, gp.scalar_size()));
}

// Secret scalar uniform in [1, order).
inline KeyPair ka_gen(const GroupParams& gp, RandomSource& rng) {
  if (!gp.is_curve()) return ka_from_secret(gp, 1 + rng.uniform_below(gp.order() - 1));
  // 64 random bytes reduced mod (order - 1) leave negligible bias.
  std::array<std::uint8_t, 64> buf{};
  rng.fill(buf);
  detail::BnCtxPtr ctx(BN_CTX_new());
  auto wide = detail::bn_from_be(buf);
  detail::BnPtr range(BN_dup(EC_GROUP_get0_order(gp.curve())));
  detail::BnPtr x(BN_new());
  detail::ossl_check(range && x && BN_sub_word(range.get(), 1) == 1 &&
                         BN_mod(x.get(), wide.get(), range.get(), ctx.get()) == 1 &&
                         BN_add_word(x.get(), 1) == 1,
                     "scalar sampling failed");
  return ka_from_secret(gp, detail::bn_to_be(x.get(), gp.scalar_size()));
}

// Canonical encoding of the raw shared group element, before hashing.
inline Bytes ka_shared_element(const Bytes& sk, const PublicKey& pk_other, const GroupParams& gp) {
  if (gp.is_curve()) {
    detail::BnCtxPtr ctx(BN_CTX_new());
    auto peer = detail::decode_point(gp, pk_other.encoding, ctx.get());
    auto x = detail::bn_from_be(sk);
    detail::PointPtr shared(EC_POINT_new(gp.curve()));
    detail::ossl_check(
        EC_POINT_mul(gp.curve(), shared.get(), nullptr, peer.get(), x.get(), ctx.get()) == 1,
        "EC_POINT_mul failed");
    return detail::encode_point(gp, shared.get(), ctx.get());
  }
  const std::uint64_t y = detail::decode_modp(gp, pk_other.encoding);
  const std::uint64_t x = detail::be_to_u64(sk);
  return detail::u64_to_be(detail::powmod(y, x, gp.modulus()), gp.public_key_size());
}

inline SharedKey ka_agree(const Bytes& sk, const PublicKey& pk_other, const GroupParams& gp) {
  const Bytes elem = ka_shared_element(sk, pk_other, gp);
  return SharedKey{sha256({ByteView(elem)})};
}

}  // namespace fssa
