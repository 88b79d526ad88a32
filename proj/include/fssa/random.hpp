#pragma once

// Randomness sources. Protocol code draws every random byte through
// RandomSource so a seeded run is reproducible bit for bit.

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>

#include "fssa/error.hpp"
#include "fssa/field.hpp"
#include "fssa/hash.hpp"

namespace fssa {

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64() {
    std::array<std::uint8_t, 8> b{};
    fill(b);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  // Uniform in [0, bound) by rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    require(bound > 0, "uniform_below needs a positive bound");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
      const std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  FieldElement uniform_element(const FieldParams& fp) {
    return FieldElement{uniform_below(fp.modulus())};
  }
};

// OS entropy.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
      fail(ErrorCode::kInternal, "RAND_bytes failed");
    }
  }
};

// ChaCha20 keystream under a 256-bit key. Child streams are keyed by
// SHA-256(parent key || label), so forked streams do not depend on how much
// the parent has been consumed.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(std::uint64_t seed) {
    std::array<std::uint8_t, 8> s{};
    for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(seed >> (8 * i));
    key_ = sha256({ByteView(s)});
    init();
  }

  explicit DeterministicRandom(const std::array<std::uint8_t, 32>& key) : key_(key) { init(); }

  DeterministicRandom(const DeterministicRandom&) = delete;
  DeterministicRandom& operator=(const DeterministicRandom&) = delete;

  DeterministicRandom fork(std::string_view label) const {
    const auto* l = reinterpret_cast<const std::uint8_t*>(label.data());
    return DeterministicRandom(sha256({ByteView(key_), ByteView(l, label.size())}));
  }

  DeterministicRandom(DeterministicRandom&& other) noexcept
      : key_(other.key_), ctx_(std::move(other.ctx_)) {}

  void fill(std::span<std::uint8_t> out) override {
    if (out.empty()) return;
    std::fill(out.begin(), out.end(), std::uint8_t{0});
    int len = 0;
    if (EVP_EncryptUpdate(ctx_.get(), out.data(), &len, out.data(),
                          static_cast<int>(out.size())) != 1) {
      fail(ErrorCode::kInternal, "ChaCha20 keystream failed");
    }
  }

 private:
  struct CtxFree {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
  };

  void init() {
    ctx_.reset(EVP_CIPHER_CTX_new());
    std::array<std::uint8_t, 16> iv{};
    if (!ctx_ ||
        EVP_EncryptInit_ex(ctx_.get(), EVP_chacha20(), nullptr, key_.data(), iv.data()) != 1) {
      fail(ErrorCode::kInternal, "ChaCha20 init failed");
    }
  }

  std::array<std::uint8_t, 32> key_{};
  std::unique_ptr<EVP_CIPHER_CTX, CtxFree> ctx_;
};

}  // namespace fssa
