#pragma once

// AES-256-GCM envelope. Wire form: nonce (12) || ciphertext || tag (16).
// A fresh random nonce per message; no associated data.

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

#include "fssa/bytes.hpp"
#include "fssa/error.hpp"
#include "fssa/key_agreement.hpp"
#include "fssa/random.hpp"

namespace fssa {

inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kMaxPlaintext = std::size_t{1} << 31;

struct AeCiphertext {
  std::array<std::uint8_t, kNonceSize> nonce{};
  Bytes body;  // ciphertext || tag

  std::size_t wire_size() const noexcept { return kNonceSize + body.size(); }

  Bytes to_bytes() const {
    Bytes out(nonce.begin(), nonce.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
  }

  static AeCiphertext from_bytes(ByteView wire) {
    require(wire.size() >= kNonceSize + kTagSize, "ciphertext shorter than nonce and tag");
    AeCiphertext ct;
    std::copy_n(wire.begin(), kNonceSize, ct.nonce.begin());
    ct.body.assign(wire.begin() + kNonceSize, wire.end());
    return ct;
  }

  friend bool operator==(const AeCiphertext&, const AeCiphertext&) = default;
};

namespace detail {
struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;
}  // namespace detail

inline AeCiphertext ae_enc(const SharedKey& key, ByteView plaintext, RandomSource& rng) {
  require(plaintext.size() <= kMaxPlaintext, "plaintext exceeds 2^31 bytes");
  AeCiphertext ct;
  rng.fill(ct.nonce);
  ct.body.resize(plaintext.size() + kTagSize);

  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  int total = 0;
  bool ok = ctx && EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) == 1 &&
            EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes.data(), ct.nonce.data()) == 1;
  if (ok && !plaintext.empty()) {
    ok = EVP_EncryptUpdate(ctx.get(), ct.body.data(), &len, plaintext.data(),
                           static_cast<int>(plaintext.size())) == 1;
    total = len;
  }
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), ct.body.data() + total, &len) == 1;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize,
                                 ct.body.data() + plaintext.size()) == 1;
  if (!ok) fail(ErrorCode::kInternal, "AES-GCM encryption failed");
  return ct;
}

// std::nullopt is the rejection signal: wrong key, or any modification of
// nonce, ciphertext or tag.
inline std::optional<Bytes> ae_dec(const SharedKey& key, const AeCiphertext& ct) {
  if (ct.body.size() < kTagSize) return std::nullopt;
  const std::size_t msg_len = ct.body.size() - kTagSize;
  Bytes out(msg_len);
  std::array<std::uint8_t, kTagSize> tag{};
  std::copy_n(ct.body.begin() + static_cast<std::ptrdiff_t>(msg_len), kTagSize, tag.begin());

  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  bool ok = ctx && EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) == 1 &&
            EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes.data(), ct.nonce.data()) == 1;
  if (!ok) fail(ErrorCode::kInternal, "AES-GCM init failed");
  if (msg_len > 0 &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, ct.body.data(), static_cast<int>(msg_len)) != 1) {
    return std::nullopt;
  }
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()) != 1) {
    fail(ErrorCode::kInternal, "AES-GCM tag setup failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + (msg_len > 0 ? len : 0), &len) != 1) {
    return std::nullopt;
  }
  return out;
}

}  // namespace fssa
