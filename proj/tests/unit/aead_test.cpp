#include "fssa/aead.hpp"

#include <gtest/gtest.h>

#include "fssa/random.hpp"

namespace fssa {
namespace {

SharedKey key_from(std::uint64_t seed) {
  DeterministicRandom rng(seed);
  SharedKey k;
  rng.fill(k.bytes);
  return k;
}

TEST(AeadTest, RoundTripRandomMessages) {
  DeterministicRandom rng(1);
  for (int i = 0; i < 1000; ++i) {
    const SharedKey k = key_from(i);
    Bytes msg(rng.uniform_below(300));
    rng.fill(msg);
    const auto ct = ae_enc(k, msg, rng);
    EXPECT_EQ(ct.wire_size(), kNonceSize + msg.size() + kTagSize);
    const auto pt = ae_dec(k, ct);
    ASSERT_TRUE(pt.has_value());
    ASSERT_EQ(*pt, msg);
    ASSERT_EQ(AeCiphertext::from_bytes(ct.to_bytes()), ct);
  }
}

TEST(AeadTest, EmptyPlaintext) {
  DeterministicRandom rng(2);
  const SharedKey k = key_from(9);
  const auto ct = ae_enc(k, Bytes{}, rng);
  EXPECT_EQ(ct.body.size(), kTagSize);
  const auto pt = ae_dec(k, ct);
  ASSERT_TRUE(pt.has_value());
  EXPECT_TRUE(pt->empty());
}

TEST(AeadTest, EncryptionIsRandomized) {
  DeterministicRandom rng(3);
  const SharedKey k = key_from(1);
  const Bytes msg = {1, 2, 3, 4};
  const auto a = ae_enc(k, msg, rng), b = ae_enc(k, msg, rng);
  EXPECT_NE(a.nonce, b.nonce);
  EXPECT_NE(a.body, b.body);
}

TEST(AeadTest, EverySingleBitFlipIsRejected) {
  DeterministicRandom rng(4);
  const SharedKey k = key_from(2);
  const Bytes msg = {'s', 'h', 'a', 'r', 'e', 's'};
  const Bytes wire = ae_enc(k, msg, rng).to_bytes();
  for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
    Bytes mutated = wire;
    mutated[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ASSERT_FALSE(ae_dec(k, AeCiphertext::from_bytes(mutated)).has_value()) << "bit " << bit;
  }
}

TEST(AeadTest, WrongKeyRejected) {
  DeterministicRandom rng(5);
  const auto ct = ae_enc(key_from(1), Bytes{9, 9, 9}, rng);
  EXPECT_FALSE(ae_dec(key_from(2), ct).has_value());
}

TEST(AeadTest, TruncatedWireRejected) {
  EXPECT_THROW(AeCiphertext::from_bytes(Bytes(kNonceSize + kTagSize - 1)), Error);
}

}  // namespace
}  // namespace fssa
