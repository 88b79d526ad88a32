#include "fssa/client.hpp"
#include "fssa/server.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "fssa/random.hpp"

namespace fssa {
namespace {

using u64 = std::uint64_t;

Params small_params(std::size_t n, std::size_t t, std::size_t d, std::size_t m, u64 bound,
                    bool per_chunk = false) {
  ParamOptions opt;
  opt.lambda = SecurityLevel::kTest;
  opt.per_chunk_ciphertexts = per_chunk;
  return make_params(n, t, d, m, bound, opt);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInternal;
}

// Clients 1..n; the test group only has 22 distinct keys, so secrets are
// assigned by index to stay distinct.
struct Fixture {
  Params p;
  std::vector<Client> clients;
  Server server;
  DeterministicRandom rng{99};

  explicit Fixture(Params params) : p(params), server(params) {
    for (std::size_t u = 1; u <= p.n; ++u) clients.emplace_back(static_cast<ClientIndex>(u), p);
  }
  Client& c(ClientIndex u) { return clients[u - 1]; }

  KeyBroadcast keys(const std::set<ClientIndex>& live) {
    std::vector<ClientHello> hellos;
    for (ClientIndex u : live) hellos.push_back(c(u).round0(ka_from_secret(p.gp, u64{u + 1})));
    return server.round0(hellos);
  }
};

TEST(ClientRound0Test, HelloAndOrder) {
  Fixture f(small_params(3, 2, 1, 1, 4));
  const auto hello = f.c(2).round0(ka_from_secret(f.p.gp, u64{6}));
  EXPECT_EQ(hello.u, 2u);
  EXPECT_EQ(hello.pk.encoding, Bytes{8});
  EXPECT_EQ(f.c(2).round(), ClientRound::kAdvertised);
  EXPECT_EQ(code_of([&] { f.c(2).round0(f.rng); }), ErrorCode::kProtocolOrderViolation);
  const std::vector<u64> x = {1};
  EXPECT_EQ(code_of([&] { f.c(1).round2(ShareDelivery{}); }), ErrorCode::kProtocolOrderViolation);
  EXPECT_EQ(code_of([&] { f.c(1).round1(KeyBroadcast{}, x, f.rng); }),
            ErrorCode::kProtocolOrderViolation);
}

TEST(ProtocolHandTraceTest, ThreeClientsOneChunk) {
  ParamOptions opt;
  opt.lambda = SecurityLevel::kTest;
  // x = 4 needs B >= 5, so R = 3 * 4 + 1 = 13 is the smallest valid field.
  opt.modulus = 13;
  const Params p = make_params(3, 2, 1, 1, 5, opt);
  ASSERT_EQ(p.fp.modulus(), 13u);
  Fixture f(p);
  const auto bcast = f.keys({1, 2, 3});
  ASSERT_EQ(bcast.keys.size(), 3u);

  // f_1(x) = 4 + 3x: shares 7, 10, 0 at points 1, 2, 3.
  const std::vector<std::vector<u64>> inputs = {{4}, {1}, {2}};
  const std::vector<CoefficientOverride> tails = {{{FieldElement{3}}}, {{FieldElement{5}}}, {{FieldElement{0}}}};
  std::vector<ShareUpload> uploads;
  for (ClientIndex u = 1; u <= 3; ++u) {
    auto up = f.c(u).round1(bcast, inputs[u - 1], f.rng, nullptr, &tails[u - 1]);
    ASSERT_TRUE(up.has_value());
    uploads.push_back(*up);
  }
  ASSERT_EQ(uploads[0].cts.size(), 2u);
  EXPECT_EQ(f.c(1).own_shares(), std::vector<FieldElement>{FieldElement{7}});
  const std::map<ClientIndex, u64> expect = {{2, 10}, {3, 0}};
  for (const auto& e : uploads[0].cts) {
    const auto plain = ae_dec(f.c(1).pairwise_key(e.peer), e.ct);
    ASSERT_TRUE(plain.has_value());
    const auto pt = decode_share_plaintext(*plain, p.fp);
    EXPECT_EQ(pt.sender, 1u);
    EXPECT_EQ(pt.recipient, e.peer);
    ASSERT_EQ(pt.shares.size(), 1u);
    EXPECT_EQ(pt.shares[0].value, expect.at(e.peer));
  }

  const auto deliveries = f.server.round1(uploads);
  ASSERT_EQ(deliveries.size(), 3u);
  std::vector<SumShares> sums;
  for (ClientIndex u = 1; u <= 3; ++u) {
    EXPECT_EQ(deliveries.at(u).cts.size(), 2u);
    auto s = f.c(u).round2(deliveries.at(u));
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(f.c(u).survivors(), (std::vector<ClientIndex>{1, 2, 3}));
    sums.push_back(*s);
  }
  // Any two sum shares reconstruct 4 + 1 + 2.
  const auto rp = p.ramp();
  for (std::size_t skip = 0; skip < 3; ++skip) {
    std::vector<Share> two;
    for (std::size_t k = 0; k < 3; ++k) {
      if (k != skip) two.push_back({static_cast<ClientIndex>(k + 1), sums[k].sums[0]});
    }
    EXPECT_EQ(rss_recon(rp, two)[0].value, 7u);
  }
  EXPECT_EQ(f.server.round2(sums), std::vector<FieldElement>{FieldElement{7}});
  EXPECT_EQ(f.c(1).round(), ClientRound::kDone);
}

TEST(ClientRound1Test, Aborts) {
  {
    Fixture f(small_params(4, 3, 1, 1, 4));
    f.c(1).round0(ka_from_secret(f.p.gp, u64{2}));
    KeyBroadcast two{{{1, f.c(1).keypair().pub}, {2, ka_from_secret(f.p.gp, u64{3}).pub}}};
    const std::vector<u64> x = {1};
    EXPECT_FALSE(f.c(1).round1(two, x, f.rng).has_value());
    EXPECT_EQ(f.c(1).round(), ClientRound::kAborted);
    EXPECT_EQ(f.c(1).abort_reason(), AbortReason::kRosterBelowThreshold);
  }
  {
    Fixture f(small_params(4, 3, 1, 1, 4));
    f.c(1).round0(ka_from_secret(f.p.gp, u64{2}));
    const auto same = ka_from_secret(f.p.gp, u64{3}).pub;
    KeyBroadcast b{{{1, f.c(1).keypair().pub}, {2, same}, {3, same}}};
    const std::vector<u64> x = {1};
    EXPECT_FALSE(f.c(1).round1(b, x, f.rng).has_value());
    EXPECT_EQ(f.c(1).abort_reason(), AbortReason::kDuplicatePublicKeys);
  }
  {
    Fixture f(small_params(4, 3, 1, 1, 4));
    f.c(1).round0(ka_from_secret(f.p.gp, u64{2}));
    KeyBroadcast b{{{2, ka_from_secret(f.p.gp, u64{3}).pub},
                    {3, ka_from_secret(f.p.gp, u64{4}).pub},
                    {4, ka_from_secret(f.p.gp, u64{5}).pub}}};
    const std::vector<u64> x = {1};
    EXPECT_FALSE(f.c(1).round1(b, x, f.rng).has_value());
    EXPECT_EQ(f.c(1).abort_reason(), AbortReason::kOwnKeyMissing);
    EXPECT_EQ(code_of([&] { f.c(1).round2(ShareDelivery{}); }), ErrorCode::kProtocolOrderViolation);
  }
}

struct Run {
  std::set<ClientIndex> u1, u2, u3;
};

TEST(ClientRound2Test, SurvivorsBelowThresholdAndTampering) {
  for (int mode = 0; mode < 3; ++mode) {
    Fixture f(small_params(4, 3, 2, 3, 8));
    const auto bcast = f.keys({1, 2, 3, 4});
    std::vector<ShareUpload> uploads;
    for (ClientIndex u = 1; u <= 4; ++u) {
      const std::vector<u64> x = {u, 1, 2};
      uploads.push_back(*f.c(u).round1(bcast, x, f.rng));
    }
    auto deliveries = f.server.round1(uploads);
    ShareDelivery d = deliveries.at(1);
    AbortReason want;
    if (mode == 0) {
      d.cts.resize(1);  // t - 2 senders
      want = AbortReason::kSurvivorsBelowThreshold;
    } else if (mode == 1) {
      d.cts[0].ct.body[0] ^= 1;
      want = AbortReason::kDecryptionRejected;
    } else {
      // Re-encrypt client 2's share to 1 with a wrong recipient header.
      SharePlaintext pt{2, 3, std::vector<FieldElement>(f.p.chunk_count)};
      d.cts[0].ct = ae_enc(f.c(1).pairwise_key(2), encode_share_plaintext(pt, f.p.fp), f.rng);
      want = AbortReason::kHeaderMismatch;
    }
    EXPECT_FALSE(f.c(1).round2(d).has_value());
    EXPECT_EQ(f.c(1).round(), ClientRound::kAborted);
    EXPECT_EQ(f.c(1).abort_reason(), want);
  }
}

TEST(ServerRound0Test, Examples) {
  {
    Fixture f(small_params(4, 3, 1, 1, 4));
    EXPECT_EQ(code_of([&] { f.keys({1, 2}); }), ErrorCode::kAbortRound);
  }
  {
    Fixture f(small_params(4, 3, 1, 1, 4));
    std::vector<ClientHello> hellos;
    for (ClientIndex u : {3u, 1u, 4u, 2u}) hellos.push_back(f.c(u).round0(ka_from_secret(f.p.gp, u64{u + 1})));
    const auto b = f.server.round0(hellos);
    ASSERT_EQ(b.keys.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(b.keys[i].u, i + 1);
    EXPECT_EQ(code_of([&] { f.server.round0(hellos); }), ErrorCode::kProtocolOrderViolation);
  }
  {
    Fixture f(small_params(4, 3, 1, 1, 4));
    const auto h = f.c(1).round0(f.rng);
    std::vector<ClientHello> hellos = {h, h, f.c(2).round0(f.rng)};
    EXPECT_EQ(code_of([&] { f.server.round0(hellos); }), ErrorCode::kInvalidArgument);
  }
}

TEST(ServerRound1Test, Examples) {
  Fixture f(small_params(5, 3, 2, 4, 8));
  const auto bcast = f.keys({1, 2, 3, 4, 5});
  std::vector<ShareUpload> uploads;
  for (ClientIndex u : {1u, 2u, 4u, 5u}) {  // 3 drops after round 0
    const std::vector<u64> x = {u, 0, 7, 1};
    uploads.push_back(*f.c(u).round1(bcast, x, f.rng));
  }
  {
    std::vector<ShareUpload> dup = uploads;
    dup.push_back(uploads[0]);
    Server s(f.p);
    std::vector<ClientHello> hellos;
    for (ClientIndex u = 1; u <= 5; ++u) hellos.push_back({u, f.c(u).keypair().pub});
    s.round0(hellos);
    EXPECT_EQ(code_of([&] { s.round1(dup); }), ErrorCode::kInvalidArgument);
  }
  {
    std::vector<ShareUpload> bad = uploads;
    bad[0].cts[0].peer = 9;
    Server s(f.p);
    std::vector<ClientHello> hellos;
    for (ClientIndex u = 1; u <= 5; ++u) hellos.push_back({u, f.c(u).keypair().pub});
    s.round0(hellos);
    EXPECT_EQ(code_of([&] { s.round1(bad); }), ErrorCode::kInvalidArgument);
  }
  {
    Server s(f.p);
    std::vector<ClientHello> hellos;
    for (ClientIndex u = 1; u <= 5; ++u) hellos.push_back({u, f.c(u).keypair().pub});
    s.round0(hellos);
    const std::vector<ShareUpload> two(uploads.begin(), uploads.begin() + 2);
    EXPECT_EQ(code_of([&] { s.round1(two); }), ErrorCode::kAbortRound);
  }
  const auto deliveries = f.server.round1(uploads);
  EXPECT_EQ(f.server.u2(), (std::vector<ClientIndex>{1, 2, 4, 5}));
  EXPECT_FALSE(deliveries.contains(3));
  for (const auto& [u, d] : deliveries) {
    ASSERT_EQ(d.cts.size(), 3u);
    for (const auto& e : d.cts) {
      EXPECT_NE(e.peer, 3u);
      EXPECT_NE(e.peer, u);
    }
  }
  std::vector<SumShares> sums;
  for (ClientIndex u : {1u, 2u, 4u, 5u}) sums.push_back(*f.c(u).round2(deliveries.at(u)));
  const auto out = f.server.round2(sums);
  EXPECT_EQ(out, (std::vector<FieldElement>{{12}, {0}, {28}, {4}}));
}

TEST(ServerRound2Test, DroppedAfterUploadStillCountedAndBelowThresholdFails) {
  Fixture f(small_params(4, 2, 1, 2, 16));
  const auto bcast = f.keys({1, 2, 3, 4});
  std::vector<ShareUpload> uploads;
  for (ClientIndex u = 1; u <= 4; ++u) {
    const std::vector<u64> x = {u, 15};
    uploads.push_back(*f.c(u).round1(bcast, x, f.rng));
  }
  const auto deliveries = f.server.round1(uploads);
  std::vector<SumShares> sums;
  for (ClientIndex u : {2u, 4u}) sums.push_back(*f.c(u).round2(deliveries.at(u)));
  {
    Server copy = f.server;
    const std::vector<SumShares> one(sums.begin(), sums.begin() + 1);
    EXPECT_EQ(code_of([&] { copy.round2(one); }), ErrorCode::kInsufficientShares);
  }
  {
    Server copy = f.server;
    std::vector<SumShares> dup = {sums[0], sums[0]};
    EXPECT_EQ(code_of([&] { copy.round2(dup); }), ErrorCode::kInvalidArgument);
  }
  EXPECT_EQ(f.server.round2(sums), (std::vector<FieldElement>{{10}, {60}}));
  EXPECT_EQ(f.server.u3(), (std::vector<ClientIndex>{2, 4}));
}

TEST(ServerRound2Test, AllZeroInputs) {
  Fixture f(small_params(4, 3, 2, 5, 2));
  const auto bcast = f.keys({1, 2, 3, 4});
  std::vector<ShareUpload> uploads;
  const std::vector<u64> zero(5, 0);
  for (ClientIndex u = 1; u <= 4; ++u) uploads.push_back(*f.c(u).round1(bcast, zero, f.rng));
  const auto deliveries = f.server.round1(uploads);
  std::vector<SumShares> sums;
  for (ClientIndex u = 1; u <= 4; ++u) sums.push_back(*f.c(u).round2(deliveries.at(u)));
  EXPECT_EQ(f.server.round2(sums), std::vector<FieldElement>(5));
}

// Random end-to-end runs at each dropout boundary, checked against both the
// integer sum over U2 and the textbook oracle.
TEST(ProtocolPropertyTest, EndToEndExactness) {
  std::mt19937_64 gen(31);
  for (int iter = 0; iter < 150; ++iter) {
    const std::size_t n = 2 + gen() % 11;
    const std::size_t m = 1 + gen() % 8;
    const u64 bound = 2 + gen() % 5000;
    const std::size_t t = 2 + gen() % (n - 1);
    const std::size_t d = 1 + gen() % (t - 1);
    const bool per_chunk = gen() % 4 == 0;
    ParamOptions opt;
    opt.per_chunk_ciphertexts = per_chunk;
    opt.lambda = n <= 20 && gen() % 2 ? SecurityLevel::kTest : SecurityLevel::kProduction;
    const Params p = make_params(n, t, d, m, bound, opt);
    DeterministicRandom rng(iter);

    // Drop up to n - t clients, each at a random boundary (0, 1, 2).
    std::vector<ClientIndex> order(n);
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), gen);
    std::map<ClientIndex, int> drop;
    const std::size_t drops = gen() % (n - t + 1);
    for (std::size_t k = 0; k < drops; ++k) drop[order[k]] = static_cast<int>(gen() % 3);
    auto live_at = [&](ClientIndex u, int boundary) { return !drop.contains(u) || drop[u] >= boundary; };

    std::vector<Client> clients;
    std::vector<std::vector<u64>> x(n, std::vector<u64>(m));
    for (std::size_t u = 1; u <= n; ++u) {
      clients.emplace_back(static_cast<ClientIndex>(u), p);
      for (auto& v : x[u - 1]) v = gen() % bound;
    }
    Server server(p);
    std::vector<ClientHello> hellos;
    for (std::size_t u = 1; u <= n; ++u) {
      hellos.push_back(p.gp.is_curve() ? clients[u - 1].round0(rng)
                                       : clients[u - 1].round0(ka_from_secret(p.gp, u64{u})));
    }
    const auto bcast = server.round0(hellos);
    std::vector<ShareUpload> uploads;
    for (std::size_t u = 1; u <= n; ++u) {
      if (live_at(static_cast<ClientIndex>(u), 1)) uploads.push_back(*clients[u - 1].round1(bcast, x[u - 1], rng));
    }
    const auto deliveries = server.round1(uploads);
    std::vector<SumShares> sums;
    for (const auto& [u, dl] : deliveries) {
      if (live_at(u, 2)) sums.push_back(*clients[u - 1].round2(dl));
    }
    const auto out = server.round2(sums);

    ASSERT_TRUE(std::includes(server.u1().begin(), server.u1().end(), server.u2().begin(), server.u2().end()));
    ASSERT_TRUE(std::includes(server.u2().begin(), server.u2().end(), server.u3().begin(), server.u3().end()));
    std::vector<u64> expect(m, 0);
    std::vector<std::vector<u64>> u2_inputs;
    for (ClientIndex u : server.u2()) {
      u2_inputs.push_back(x[u - 1]);
      for (std::size_t i = 0; i < m; ++i) expect[i] += x[u - 1][i];
    }
    std::vector<u64> got;
    for (auto e : out) got.push_back(e.value);
    ASSERT_EQ(got, expect) << "iter " << iter;
    ASSERT_EQ(out, naive_aggregate_oracle(u2_inputs, t, p.fp, rng));
  }
}

TEST(ProtocolPropertyTest, PerChunkModeMatchesBatched) {
  for (bool per_chunk : {false, true}) {
    Fixture f(small_params(5, 4, 2, 7, 100, per_chunk));
    const auto bcast = f.keys({1, 2, 3, 4, 5});
    std::vector<ShareUpload> uploads;
    for (ClientIndex u = 1; u <= 5; ++u) {
      const std::vector<u64> x = {u, u * 2, 3, 4, 5, 6, 99};
      uploads.push_back(*f.c(u).round1(bcast, x, f.rng));
      EXPECT_EQ(uploads.back().cts.size(), per_chunk ? 4u * 4u : 4u);
    }
    const auto deliveries = f.server.round1(uploads);
    std::vector<SumShares> sums;
    for (ClientIndex u = 1; u <= 5; ++u) sums.push_back(*f.c(u).round2(deliveries.at(u)));
    EXPECT_EQ(f.server.round2(sums),
              (std::vector<FieldElement>{{15}, {30}, {15}, {20}, {25}, {30}, {495}}));
  }
}

}  // namespace
}  // namespace fssa
