#include "fssa/params.hpp"

#include <gtest/gtest.h>

#include <random>

namespace fssa {
namespace {

using u64 = std::uint64_t;

TEST(PlanParametersTest, HundredClientsThirtyPercent) {
  const auto p = plan_parameters(100, 1000, u64{1} << 16, 0.3, 0.3);
  EXPECT_EQ(p.t, 70u);
  EXPECT_EQ(p.d, 40u);
  EXPECT_EQ(p.fp.modulus(), 6553511u);
  EXPECT_EQ(p.chunk_count, 25u);
}

TEST(PlanParametersTest, ClampsToTMinusOne) {
  const auto p = plan_parameters(100, 10, 16, 0.0, 0.0);
  EXPECT_EQ(p.t, 100u);
  EXPECT_EQ(p.d, 99u);
  ParamOptions opt;
  opt.degenerate_privacy_ok = true;
  EXPECT_EQ(plan_parameters(100, 10, 16, 0.0, 0.0, opt).d, 100u);
}

TEST(PlanParametersTest, InfeasibleRates) {
  EXPECT_THROW(plan_parameters(10, 5, 16, 0.5, 0.5), Error);
  EXPECT_THROW(plan_parameters(10, 5, 16, 0.4, 0.6), Error);
  EXPECT_THROW(plan_parameters(1, 5, 16, 0.0, 0.0), Error);
  EXPECT_THROW(plan_parameters(10, 0, 16, 0.1, 0.1), Error);
  EXPECT_THROW(plan_parameters(4, 5, u64{1} << 63, 0.0, 0.0), Error);
}

TEST(PlanParametersTest, InvariantsOverRandomRates) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + rng() % 500;
    const double rho = (rng() % 100) / 100.0, gamma = (rng() % 100) / 100.0;
    if (rho + gamma >= 1.0) continue;
    Params p;
    try {
      p = plan_parameters(n, 1 + rng() % 5000, 2 + rng() % 100000, rho, gamma);
    } catch (const Error&) {
      continue;
    }
    ASSERT_EQ(p.t, n - rate_floor(rho, n));
    ASSERT_LE(p.d, p.t - rate_ceil(gamma, n));
    ASSERT_LT(p.d, p.t);
    ASSERT_GT(p.d, 0u);
    ASSERT_LE(p.n * (p.bound - 1) + 1, p.fp.modulus());
    ASSERT_EQ(p.chunk_count, ceil_div(p.m, p.d));
  }
}

TEST(MakeParamsTest, ModulusOverride) {
  ParamOptions opt;
  opt.modulus = 11;
  EXPECT_EQ(make_params(3, 2, 1, 1, 4, opt).fp.modulus(), 11u);
  EXPECT_THROW(make_params(3, 2, 1, 1, 5, opt), Error);  // 3*4+1 = 13 > 11
  opt.modulus = 12;
  EXPECT_THROW(make_params(3, 2, 1, 1, 4, opt), Error);
}

TEST(RateRoundingTest, ExactProducts) {
  EXPECT_EQ(rate_floor(0.3, 100), 30u);
  EXPECT_EQ(rate_ceil(0.3, 100), 30u);
  EXPECT_EQ(rate_floor(0.3, 10), 3u);
  EXPECT_EQ(rate_ceil(0.1, 15), 2u);
  EXPECT_EQ(rate_floor(0.1, 15), 1u);
}

TEST(ChunkVectorTest, Examples) {
  const auto fp = FieldParams::from_prime(11);
  const std::vector<u64> x = {1, 2, 3, 4, 5};
  const auto c = chunk_vector(x, 2, 8, fp);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (std::vector<FieldElement>{{1}, {2}}));
  EXPECT_EQ(c[1], (std::vector<FieldElement>{{3}, {4}}));
  EXPECT_EQ(c[2], (std::vector<FieldElement>{{5}, {0}}));

  const std::vector<u64> four = {1, 2, 3, 4};
  EXPECT_EQ(chunk_vector(four, 2, 8, fp).size(), 2u);

  const std::vector<u64> big(100000, 1);
  EXPECT_EQ(chunk_vector(big, 40, 2, fp).size(), 2500u);

  const std::vector<u64> out_of_range = {1, 8};
  EXPECT_THROW(chunk_vector(out_of_range, 2, 8, fp), Error);
}

TEST(ChunkVectorTest, ConcatenationRecoversInput) {
  std::mt19937_64 rng(4);
  const auto fp = FieldParams::from_prime(65537);
  for (int i = 0; i < 200; ++i) {
    std::vector<u64> x(1 + rng() % 50);
    for (auto& v : x) v = rng() % 1000;
    const std::size_t d = 1 + rng() % 9;
    std::vector<u64> flat;
    for (const auto& chunk : chunk_vector(x, d, 1000, fp)) {
      ASSERT_EQ(chunk.size(), d);
      for (auto e : chunk) flat.push_back(e.value);
    }
    flat.resize(x.size());
    ASSERT_EQ(flat, x);
  }
}

}  // namespace
}  // namespace fssa
