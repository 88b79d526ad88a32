#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fssa/error.hpp"
#include "fssa/field.hpp"
#include "fssa/messages.hpp"
#include "fssa/params.hpp"

namespace fssa {

enum class ServerRound { kAwaitingKeys, kAwaitingShares, kAwaitingSums, kDone, kAborted };

// Each round method takes the batch of messages collected before the round
// closed; when the batch closes is the caller's policy.
class Server {
 public:
  explicit Server(Params params) : params_(std::move(params)) {}

  const Params& params() const noexcept { return params_; }
  ServerRound round() const noexcept { return round_; }
  const std::vector<ClientIndex>& u1() const noexcept { return u1_; }
  const std::vector<ClientIndex>& u2() const noexcept { return u2_; }
  const std::vector<ClientIndex>& u3() const noexcept { return u3_; }

  KeyBroadcast round0(std::span<const ClientHello> hellos) {
    expect(ServerRound::kAwaitingKeys, "round0");
    std::vector<ClientHello> sorted(hellos.begin(), hellos.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const ClientHello& a, const ClientHello& b) { return a.u < b.u; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      require(sorted[i].u >= 1 && sorted[i].u <= params_.n, "hello from index outside [1, n]");
      require(i == 0 || sorted[i].u != sorted[i - 1].u,
              "duplicate hello from client " + std::to_string(sorted[i].u));
    }
    if (sorted.size() < params_.t) abort_round("fewer than t public keys");
    KeyBroadcast out;
    u1_.clear();
    for (auto& h : sorted) {
      u1_.push_back(h.u);
      out.keys.push_back(KeyEntry{h.u, std::move(h.pk)});
    }
    round_ = ServerRound::kAwaitingShares;
    return out;
  }

  // Returns the delivery for every member of U2, keyed by recipient.
  std::map<ClientIndex, ShareDelivery> round1(std::span<const ShareUpload> uploads) {
    expect(ServerRound::kAwaitingShares, "round1");
    const std::size_t per_pair = params_.per_chunk_ciphertexts ? params_.chunk_count : 1;
    std::vector<const ShareUpload*> sorted;
    for (const auto& up : uploads) sorted.push_back(&up);
    std::sort(sorted.begin(), sorted.end(),
              [](const ShareUpload* a, const ShareUpload* b) { return a->u < b->u; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const ShareUpload& up = *sorted[i];
      require(in(u1_, up.u), "upload from client " + std::to_string(up.u) + " outside U1");
      require(i == 0 || up.u != sorted[i - 1]->u,
              "second upload from client " + std::to_string(up.u));
      std::map<ClientIndex, std::size_t> per_recipient;
      for (const auto& e : up.cts) {
        require(e.peer != up.u && in(u1_, e.peer),
                "ciphertext addressed to unknown recipient " + std::to_string(e.peer));
        ++per_recipient[e.peer];
      }
      require(per_recipient.size() == u1_.size() - 1,
              "upload from client " + std::to_string(up.u) + " does not cover U1");
      for (const auto& [v, count] : per_recipient) {
        require(count == per_pair, "wrong ciphertext count for recipient " + std::to_string(v));
      }
    }
    if (sorted.size() < params_.t) abort_round("fewer than t share uploads");

    u2_.clear();
    for (const ShareUpload* up : sorted) u2_.push_back(up->u);
    std::map<ClientIndex, ShareDelivery> out;
    for (ClientIndex u : u2_) out[u];
    // Uploads are visited in ascending sender order, so each delivery lists
    // senders ascending; per-chunk ciphertexts keep their chunk order.
    for (const ShareUpload* up : sorted) {
      for (const auto& e : up->cts) {
        auto it = out.find(e.peer);
        if (it != out.end()) it->second.cts.push_back(AddressedCiphertext{up->u, e.ct});
      }
    }
    round_ = ServerRound::kAwaitingSums;
    return out;
  }

  // Sum over U2 of the inputs, length m.
  std::vector<FieldElement> round2(std::span<const SumShares> sums) {
    expect(ServerRound::kAwaitingSums, "round2");
    std::vector<const SumShares*> sorted;
    for (const auto& s : sums) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(),
              [](const SumShares* a, const SumShares* b) { return a->u < b->u; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      require(in(u2_, sorted[i]->u), "sum shares from client outside U2");
      require(i == 0 || sorted[i]->u != sorted[i - 1]->u, "duplicate sum shares");
      require(sorted[i]->sums.size() == params_.chunk_count, "sum shares have wrong length");
      for (FieldElement e : sorted[i]->sums) require(params_.fp.contains(e), "unreduced sum share");
    }
    u3_.clear();
    for (const SumShares* s : sorted) u3_.push_back(s->u);
    if (u3_.size() < params_.t) {
      round_ = ServerRound::kAborted;
      fail(ErrorCode::kInsufficientShares, "|U3| = " + std::to_string(u3_.size()) +
                                               " below threshold " + std::to_string(params_.t));
    }

    const std::size_t t = params_.t;
    const std::size_t d = params_.d;
    const std::size_t chunks = params_.chunk_count;
    std::vector<FieldElement> points(t);
    for (std::size_t k = 0; k < t; ++k) points[k] = FieldElement{u3_[k]};
    const ReconMatrix& recon = matrix_for(points);

    // Transpose the first t sum vectors so each chunk's shares are contiguous.
    std::vector<FieldElement> by_chunk(chunks * t);
    for (std::size_t k = 0; k < t; ++k) {
      const auto& s = sorted[k]->sums;
      for (std::size_t i = 0; i < chunks; ++i) by_chunk[i * t + k] = s[i];
    }
    std::vector<FieldElement> out(chunks * d);
    for (std::size_t i = 0; i < chunks; ++i) {
      const std::span<const FieldElement> shares(by_chunk.data() + i * t, t);
      for (std::size_t r = 0; r < d; ++r) out[i * d + r] = fe_dot(recon.row(r), shares, params_.fp);
    }
    out.resize(params_.m);
    round_ = ServerRound::kDone;
    return out;
  }

 private:
  static bool in(const std::vector<ClientIndex>& sorted, ClientIndex u) {
    return std::binary_search(sorted.begin(), sorted.end(), u);
  }

  void expect(ServerRound r, const char* step) const {
    if (round_ != r) fail(ErrorCode::kProtocolOrderViolation, std::string(step) + " out of order");
  }

  [[noreturn]] void abort_round(const std::string& why) {
    round_ = ServerRound::kAborted;
    fail(ErrorCode::kAbortRound, why);
  }

  const ReconMatrix& matrix_for(const std::vector<FieldElement>& points) {
    std::vector<std::uint64_t> key;
    for (auto p : points) key.push_back(p.value);
    auto it = recon_cache_.find(key);
    if (it == recon_cache_.end()) {
      it = recon_cache_.emplace(key, build_recon_matrix(points, params_.d, params_.fp)).first;
    }
    return it->second;
  }

  Params params_;
  ServerRound round_ = ServerRound::kAwaitingKeys;
  std::vector<ClientIndex> u1_;
  std::vector<ClientIndex> u2_;
  std::vector<ClientIndex> u3_;
  std::map<std::vector<std::uint64_t>, ReconMatrix> recon_cache_;
};

}  // namespace fssa
