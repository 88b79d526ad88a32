#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fssa/aead.hpp"
#include "fssa/error.hpp"
#include "fssa/key_agreement.hpp"
#include "fssa/messages.hpp"
#include "fssa/params.hpp"
#include "fssa/ramp.hpp"

namespace fssa {

enum class ClientRound { kFresh, kAdvertised, kShared, kDone, kAborted };

enum class AbortReason {
  kNone,
  kRosterBelowThreshold,
  kDuplicatePublicKeys,
  kOwnKeyMissing,
  kInvalidPublicKey,
  kSurvivorsBelowThreshold,
  kUnknownSender,
  kDecryptionRejected,
  kHeaderMismatch,
};

inline std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::kNone: return "none";
    case AbortReason::kRosterBelowThreshold: return "roster below threshold";
    case AbortReason::kDuplicatePublicKeys: return "duplicate public keys";
    case AbortReason::kOwnKeyMissing: return "own key missing or mismatched";
    case AbortReason::kInvalidPublicKey: return "invalid public key";
    case AbortReason::kSurvivorsBelowThreshold: return "survivors below threshold";
    case AbortReason::kUnknownSender: return "delivery from unknown sender";
    case AbortReason::kDecryptionRejected: return "decryption rejected";
    case AbortReason::kHeaderMismatch: return "share header mismatch";
  }
  return "unknown";
}

// Wall-clock split of round 1, in nanoseconds.
struct Round1Timings {
  std::int64_t share_ns = 0;
  std::int64_t encrypt_ns = 0;
};

// Explicit random coefficients for deterministic tests: chunk i uses
// tail[i] (each of length t - d) instead of fresh randomness.
using CoefficientOverride = std::vector<std::vector<FieldElement>>;

class Client {
 public:
  Client(ClientIndex u, Params params) : u_(u), params_(std::move(params)) {
    require(u_ >= 1 && u_ <= params_.n, "client index must lie in [1, n]");
  }

  ClientIndex index() const noexcept { return u_; }
  ClientRound round() const noexcept { return round_; }
  AbortReason abort_reason() const noexcept { return abort_reason_; }
  const Params& params() const noexcept { return params_; }
  const KeyPair& keypair() const noexcept { return keypair_; }
  const std::vector<ClientIndex>& roster() const noexcept { return roster_; }
  const std::vector<ClientIndex>& survivors() const noexcept { return survivors_; }
  // Own share of each own chunk.
  const std::vector<FieldElement>& own_shares() const noexcept { return own_shares_; }
  // Shares received from each sender, per chunk (filled in round 2).
  const std::map<ClientIndex, std::vector<FieldElement>>& received_shares() const noexcept {
    return received_;
  }
  const SharedKey& pairwise_key(ClientIndex v) const {
    auto it = pairwise_.find(v);
    require(it != pairwise_.end(), "no pairwise key for client " + std::to_string(v));
    return it->second;
  }

  ClientHello round0(RandomSource& rng) { return round0(ka_gen(params_.gp, rng)); }

  ClientHello round0(KeyPair kp) {
    expect(ClientRound::kFresh, "round0");
    keypair_ = std::move(kp);
    round_ = ClientRound::kAdvertised;
    return ClientHello{u_, keypair_.pub};
  }

  std::optional<ShareUpload> round1(const KeyBroadcast& broadcast, std::span<const std::uint64_t> x,
                                    RandomSource& rng, Round1Timings* timings = nullptr,
                                    const CoefficientOverride* coeffs = nullptr) {
    expect(ClientRound::kAdvertised, "round1");
    require(x.size() == params_.m, "input vector length must equal m");

    if (broadcast.keys.size() < params_.t) return abort(AbortReason::kRosterBelowThreshold);
    std::vector<KeyEntry> keys = broadcast.keys;
    std::sort(keys.begin(), keys.end(),
              [](const KeyEntry& a, const KeyEntry& b) { return a.u < b.u; });
    for (std::size_t i = 1; i < keys.size(); ++i) {
      require(keys[i].u != keys[i - 1].u, "duplicate client index in key broadcast");
    }
    {
      std::vector<PublicKey> pks;
      for (const auto& k : keys) pks.push_back(k.pk);
      std::sort(pks.begin(), pks.end());
      if (std::adjacent_find(pks.begin(), pks.end()) != pks.end()) {
        return abort(AbortReason::kDuplicatePublicKeys);
      }
    }
    auto own = std::find_if(keys.begin(), keys.end(), [&](const KeyEntry& k) { return k.u == u_; });
    if (own == keys.end() || own->pk != keypair_.pub) return abort(AbortReason::kOwnKeyMissing);
    for (const auto& k : keys) {
      if (k.u < 1 || k.u > params_.n) return abort(AbortReason::kOwnKeyMissing);
    }

    const auto start = Clock::now();
    roster_.clear();
    for (const auto& k : keys) roster_.push_back(k.u);
    const std::size_t width = roster_.size();
    const auto chunks = chunk_vector(x, params_.d, params_.bound, params_.fp);
    const std::size_t tail_len = params_.t - params_.d;
    if (coeffs) require(coeffs->size() == chunks.size(), "coefficient override per chunk");

    // shares[i * width + k] is the share of chunk i for roster_[k].
    ShareEvaluator eval(roster_, params_.t, params_.fp);
    std::vector<FieldElement> shares(chunks.size() * width);
    std::vector<FieldElement> poly(params_.t);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      std::copy(chunks[i].begin(), chunks[i].end(), poly.begin());
      for (std::size_t j = 0; j < tail_len; ++j) {
        if (coeffs) {
          require((*coeffs)[i].size() == tail_len, "override needs t - d coefficients per chunk");
          require(params_.fp.contains((*coeffs)[i][j]), "override coefficient not reduced");
          poly[params_.d + j] = (*coeffs)[i][j];
        } else {
          poly[params_.d + j] = rng.uniform_element(params_.fp);
        }
      }
      eval.evaluate(poly, std::span<FieldElement>(shares).subspan(i * width, width));
    }
    const auto shared = Clock::now();

    ShareUpload upload{u_, {}};
    own_shares_.assign(chunks.size(), params_.fp.zero());
    for (std::size_t k = 0; k < width; ++k) {
      const ClientIndex v = roster_[k];
      std::vector<FieldElement> for_v(chunks.size());
      for (std::size_t i = 0; i < chunks.size(); ++i) for_v[i] = shares[i * width + k];
      if (v == u_) {
        own_shares_ = std::move(for_v);
        continue;
      }
      KeyEntry& entry = keys[k];
      try {
        pairwise_[v] = ka_agree(keypair_.secret, entry.pk, params_.gp);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInvalidArgument) throw;
        return abort(AbortReason::kInvalidPublicKey);
      }
      if (params_.per_chunk_ciphertexts) {
        for (std::size_t i = 0; i < chunks.size(); ++i) {
          SharePlaintext pt{u_, v, {for_v[i]}};
          upload.cts.push_back({v, ae_enc(pairwise_[v], encode_share_plaintext(pt, params_.fp), rng)});
        }
      } else {
        SharePlaintext pt{u_, v, std::move(for_v)};
        upload.cts.push_back({v, ae_enc(pairwise_[v], encode_share_plaintext(pt, params_.fp), rng)});
      }
    }
    const auto done = Clock::now();
    if (timings) {
      timings->share_ns = ns(start, shared);
      timings->encrypt_ns = ns(shared, done);
    }
    round_ = ClientRound::kShared;
    return upload;
  }

  std::optional<SumShares> round2(const ShareDelivery& delivery) {
    expect(ClientRound::kShared, "round2");
    const std::size_t chunks = params_.chunk_count;
    const std::size_t per_sender = params_.per_chunk_ciphertexts ? chunks : 1;

    // Group ciphertexts by sender, keeping arrival order within a sender.
    std::map<ClientIndex, std::vector<const AeCiphertext*>> by_sender;
    for (const auto& e : delivery.cts) {
      if (e.peer == u_ || !pairwise_.contains(e.peer)) return abort(AbortReason::kUnknownSender);
      by_sender[e.peer].push_back(&e.ct);
    }
    for (const auto& [v, cts] : by_sender) {
      if (cts.size() != per_sender) return abort(AbortReason::kHeaderMismatch);
    }
    survivors_.clear();
    survivors_.push_back(u_);
    for (const auto& [v, cts] : by_sender) survivors_.push_back(v);
    std::sort(survivors_.begin(), survivors_.end());
    if (survivors_.size() < params_.t) return abort(AbortReason::kSurvivorsBelowThreshold);

    received_.clear();
    for (const auto& [v, cts] : by_sender) {
      std::vector<FieldElement> from_v;
      from_v.reserve(chunks);
      for (const AeCiphertext* ct : cts) {
        auto plain = ae_dec(pairwise_.at(v), *ct);
        if (!plain) return abort(AbortReason::kDecryptionRejected);
        SharePlaintext pt;
        try {
          pt = decode_share_plaintext(*plain, params_.fp);
        } catch (const Error&) {
          return abort(AbortReason::kHeaderMismatch);
        }
        if (pt.sender != v || pt.recipient != u_ || pt.shares.size() != chunks / per_sender) {
          return abort(AbortReason::kHeaderMismatch);
        }
        from_v.insert(from_v.end(), pt.shares.begin(), pt.shares.end());
      }
      received_[v] = std::move(from_v);
    }

    SumShares out{u_, own_shares_};
    for (const auto& [v, shares] : received_) {
      for (std::size_t i = 0; i < chunks; ++i) out.sums[i] = fe_add(out.sums[i], shares[i], params_.fp);
    }
    round_ = ClientRound::kDone;
    return out;
  }

 private:
  using Clock = std::chrono::steady_clock;

  static std::int64_t ns(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
  }

  void expect(ClientRound r, const char* step) const {
    if (round_ != r) {
      fail(ErrorCode::kProtocolOrderViolation,
           std::string(step) + " invoked out of order on client " + std::to_string(u_));
    }
  }

  std::nullopt_t abort(AbortReason reason) {
    round_ = ClientRound::kAborted;
    abort_reason_ = reason;
    return std::nullopt;
  }

  ClientIndex u_;
  Params params_;
  ClientRound round_ = ClientRound::kFresh;
  AbortReason abort_reason_ = AbortReason::kNone;
  KeyPair keypair_;
  std::vector<ClientIndex> roster_;
  std::vector<ClientIndex> survivors_;
  std::map<ClientIndex, SharedKey> pairwise_;
  std::vector<FieldElement> own_shares_;
  std::map<ClientIndex, std::vector<FieldElement>> received_;
};

}  // namespace fssa
