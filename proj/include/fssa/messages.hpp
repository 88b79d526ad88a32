#pragma once

// Wire messages. Layout, all integers little-endian:
//
//   ClientHello    0x00 | u:4 | len:4 | pk
//   KeyBroadcast   0x01 | count:4 | { u:4 | len:4 | pk }*
//   ShareUpload    0x02 | u:4 | count:4 | { v:4 | len:4 | nonce || body }*
//   ShareDelivery  0x03 | count:4 | { v:4 | len:4 | nonce || body }*
//   SumShares      0x04 | u:4 | count:4 | { element:byte_width }*
//
// Share plaintexts (inside each ciphertext) are
//   sender:4 | recipient:4 | share_count:4 | { element:byte_width }*

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fssa/aead.hpp"
#include "fssa/bytes.hpp"
#include "fssa/field.hpp"
#include "fssa/key_agreement.hpp"
#include "fssa/ramp.hpp"

namespace fssa {

enum class MessageTag : std::uint8_t {
  kClientHello = 0,
  kKeyBroadcast = 1,
  kShareUpload = 2,
  kShareDelivery = 3,
  kSumShares = 4,
};

struct ClientHello {
  ClientIndex u = 0;
  PublicKey pk;
  friend bool operator==(const ClientHello&, const ClientHello&) = default;
};

struct KeyEntry {
  ClientIndex u = 0;
  PublicKey pk;
  friend bool operator==(const KeyEntry&, const KeyEntry&) = default;
};

struct KeyBroadcast {
  std::vector<KeyEntry> keys;
  friend bool operator==(const KeyBroadcast&, const KeyBroadcast&) = default;
};

// In an upload, `peer` is the recipient; in a delivery, the sender.
struct AddressedCiphertext {
  ClientIndex peer = 0;
  AeCiphertext ct;
  friend bool operator==(const AddressedCiphertext&, const AddressedCiphertext&) = default;
};

struct ShareUpload {
  ClientIndex u = 0;
  std::vector<AddressedCiphertext> cts;
  friend bool operator==(const ShareUpload&, const ShareUpload&) = default;
};

struct ShareDelivery {
  std::vector<AddressedCiphertext> cts;
  friend bool operator==(const ShareDelivery&, const ShareDelivery&) = default;
};

struct SumShares {
  ClientIndex u = 0;
  std::vector<FieldElement> sums;
  friend bool operator==(const SumShares&, const SumShares&) = default;
};

using ProtocolMessage =
    std::variant<ClientHello, KeyBroadcast, ShareUpload, ShareDelivery, SumShares>;

inline MessageTag tag_of(const ProtocolMessage& msg) {
  return static_cast<MessageTag>(msg.index());
}

namespace detail {

inline std::uint32_t list_count(std::size_t n) {
  require(n <= UINT32_MAX, "list too long for a 4-byte count");
  return static_cast<std::uint32_t>(n);
}

inline void write_cts(ByteWriter& w, const std::vector<AddressedCiphertext>& cts) {
  w.u32(list_count(cts.size()));
  for (const auto& e : cts) {
    w.u32(e.peer);
    w.u32(list_count(e.ct.wire_size()));
    w.raw(e.ct.nonce);
    w.raw(e.ct.body);
  }
}

inline std::vector<AddressedCiphertext> read_cts(ByteReader& r) {
  const std::uint32_t count = r.u32();
  // Each entry needs at least 8 header bytes; bound allocation by input size.
  require(count <= r.remaining() / 8, "ciphertext count exceeds input");
  std::vector<AddressedCiphertext> cts;
  cts.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    AddressedCiphertext e;
    e.peer = r.u32();
    const Bytes wire = r.length_prefixed();
    e.ct = AeCiphertext::from_bytes(wire);
    cts.push_back(std::move(e));
  }
  return cts;
}

struct Encoder {
  ByteWriter& w;
  const FieldParams& fp;

  void operator()(const ClientHello& m) const {
    w.u8(static_cast<std::uint8_t>(MessageTag::kClientHello));
    w.u32(m.u);
    w.length_prefixed(m.pk.encoding);
  }
  void operator()(const KeyBroadcast& m) const {
    w.u8(static_cast<std::uint8_t>(MessageTag::kKeyBroadcast));
    w.u32(list_count(m.keys.size()));
    for (const auto& k : m.keys) {
      w.u32(k.u);
      w.length_prefixed(k.pk.encoding);
    }
  }
  void operator()(const ShareUpload& m) const {
    w.u8(static_cast<std::uint8_t>(MessageTag::kShareUpload));
    w.u32(m.u);
    write_cts(w, m.cts);
  }
  void operator()(const ShareDelivery& m) const {
    w.u8(static_cast<std::uint8_t>(MessageTag::kShareDelivery));
    write_cts(w, m.cts);
  }
  void operator()(const SumShares& m) const {
    w.u8(static_cast<std::uint8_t>(MessageTag::kSumShares));
    w.u32(m.u);
    w.u32(list_count(m.sums.size()));
    for (FieldElement e : m.sums) write_element(w, e, fp);
  }
};

}  // namespace detail

inline Bytes serialize(const ProtocolMessage& msg, const FieldParams& fp) {
  ByteWriter w;
  std::visit(detail::Encoder{w, fp}, msg);
  return std::move(w).take();
}

// Structural decoding. Key broadcasts must list distinct clients; routing
// rules for ciphertext lists are enforced by the protocol state machines.
inline ProtocolMessage deserialize(ByteView wire, const FieldParams& fp) {
  ByteReader r(wire);
  const std::uint8_t tag = r.u8();
  ProtocolMessage out;
  switch (static_cast<MessageTag>(tag)) {
    case MessageTag::kClientHello: {
      ClientHello m;
      m.u = r.u32();
      m.pk.encoding = r.length_prefixed();
      out = std::move(m);
      break;
    }
    case MessageTag::kKeyBroadcast: {
      KeyBroadcast m;
      const std::uint32_t count = r.u32();
      require(count <= r.remaining() / 8, "key count exceeds input");
      std::vector<ClientIndex> seen;
      for (std::uint32_t i = 0; i < count; ++i) {
        KeyEntry k;
        k.u = r.u32();
        k.pk.encoding = r.length_prefixed();
        seen.push_back(k.u);
        m.keys.push_back(std::move(k));
      }
      std::sort(seen.begin(), seen.end());
      require(std::adjacent_find(seen.begin(), seen.end()) == seen.end(),
              "duplicate client index in key broadcast");
      out = std::move(m);
      break;
    }
    case MessageTag::kShareUpload: {
      ShareUpload m;
      m.u = r.u32();
      m.cts = detail::read_cts(r);
      out = std::move(m);
      break;
    }
    case MessageTag::kShareDelivery: {
      ShareDelivery m;
      m.cts = detail::read_cts(r);
      out = std::move(m);
      break;
    }
    case MessageTag::kSumShares: {
      SumShares m;
      m.u = r.u32();
      const std::uint32_t count = r.u32();
      require(count <= r.remaining() / fp.byte_width(), "element count exceeds input");
      m.sums.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) m.sums.push_back(read_element(r, fp));
      out = std::move(m);
      break;
    }
    default:
      fail(ErrorCode::kInvalidArgument, "unknown message tag " + std::to_string(tag));
  }
  r.expect_done("message");
  return out;
}

// Plaintext carried inside every share ciphertext.
struct SharePlaintext {
  ClientIndex sender = 0;
  ClientIndex recipient = 0;
  std::vector<FieldElement> shares;
  friend bool operator==(const SharePlaintext&, const SharePlaintext&) = default;
};

inline Bytes encode_share_plaintext(const SharePlaintext& p, const FieldParams& fp) {
  ByteWriter w(12 + p.shares.size() * fp.byte_width());
  w.u32(p.sender);
  w.u32(p.recipient);
  w.u32(detail::list_count(p.shares.size()));
  for (FieldElement e : p.shares) write_element(w, e, fp);
  return std::move(w).take();
}

inline SharePlaintext decode_share_plaintext(ByteView bytes, const FieldParams& fp) {
  ByteReader r(bytes);
  SharePlaintext p;
  p.sender = r.u32();
  p.recipient = r.u32();
  const std::uint32_t count = r.u32();
  require(count <= r.remaining() / fp.byte_width(), "share count exceeds plaintext");
  p.shares.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) p.shares.push_back(read_element(r, fp));
  r.expect_done("share plaintext");
  return p;
}

}  // namespace fssa
