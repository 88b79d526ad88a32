#pragma once

// In-memory orchestration of one aggregation: n clients, one server,
// scheduled dropouts, byte and time accounting.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fssa/client.hpp"
#include "fssa/error.hpp"
#include "fssa/messages.hpp"
#include "fssa/params.hpp"
#include "fssa/random.hpp"
#include "fssa/server.hpp"
#include "json.hpp"

namespace fssa {

enum class DropPoint { kNever, kAfterRound0, kAfterRound1Receive, kAfterRound1Send };

inline std::string_view to_string(DropPoint p) {
  switch (p) {
    case DropPoint::kNever: return "never";
    case DropPoint::kAfterRound0: return "after_round0";
    case DropPoint::kAfterRound1Receive: return "after_round1_receive";
    case DropPoint::kAfterRound1Send: return "after_round1_send";
  }
  return "never";
}

inline DropPoint parse_drop_point(std::string_view s) {
  for (DropPoint p : {DropPoint::kNever, DropPoint::kAfterRound0, DropPoint::kAfterRound1Receive,
                      DropPoint::kAfterRound1Send}) {
    if (s == to_string(p)) return p;
  }
  fail(ErrorCode::kInvalidArgument, "unknown drop point '" + std::string(s) + "'");
}

enum class InputMode { kRandom, kFixed };

using DropSchedule = std::map<ClientIndex, DropPoint>;

struct SimConfig {
  std::size_t n = 0;
  std::size_t m = 1;
  std::uint64_t bound = std::uint64_t{1} << 16;
  double rho = 0.0;
  double gamma = 0.0;
  // Explicit (t, d) instead of planning from the rates.
  std::optional<std::size_t> threshold;
  std::optional<std::size_t> secret_length;
  ParamOptions options;
  std::uint64_t seed = 0;
  DropSchedule dropout_schedule;
  std::set<ClientIndex> corrupted;
  InputMode input_mode = InputMode::kRandom;
  std::vector<std::vector<std::uint64_t>> fixed_inputs;  // index u-1
  bool parallel = false;
  std::size_t warmup = 0;
  // Keep serialized bytes in the transcript (sizes are always kept).
  bool record_wire = true;
};

enum class SimStatus { kSuccess, kAbortedRound, kAggregationFailed };

inline std::string_view to_string(SimStatus s) {
  switch (s) {
    case SimStatus::kSuccess: return "success";
    case SimStatus::kAbortedRound: return "aborted_round";
    case SimStatus::kAggregationFailed: return "aggregation_failed";
  }
  return "unknown";
}

inline constexpr ClientIndex kServer = 0;

struct TranscriptEntry {
  int round = 0;
  ClientIndex from = 0;  // kServer for the server
  ClientIndex to = 0;
  MessageTag tag = MessageTag::kClientHello;
  std::size_t bytes = 0;
  bool delivered = true;  // false when the recipient had already dropped
  Bytes wire;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct ClientMetrics {
  ClientIndex u = 0;
  std::int64_t keygen_ns = 0;
  std::int64_t share_ns = 0;
  std::int64_t encrypt_ns = 0;
  std::int64_t sum_ns = 0;
  std::size_t sent_messages = 0;
  std::size_t received_messages = 0;
  std::size_t bytes_sent = 0;
  bool dropped = false;
  bool aborted = false;
  AbortReason abort_reason = AbortReason::kNone;
};

// What a corrupted client saw: every delivered message plus the shares it
// holds of other clients' chunks.
struct CorruptedView {
  ClientIndex u = 0;
  std::vector<Bytes> received;
  std::vector<FieldElement> own_shares;
  std::map<ClientIndex, std::vector<FieldElement>> shares_from;
};

struct SimReport {
  SimStatus status = SimStatus::kSuccess;
  std::string failure;
  Params params;
  std::vector<std::vector<std::uint64_t>> inputs;
  std::vector<std::uint64_t> aggregate;
  std::vector<std::uint64_t> expected_aggregate;  // integer sum over U2
  std::vector<ClientIndex> u1, u2, u3;
  std::vector<ClientMetrics> clients;  // index u-1
  std::int64_t server_route_ns = 0;
  std::int64_t server_reconstruct_ns = 0;
  std::size_t server_bytes_sent = 0;
  std::vector<TranscriptEntry> transcript;
  std::vector<CorruptedView> corrupted_views;
};

// Clients scheduled to drop at `boundary` leave the live set.
inline std::set<ClientIndex> apply_dropout_schedule(const DropSchedule& schedule, DropPoint boundary,
                                                    std::set<ClientIndex> live) {
  require(boundary != DropPoint::kNever, "kNever is not a round boundary");
  for (const auto& [u, point] : schedule) {
    if (point == boundary) live.erase(u);
  }
  return live;
}

// Bytes a surviving client sends over a full run with batched ciphertexts:
// hello, one upload to |U1| - 1 peers, one sum-share message.
inline std::size_t predicted_client_bytes(const Params& p, std::size_t roster_size) {
  const std::size_t bw = p.fp.byte_width();
  const std::size_t pk = p.gp.public_key_size();
  const std::size_t hello = 1 + 4 + 4 + pk;
  const std::size_t plaintext = 12 + p.chunk_count * bw;
  const std::size_t ct_entry = 4 + 4 + kNonceSize + plaintext + kTagSize;
  const std::size_t upload = 1 + 4 + 4 + (roster_size - 1) * ct_entry;
  const std::size_t sums = 1 + 4 + 4 + p.chunk_count * bw;
  return hello + upload + sums;
}

// Per-client and server counters derived from the transcript.
inline void collect_metrics(const std::vector<TranscriptEntry>& transcript, SimReport& report) {
  for (auto& c : report.clients) {
    c.sent_messages = 0;
    c.received_messages = 0;
    c.bytes_sent = 0;
  }
  report.server_bytes_sent = 0;
  for (const auto& e : transcript) {
    if (e.from == kServer) {
      report.server_bytes_sent += e.bytes;
      if (e.delivered) ++report.clients.at(e.to - 1).received_messages;
    } else {
      auto& c = report.clients.at(e.from - 1);
      ++c.sent_messages;
      c.bytes_sent += e.bytes;
    }
  }
}

namespace detail {

template <class F>
void for_each_client(const std::vector<ClientIndex>& ids, bool parallel, F&& f) {
  if (!parallel || ids.size() < 2) {
    for (ClientIndex u : ids) f(u);
    return;
  }
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), ids.size()));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < ids.size(); i += workers) f(ids[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::int64_t elapsed_ns(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                              start)
      .count();
}

}  // namespace detail

inline Params params_for(const SimConfig& cfg) {
  if (cfg.threshold || cfg.secret_length) {
    require(cfg.threshold && cfg.secret_length, "explicit parameters need both t and d");
    return make_params(cfg.n, *cfg.threshold, *cfg.secret_length, cfg.m, cfg.bound, cfg.options);
  }
  return plan_parameters(cfg.n, cfg.m, cfg.bound, cfg.rho, cfg.gamma, cfg.options);
}

inline SimReport run_simulation_once(const SimConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  SimReport report;
  report.params = params_for(cfg);
  const Params& params = report.params;
  const FieldParams& fp = params.fp;

  for (const auto& [u, point] : cfg.dropout_schedule) {
    require(u >= 1 && u <= cfg.n, "dropout schedule names unknown client");
  }
  for (ClientIndex u : cfg.corrupted) require(u >= 1 && u <= cfg.n, "corrupted set names unknown client");
  require(cfg.corrupted.size() <= params.t - params.d, "corrupted set larger than t - d");

  DeterministicRandom root(cfg.seed);
  if (cfg.input_mode == InputMode::kFixed) {
    require(cfg.fixed_inputs.size() == cfg.n, "need one fixed input per client");
    report.inputs = cfg.fixed_inputs;
  } else {
    DeterministicRandom rng = root.fork("inputs");
    report.inputs.assign(cfg.n, std::vector<std::uint64_t>(cfg.m));
    for (auto& x : report.inputs) {
      for (auto& v : x) v = rng.uniform_below(cfg.bound);
    }
  }
  for (const auto& x : report.inputs) require(x.size() == cfg.m, "input vector length must equal m");

  std::vector<Client> clients;
  std::vector<DeterministicRandom> rngs;
  clients.reserve(cfg.n);
  rngs.reserve(cfg.n);
  report.clients.resize(cfg.n);
  for (ClientIndex u = 1; u <= cfg.n; ++u) {
    clients.emplace_back(u, params);
    rngs.push_back(root.fork("client/" + std::to_string(u)));
    report.clients[u - 1].u = u;
  }
  auto& transcript = report.transcript;
  auto log = [&](int round, ClientIndex from, ClientIndex to, const ProtocolMessage& msg,
                 bool delivered) {
    Bytes wire = serialize(msg, fp);
    const std::size_t size = wire.size();
    if (!cfg.record_wire) wire = Bytes{};
    transcript.push_back(
        TranscriptEntry{round, from, to, tag_of(msg), size, delivered, std::move(wire)});
  };
  auto ids = [](const std::set<ClientIndex>& s) { return std::vector<ClientIndex>(s.begin(), s.end()); };
  auto drop = [&](ClientIndex u) { report.clients[u - 1].dropped = true; };

  std::set<ClientIndex> live;
  for (ClientIndex u = 1; u <= cfg.n; ++u) live.insert(u);
  auto drop_at = [&](DropPoint point) {
    auto next = apply_dropout_schedule(cfg.dropout_schedule, point, live);
    for (ClientIndex u : live) {
      if (!next.contains(u)) drop(u);
    }
    live = std::move(next);
  };
  auto finish = [&](SimStatus status, std::string why) {
    report.status = status;
    report.failure = std::move(why);
    collect_metrics(transcript, report);
    return report;
  };

  // Round 0.
  std::vector<ClientHello> hellos(cfg.n);
  detail::for_each_client(ids(live), cfg.parallel, [&](ClientIndex u) {
    const auto start = Clock::now();
    hellos[u - 1] = clients[u - 1].round0(rngs[u - 1]);
    report.clients[u - 1].keygen_ns = detail::elapsed_ns(start);
  });
  for (ClientIndex u : live) log(0, u, kServer, hellos[u - 1], true);
  drop_at(DropPoint::kAfterRound0);

  Server server(params);
  KeyBroadcast broadcast;
  {
    const auto start = Clock::now();
    try {
      broadcast = server.round0(hellos);
    } catch (const Error& e) {
      report.server_route_ns += detail::elapsed_ns(start);
      if (e.code() == ErrorCode::kAbortRound) return finish(SimStatus::kAbortedRound, e.what());
      throw;
    }
    report.server_route_ns += detail::elapsed_ns(start);
  }
  report.u1 = server.u1();
  for (ClientIndex u : report.u1) log(0, kServer, u, broadcast, live.contains(u));

  // Round 1.
  drop_at(DropPoint::kAfterRound1Receive);
  std::vector<std::optional<ShareUpload>> uploads(cfg.n);
  detail::for_each_client(ids(live), cfg.parallel, [&](ClientIndex u) {
    Round1Timings tm;
    uploads[u - 1] = clients[u - 1].round1(broadcast, report.inputs[u - 1], rngs[u - 1], &tm);
    report.clients[u - 1].share_ns = tm.share_ns;
    report.clients[u - 1].encrypt_ns = tm.encrypt_ns;
  });
  std::vector<ShareUpload> collected;
  for (ClientIndex u : ids(live)) {
    if (!uploads[u - 1]) {
      report.clients[u - 1].aborted = true;
      report.clients[u - 1].abort_reason = clients[u - 1].abort_reason();
      drop(u);
      live.erase(u);
      continue;
    }
    log(1, u, kServer, *uploads[u - 1], true);
    collected.push_back(std::move(*uploads[u - 1]));
  }

  std::map<ClientIndex, ShareDelivery> deliveries;
  {
    const auto start = Clock::now();
    try {
      deliveries = server.round1(collected);
    } catch (const Error& e) {
      report.server_route_ns += detail::elapsed_ns(start);
      if (e.code() == ErrorCode::kAbortRound) return finish(SimStatus::kAbortedRound, e.what());
      throw;
    }
    report.server_route_ns += detail::elapsed_ns(start);
  }
  report.u2 = server.u2();
  for (ClientIndex u : report.u2) {
    report.expected_aggregate.resize(cfg.m, 0);
    for (std::size_t i = 0; i < cfg.m; ++i) report.expected_aggregate[i] += report.inputs[u - 1][i];
  }

  // Round 2.
  drop_at(DropPoint::kAfterRound1Send);
  for (const auto& [u, delivery] : deliveries) log(1, kServer, u, delivery, live.contains(u));
  std::vector<std::optional<SumShares>> sums(cfg.n);
  detail::for_each_client(ids(live), cfg.parallel, [&](ClientIndex u) {
    const auto start = Clock::now();
    sums[u - 1] = clients[u - 1].round2(deliveries.at(u));
    report.clients[u - 1].sum_ns = detail::elapsed_ns(start);
  });
  std::vector<SumShares> collected_sums;
  for (ClientIndex u : ids(live)) {
    if (!sums[u - 1]) {
      report.clients[u - 1].aborted = true;
      report.clients[u - 1].abort_reason = clients[u - 1].abort_reason();
      drop(u);
      live.erase(u);
      continue;
    }
    log(2, u, kServer, *sums[u - 1], true);
    collected_sums.push_back(std::move(*sums[u - 1]));
  }

  for (ClientIndex u : cfg.corrupted) {
    CorruptedView view;
    view.u = u;
    for (const auto& e : transcript) {
      if (e.from == kServer && e.to == u && e.delivered) view.received.push_back(e.wire);
    }
    view.own_shares = clients[u - 1].own_shares();
    view.shares_from = clients[u - 1].received_shares();
    report.corrupted_views.push_back(std::move(view));
  }

  std::vector<FieldElement> result;
  {
    const auto start = Clock::now();
    try {
      result = server.round2(collected_sums);
    } catch (const Error& e) {
      report.server_reconstruct_ns = detail::elapsed_ns(start);
      report.u3 = server.u3();
      if (e.code() == ErrorCode::kInsufficientShares) {
        return finish(SimStatus::kAggregationFailed, e.what());
      }
      throw;
    }
    report.server_reconstruct_ns = detail::elapsed_ns(start);
  }
  report.u3 = server.u3();
  report.aggregate.reserve(result.size());
  for (FieldElement e : result) report.aggregate.push_back(e.value);
  return finish(SimStatus::kSuccess, "");
}

// Runs cfg.warmup discarded iterations first, then the measured one.
inline SimReport run_simulation(const SimConfig& cfg) {
  for (std::size_t i = 0; i < cfg.warmup; ++i) run_simulation_once(cfg);
  return run_simulation_once(cfg);
}

// --- key-value config -------------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(item, &pos);
    require(pos == item.size(), "bad integer '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorCode::kInvalidArgument, "bad boolean '" + s + "'");
}

}  // namespace detail

// `key = value` lines; `#` starts a comment. Keys: n, m, B, rho, gamma,
// t, d, seed, security, modulus, degenerate_privacy_ok,
// per_chunk_ciphertexts, parallel, warmup, record_wire, corrupted (list), input_mode,
// drop.<u>, input.<u> (list).
inline SimConfig parse_sim_config(std::istream& in) {
  SimConfig cfg;
  std::map<ClientIndex, std::vector<std::uint64_t>> fixed;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(lineno) + " lacks '='");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      if (key == "n") cfg.n = std::stoull(value);
      else if (key == "m") cfg.m = std::stoull(value);
      else if (key == "B") cfg.bound = std::stoull(value);
      else if (key == "rho") cfg.rho = std::stod(value);
      else if (key == "gamma") cfg.gamma = std::stod(value);
      else if (key == "t") cfg.threshold = std::stoull(value);
      else if (key == "d") cfg.secret_length = std::stoull(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "security") cfg.options.lambda = parse_security_level(value);
      else if (key == "modulus") cfg.options.modulus = std::stoull(value);
      else if (key == "degenerate_privacy_ok") cfg.options.degenerate_privacy_ok = detail::parse_bool(value);
      else if (key == "per_chunk_ciphertexts") cfg.options.per_chunk_ciphertexts = detail::parse_bool(value);
      else if (key == "parallel") cfg.parallel = detail::parse_bool(value);
      else if (key == "warmup") cfg.warmup = std::stoull(value);
      else if (key == "record_wire") cfg.record_wire = detail::parse_bool(value);
      else if (key == "corrupted") {
        for (auto u : detail::parse_u64_list(value)) cfg.corrupted.insert(static_cast<ClientIndex>(u));
      } else if (key == "input_mode") {
        require(value == "random" || value == "fixed", "input_mode must be random or fixed");
        cfg.input_mode = value == "random" ? InputMode::kRandom : InputMode::kFixed;
      } else if (key.starts_with("drop.")) {
        cfg.dropout_schedule[static_cast<ClientIndex>(std::stoul(key.substr(5)))] = parse_drop_point(value);
      } else if (key.starts_with("input.")) {
        fixed[static_cast<ClientIndex>(std::stoul(key.substr(6)))] = detail::parse_u64_list(value);
      } else {
        fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail(ErrorCode::kInvalidArgument,
           "bad value for '" + key + "' on config line " + std::to_string(lineno));
    }
  }
  if (cfg.input_mode == InputMode::kFixed) {
    for (ClientIndex u = 1; u <= cfg.n; ++u) {
      require(fixed.contains(u), "fixed input mode needs input." + std::to_string(u));
      cfg.fixed_inputs.push_back(fixed[u]);
    }
  }
  return cfg;
}

inline SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config file " + path);
  return parse_sim_config(in);
}

inline nlohmann::json report_to_json(const SimReport& r, bool include_transcript = false) {
  nlohmann::json j;
  j["status"] = std::string(to_string(r.status));
  if (!r.failure.empty()) j["failure"] = r.failure;
  j["params"] = {{"n", r.params.n},
                 {"t", r.params.t},
                 {"d", r.params.d},
                 {"q", r.params.fp.modulus()},
                 {"B", r.params.bound},
                 {"m", r.params.m},
                 {"chunk_count", r.params.chunk_count},
                 {"security", std::string(to_string(r.params.lambda))}};
  j["aggregate"] = r.aggregate;
  j["expected_aggregate"] = r.expected_aggregate;
  j["rosters"] = {{"u1", r.u1}, {"u2", r.u2}, {"u3", r.u3}};
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& c : r.clients) {
    clients.push_back({{"u", c.u},
                       {"keygen_ns", c.keygen_ns},
                       {"share_ns", c.share_ns},
                       {"encrypt_ns", c.encrypt_ns},
                       {"sum_ns", c.sum_ns},
                       {"sent_messages", c.sent_messages},
                       {"received_messages", c.received_messages},
                       {"bytes_sent", c.bytes_sent},
                       {"dropped", c.dropped},
                       {"aborted", c.aborted},
                       {"abort_reason", std::string(to_string(c.abort_reason))}});
  }
  j["clients"] = clients;
  j["server"] = {{"route_ns", r.server_route_ns},
                 {"reconstruct_ns", r.server_reconstruct_ns},
                 {"bytes_sent", r.server_bytes_sent}};
  if (include_transcript) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& e : r.transcript) {
      tr.push_back({{"round", e.round},
                    {"from", e.from},
                    {"to", e.to},
                    {"tag", static_cast<int>(e.tag)},
                    {"bytes", e.bytes},
                    {"delivered", e.delivered},
                    {"wire", to_hex(e.wire)}});
    }
    j["transcript"] = tr;
  }
  return j;
}

}  // namespace fssa
