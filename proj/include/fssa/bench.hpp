#pragma once

// Experiment sweeps over (n, m, rho, gamma) with per-point averaging and a
// fixed-schema CSV output.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fssa/error.hpp"
#include "fssa/params.hpp"
#include "fssa/random.hpp"
#include "fssa/sim.hpp"

namespace fssa {

struct SweepSpec {
  std::vector<std::size_t> clients;
  std::vector<std::size_t> vector_sizes;
  std::vector<double> dropout_rates;
  std::vector<double> corruption_rates;
  std::size_t iterations = 5;
  std::uint64_t seed_base = 1;
  std::uint64_t bound = std::uint64_t{1} << 16;
  ParamOptions options;
  std::string output;
};

enum class Case { k1 = 1, k2 = 2, k3 = 3, k4 = 4 };

// The four evaluation grids. Desk scale keeps m = 10K and n <= 200.
inline SweepSpec case_spec(Case c, bool paper_scale) {
  SweepSpec s;
  const std::vector<double> rates = {0.0, 0.1, 0.2, 0.3};
  const std::vector<std::size_t> n_axis =
      paper_scale ? std::vector<std::size_t>{100, 200, 300, 400, 500}
                  : std::vector<std::size_t>{50, 100, 150, 200};
  const std::vector<std::size_t> m_axis =
      paper_scale ? std::vector<std::size_t>{20'000, 40'000, 60'000, 80'000, 100'000}
                  : std::vector<std::size_t>{2'000, 4'000, 6'000, 8'000, 10'000};
  const std::size_t fixed_n = paper_scale ? 500 : 200;
  const std::size_t fixed_m = paper_scale ? 100'000 : 10'000;
  switch (c) {
    case Case::k1:  // n x gamma at fixed m, rho
      s.clients = n_axis;
      s.vector_sizes = {fixed_m};
      s.dropout_rates = {0.3};
      s.corruption_rates = rates;
      break;
    case Case::k2:  // m x gamma at fixed n, rho
      s.clients = {fixed_n};
      s.vector_sizes = m_axis;
      s.dropout_rates = {0.3};
      s.corruption_rates = rates;
      break;
    case Case::k3:  // n x rho at fixed m, gamma
      s.clients = n_axis;
      s.vector_sizes = {fixed_m};
      s.dropout_rates = rates;
      s.corruption_rates = {0.3};
      break;
    case Case::k4:  // m x rho at fixed n, gamma
      s.clients = {fixed_n};
      s.vector_sizes = m_axis;
      s.dropout_rates = rates;
      s.corruption_rates = {0.3};
      break;
  }
  return s;
}

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
};

inline Stat summarize(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  // Sample standard deviation; zero for a single iteration.
  const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  return {mean, sd};
}

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> kNames = {
      "client_keygen_ms", "client_share_ms",     "client_encrypt_ms",     "client_share_encrypt_ms",
      "client_sum_ms",    "client_total_ms",     "server_route_ms",       "server_reconstruct_ms",
      "server_total_ms",  "bytes_per_client"};
  return kNames;
}

struct BenchRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double rho = 0.0;
  double gamma = 0.0;
  bool feasible = false;
  std::string note;  // infeasibility reason or failure
  std::size_t t = 0;
  std::size_t d = 0;
  std::uint64_t q = 0;
  std::size_t chunk_count = 0;
  std::size_t iterations = 0;
  std::vector<Stat> metrics;  // parallel to metric_names()
  std::size_t predicted_bytes_per_client = 0;
};

// The clients that drop: floor(rho n) of them, chosen uniformly, all after
// sending their public key.
inline DropSchedule sample_dropouts(std::size_t n, std::size_t count, std::uint64_t seed) {
  DeterministicRandom rng = DeterministicRandom(seed).fork("dropouts");
  std::vector<ClientIndex> ids(n);
  std::iota(ids.begin(), ids.end(), ClientIndex{1});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
    std::swap(ids[i], ids[j]);
  }
  DropSchedule s;
  for (std::size_t i = 0; i < count; ++i) s[ids[i]] = DropPoint::kAfterRound0;
  return s;
}

// Mean over clients that completed all three sends.
inline std::vector<double> iteration_metrics(const SimReport& r) {
  double keygen = 0, share = 0, encrypt = 0, sum = 0, bytes = 0;
  std::size_t full = 0;
  for (const auto& c : r.clients) {
    if (c.sent_messages != 3) continue;
    ++full;
    keygen += static_cast<double>(c.keygen_ns);
    share += static_cast<double>(c.share_ns);
    encrypt += static_cast<double>(c.encrypt_ns);
    sum += static_cast<double>(c.sum_ns);
    bytes += static_cast<double>(c.bytes_sent);
  }
  const double k = full ? static_cast<double>(full) : 1.0;
  const double ms = 1e-6;
  keygen = keygen / k * ms;
  share = share / k * ms;
  encrypt = encrypt / k * ms;
  sum = sum / k * ms;
  const double route = static_cast<double>(r.server_route_ns) * ms;
  const double recon = static_cast<double>(r.server_reconstruct_ns) * ms;
  return {keygen, share, encrypt, share + encrypt, sum, keygen + share + encrypt + sum,
          route,  recon, route + recon, bytes / k};
}

using ProgressFn = std::function<void(const BenchRow&, std::size_t index, std::size_t total)>;

// Rows come out in grid order n, m, rho, gamma (outermost first). Iteration
// i of point p runs with seed seed_base + p + i.
inline std::vector<BenchRow> run_experiment_grid(const SweepSpec& spec, const ProgressFn& progress = {}) {
  require(spec.iterations >= 1, "iterations must be >= 1");
  std::vector<BenchRow> rows;
  const std::size_t total = spec.clients.size() * spec.vector_sizes.size() *
                            spec.dropout_rates.size() * spec.corruption_rates.size();
  std::size_t point = 0;
  for (std::size_t n : spec.clients) {
    for (std::size_t m : spec.vector_sizes) {
      for (double rho : spec.dropout_rates) {
        for (double gamma : spec.corruption_rates) {
          BenchRow row;
          row.n = n;
          row.m = m;
          row.rho = rho;
          row.gamma = gamma;
          try {
            const Params p = plan_parameters(n, m, spec.bound, rho, gamma, spec.options);
            row.feasible = true;
            row.t = p.t;
            row.d = p.d;
            row.q = p.fp.modulus();
            row.chunk_count = p.chunk_count;
            row.predicted_bytes_per_client = predicted_client_bytes(p, n);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kInvalidArgument) throw;
            row.note = e.what();
          }
          if (row.feasible) {
            std::vector<std::vector<double>> samples(metric_names().size());
            for (std::size_t it = 0; it < spec.iterations; ++it) {
              SimConfig cfg;
              cfg.n = n;
              cfg.m = m;
              cfg.bound = spec.bound;
              cfg.rho = rho;
              cfg.gamma = gamma;
              cfg.options = spec.options;
              cfg.seed = spec.seed_base + point + it;
              cfg.record_wire = false;
              cfg.dropout_schedule = sample_dropouts(n, n - row.t, cfg.seed);
              const SimReport r = run_simulation(cfg);
              if (r.status != SimStatus::kSuccess) {
                row.feasible = false;
                row.note = r.failure;
                break;
              }
              const auto vals = iteration_metrics(r);
              for (std::size_t k = 0; k < vals.size(); ++k) samples[k].push_back(vals[k]);
            }
            if (row.feasible) {
              row.iterations = spec.iterations;
              for (const auto& s : samples) row.metrics.push_back(summarize(s));
            }
          }
          if (progress) progress(row, point, total);
          rows.push_back(std::move(row));
          ++point;
        }
      }
    }
  }
  return rows;
}

// --- CSV ----------------------------------------------------------------

inline std::vector<std::string> csv_header() {
  std::vector<std::string> h = {"n", "m", "rho", "gamma", "t", "d", "q", "chunk_count",
                                "status", "iterations"};
  for (const auto& name : metric_names()) {
    h.push_back(name + "_mean");
    h.push_back(name + "_std");
  }
  h.push_back("predicted_bytes_per_client");
  // Reserved for a baseline comparison; always empty.
  h.push_back("baseline_client_ms");
  h.push_back("baseline_server_ms");
  h.push_back("baseline_bytes_per_client");
  return h;
}

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

}  // namespace detail

inline std::string csv_line(const BenchRow& r) {
  std::vector<std::string> c = {std::to_string(r.n), std::to_string(r.m), detail::fmt_double(r.rho),
                                detail::fmt_double(r.gamma)};
  if (r.feasible) {
    c.push_back(std::to_string(r.t));
    c.push_back(std::to_string(r.d));
    c.push_back(std::to_string(r.q));
    c.push_back(std::to_string(r.chunk_count));
    c.push_back("ok");
    c.push_back(std::to_string(r.iterations));
    for (const auto& s : r.metrics) {
      c.push_back(detail::fmt_double(s.mean));
      c.push_back(detail::fmt_double(s.stddev));
    }
    c.push_back(std::to_string(r.predicted_bytes_per_client));
  } else {
    for (int i = 0; i < 4; ++i) c.push_back("");
    c.push_back("infeasible");
    c.push_back("0");
    for (std::size_t i = 0; i < 2 * metric_names().size() + 1; ++i) c.push_back("");
  }
  c.insert(c.end(), {"", "", ""});
  return detail::join(c);
}

inline void write_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << detail::join(csv_header()) << '\n';
  for (const auto& r : rows) os << csv_line(r) << '\n';
}

inline void emit_csv(const std::vector<BenchRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  write_csv(out, rows);
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write to " + path + " failed");
}

// Reads back a file written by emit_csv. Timing columns are recovered as
// written (round-trip exact for doubles via max_digits10).
inline std::vector<BenchRow> parse_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty CSV");
  require(line == detail::join(csv_header()), "CSV header does not match the schema");
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (!line.empty() && line.back() == ',') c.push_back("");
    require(c.size() == csv_header().size(), "CSV row has wrong column count");
    BenchRow r;
    r.n = std::stoull(c[0]);
    r.m = std::stoull(c[1]);
    r.rho = std::stod(c[2]);
    r.gamma = std::stod(c[3]);
    r.feasible = c[8] == "ok";
    r.iterations = std::stoull(c[9]);
    if (r.feasible) {
      r.t = std::stoull(c[4]);
      r.d = std::stoull(c[5]);
      r.q = std::stoull(c[6]);
      r.chunk_count = std::stoull(c[7]);
      std::size_t k = 10;
      for (std::size_t i = 0; i < metric_names().size(); ++i, k += 2) {
        r.metrics.push_back(Stat{std::stod(c[k]), std::stod(c[k + 1])});
      }
      r.predicted_bytes_per_client = std::stoull(c[k]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<BenchRow> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return parse_csv(in);
}

inline std::size_t metric_index(const std::string& name) {
  const auto& names = metric_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  fail(ErrorCode::kInvalidArgument, "unknown metric " + name);
}

}  // namespace fssa
