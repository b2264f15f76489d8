#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tempmine/types.hpp"

namespace tempmine {

struct TransactionRecord {
  EdgeId edge_id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  Timestamp timestamp = 0;
  double amount = 0.0;
  CurrencyId currency = 0;
  std::optional<bool> label;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

// One adjacency slot. Lists are ordered by (t, edge) so that a window is a
// contiguous range found with a lower-bound search.
struct AdjEntry {
  Timestamp t;
  NodeId node;
  EdgeId edge;

  friend bool operator==(const AdjEntry&, const AdjEntry&) = default;
};

// Closed interval [lo, hi] of timestamps.
struct TimeWindow {
  Timestamp lo = kMinTime;
  Timestamp hi = kMaxTime;
};

struct GraphStats {
  double mean_out = 0.0;
  double mean_in = 0.0;
  double p99_out = 0.0;
  double p99_in = 0.0;

  double mean(Direction d) const { return d == Direction::Out ? mean_out : mean_in; }
};

// A column is addressed either by zero-based index or by header name.
using ColumnRef = std::variant<std::size_t, std::string>;

enum class TimeUnit { Seconds, Minutes, Hours };

struct ColumnMapping {
  std::optional<ColumnRef> src_bank;
  ColumnRef src_account = std::size_t{2};
  std::optional<ColumnRef> dst_bank;
  ColumnRef dst_account = std::size_t{4};
  ColumnRef timestamp = std::size_t{0};
  std::optional<ColumnRef> amount;
  std::optional<ColumnRef> currency;
  std::optional<ColumnRef> label;
  char delimiter = ',';
  // Resolution used when timestamps are calendar strings ("2022/09/01 00:20").
  // Integer timestamps are taken verbatim.
  TimeUnit time_unit = TimeUnit::Seconds;

  // Timestamp, From Bank, Account, To Bank, Account, Amount Received,
  // Receiving Currency, Amount Paid, Payment Currency, Payment Format,
  // Is Laundering.
  static ColumnMapping ibm_default();
};

struct IngestResult {
  std::vector<TransactionRecord> records;
  std::vector<std::string> currencies;
  NodeId node_count = 0;
};

IngestResult parse_transactions(std::istream& source, const ColumnMapping& mapping);
IngestResult parse_transactions_file(const std::filesystem::path& path,
                                     const ColumnMapping& mapping);

// Parses "2022/09/01 00:20", "2022-09-01 00:20:05" or a plain integer.
std::optional<Timestamp> parse_timestamp(std::string_view text, TimeUnit unit);

// Immutable dual-CSR transaction graph. Every edge appears once in the out
// list of its source and once in the in list of its destination, self-loops
// included; iteration code is responsible for skipping them.
class TemporalGraph {
 public:
  TemporalGraph() = default;

  NodeId node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const TransactionRecord& edge(EdgeId e) const { return edges_[e]; }
  std::span<const TransactionRecord> edges() const noexcept { return edges_; }

  std::span<const AdjEntry> out(NodeId u) const noexcept { return adjacency(Direction::Out, u); }
  std::span<const AdjEntry> in(NodeId u) const noexcept { return adjacency(Direction::In, u); }
  std::span<const AdjEntry> adjacency(Direction d, NodeId u) const noexcept;

  const GraphStats& stats() const noexcept { return stats_; }
  const std::vector<std::string>& currencies() const noexcept { return currencies_; }
  std::optional<CurrencyId> find_currency(std::string_view code) const;

  // Raw CSR arrays, exposed for the cache writer and structural checks.
  std::span<const std::uint64_t> offsets(Direction d) const noexcept {
    return d == Direction::Out ? out_offsets_ : in_offsets_;
  }
  std::span<const AdjEntry> entries(Direction d) const noexcept {
    return d == Direction::Out ? out_entries_ : in_entries_;
  }

 private:
  friend TemporalGraph build_graph(std::vector<TransactionRecord>, NodeId,
                                   std::vector<std::string>);
  friend TemporalGraph load_graph_cache(const std::filesystem::path&);
  void compute_stats();

  NodeId node_count_ = 0;
  std::vector<TransactionRecord> edges_;
  std::vector<std::uint64_t> out_offsets_{0};
  std::vector<AdjEntry> out_entries_;
  std::vector<std::uint64_t> in_offsets_{0};
  std::vector<AdjEntry> in_entries_;
  std::vector<std::string> currencies_;
  GraphStats stats_;
};

// Records must carry edge ids 0..n-1 (any order). node_count of 0 means
// "infer from the largest endpoint".
TemporalGraph build_graph(std::vector<TransactionRecord> records, NodeId node_count = 0,
                          std::vector<std::string> currencies = {});

TemporalGraph build_graph(IngestResult ingest);

// Smallest index i with adj[i].t >= t_min, or adj.size().
std::size_t find_start(std::span<const AdjEntry> adj, Timestamp t_min) noexcept;

// Entries of `node`'s adjacency in direction d with lo <= t <= hi. Unknown
// nodes yield an empty slice.
std::span<const AdjEntry> window_neighbors(const TemporalGraph& g, NodeId node, Direction d,
                                           TimeWindow window) noexcept;

// Binary cache; layout is described in docs/cache_format.md.
inline constexpr std::uint32_t kCacheVersion = 1;
void save_graph_cache(const TemporalGraph& g, const std::filesystem::path& path);
TemporalGraph load_graph_cache(const std::filesystem::path& path);

}  // namespace tempmine
