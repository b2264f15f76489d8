#include "tempmine/txgraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <unordered_map>

namespace tempmine {

namespace {

std::vector<std::string_view> split_row(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    std::string_view f = line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                          : pos - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    fields.push_back(f);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string>& header,
                           const char* role) {
  if (const auto* idx = std::get_if<std::size_t>(&ref)) {
    if (*idx >= header.size()) {
      throw ConfigError(std::string("column index ") + std::to_string(*idx) + " for " + role +
                        " is beyond the " + std::to_string(header.size()) + "-column header");
    }
    return *idx;
  }
  const auto& name = std::get<std::string>(ref);
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ConfigError(std::string("unknown column '") + name + "' for " + role);
  }
  return static_cast<std::size_t>(it - header.begin());
}

// Days since 1970-01-01 for a proleptic Gregorian date.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

ColumnMapping ColumnMapping::ibm_default() {
  ColumnMapping m;
  m.timestamp = std::size_t{0};
  m.src_bank = std::size_t{1};
  m.src_account = std::size_t{2};
  m.dst_bank = std::size_t{3};
  m.dst_account = std::size_t{4};
  m.amount = std::size_t{5};
  m.currency = std::size_t{6};
  m.label = std::size_t{10};
  return m;
}

std::optional<Timestamp> parse_timestamp(std::string_view text, TimeUnit unit) {
  Timestamp plain = 0;
  if (parse_int(text, plain)) {
    if (plain < 0) return std::nullopt;
    return plain;
  }
  // YYYY[/-]MM[/-]DD HH:MM[:SS]
  if (text.size() < 16) return std::nullopt;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi)) {
    return std::nullopt;
  }
  const char sep = text[4];
  if ((sep != '/' && sep != '-') || text[7] != sep || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':') {
    return std::nullopt;
  }
  if (text.size() > 16) {
    if (text.size() != 19 || text[16] != ':' || !parse_int(text.substr(17, 2), s)) return std::nullopt;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
  const std::int64_t secs = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
                            h * 3600 + mi * 60 + s;
  if (secs < 0) return std::nullopt;
  switch (unit) {
    case TimeUnit::Seconds: return secs;
    case TimeUnit::Minutes: return secs / 60;
    case TimeUnit::Hours: return secs / 3600;
  }
  return secs;
}

IngestResult parse_transactions(std::istream& source, const ColumnMapping& mapping) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    for (auto f : split_row(line, mapping.delimiter)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw ParseError(line_no, "missing header row");

  const auto col_ts = resolve_column(mapping.timestamp, header, "timestamp");
  const auto col_src = resolve_column(mapping.src_account, header, "source account");
  const auto col_dst = resolve_column(mapping.dst_account, header, "destination account");
  const auto opt_col = [&](const std::optional<ColumnRef>& ref, const char* role) {
    return ref ? std::optional<std::size_t>(resolve_column(*ref, header, role)) : std::nullopt;
  };
  const auto col_src_bank = opt_col(mapping.src_bank, "source bank");
  const auto col_dst_bank = opt_col(mapping.dst_bank, "destination bank");
  const auto col_amount = opt_col(mapping.amount, "amount");
  const auto col_currency = opt_col(mapping.currency, "currency");
  const auto col_label = opt_col(mapping.label, "label");

  IngestResult result;
  std::unordered_map<std::string, NodeId> node_ids;
  std::unordered_map<std::string, CurrencyId> currency_ids;
  std::string key;
  const auto node_of = [&](std::string_view bank, std::string_view account) {
    key.assign(bank);
    key.push_back('\x1f');
    key.append(account);
    const auto [it, inserted] = node_ids.try_emplace(key, static_cast<NodeId>(node_ids.size()));
    return it->second;
  };

  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_row(line, mapping.delimiter);
    const auto field = [&](std::size_t col, const char* what) -> std::string_view {
      if (col >= fields.size()) {
        throw ParseError(line_no, std::string("row has ") + std::to_string(fields.size()) +
                                      " fields, missing " + what + " column");
      }
      return fields[col];
    };
    TransactionRecord rec;
    rec.edge_id = static_cast<EdgeId>(result.records.size());

    const auto ts_text = field(col_ts, "timestamp");
    const auto ts = parse_timestamp(ts_text, mapping.time_unit);
    if (!ts) throw ParseError(line_no, "bad timestamp '" + std::string(ts_text) + "'");
    rec.timestamp = *ts;

    const auto src_acc = field(col_src, "source account");
    const auto dst_acc = field(col_dst, "destination account");
    if (src_acc.empty() || dst_acc.empty()) throw ParseError(line_no, "empty account id");
    rec.src = node_of(col_src_bank ? field(*col_src_bank, "source bank") : "", src_acc);
    rec.dst = node_of(col_dst_bank ? field(*col_dst_bank, "destination bank") : "", dst_acc);

    if (col_amount) {
      const auto text = field(*col_amount, "amount");
      double v = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ParseError(line_no, "bad amount '" + std::string(text) + "'");
      }
      rec.amount = v;
    }
    if (col_currency) {
      const std::string code(field(*col_currency, "currency"));
      const auto [it, inserted] =
          currency_ids.try_emplace(code, static_cast<CurrencyId>(result.currencies.size()));
      if (inserted) result.currencies.push_back(code);
      rec.currency = it->second;
    }
    if (col_label) {
      const auto text = field(*col_label, "label");
      if (text == "1" || text == "true" || text == "True") {
        rec.label = true;
      } else if (text == "0" || text == "false" || text == "False") {
        rec.label = false;
      } else if (!text.empty()) {
        throw ParseError(line_no, "bad label '" + std::string(text) + "'");
      }
    }
    result.records.push_back(rec);
  }
  if (result.records.empty()) throw ParseError(line_no, "no transaction rows");
  result.node_count = static_cast<NodeId>(node_ids.size());
  return result;
}

IngestResult parse_transactions_file(const std::filesystem::path& path,
                                     const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_transactions(in, mapping);
}

std::span<const AdjEntry> TemporalGraph::adjacency(Direction d, NodeId u) const noexcept {
  if (u >= node_count_) return {};
  const auto& off = d == Direction::Out ? out_offsets_ : in_offsets_;
  const auto& ent = d == Direction::Out ? out_entries_ : in_entries_;
  return std::span<const AdjEntry>(ent.data() + off[u], off[u + 1] - off[u]);
}

std::optional<CurrencyId> TemporalGraph::find_currency(std::string_view code) const {
  const auto it = std::find(currencies_.begin(), currencies_.end(), code);
  if (it == currencies_.end()) return std::nullopt;
  return static_cast<CurrencyId>(it - currencies_.begin());
}

void TemporalGraph::compute_stats() {
  stats_ = {};
  if (node_count_ == 0) return;
  const auto summarize = [&](const std::vector<std::uint64_t>& off, double& mean, double& p99) {
    std::vector<std::uint64_t> deg(node_count_);
    for (NodeId u = 0; u < node_count_; ++u) deg[u] = off[u + 1] - off[u];
    mean = static_cast<double>(off[node_count_]) / node_count_;
    const auto k = static_cast<std::size_t>(std::ceil(0.99 * node_count_)) - 1;
    std::nth_element(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(k), deg.end());
    p99 = static_cast<double>(deg[k]);
  };
  summarize(out_offsets_, stats_.mean_out, stats_.p99_out);
  summarize(in_offsets_, stats_.mean_in, stats_.p99_in);
}

TemporalGraph build_graph(std::vector<TransactionRecord> records, NodeId node_count,
                          std::vector<std::string> currencies) {
  TemporalGraph g;
  const std::size_t m = records.size();
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.edge_id < b.edge_id; });
  NodeId max_node = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = records[i];
    if (r.edge_id != i) throw InvariantError("edge ids must be dense from 0");
    if (r.timestamp < 0) throw InvariantError("negative timestamp on edge " + std::to_string(i));
    max_node = std::max({max_node, r.src + 1, r.dst + 1});
  }
  if (node_count == 0) node_count = max_node;
  if (max_node > node_count) {
    throw InvariantError("node id " + std::to_string(max_node - 1) + " out of range for " +
                         std::to_string(node_count) + " nodes");
  }
  for (const auto& r : records) {
    if (!currencies.empty() && r.currency >= currencies.size()) {
      throw InvariantError("currency id out of range on edge " + std::to_string(r.edge_id));
    }
  }
  g.node_count_ = node_count;
  g.edges_ = std::move(records);
  g.currencies_ = std::move(currencies);

  // Visiting edges in global (t, id) order fills each bucket already sorted.
  std::vector<EdgeId> order(m);
  std::iota(order.begin(), order.end(), EdgeId{0});
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    return g.edges_[a].timestamp < g.edges_[b].timestamp;
  });

  const auto fill = [&](Direction d, std::vector<std::uint64_t>& off, std::vector<AdjEntry>& ent) {
    off.assign(static_cast<std::size_t>(node_count) + 1, 0);
    for (const auto& r : g.edges_) ++off[(d == Direction::Out ? r.src : r.dst) + 1];
    std::partial_sum(off.begin(), off.end(), off.begin());
    std::vector<std::uint64_t> cursor(off.begin(), off.end() - 1);
    ent.resize(m);
    for (EdgeId e : order) {
      const auto& r = g.edges_[e];
      const NodeId owner = d == Direction::Out ? r.src : r.dst;
      const NodeId other = d == Direction::Out ? r.dst : r.src;
      ent[cursor[owner]++] = AdjEntry{r.timestamp, other, e};
    }
  };
  fill(Direction::Out, g.out_offsets_, g.out_entries_);
  fill(Direction::In, g.in_offsets_, g.in_entries_);
  g.compute_stats();
  return g;
}

TemporalGraph build_graph(IngestResult ingest) {
  return build_graph(std::move(ingest.records), ingest.node_count, std::move(ingest.currencies));
}

std::size_t find_start(std::span<const AdjEntry> adj, Timestamp t_min) noexcept {
  const auto it = std::partition_point(adj.begin(), adj.end(),
                                       [t_min](const AdjEntry& a) { return a.t < t_min; });
  return static_cast<std::size_t>(it - adj.begin());
}

std::span<const AdjEntry> window_neighbors(const TemporalGraph& g, NodeId node, Direction d,
                                           TimeWindow window) noexcept {
  const auto adj = g.adjacency(d, node);
  if (window.lo > window.hi) return {};
  const std::size_t begin = find_start(adj, window.lo);
  std::size_t end = begin;
  while (end < adj.size() && adj[end].t <= window.hi) ++end;
  return adj.subspan(begin, end - begin);
}

}  // namespace tempmine
