#include <bit>
#include <cstring>
#include <fstream>

#include "tempmine/txgraph.hpp"

static_assert(std::endian::native == std::endian::little,
              "cache I/O writes native integers and assumes a little-endian host");

namespace tempmine {

namespace {

constexpr char kMagic[8] = {'T', 'M', 'G', 'R', 'A', 'P', 'H', '\0'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
  }
  template <typename T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }
  template <typename T>
  T get() {
    T v{};
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw InvariantError("truncated cache file " + path_.string());
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace

void save_graph_cache(const TemporalGraph& g, const std::filesystem::path& path) {
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kCacheVersion);
  w.put<std::uint32_t>(0);  // reserved
  w.put<std::uint64_t>(g.node_count());
  w.put<std::uint64_t>(g.edge_count());
  w.put<std::uint64_t>(g.currencies().size());
  for (const auto& c : g.currencies()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(c.size()));
    w.bytes(c.data(), c.size());
  }
  for (const auto& r : g.edges()) {
    w.put<std::uint32_t>(r.src);
    w.put<std::uint32_t>(r.dst);
    w.put<std::int64_t>(r.timestamp);
    w.put<double>(r.amount);
    w.put<std::uint16_t>(r.currency);
    w.put<std::int8_t>(r.label ? static_cast<std::int8_t>(*r.label) : std::int8_t{-1});
    w.put<std::uint8_t>(0);
  }
  for (const auto d : {Direction::Out, Direction::In}) {
    const auto off = g.offsets(d);
    w.bytes(off.data(), off.size_bytes());
    for (const auto& a : g.entries(d)) {
      w.put<std::int64_t>(a.t);
      w.put<std::uint32_t>(a.node);
      w.put<std::uint32_t>(a.edge);
    }
  }
  w.finish(path);
}

TemporalGraph load_graph_cache(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw InvariantError(path.string() + " is not a graph cache");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCacheVersion) {
    throw InvariantError("cache version " + std::to_string(version) + " unsupported (expected " +
                         std::to_string(kCacheVersion) + ")");
  }
  (void)r.get<std::uint32_t>();
  TemporalGraph g;
  g.node_count_ = static_cast<NodeId>(r.get<std::uint64_t>());
  const auto m = r.get<std::uint64_t>();
  const auto ncur = r.get<std::uint64_t>();
  g.currencies_.resize(ncur);
  for (auto& c : g.currencies_) {
    c.resize(r.get<std::uint32_t>());
    r.bytes(c.data(), c.size());
  }
  g.edges_.resize(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    auto& rec = g.edges_[i];
    rec.edge_id = static_cast<EdgeId>(i);
    rec.src = r.get<std::uint32_t>();
    rec.dst = r.get<std::uint32_t>();
    rec.timestamp = r.get<std::int64_t>();
    rec.amount = r.get<double>();
    rec.currency = r.get<std::uint16_t>();
    const auto label = r.get<std::int8_t>();
    if (label >= 0) rec.label = label != 0;
    (void)r.get<std::uint8_t>();
  }
  for (const auto d : {Direction::Out, Direction::In}) {
    auto& off = d == Direction::Out ? g.out_offsets_ : g.in_offsets_;
    auto& ent = d == Direction::Out ? g.out_entries_ : g.in_entries_;
    off.resize(static_cast<std::size_t>(g.node_count_) + 1);
    r.bytes(off.data(), off.size() * sizeof(std::uint64_t));
    if (off.back() != m) throw InvariantError("cache CSR offsets do not match edge count");
    ent.resize(m);
    for (auto& a : ent) {
      a.t = r.get<std::int64_t>();
      a.node = r.get<std::uint32_t>();
      a.edge = r.get<std::uint32_t>();
    }
  }
  g.compute_stats();
  return g;
}

}  // namespace tempmine
