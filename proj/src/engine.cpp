#include <algorithm>
#include <exception>
#include <fstream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "engine_internal.hpp"

namespace tempmine {

FeatureMatrix::FeatureMatrix(std::vector<std::string> columns, std::size_t rows)
    : columns_(std::move(columns)), rows_(rows), values_(rows * columns_.size(), 0) {}

std::vector<Count> FeatureMatrix::column(std::size_t c) const {
  std::vector<Count> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
  return out;
}

FeatureMatrix merge_features(std::span<const FeatureMatrix> partials) {
  if (partials.empty()) return {};
  FeatureMatrix out(partials.front().columns(), partials.front().rows());
  for (const auto& p : partials) {
    if (p.columns() != out.columns() || p.rows() != out.rows()) {
      throw InvariantError("merge_features: partial matrices disagree on shape");
    }
    auto dst = out.values();
    const auto src = p.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

namespace {

std::vector<std::string> column_names(std::span<const ExecutionPlan> plans) {
  std::vector<std::string> cols;
  for (const auto& p : plans) cols.push_back(p.name);
  return cols;
}

bool use_kernel(const ExecutionPlan& p, const EngineOptions& o) {
  return !o.force_generic && p.kernel.hint != KernelHint::Generic && p.attribution == Attribution::Trigger &&
         p.emission.mode != EmitMode::InstanceList;
}

// Members-attribution columns share one partial matrix per worker.
struct MemberLayout {
  std::vector<std::string> columns;
  std::vector<std::size_t> plan_column;  // plan index -> partial column
};

MemberLayout member_layout(std::span<const ExecutionPlan> plans) {
  MemberLayout m;
  m.plan_column.assign(plans.size(), 0);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (plans[i].attribution != Attribution::Members) continue;
    m.plan_column[i] = m.columns.size();
    m.columns.push_back(plans[i].name);
  }
  return m;
}

void scatter_members(const FeatureMatrix& partial, std::span<const ExecutionPlan> plans, const MemberLayout& layout,
                     FeatureMatrix& out) {
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (plans[i].attribution != Attribution::Members) continue;
    const auto c = layout.plan_column[i];
    for (std::size_t r = 0; r < out.rows(); ++r) out.at(r, i) = partial.at(r, c);
  }
}

void check_plans(const TemporalGraph& g, std::span<const ExecutionPlan> plans) {
  (void)g;
  for (const auto& p : plans) {
    if (p.delta < 0) throw InvariantError("plan " + p.name + " has negative delta");
    if (static_cast<int>(p.role_stage.size()) != p.role_count) {
      throw InvariantError("plan " + p.name + " role table is inconsistent");
    }
    for (const auto& c : p.cells) {
      for (const auto& s : c.src) {
        if (s.kind == OperandRef::Kind::Set && (s.var < 0 || s.var >= c.dst_slot)) {
          throw InvariantError("plan " + p.name + " reads slot " + std::to_string(s.var) + " before it is written");
        }
      }
    }
  }
}

}  // namespace

MineResult mine_full(const TemporalGraph& g, std::span<const ExecutionPlan> plans, const EngineOptions& options) {
  if (options.workers < 1) throw ConfigError("workers must be at least 1");
  check_plans(g, plans);
  const std::size_t m = g.edge_count();
  MineResult result;
  result.features = FeatureMatrix(column_names(plans), m);
  const auto layout = member_layout(plans);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_size);
  const std::size_t nchunks = (m + chunk - 1) / chunk;
  std::vector<std::vector<InstanceRecord>> chunk_instances(nchunks);
  std::vector<FeatureMatrix> partials;
  if (!layout.columns.empty()) partials.assign(static_cast<std::size_t>(options.workers), FeatureMatrix(layout.columns, m));

  std::exception_ptr failure;
  auto& features = result.features;

#pragma omp parallel num_threads(options.workers)
  {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    try {
      Scratch scratch(g.node_count());
      KernelScratch kscratch(g.node_count());
      std::vector<detail::GenericRunner> runners;
      runners.reserve(plans.size());
      for (const auto& p : plans) runners.emplace_back(p, g, scratch);

#pragma omp for schedule(dynamic, 1)
      for (std::size_t c = 0; c < nchunks; ++c) {
        const std::size_t lo = c * chunk, hi = std::min(m, lo + chunk);
        for (std::size_t e = lo; e < hi; ++e) {
          const auto id = static_cast<EdgeId>(e);
          for (std::size_t pi = 0; pi < plans.size(); ++pi) {
            const auto& p = plans[pi];
            if (use_kernel(p, options)) {
              features.at(e, pi) = run_kernel(p, g, id, kscratch);
              continue;
            }
            detail::Sink sink;
            sink.instances = &chunk_instances[c];
            if (p.attribution == Attribution::Members) {
              sink.members = &partials[static_cast<std::size_t>(tid)];
              sink.column = layout.plan_column[pi];
            }
            const Count v = runners[pi].run(id, sink);
            if (p.attribution == Attribution::Trigger) features.at(e, pi) = v;
          }
        }
      }
    } catch (...) {
#pragma omp critical(tempmine_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  if (!partials.empty()) scatter_members(merge_features(partials), plans, layout, features);
  for (auto& part : chunk_instances) {
    std::move(part.begin(), part.end(), std::back_inserter(result.instances));
  }
  if (options.inject_fault && features.rows() > 0 && features.cols() > 0) features.at(0, 0) += 1;
  return result;
}

FeatureMatrix mine(const TemporalGraph& g, std::span<const ExecutionPlan> plans, int workers) {
  EngineOptions o;
  o.workers = workers;
  return mine_full(g, plans, o).features;
}

MineResult mine_serial(const TemporalGraph& g, std::span<const ExecutionPlan> plans) {
  check_plans(g, plans);
  MineResult result;
  result.features = FeatureMatrix(column_names(plans), g.edge_count());
  const auto layout = member_layout(plans);
  FeatureMatrix partial(layout.columns, g.edge_count());
  Scratch scratch(g.node_count());
  for (std::size_t pi = 0; pi < plans.size(); ++pi) {
    detail::GenericRunner runner(plans[pi], g, scratch);
    detail::Sink sink;
    sink.instances = &result.instances;
    sink.members = &partial;
    sink.column = layout.plan_column[pi];
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const Count v = runner.run(static_cast<EdgeId>(e), sink);
      if (plans[pi].attribution == Attribution::Trigger) result.features.at(e, pi) = v;
    }
  }
  scatter_members(partial, plans, layout, result.features);
  // Same instance order as the parallel driver: by trigger, then plan.
  std::stable_sort(result.instances.begin(), result.instances.end(),
                   [](const InstanceRecord& a, const InstanceRecord& b) { return a.trigger < b.trigger; });
  return result;
}

void write_feature_csv(std::ostream& out, const TemporalGraph& g, const FeatureMatrix& m) {
  if (m.rows() != g.edge_count()) throw InvariantError("feature matrix does not match the graph");
  std::string line = "edge_id,src,dst,timestamp,label";
  for (const auto& c : m.columns()) line += "," + c;
  line += "\n";
  out << line;
  std::string buf;
  buf.reserve(1 << 16);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto& rec = g.edge(static_cast<EdgeId>(r));
    buf += std::to_string(r);
    buf += ',';
    buf += std::to_string(rec.src);
    buf += ',';
    buf += std::to_string(rec.dst);
    buf += ',';
    buf += std::to_string(rec.timestamp);
    buf += ',';
    if (rec.label) buf += *rec.label ? '1' : '0';
    for (const Count v : m.row(r)) {
      buf += ',';
      buf += std::to_string(v);
    }
    buf += '\n';
    if (buf.size() > (1 << 16) - 256) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  if (!out) throw IoError("failed writing feature CSV");
}

void write_feature_csv(const std::filesystem::path& path, const TemporalGraph& g, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_feature_csv(out, g, m);
}

}  // namespace tempmine
