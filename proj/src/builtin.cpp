#include "tempmine/builtin.hpp"

#include <algorithm>

namespace tempmine {

namespace detail {
extern const BuiltinPattern kBuiltinPatterns[];
extern const std::size_t kBuiltinPatternCount;
}  // namespace detail

std::span<const BuiltinPattern> builtin_patterns() {
  return {detail::kBuiltinPatterns, detail::kBuiltinPatternCount};
}

const BuiltinPattern* find_builtin(std::string_view name) {
  const auto all = builtin_patterns();
  const auto it = std::find_if(all.begin(), all.end(), [&](const BuiltinPattern& b) { return b.name == name; });
  return it == all.end() ? nullptr : &*it;
}

ValidatedPattern load_builtin(std::string_view name) {
  const auto* b = find_builtin(name);
  if (b == nullptr) throw ConfigError("unknown builtin pattern '" + std::string(name) + "'");
  auto r = load_pattern(b->text, std::string("builtin:") + std::string(name));
  if (!r.ok()) throw InvariantError("builtin " + std::string(name) + ": " + r.diagnostics.front().to_string());
  return std::move(*r.pattern);
}

std::vector<ValidatedPattern> load_builtins() {
  std::vector<ValidatedPattern> out;
  for (const auto& b : builtin_patterns()) out.push_back(load_builtin(b.name));
  return out;
}

}  // namespace tempmine
