#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "tempmine/pattern.hpp"

namespace tempmine {

// Pattern documents from patterns/builtin, embedded at build time.
struct BuiltinPattern {
  std::string_view name;
  std::string_view text;
};

// In feature-column order: fan_in, fan_out, deg_in_src, deg_out_src,
// deg_in_dst, deg_out_dst, cycle_2, cycle_3, cycle_4, sg_count, stack_count.
std::span<const BuiltinPattern> builtin_patterns();

const BuiltinPattern* find_builtin(std::string_view name);

// Throws ConfigError for unknown names.
ValidatedPattern load_builtin(std::string_view name);
std::vector<ValidatedPattern> load_builtins();

}  // namespace tempmine
