#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tempmine/pattern.hpp"

namespace tempmine {

std::string Diagnostic::to_string() const {
  std::string out = file.empty() ? std::string("<input>") : file;
  out += ":" + std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": ";
  if (stage >= 0) out += "stage " + std::to_string(stage + 1) + ": ";
  out += message;
  return out;
}

std::string_view to_string(StageOp op) {
  switch (op) {
    case StageOp::ForAll: return "for_all";
    case StageOp::Intersect: return "intersect";
    case StageOp::Union: return "union";
    case StageOp::Differentiate: return "differentiate";
  }
  return "?";
}

std::string_view to_string(EmitMode mode) {
  switch (mode) {
    case EmitMode::SetCardinality: return "set_cardinality";
    case EmitMode::SourceCount: return "source_count";
    case EmitMode::PairProduct: return "pair_product";
    case EmitMode::InstanceList: return "instance_list";
  }
  return "?";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

CmpOp flip(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Ge: return CmpOp::Le;
    default: return op;
  }
}

bool holds(CmpOp op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

namespace {

constexpr std::string_view kOps = "for_all, intersect, union, differentiate";
constexpr std::string_view kStageKeys = "op, src, dst_var, window, skip_if, break_if, order";
constexpr std::string_view kEmitKeys = "mode, target, min_size, multiplicity";
constexpr std::string_view kTopKeys = "pattern, delta, attribution, stages, emit";

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

// e0, e1, ... -> role number; "e" -> kAnyRole; otherwise nullopt.
std::optional<int> role_number(std::string_view s) {
  if (s == "e") return kAnyRole;
  if (s.size() < 2 || s[0] != 'e') return std::nullopt;
  int v = 0;
  const auto res = std::from_chars(s.data() + 1, s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 0) return std::nullopt;
  if (s.size() > 2 && s[1] == '0') return std::nullopt;
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class DocumentParser {
 public:
  DocumentParser(std::string_view text, std::string_view file) : text_(text), file_(file) {}

  ParseResult run();

 private:
  struct Token {
    enum Kind { Ident, Number, String, Dot, Op, Comma, End, Bad } kind;
    std::string text;
    int col;
  };

  void error(int line, int col, std::string msg, int stage = -1) {
    diags_.push_back(Diagnostic{std::string(file_), {line, col}, stage, std::move(msg)});
  }

  std::vector<Token> lex(std::string_view s, int col0);
  std::optional<ConstraintExpr> parse_expr(std::string_view s, int line, int col0, int stage);
  std::optional<Operand> parse_operand(std::string_view s, int line, int col, int stage);
  void stage_entry(StageSpec& st, int stage_index, const std::string& key, const std::string& value,
                   int line, int key_col, int val_col);
  void emit_entry(const std::string& key, const std::string& value, int line, int key_col, int val_col);

  std::string_view text_;
  std::string_view file_;
  std::vector<Diagnostic> diags_;
  PatternSpec spec_;
  bool have_emit_mode_ = false;
  bool have_emit_target_ = false;
};

std::vector<DocumentParser::Token> DocumentParser::lex(std::string_view s, int col0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const int col = col0 + static_cast<int>(i);
    if (c == ' ' || c == '\t') {
      ++i;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      out.push_back({Token::Ident, std::string(s.substr(i, j - i)), col});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i + 1;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
                              s[j] == 'e' || s[j] == 'E' ||
                              ((s[j] == '-' || s[j] == '+') && (s[j - 1] == 'e' || s[j - 1] == 'E')))) {
        ++j;
      }
      out.push_back({Token::Number, std::string(s.substr(i, j - i)), col});
      i = j;
    } else if (c == '"') {
      const auto close = s.find('"', i + 1);
      if (close == std::string_view::npos) {
        out.push_back({Token::Bad, "unterminated string literal", col});
        return out;
      }
      out.push_back({Token::String, std::string(s.substr(i + 1, close - i - 1)), col});
      i = close + 1;
    } else if (c == '.') {
      out.push_back({Token::Dot, ".", col});
      ++i;
    } else if (c == ',') {
      out.push_back({Token::Comma, ",", col});
      ++i;
    } else if (c == '=' || c == '!' || c == '<' || c == '>') {
      if (i + 1 < s.size() && s[i + 1] == '=') {
        out.push_back({Token::Op, std::string(s.substr(i, 2)), col});
        i += 2;
      } else if (c == '<' || c == '>') {
        out.push_back({Token::Op, std::string(1, c), col});
        ++i;
      } else {
        out.push_back({Token::Bad, std::string("unexpected '") + c + "'", col});
        return out;
      }
    } else {
      out.push_back({Token::Bad, std::string("unexpected character '") + c + "'", col});
      return out;
    }
  }
  out.push_back({Token::End, "", col0 + static_cast<int>(s.size())});
  return out;
}

std::optional<ConstraintExpr> DocumentParser::parse_expr(std::string_view s, int line, int col0,
                                                         int stage) {
  const auto toks = lex(s, col0);
  for (const auto& t : toks) {
    if (t.kind == Token::Bad) {
      error(line, t.col, t.text, stage);
      return std::nullopt;
    }
  }
  struct Term {
    enum { Name, Number, String } kind;
    std::string name;
    std::string attr;
    int col;
  };
  std::size_t p = 0;
  const auto term = [&]() -> std::optional<Term> {
    const auto& t = toks[p];
    if (t.kind == Token::Number) {
      ++p;
      return Term{Term::Number, t.text, {}, t.col};
    }
    if (t.kind == Token::String) {
      ++p;
      return Term{Term::String, t.text, {}, t.col};
    }
    if (t.kind != Token::Ident) {
      error(line, t.col, "expected a variable, edge or literal", stage);
      return std::nullopt;
    }
    Term out{Term::Name, t.text, {}, t.col};
    ++p;
    if (toks[p].kind == Token::Dot) {
      ++p;
      if (toks[p].kind != Token::Ident) {
        error(line, toks[p].col, "expected attribute name after '.'", stage);
        return std::nullopt;
      }
      out.attr = toks[p].text;
      ++p;
    }
    return out;
  };
  auto lhs = term();
  if (!lhs) return std::nullopt;
  if (toks[p].kind != Token::Op) {
    error(line, toks[p].col, "expected comparison operator (==, !=, <, <=, >, >=)", stage);
    return std::nullopt;
  }
  const std::string op_text = toks[p].text;
  const int op_col = toks[p].col;
  ++p;
  auto rhs = term();
  if (!rhs) return std::nullopt;
  if (toks[p].kind != Token::End) {
    error(line, toks[p].col, "unexpected trailing input in constraint", stage);
    return std::nullopt;
  }
  CmpOp op = CmpOp::Eq;
  if (op_text == "==") op = CmpOp::Eq;
  else if (op_text == "!=") op = CmpOp::Ne;
  else if (op_text == "<") op = CmpOp::Lt;
  else if (op_text == "<=") op = CmpOp::Le;
  else if (op_text == ">") op = CmpOp::Gt;
  else op = CmpOp::Ge;

  // Put the edge-attribute side on the left.
  const auto is_trigger_time = [](const Term& t) { return t.kind == Term::Name && t.name == "t" && t.attr.empty(); };
  if ((lhs->kind != Term::Name || is_trigger_time(*lhs)) && rhs->kind == Term::Name && !rhs->attr.empty()) {
    std::swap(lhs, rhs);
    op = flip(op);
  }
  if (lhs->kind != Term::Name) {
    error(line, lhs->col, "constraint must start with a variable or edge", stage);
    return std::nullopt;
  }
  const auto lrole = role_number(lhs->name);
  if (!lhs->attr.empty()) {
    if (!lrole) {
      error(line, lhs->col, "attribute access '" + lhs->name + "." + lhs->attr +
                                "' needs an edge (e0, e1, ... or e)", stage);
      return std::nullopt;
    }
    if (lhs->attr == "t") {
      if (is_trigger_time(*rhs)) return TimeCompare{*lrole, op, std::nullopt};
      if (rhs->kind == Term::Name && rhs->attr == "t") {
        const auto rrole = role_number(rhs->name);
        if (rrole && *rrole != kAnyRole) return TimeCompare{*lrole, op, *rrole};
      }
      error(line, rhs->col, "time comparison needs 't' or another edge's '.t' on the right", stage);
      return std::nullopt;
    }
    if (lhs->attr == "amount") {
      if (rhs->kind != Term::Number) {
        error(line, rhs->col, "amount comparison needs a numeric literal", stage);
        return std::nullopt;
      }
      double v = 0.0;
      const auto res = std::from_chars(rhs->name.data(), rhs->name.data() + rhs->name.size(), v);
      if (res.ec != std::errc{} || res.ptr != rhs->name.data() + rhs->name.size()) {
        error(line, rhs->col, "malformed number '" + rhs->name + "'", stage);
        return std::nullopt;
      }
      return AmountCompare{*lrole, op, v};
    }
    if (lhs->attr == "currency") {
      if (rhs->kind == Term::String) return CurrencyCompare{*lrole, op, rhs->name};
      if (rhs->kind == Term::Name && rhs->attr == "currency") {
        const auto rrole = role_number(rhs->name);
        if (rrole && *rrole != kAnyRole) return CurrencyCompare{*lrole, op, *rrole};
      }
      error(line, rhs->col, "currency comparison needs a quoted code or another edge's '.currency'", stage);
      return std::nullopt;
    }
    error(line, lhs->col, "unknown edge attribute '" + lhs->attr + "' (expected t, amount, currency)", stage);
    return std::nullopt;
  }
  if (rhs->kind != Term::Name || !rhs->attr.empty()) {
    error(line, rhs->col, "expected a variable or edge on the right of '" + op_text + "'", stage);
    return std::nullopt;
  }
  const auto rrole = role_number(rhs->name);
  if (lrole && rrole && *lrole != kAnyRole && *rrole != kAnyRole) return EdgeIdentity{*lrole, op, *rrole};
  if (lrole || rrole || lhs->name == "t" || rhs->name == "t") {
    error(line, op_col, "cannot compare '" + lhs->name + "' with '" + rhs->name + "'", stage);
    return std::nullopt;
  }
  return NodeCompare{lhs->name, op, rhs->name};
}

std::optional<Operand> DocumentParser::parse_operand(std::string_view s, int line, int col, int stage) {
  const std::string text = trim(s);
  const auto dot = text.find('.');
  Operand out;
  out.base = text.substr(0, dot);
  if (!is_identifier(out.base)) {
    error(line, col, "malformed operand '" + text + "'", stage);
    return std::nullopt;
  }
  if (dot == std::string::npos) {
    out.accessor = Accessor::Self;
    return out;
  }
  const auto acc = text.substr(dot + 1);
  if (acc == "in_neigh") out.accessor = Accessor::InNeigh;
  else if (acc == "out_neigh") out.accessor = Accessor::OutNeigh;
  else if (acc == "self") out.accessor = Accessor::Self;
  else {
    error(line, col + static_cast<int>(dot) + 1,
          "unknown accessor '" + acc + "' (expected in_neigh, out_neigh, self)", stage);
    return std::nullopt;
  }
  return out;
}

void DocumentParser::stage_entry(StageSpec& st, int si, const std::string& key,
                                 const std::string& value, int line, int key_col, int val_col) {
  if (key == "op") {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "for_all") st.op = StageOp::ForAll;
    else if (v == "intersect") st.op = StageOp::Intersect;
    else if (v == "union") st.op = StageOp::Union;
    else if (v == "differentiate") st.op = StageOp::Differentiate;
    else error(line, val_col, "unknown op '" + value + "'; legal ops: " + std::string(kOps), si);
  } else if (key == "src") {
    std::size_t start = 0;
    while (start <= value.size()) {
      const auto comma = value.find(',', start);
      const auto piece = value.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (auto o = parse_operand(piece, line, val_col + static_cast<int>(start), si)) st.inputs.push_back(*o);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  } else if (key == "dst_var") {
    if (!is_identifier(value)) error(line, val_col, "malformed variable name '" + value + "'", si);
    st.output_var = value;
  } else if (key == "window") {
    if (value == "backward") st.window = WindowSide::Backward;
    else if (value == "forward") st.window = WindowSide::Forward;
    else error(line, val_col, "unknown window '" + value + "' (expected backward, forward)", si);
  } else if (key == "skip_if" || key == "break_if" || key == "order") {
    const auto kind = key == "skip_if" ? ConstraintKind::SkipIf
                      : key == "break_if" ? ConstraintKind::BreakIf
                                          : ConstraintKind::Order;
    if (auto expr = parse_expr(value, line, val_col, si)) {
      st.constraints.push_back(Constraint{kind, std::move(*expr), {line, val_col}});
    }
  } else {
    error(line, key_col, "unknown stage key '" + key + "' (expected one of " + std::string(kStageKeys) + ")", si);
  }
}

void DocumentParser::emit_entry(const std::string& key, const std::string& value, int line,
                                int key_col, int val_col) {
  auto& em = spec_.emit;
  if (key == "mode") {
    have_emit_mode_ = true;
    if (value == "set_cardinality") em.mode = EmitMode::SetCardinality;
    else if (value == "source_count") em.mode = EmitMode::SourceCount;
    else if (value == "pair_product") em.mode = EmitMode::PairProduct;
    else if (value == "instance_list") em.mode = EmitMode::InstanceList;
    else error(line, val_col, "unknown emit mode '" + value +
                                  "' (expected set_cardinality, source_count, pair_product, instance_list)");
  } else if (key == "target") {
    have_emit_target_ = true;
    std::size_t start = 0;
    while (start <= value.size()) {
      const auto comma = value.find(',', start);
      const auto name = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (!is_identifier(name)) error(line, val_col + static_cast<int>(start), "malformed target '" + name + "'");
      em.targets.push_back(name);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  } else if (key == "min_size") {
    std::int64_t v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
      error(line, val_col, "min_size must be an integer");
    } else {
      em.min_size = v;
    }
  } else if (key == "multiplicity") {
    if (value == "nodes") em.multiplicity = Multiplicity::Nodes;
    else if (value == "edges") em.multiplicity = Multiplicity::Edges;
    else error(line, val_col, "unknown multiplicity '" + value + "' (expected nodes, edges)");
  } else {
    error(line, key_col, "unknown emit key '" + key + "' (expected one of " + std::string(kEmitKeys) + ")");
  }
}

ParseResult DocumentParser::run() {
  enum class Section { None, Stages, Emit } section = Section::None;
  bool have_name = false, have_delta = false, have_stages = false, have_emit = false, have_attr = false;
  StageSpec* current = nullptr;
  std::vector<std::vector<std::string>> seen_stage_keys;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text_.size()) {
    const auto nl = text_.find('\n', pos);
    std::string_view raw = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text_.size() + 1 : nl + 1;
    ++line_no;

    // Strip comments outside string literals.
    bool in_str = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') in_str = !in_str;
      if (raw[i] == '#' && !in_str) {
        raw = raw.substr(0, i);
        break;
      }
    }
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    if (raw.find('\t') != std::string_view::npos) {
      error(line_no, static_cast<int>(raw.find('\t')) + 1, "tab characters are not allowed; indent with spaces");
      continue;
    }
    std::size_t indent = raw.find_first_not_of(' ');
    std::string_view body = raw.substr(indent);
    bool new_item = false;
    if (body.front() == '-') {
      new_item = true;
      body.remove_prefix(1);
      const auto skip = body.find_first_not_of(' ');
      indent += 1 + (skip == std::string_view::npos ? body.size() : skip);
      body = skip == std::string_view::npos ? std::string_view{} : body.substr(skip);
    }
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) {
      error(line_no, static_cast<int>(indent) + 1, "expected 'key: value'");
      continue;
    }
    const std::string key = trim(body.substr(0, colon));
    const std::string_view after = body.substr(colon + 1);
    const auto vskip = after.find_first_not_of(' ');
    const std::string value = trim(after);
    const int key_col = static_cast<int>(indent) + 1;
    const int val_col = key_col + static_cast<int>(colon) + 1 +
                        static_cast<int>(vskip == std::string_view::npos ? 0 : vskip);

    if (indent == 0 && !new_item) {
      section = Section::None;
      current = nullptr;
      const auto dup = [&](bool& flag) {
        if (flag) error(line_no, key_col, "duplicate key '" + key + "'");
        flag = true;
      };
      if (key == "pattern") {
        dup(have_name);
        if (value.empty() || !std::all_of(value.begin(), value.end(), [](char c) {
              return is_ident_char(c) || c == '-';
            })) {
          error(line_no, val_col, "pattern name must be letters, digits, '_' or '-'");
        }
        spec_.name = value;
      } else if (key == "delta") {
        dup(have_delta);
        Timestamp v = 0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (value.empty() || res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
          error(line_no, val_col, "delta must be an integer number of timestamp units");
        }
        spec_.delta = v;
      } else if (key == "attribution") {
        dup(have_attr);
        if (value == "trigger") spec_.attribution = Attribution::Trigger;
        else if (value == "members") spec_.attribution = Attribution::Members;
        else error(line_no, val_col, "unknown attribution '" + value + "' (expected trigger, members)");
      } else if (key == "stages") {
        dup(have_stages);
        if (!value.empty()) error(line_no, val_col, "'stages:' takes no inline value; list stages below it");
        section = Section::Stages;
      } else if (key == "emit") {
        dup(have_emit);
        if (!value.empty()) error(line_no, val_col, "'emit:' takes no inline value");
        section = Section::Emit;
      } else {
        error(line_no, key_col, "unknown key '" + key + "' (expected one of " + std::string(kTopKeys) + ")");
      }
      continue;
    }
    if (section == Section::Stages) {
      if (new_item) {
        spec_.stages.emplace_back();
        current = &spec_.stages.back();
        current->pos = {line_no, key_col};
        seen_stage_keys.emplace_back();
      }
      if (current == nullptr) {
        error(line_no, key_col, "expected '- ' to start a stage");
        continue;
      }
      const int si = static_cast<int>(spec_.stages.size()) - 1;
      auto& seen = seen_stage_keys.back();
      const bool repeatable = key == "skip_if" || key == "break_if" || key == "order";
      if (!repeatable && std::find(seen.begin(), seen.end(), key) != seen.end()) {
        error(line_no, key_col, "duplicate stage key '" + key + "'", si);
        continue;
      }
      seen.push_back(key);
      stage_entry(*current, si, key, value, line_no, key_col, val_col);
    } else if (section == Section::Emit && !new_item) {
      emit_entry(key, value, line_no, key_col, val_col);
    } else {
      error(line_no, key_col, new_item ? "list item outside 'stages:'" : "unexpected indented line");
    }
  }

  const int end_line = line_no;
  if (!have_name) error(end_line, 1, "missing 'pattern:' name");
  if (!have_delta) error(end_line, 1, "missing 'delta:' window length");
  if (!have_emit) {
    error(end_line, 1, "missing 'emit:' section");
  } else {
    if (!have_emit_mode_) error(end_line, 1, "emit section lacks 'mode:'");
    if (!have_emit_target_) error(end_line, 1, "emit section lacks 'target:'");
  }
  if (spec_.stages.empty()) error(end_line, 1, "pattern has no stages");
  for (std::size_t i = 0; i < spec_.stages.size(); ++i) {
    const auto& seen = seen_stage_keys[i];
    for (const char* req : {"op", "src", "dst_var"}) {
      if (std::find(seen.begin(), seen.end(), req) == seen.end()) {
        error(spec_.stages[i].pos.line, spec_.stages[i].pos.col,
              std::string("stage lacks '") + req + ":'", static_cast<int>(i));
      }
    }
  }
  ParseResult out;
  out.diagnostics = std::move(diags_);
  if (out.diagnostics.empty()) out.spec = std::move(spec_);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string role_name(int r) { return r == kAnyRole ? std::string("e") : "e" + std::to_string(r); }

std::string print_expr(const ConstraintExpr& expr) {
  struct Visitor {
    std::string operator()(const NodeCompare& c) const {
      return c.lhs + " " + std::string(to_string(c.op)) + " " + c.rhs;
    }
    std::string operator()(const EdgeIdentity& c) const {
      return role_name(c.lhs) + " " + std::string(to_string(c.op)) + " " + role_name(c.rhs);
    }
    std::string operator()(const TimeCompare& c) const {
      return role_name(c.lhs) + ".t " + std::string(to_string(c.op)) + " " +
             (c.rhs ? role_name(*c.rhs) + ".t" : std::string("t"));
    }
    std::string operator()(const AmountCompare& c) const {
      return role_name(c.role) + ".amount " + std::string(to_string(c.op)) + " " + format_double(c.value);
    }
    std::string operator()(const CurrencyCompare& c) const {
      std::string rhs = std::holds_alternative<int>(c.rhs)
                            ? role_name(std::get<int>(c.rhs)) + ".currency"
                            : "\"" + std::get<std::string>(c.rhs) + "\"";
      return role_name(c.role) + ".currency " + std::string(to_string(c.op)) + " " + rhs;
    }
  };
  return std::visit(Visitor{}, expr);
}

}  // namespace

ParseResult parse_pattern(std::string_view text, std::string_view filename) {
  return DocumentParser(text, filename).run();
}

std::string print_pattern(const PatternSpec& spec) {
  std::ostringstream out;
  out << "pattern: " << spec.name << "\n";
  out << "delta: " << spec.delta << "\n";
  out << "attribution: " << (spec.attribution == Attribution::Trigger ? "trigger" : "members") << "\n";
  out << "stages:\n";
  for (const auto& st : spec.stages) {
    out << "  - op: " << to_string(st.op) << "\n";
    out << "    src: ";
    for (std::size_t i = 0; i < st.inputs.size(); ++i) {
      if (i) out << ", ";
      const auto& o = st.inputs[i];
      out << o.base << (o.accessor == Accessor::InNeigh    ? ".in_neigh"
                        : o.accessor == Accessor::OutNeigh ? ".out_neigh"
                                                           : ".self");
    }
    out << "\n    dst_var: " << st.output_var << "\n";
    if (st.window == WindowSide::Forward) out << "    window: forward\n";
    for (const auto& c : st.constraints) {
      const char* key = c.kind == ConstraintKind::SkipIf    ? "skip_if"
                        : c.kind == ConstraintKind::BreakIf ? "break_if"
                                                            : "order";
      out << "    " << key << ": " << print_expr(c.expr) << "\n";
    }
  }
  out << "emit:\n";
  out << "  mode: " << to_string(spec.emit.mode) << "\n";
  out << "  target: ";
  for (std::size_t i = 0; i < spec.emit.targets.size(); ++i) out << (i ? ", " : "") << spec.emit.targets[i];
  out << "\n  min_size: " << spec.emit.min_size << "\n";
  out << "  multiplicity: " << (spec.emit.multiplicity == Multiplicity::Nodes ? "nodes" : "edges") << "\n";
  return out.str();
}

ValidationResult load_pattern(std::string_view text, std::string_view filename) {
  auto parsed = parse_pattern(text, filename);
  if (!parsed.ok()) return ValidationResult{std::nullopt, std::move(parsed.diagnostics)};
  auto result = validate(*parsed.spec);
  for (auto& d : result.diagnostics) d.file = std::string(filename);
  return result;
}

ValidationResult load_pattern_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return ValidationResult{std::nullopt,
                            {Diagnostic{path.string(), {0, 0}, -1, "cannot open pattern file"}}};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_pattern(buf.str(), path.string());
}

}  // namespace tempmine
