#include "mcjesp/dpomdp_parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace mcjesp {
namespace {

struct Token {
  std::string text;
  int line = 0;
  int column = 0;
  bool colon = false;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  const auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (c == ':') {
      out.push_back({":", line, col, true});
      advance(1);
    } else if (c == '*') {
      out.push_back({"*", line, col, false});
      advance(1);
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ':' &&
             text[j] != '#' && text[j] != '*')
        ++j;
      out.push_back({std::string(text.substr(i, j - i)), line, col, false});
      advance(j - i);
    }
  }
  return out;
}

std::optional<double> as_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> as_index(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

[[noreturn]] void syntax(const Token& t, const std::string& what) { throw ParseError(what, t.line, t.column); }
[[noreturn]] void unresolved(const Token& t, const std::string& what) {
  throw ResolutionError(what, t.line, t.column);
}

bool is_keyword(const std::string& w) {
  static const char* kw[] = {"agents", "discount", "values", "states", "actions",
                             "observations", "start", "T", "O", "R"};
  return std::find(std::begin(kw), std::end(kw), w) != std::end(kw);
}

/// A top-level `keyword:` block and the tokens that follow it.
struct Block {
  std::string key;  // "start include" and "start exclude" are folded in
  Token head;
  std::vector<Token> body;
};

std::vector<Block> split_blocks(const std::vector<Token>& toks) {
  std::vector<Block> blocks;
  std::size_t i = 0;
  const auto starts_block = [&](std::size_t k, std::size_t& len, std::string& key) {
    if (k + 1 < toks.size() && !toks[k].colon && is_keyword(toks[k].text) && toks[k + 1].colon) {
      len = 2;
      key = toks[k].text;
      return true;
    }
    if (k + 2 < toks.size() && toks[k].text == "start" &&
        (toks[k + 1].text == "include" || toks[k + 1].text == "exclude") && toks[k + 2].colon) {
      len = 3;
      key = "start " + toks[k + 1].text;
      return true;
    }
    return false;
  };
  while (i < toks.size()) {
    std::size_t len = 0;
    std::string key;
    if (!starts_block(i, len, key)) syntax(toks[i], fmt::format("unexpected token '{}'", toks[i].text));
    Block b{key, toks[i], {}};
    i += len;
    while (i < toks.size()) {
      std::size_t l2 = 0;
      std::string k2;
      if (starts_block(i, l2, k2)) break;
      b.body.push_back(toks[i++]);
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

/// Names for one alphabet: either a count (names become "0".."n-1") or a list.
std::vector<std::string> alphabet(const std::vector<Token>& toks, const Token& where) {
  if (toks.empty()) syntax(where, "empty declaration");
  if (toks.size() == 1) {
    if (auto n = as_index(toks[0].text)) {
      if (*n < 1) syntax(toks[0], "alphabet size must be positive");
      std::vector<std::string> names;
      for (int k = 0; k < *n; ++k) names.push_back(std::to_string(k));
      return names;
    }
  }
  std::vector<std::string> names;
  for (const auto& t : toks) {
    if (t.colon || t.text == "*") syntax(t, "invalid name");
    if (std::find(names.begin(), names.end(), t.text) != names.end())
      syntax(t, fmt::format("duplicate name '{}'", t.text));
    names.push_back(t.text);
  }
  return names;
}

class Parser {
 public:
  Parser(std::string_view text, double tol) : tol_(tol) { blocks_ = split_blocks(tokenize(text)); }

  ExplicitDecPomdp run();

 private:
  int find_name(const std::vector<std::string>& names, const Token& t, const char* what) const {
    if (auto it = std::find(names.begin(), names.end(), t.text); it != names.end())
      return static_cast<int>(it - names.begin());
    if (auto v = as_index(t.text); v && *v < static_cast<int>(names.size())) return *v;
    unresolved(t, fmt::format("unknown {} '{}'", what, t.text));
  }

  std::vector<int> states_of(const std::vector<Token>& slot) const {
    if (slot.size() != 1) syntax(slot.empty() ? last_ : slot[1], "expected a single state");
    if (slot[0].text == "*") return all(num_states());
    return {find_name(t_.state_names, slot[0], "state")};
  }

  // Joint action or joint observation identifier: `*`, a joint index, or one
  // token per agent (each a name, index or `*`).
  std::vector<int> joint_of(const std::vector<Token>& slot, const JointSpace& space,
                            const std::vector<std::vector<std::string>>& names, const char* what) const {
    const int n = space.num_agents();
    if (slot.size() == 1 && n > 1) {
      if (slot[0].text == "*") return all(space.total());
      if (auto v = as_index(slot[0].text); v && *v < space.total()) return {*v};
      unresolved(slot[0], fmt::format("unknown joint {} '{}'", what, slot[0].text));
    }
    if (static_cast<int>(slot.size()) != n)
      syntax(slot.empty() ? last_ : slot[0], fmt::format("expected {} {} components", n, what));
    std::vector<std::vector<int>> per(n);
    for (int k = 0; k < n; ++k) {
      if (slot[k].text == "*") {
        per[k] = all(space.size(k));
      } else {
        per[k] = {find_name(names[k], slot[k], what)};
      }
    }
    std::vector<int> out;
    std::vector<int> comp(n);
    const auto rec = [&](auto&& self, int k) -> void {
      if (k == n) {
        out.push_back(space.encode(comp));
        return;
      }
      for (int v : per[k]) {
        comp[k] = v;
        self(self, k + 1);
      }
    };
    rec(rec, 0);
    return out;
  }

  static std::vector<int> all(int n) {
    std::vector<int> v(n);
    for (int k = 0; k < n; ++k) v[k] = k;
    return v;
  }

  int num_states() const { return static_cast<int>(t_.state_names.size()); }

  std::vector<double> numbers(const std::vector<Token>& toks) const {
    std::vector<double> v;
    for (const auto& t : toks) {
      auto x = as_number(t.text);
      if (!x) syntax(t, fmt::format("expected a number, got '{}'", t.text));
      v.push_back(*x);
    }
    return v;
  }

  void header(const Block& b);
  void entry(const Block& b);
  void apply_start(const Block& b);
  void require_header(const Token& where);
  std::vector<double> finish_rewards();

  double tol_;
  std::vector<Block> blocks_;
  DecPomdpTables t_;
  int agents_ = 0;
  bool cost_ = false;
  bool have_discount_ = false;
  bool have_start_ = false;
  JointSpace A_, O_;
  Token last_;

  // Reward rules: per (s, a) a base value plus refinements over (s', o).
  struct RewardRule {
    std::vector<char> next_mask;
    std::vector<char> obs_mask;
    double value;
  };
  std::vector<double> reward_base_;
  std::vector<std::vector<int>> reward_refined_;
  std::vector<RewardRule> rules_;
};

void Parser::header(const Block& b) {
  const auto& body = b.body;
  if (b.key == "agents") {
    auto names = alphabet(body, b.head);
    agents_ = static_cast<int>(names.size());
  } else if (b.key == "discount") {
    if (body.size() != 1) syntax(b.head, "discount takes one number");
    auto v = as_number(body[0].text);
    if (!v) syntax(body[0], "discount must be a number");
    t_.discount = *v;
    have_discount_ = true;
  } else if (b.key == "values") {
    if (body.size() != 1 || (body[0].text != "reward" && body[0].text != "cost"))
      syntax(body.empty() ? b.head : body[0], "values must be 'reward' or 'cost'");
    cost_ = body[0].text == "cost";
  } else if (b.key == "states") {
    t_.state_names = alphabet(body, b.head);
  } else if (b.key == "actions" || b.key == "observations") {
    if (agents_ < 1) syntax(b.head, "'agents' must precede " + b.key);
    std::map<int, std::vector<Token>> lines;
    for (const auto& t : body) lines[t.line].push_back(t);
    if (static_cast<int>(lines.size()) != agents_)
      syntax(b.head, fmt::format("{} needs one line per agent ({} agents, {} lines)", b.key, agents_, lines.size()));
    auto& dst = b.key == "actions" ? t_.action_names : t_.observation_names;
    dst.clear();
    for (const auto& [ln, toks] : lines) dst.push_back(alphabet(toks, toks.front()));
  }
}

void Parser::require_header(const Token& where) {
  if (!A_.total()) {
    if (agents_ < 1 || t_.state_names.empty() || t_.action_names.empty() || t_.observation_names.empty())
      syntax(where, "agents, states, actions and observations must be declared before entries");
    std::vector<int> as, os;
    for (const auto& a : t_.action_names) as.push_back(static_cast<int>(a.size()));
    for (const auto& o : t_.observation_names) os.push_back(static_cast<int>(o.size()));
    A_ = JointSpace(as);
    O_ = JointSpace(os);
    const std::size_t ns = num_states();
    t_.transition.assign(ns * A_.total() * ns, 0.0);
    t_.observation.assign(A_.total() * ns * O_.total(), 0.0);
    reward_base_.assign(ns * A_.total(), 0.0);
    reward_refined_.assign(ns * A_.total(), {});
  }
}

void Parser::apply_start(const Block& b) {
  require_header(b.head);
  const int ns = num_states();
  auto& b0 = t_.initial_belief;
  b0.assign(ns, 0.0);
  have_start_ = true;
  if (b.key == "start include" || b.key == "start exclude") {
    std::vector<char> in(ns, b.key == "start exclude");
    for (const auto& t : b.body) in[find_name(t_.state_names, t, "state")] = b.key == "start include";
    const auto n = std::count(in.begin(), in.end(), 1);
    if (n == 0) syntax(b.head, "start set is empty");
    for (int s = 0; s < ns; ++s) b0[s] = in[s] ? 1.0 / static_cast<double>(n) : 0.0;
    return;
  }
  if (b.body.size() == 1 && b.body[0].text == "uniform") {
    std::fill(b0.begin(), b0.end(), 1.0 / ns);
  } else if (static_cast<int>(b.body.size()) == ns && ns > 1) {
    b0 = numbers(b.body);
  } else if (b.body.size() == 1) {
    // A single state; with one state a bare number is its probability.
    if (ns == 1 && as_number(b.body[0].text) && !std::count(t_.state_names.begin(), t_.state_names.end(), b.body[0].text)) {
      b0[0] = *as_number(b.body[0].text);
    } else {
      b0[find_name(t_.state_names, b.body[0], "state")] = 1.0;
    }
  } else {
    syntax(b.body.empty() ? b.head : b.body[0], fmt::format("start needs {} probabilities", ns));
  }
}

void Parser::entry(const Block& b) {
  require_header(b.head);
  last_ = b.head;
  const int ns = num_states();
  const int nA = A_.total();
  const int nO = O_.total();

  // Colon-separated sections of the entry.
  std::vector<std::vector<Token>> sec(1);
  std::vector<int> colon_line;
  for (const auto& t : b.body) {
    if (t.colon) {
      sec.emplace_back();
      colon_line.push_back(t.line);
    } else {
      sec.back().push_back(t);
    }
  }
  // A trailing colon leaves an empty section only when nothing follows it.
  if (sec.back().empty()) syntax(b.body.empty() ? b.head : b.body.back(), "entry has no value");
  for (std::size_t k = 0; k + 1 < sec.size(); ++k)
    if (sec[k].empty()) syntax(b.head, "empty identifier in entry");

  const char kind = b.key[0];
  const int num_slots = kind == 'R' ? 4 : 3;

  // Payload size (in numbers) expected after `level` filled identifiers, or
  // -1 when the level has no payload form.  Keywords are handled separately.
  const auto payload_size = [&](int level) -> int {
    switch (kind) {
      case 'T': return level == 1 ? ns * ns : level == 2 ? ns : level == 3 ? 1 : -1;
      case 'O': return level == 1 ? ns * nO : level == 2 ? nO : level == 3 ? 1 : -1;
      default: return level == 2 ? ns * nO : level == 3 ? nO : level == 4 ? 1 : -1;
    }
  };
  const auto keyword_ok = [&](int level, const std::string& w) {
    if (w == "uniform") return (kind == 'T' && (level == 1 || level == 2)) || (kind == 'O' && (level == 1 || level == 2));
    if (w == "identity") return kind == 'T' && level == 1;
    return false;
  };
  const auto payload_fits = [&](int level, const std::vector<Token>& toks) {
    if (level < 1) return false;
    if (toks.size() == 1 && keyword_ok(level, toks[0].text)) return true;
    if (static_cast<int>(toks.size()) != payload_size(level)) return false;
    return std::all_of(toks.begin(), toks.end(), [](const Token& t) { return as_number(t.text).has_value(); });
  };

  const int filled = static_cast<int>(sec.size()) - 1;
  if (filled > num_slots) syntax(b.head, "too many fields in entry");
  std::vector<std::vector<Token>> slots(sec.begin(), sec.end() - 1);
  const auto& tail = sec.back();
  std::vector<Token> payload;

  // Option A: the last section is only the payload; option B: it also carries
  // the next identifier.  When both parse, a payload starting on a new line
  // is read as a row/matrix.
  const bool a_ok = payload_fits(filled, tail);
  std::optional<std::size_t> b_split;
  if (filled + 1 <= num_slots) {
    const int level = filled + 1;
    std::size_t take = 0;
    if (!tail.empty() && keyword_ok(level, tail.back().text)) {
      take = 1;
    } else if (payload_size(level) > 0) {
      take = static_cast<std::size_t>(payload_size(level));
    }
    // Identifiers are names, integer indices or `*`, never fractions.
    const auto identifier = [](const Token& t) { return !as_number(t.text) || as_index(t.text).has_value(); };
    if (take > 0 && tail.size() > take &&
        std::all_of(tail.begin(), tail.end() - static_cast<long>(take), identifier)) {
      std::vector<Token> p(tail.end() - static_cast<long>(take), tail.end());
      if (payload_fits(level, p)) b_split = tail.size() - take;
    }
  }
  bool use_a = a_ok;
  if (a_ok && b_split) {
    const int prev_line = colon_line.empty() ? b.head.line : colon_line.back();
    use_a = tail.front().line > prev_line;
  }
  if (use_a) {
    payload = tail;
  } else if (b_split) {
    slots.emplace_back(tail.begin(), tail.begin() + static_cast<long>(*b_split));
    payload.assign(tail.begin() + static_cast<long>(*b_split), tail.end());
  } else {
    syntax(tail.front(), fmt::format("cannot parse {} entry value", kind));
  }
  const int level = static_cast<int>(slots.size());
  const bool is_kw = payload.size() == 1 && !as_number(payload[0].text);
  const std::string kw = is_kw ? payload[0].text : "";
  const std::vector<double> vals = is_kw ? std::vector<double>{} : numbers(payload);

  const auto acts = joint_of(slots[0], A_, t_.action_names, "action");
  if (kind == 'T') {
    auto T = [&](int s, int a, int s2) -> double& {
      return t_.transition[(static_cast<std::size_t>(s) * nA + a) * ns + s2];
    };
    if (level == 1) {
      for (int a : acts)
        for (int s = 0; s < ns; ++s)
          for (int s2 = 0; s2 < ns; ++s2)
            T(s, a, s2) = kw == "identity" ? (s == s2 ? 1.0 : 0.0) : kw == "uniform" ? 1.0 / ns : vals[s * ns + s2];
    } else if (level == 2) {
      for (int a : acts)
        for (int s : states_of(slots[1]))
          for (int s2 = 0; s2 < ns; ++s2) T(s, a, s2) = kw == "uniform" ? 1.0 / ns : vals[s2];
    } else {
      for (int a : acts)
        for (int s : states_of(slots[1]))
          for (int s2 : states_of(slots[2])) T(s, a, s2) = vals[0];
    }
  } else if (kind == 'O') {
    auto O = [&](int a, int s2, int o) -> double& {
      return t_.observation[(static_cast<std::size_t>(a) * ns + s2) * nO + o];
    };
    if (level == 1) {
      for (int a : acts)
        for (int s2 = 0; s2 < ns; ++s2)
          for (int o = 0; o < nO; ++o) O(a, s2, o) = kw == "uniform" ? 1.0 / nO : vals[s2 * nO + o];
    } else if (level == 2) {
      for (int a : acts)
        for (int s2 : states_of(slots[1]))
          for (int o = 0; o < nO; ++o) O(a, s2, o) = kw == "uniform" ? 1.0 / nO : vals[o];
    } else {
      const auto obs = joint_of(slots[2], O_, t_.observation_names, "observation");
      for (int a : acts)
        for (int s2 : states_of(slots[1]))
          for (int o : obs) O(a, s2, o) = vals[0];
    }
  } else {
    if (level < 2) syntax(b.head, "R entries need at least an action and a start state");
    const auto starts = states_of(slots[1]);
    const auto add_rule = [&](const std::vector<int>& nexts, const std::vector<int>& obs, double v) {
      const bool full = static_cast<int>(nexts.size()) == ns && static_cast<int>(obs.size()) == nO;
      int id = -1;
      if (!full) {
        RewardRule r{std::vector<char>(ns, 0), std::vector<char>(nO, 0), v};
        for (int s2 : nexts) r.next_mask[s2] = 1;
        for (int o : obs) r.obs_mask[o] = 1;
        id = static_cast<int>(rules_.size());
        rules_.push_back(std::move(r));
      }
      for (int a : acts)
        for (int s : starts) {
          const std::size_t k = static_cast<std::size_t>(s) * nA + a;
          if (full) {
            reward_base_[k] = v;
            reward_refined_[k].clear();
          } else {
            reward_refined_[k].push_back(id);
          }
        }
    };
    if (level == 4) {
      add_rule(states_of(slots[2]), joint_of(slots[3], O_, t_.observation_names, "observation"), vals[0]);
    } else if (level == 3) {
      const auto nexts = states_of(slots[2]);
      for (int o = 0; o < nO; ++o) add_rule(nexts, {o}, vals[o]);
    } else {
      for (int s2 = 0; s2 < ns; ++s2)
        for (int o = 0; o < nO; ++o) add_rule({s2}, {o}, vals[s2 * nO + o]);
    }
  }
}

std::vector<double> Parser::finish_rewards() {
  const int ns = num_states();
  const int nA = A_.total();
  const int nO = O_.total();
  std::vector<double> r(reward_base_);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < nA; ++a) {
      const std::size_t k = static_cast<std::size_t>(s) * nA + a;
      const auto& refined = reward_refined_[k];
      if (refined.empty()) continue;
      double expect = 0.0;
      for (int s2 = 0; s2 < ns; ++s2) {
        const double pt = t_.transition[k * ns + s2];
        if (pt == 0.0) continue;
        for (int o = 0; o < nO; ++o) {
          const double po = t_.observation[(static_cast<std::size_t>(a) * ns + s2) * nO + o];
          if (po == 0.0) continue;
          double v = reward_base_[k];
          for (auto it = refined.rbegin(); it != refined.rend(); ++it) {
            const auto& rule = rules_[*it];
            if (rule.next_mask[s2] && rule.obs_mask[o]) {
              v = rule.value;
              break;
            }
          }
          expect += pt * po * v;
        }
      }
      r[k] = expect;
    }
  }
  if (cost_)
    for (double& x : r) x = -x;
  return r;
}

ExplicitDecPomdp Parser::run() {
  if (blocks_.empty()) throw ParseError("empty model", 1, 1);
  const Block* start = nullptr;
  for (const auto& b : blocks_) {
    if (b.key == "T" || b.key == "O" || b.key == "R") {
      entry(b);
    } else if (b.key.rfind("start", 0) == 0) {
      start = &b;
    } else {
      if (A_.total()) syntax(b.head, "header declarations must precede entries");
      header(b);
    }
  }
  const Token end{"", blocks_.back().head.line, 1, false};
  require_header(end);
  if (static_cast<int>(t_.action_names.size()) != agents_ || static_cast<int>(t_.observation_names.size()) != agents_)
    syntax(end, "actions/observations do not match the agent count");
  if (!have_discount_) syntax(end, "missing 'discount'");
  if (start) apply_start(*start);
  if (!have_start_) t_.initial_belief.assign(num_states(), 1.0 / num_states());
  t_.reward = finish_rewards();
  return ExplicitDecPomdp(std::move(t_), tol_);
}

}  // namespace

ExplicitDecPomdp parse_dpomdp(std::string_view text, double tolerance) { return Parser(text, tolerance).run(); }

ExplicitDecPomdp load_dpomdp(const std::filesystem::path& path, double tolerance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dpomdp(ss.str(), tolerance);
}

}  // namespace mcjesp
