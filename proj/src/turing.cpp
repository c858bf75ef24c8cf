#include "tmb/turing.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace tmb {

void Tape::write(std::int64_t cell, Symbol s) {
  if (s) {
    ones_.insert(cell);
  } else {
    ones_.erase(cell);
  }
}

std::string Tape::str() const {
  std::string out = "{";
  bool first = true;
  for (auto cell : ones_) {
    if (!first) out += ", ";
    out += std::to_string(cell) + ":1";
    first = false;
  }
  return out + "}";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

Tape Tape::parse(std::string_view text) {
  text = trim(text);
  Tape tape;
  if (text.empty()) throw ParseError(0, "empty tape literal");
  if (text.front() == '{') {
    if (text.back() != '}') throw ParseError(0, "tape literal missing '}'");
    std::string body(text.substr(1, text.size() - 2));
    std::replace(body.begin(), body.end(), ',', ' ');
    for (const auto& item : split_ws(body)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos || colon + 2 != item.size()) {
        throw ParseError(0, "bad tape entry '" + item + "'");
      }
      const char sym = item[colon + 1];
      if (sym != '0' && sym != '1') throw ParseError(0, "bad tape symbol in '" + item + "'");
      std::int64_t cell = 0;
      try {
        std::size_t used = 0;
        cell = std::stoll(item.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(0, "bad tape index in '" + item + "'");
      }
      tape.write(cell, sym - '0');
    }
    return tape;
  }
  const auto at = text.find('@');
  if (at == std::string_view::npos || text.find('@', at + 1) != std::string_view::npos) {
    throw ParseError(0, "tape string needs exactly one '@' before cell 0");
  }
  const auto cell0 = static_cast<std::int64_t>(at);
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == at) continue;
    const char c = text[i];
    if (c != '0' && c != '1') throw ParseError(0, std::string("bad tape symbol '") + c + "'");
    tape.write(pos - cell0, c - '0');
    ++pos;
  }
  return tape;
}

Machine::Machine(std::vector<std::string> state_names, StateId initial, std::set<StateId> halting,
                 std::map<std::pair<StateId, Symbol>, Transition> delta)
    : names_(std::move(state_names)), initial_(initial), halting_(std::move(halting)), delta_(std::move(delta)) {
  const auto n = static_cast<StateId>(names_.size());
  if (n == 0) throw ParseError(0, "machine has no states");
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    throw ParseError(0, "duplicate state name");
  }
  if (initial_ < 0 || initial_ >= n) throw ParseError(0, "initial state out of range");
  if (halting_.empty()) throw ParseError(0, "no halting state");
  if (halting_.size() == names_.size()) throw ParseError(0, "every state is halting");
  for (auto h : halting_) {
    if (h < 0 || h >= n) throw ParseError(0, "halting state out of range");
  }
  for (const auto& [key, tr] : delta_) {
    if (key.first < 0 || key.first >= n || tr.target < 0 || tr.target >= n) {
      throw ParseError(0, "transition references unknown state");
    }
    if (is_halting(key.first)) throw ParseError(0, "transition from halting state " + name(key.first));
    if ((key.second != 0 && key.second != 1) || (tr.write != 0 && tr.write != 1)) {
      throw ParseError(0, "non-binary symbol");
    }
    if (tr.shift != -1 && tr.shift != 1) throw ParseError(0, "shift must be -1 or +1");
  }
  for (StateId q = 0; q < n; ++q) {
    if (is_halting(q)) continue;
    for (Symbol a : {0, 1}) {
      if (!delta_.count({q, a})) {
        throw ParseError(0, "missing transition for (" + name(q) + ", " + std::to_string(a) + ")");
      }
    }
  }
}

std::optional<StateId> Machine::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<StateId>(i);
  }
  return std::nullopt;
}

const Transition& Machine::delta(StateId q, Symbol a) const {
  const auto it = delta_.find({q, a});
  if (it == delta_.end()) throw std::logic_error("delta undefined on halting state " + name(q));
  return it->second;
}

std::string Machine::str() const {
  std::string out = "states:";
  for (const auto& n : names_) out += " " + n;
  out += "\ninitial: " + name(initial_) + "\nhalting:";
  for (auto h : halting_) out += " " + name(h);
  out += "\n";
  for (const auto& [key, tr] : delta_) {
    out += name(key.first) + " " + std::to_string(key.second) + " -> " + name(tr.target) + " " +
           std::to_string(tr.write) + " " + (tr.shift < 0 ? "L" : "R") + "\n";
  }
  return out;
}

std::string Machine::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Machine parse_machine(std::string_view text) {
  std::vector<std::pair<int, std::vector<std::string>>> lines;
  {
    std::istringstream in{std::string(text)};
    int lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
      ++lineno;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.resize(hash);
      auto toks = split_ws(raw);
      if (!toks.empty()) lines.emplace_back(lineno, std::move(toks));
    }
  }
  auto header = [&](std::size_t idx, const std::string& key) -> const std::pair<int, std::vector<std::string>>& {
    if (idx >= lines.size()) throw ParseError(0, "missing '" + key + "' line");
    const auto& [ln, toks] = lines[idx];
    if (toks[0] != key) throw ParseError(ln, "expected '" + key + "'");
    if (toks.size() < 2) throw ParseError(ln, "'" + key + "' needs at least one state");
    return lines[idx];
  };

  const auto& [states_line, states_toks] = header(0, "states:");
  std::vector<std::string> names(states_toks.begin() + 1, states_toks.end());
  std::map<std::string, StateId> ids;
  for (const auto& n : names) {
    if (!ids.emplace(n, static_cast<StateId>(ids.size())).second) {
      throw ParseError(states_line, "duplicate state '" + n + "'");
    }
  }
  auto lookup = [&](int ln, const std::string& n) {
    const auto it = ids.find(n);
    if (it == ids.end()) throw ParseError(ln, "unknown state '" + n + "'");
    return it->second;
  };

  const auto& [init_line, init_toks] = header(1, "initial:");
  if (init_toks.size() != 2) throw ParseError(init_line, "exactly one initial state expected");
  const StateId initial = lookup(init_line, init_toks[1]);

  const auto& [halt_line, halt_toks] = header(2, "halting:");
  std::set<StateId> halting;
  for (std::size_t i = 1; i < halt_toks.size(); ++i) halting.insert(lookup(halt_line, halt_toks[i]));
  if (halting.size() == names.size()) throw ParseError(halt_line, "halting must be a proper subset of states");

  auto parse_symbol = [](int ln, const std::string& tok) -> Symbol {
    if (tok == "0") return 0;
    if (tok == "1") return 1;
    throw ParseError(ln, "symbol must be 0 or 1, got '" + tok + "'");
  };

  std::map<std::pair<StateId, Symbol>, Transition> delta;
  for (std::size_t i = 3; i < lines.size(); ++i) {
    const auto& [ln, toks] = lines[i];
    if (toks.size() != 6 || toks[2] != "->") {
      throw ParseError(ln, "expected '<state> <0|1> -> <state> <0|1> <L|R>'");
    }
    const StateId src = lookup(ln, toks[0]);
    const Symbol read = parse_symbol(ln, toks[1]);
    const StateId dst = lookup(ln, toks[3]);
    const Symbol write = parse_symbol(ln, toks[4]);
    Shift shift;
    if (toks[5] == "L") {
      shift = -1;
    } else if (toks[5] == "R") {
      shift = 1;
    } else {
      throw ParseError(ln, "shift must be L or R, got '" + toks[5] + "'");
    }
    if (halting.count(src)) throw ParseError(ln, "transition from halting state '" + toks[0] + "'");
    if (!delta.emplace(std::pair{src, read}, Transition{dst, write, shift}).second) {
      throw ParseError(ln, "duplicate transition for (" + toks[0] + ", " + toks[1] + ")");
    }
  }
  return Machine(std::move(names), initial, std::move(halting), std::move(delta));
}

ReversibilityReport check_reversible(const Machine& m) {
  std::map<StateId, std::vector<IncomingTransition>> incoming;
  for (const auto& [key, tr] : m.transitions()) {
    incoming[tr.target].push_back({key.first, key.second, tr});
  }
  for (const auto& [target, ins] : incoming) {
    for (std::size_t i = 0; i < ins.size(); ++i) {
      for (std::size_t j = i + 1; j < ins.size(); ++j) {
        const auto& a = ins[i].transition;
        const auto& b = ins[j].transition;
        if (a.shift != b.shift || a.write == b.write) {
          return {false, std::pair{ins[i], ins[j]}};
        }
      }
    }
  }
  return {};
}

Configuration step(const Machine& m, const Configuration& c) {
  if (m.is_halting(c.state)) throw std::logic_error("step from halting state " + m.name(c.state));
  const auto& tr = m.delta(c.state, c.tape.read(c.head));
  Configuration next{c.tape, tr.target, c.head + tr.shift};
  next.tape.write(c.head, tr.write);
  return next;
}

RunResult run_machine(const Machine& m, const Tape& t0, std::uint64_t max_steps) {
  RunResult r{false, Configuration{t0, m.initial(), 0}, 0};
  while (true) {
    if (m.is_halting(r.last.state)) {
      r.halted = true;
      return r;
    }
    if (r.steps >= max_steps) return r;
    r.last = step(m, r.last);
    ++r.steps;
  }
}

std::size_t MachineGraph::out_degree(StateId q) const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const auto& e) { return e.source == q; }));
}

std::size_t MachineGraph::in_degree(StateId q) const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const auto& e) { return e.target == q; }));
}

std::vector<GraphEdge> MachineGraph::incoming(StateId q) const {
  std::vector<GraphEdge> out;
  std::copy_if(edges.begin(), edges.end(), std::back_inserter(out), [&](const auto& e) { return e.target == q; });
  return out;
}

std::size_t MachineGraph::components() const {
  std::vector<std::size_t> parent(num_vertices);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t count = num_vertices;
  for (const auto& e : edges) {
    const auto a = find(static_cast<std::size_t>(e.source));
    const auto b = find(static_cast<std::size_t>(e.target));
    if (a != b) {
      parent[a] = b;
      --count;
    }
  }
  return count;
}

MachineGraph build_graph(const Machine& m) {
  MachineGraph g;
  g.num_vertices = m.num_states();
  for (const auto& [key, tr] : m.transitions()) {
    g.edges.push_back({key.first, key.second, tr.write, tr.shift, tr.target});
  }
  return g;
}

}  // namespace tmb
