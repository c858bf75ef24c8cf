#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tmb {

using StateId = int;
using Symbol = int;  // 0 or 1
using Shift = int;   // -1 (L) or +1 (R)

/// Raised for malformed machine or tape text; `line` is 1-based, 0 if not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Transition {
  StateId target;
  Symbol write;
  Shift shift;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Finite-support binary tape; cells outside the support read 0.
class Tape {
 public:
  Tape() = default;
  explicit Tape(std::set<std::int64_t> ones) : ones_(std::move(ones)) {}

  Symbol read(std::int64_t cell) const { return ones_.count(cell) ? 1 : 0; }
  void write(std::int64_t cell, Symbol s);
  const std::set<std::int64_t>& ones() const { return ones_; }
  bool empty() const { return ones_.empty(); }

  /// "{i:1, ...}" listing the nonzero cells.
  std::string str() const;
  /// Accepts "{<i>:<0|1>, ...}" or a symbol string with '@' before cell 0 ("01@1").
  static Tape parse(std::string_view text);

  friend bool operator==(const Tape&, const Tape&) = default;
  friend auto operator<=>(const Tape&, const Tape&) = default;

 private:
  std::set<std::int64_t> ones_;
};

struct Configuration {
  Tape tape;
  StateId state{0};
  std::int64_t head{0};
  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

/// Reversible-candidate binary Turing machine (Q, q0, Q_halt, delta).
class Machine {
 public:
  /// Validates all invariants; throws ParseError(0, ...) on violation.
  Machine(std::vector<std::string> state_names, StateId initial, std::set<StateId> halting,
          std::map<std::pair<StateId, Symbol>, Transition> delta);

  std::size_t num_states() const { return names_.size(); }
  const std::string& name(StateId q) const { return names_.at(static_cast<std::size_t>(q)); }
  std::optional<StateId> find(std::string_view name) const;
  StateId initial() const { return initial_; }
  const std::set<StateId>& halting() const { return halting_; }
  bool is_halting(StateId q) const { return halting_.count(q) != 0; }
  const Transition& delta(StateId q, Symbol a) const;
  const std::map<std::pair<StateId, Symbol>, Transition>& transitions() const { return delta_; }

  /// Canonical text form accepted by parse_machine.
  std::string str() const;
  /// FNV-1a of str(), hex.
  std::string hash() const;

 private:
  std::vector<std::string> names_;
  StateId initial_;
  std::set<StateId> halting_;
  std::map<std::pair<StateId, Symbol>, Transition> delta_;
};

Machine parse_machine(std::string_view text);

struct IncomingTransition {
  StateId source;
  Symbol read;
  Transition transition;
  friend bool operator==(const IncomingTransition&, const IncomingTransition&) = default;
};

struct ReversibilityReport {
  bool reversible{true};
  /// Two transitions with a common successor configuration, when not reversible.
  std::optional<std::pair<IncomingTransition, IncomingTransition>> witness;
};

/// Decides injectivity of the global transition map. Two transitions into the
/// same state collide iff their shifts differ, or the shifts agree and the
/// written symbols agree.
ReversibilityReport check_reversible(const Machine& m);

/// One application of the global transition map; throws std::logic_error on a halting state.
Configuration step(const Machine& m, const Configuration& c);

struct RunResult {
  bool halted{false};
  Configuration last;
  std::uint64_t steps{0};
};

/// Iterates step from (t0, q0, 0) until a halting state or the step budget.
RunResult run_machine(const Machine& m, const Tape& t0, std::uint64_t max_steps);

struct GraphEdge {
  StateId source;
  Symbol read;
  Symbol write;
  Shift shift;
  StateId target;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct MachineGraph {
  std::size_t num_vertices{0};
  std::vector<GraphEdge> edges;
  std::size_t out_degree(StateId q) const;
  std::size_t in_degree(StateId q) const;
  std::vector<GraphEdge> incoming(StateId q) const;
  /// Connected components of the underlying undirected graph.
  std::size_t components() const;
  /// E - V + components.
  std::size_t betti_number() const { return edges.size() + components() - num_vertices; }
};

MachineGraph build_graph(const Machine& m);

}  // namespace tmb
