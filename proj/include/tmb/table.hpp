#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmb/gadgets.hpp"
#include "tmb/turing.hpp"

namespace tmb::table {

using geometry::GadgetPtr;
using geometry::Placement;
using geometry::Port;

/// Thrown when the compiled layout fails its own verification.
class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for non-reversible input; carries the witness pair.
class NotReversible : public std::invalid_argument {
 public:
  NotReversible(const std::string& msg, ReversibilityReport report)
      : std::invalid_argument(msg), report_(std::move(report)) {}
  const ReversibilityReport& report() const { return report_; }

 private:
  ReversibilityReport report_;
};

struct PlacedGadget {
  std::string name;
  GadgetPtr gadget;
  Placement placement;

  Port input(int i) const { return placement.apply(gadget->inputs().at(static_cast<std::size_t>(i))); }
  Port output(int i) const { return placement.apply(gadget->outputs().at(static_cast<std::size_t>(i))); }
  geometry::BBox bbox() const;
  std::vector<geometry::Wall> walls(int level_cap) const;  // global, keys prefixed with name
};

/// Beam from (from, out_port) to (to, in_port); the value picks up `offset`.
struct Link {
  std::size_t from{0};
  int out_port{0};
  std::size_t to{0};
  int in_port{0};
  Rational offset;
};

/// Affine chart of a marked segment onto [0,1]: x -> port.origin + x * port.axis.
struct Chart {
  std::string name;
  Port port;
  geometry::Point to_point(const Rational& x) const { return port.at(x); }
  /// Inverse; throws std::domain_error if p is off the segment.
  Rational from_point(const geometry::Point& p) const;
};

struct Corridor {
  GraphEdge edge;
  std::size_t exit_gadget{0};  // source split
  int exit_port{0};
  std::size_t entry_gadget{0};  // first gadget of the target tower
  int entry_port{0};
  std::vector<std::size_t> route;  // turn gadgets in order
};

/// What a beam did between two checkpoints.
struct Leg {
  enum class End { Checkpoint, Halt, Launch, Stuck };
  End end{End::Stuck};
  std::size_t gadget{0};  // gadget where the leg ended
  Rational value;
  std::vector<std::string> walls;
  std::string diagnostic;
};

enum class ChartKind { Initial, Halt, State };

struct LayoutReport {
  bool ok{true};
  std::size_t boxes_checked{0};
  std::size_t beams_checked{0};
  std::size_t wall_pairs_checked{0};
  std::string failure;
};

class BilliardTable {
 public:
  const Machine& machine() const { return *machine_; }
  int K() const { return K_; }
  const Rational& pitch() const { return pitch_; }
  const std::vector<PlacedGadget>& gadgets() const { return gadgets_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Corridor>& corridors() const { return corridors_; }

  std::optional<std::size_t> checkpoint(StateId q) const;
  std::optional<std::size_t> halt_wall(StateId q) const;
  std::optional<std::size_t> launch() const { return launch_; }
  std::size_t merge_count() const;

  /// Link leaving (g, out_port), if any.
  const Link* link_from(std::size_t g, int out_port) const;
  /// Link arriving at (g, in_port), if any.
  const Link* link_to(std::size_t g, int in_port) const;

  /// Follows the beam forward from gadget g (entered at in_port) until the next
  /// checkpoint or halt wall; the starting gadget itself is traversed.
  Leg advance(std::size_t g, int in_port, const Rational& value) const;
  /// Time reversal: from gadget g's input port backwards until a checkpoint or the launch wall.
  Leg retreat(std::size_t g, int in_port, const Rational& value) const;

  /// Composed corridor map: checkpoint value of the source state to checkpoint value of the target.
  std::optional<Rational> corridor_transfer(std::size_t corridor, const Rational& x) const;

  /// Exact checks: gadget boxes disjoint, every link beam clear of foreign gadgets, and
  /// walls of distinct gadgets pairwise disjoint (separator families up to level_cap).
  LayoutReport verify_layout(int level_cap = 2) const;

  /// Independent corridor cycles E - V + C counted from the table.
  std::int64_t corridor_cycles() const;

  /// Global walls of every gadget (separator families up to level_cap).
  std::vector<geometry::Wall> scene(int level_cap) const;
  geometry::BBox bounds() const;

  friend class Builder;

 private:
  std::optional<Machine> machine_;
  int K_{0};
  Rational pitch_{4};
  std::vector<PlacedGadget> gadgets_;
  std::vector<Link> links_;
  std::map<std::pair<std::size_t, int>, std::size_t> out_index_;
  std::map<std::pair<std::size_t, int>, std::size_t> in_index_;
  std::map<StateId, std::size_t> checkpoints_;
  std::map<StateId, std::size_t> halts_;
  std::optional<std::size_t> launch_;
  std::vector<Corridor> corridors_;
};

/// Compiles a reversible machine for head positions |k| <= K.
BilliardTable compile(const Machine& m, int K, int k_max = encoding::kDefaultKMax);

/// Affine chart of the launch segment, the (first) halt wall, or a state's checkpoint.
Chart iota_chart(const BilliardTable& t, ChartKind which, const std::string& state = {});

/// Compiled table with one corridor's written symbol flipped (mutation testing only).
BilliardTable compile_with_flipped_write(const Machine& m, int K, std::size_t edge_index);

}  // namespace tmb::table
