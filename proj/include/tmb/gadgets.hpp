#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmb/encoding.hpp"
#include "tmb/geometry.hpp"

namespace tmb::geometry {

enum class GadgetKind { Shift, Invert, Split, RegimeSplit, Merge, Turn, Checkpoint, Launch, Halt };

std::string to_string(GadgetKind k);

/// Thrown when a gadget cannot be built as requested.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Result of pushing a beam value through a gadget.
struct Transit {
  int port{0};
  Rational value;
  std::vector<std::string> walls;  // reflections in order
};

struct TransferPiece {
  int in_port{0};
  Rational lo;
  Rational hi;
  Rational a;
  Rational b;
  int out_port{0};
  std::string label;
};

/// Piecewise affine map on the transverse coordinate.
class TransferMap {
 public:
  TransferMap() = default;
  explicit TransferMap(std::vector<TransferPiece> pieces) : pieces_(std::move(pieces)) {}
  const std::vector<TransferPiece>& pieces() const { return pieces_; }
  std::optional<std::pair<int, Rational>> apply(int port, const Rational& x) const;
  /// Domains pairwise disjoint per input port.
  bool disjoint_domains() const;
  /// Images pairwise disjoint per output port (and nonzero slopes).
  bool injective() const;

 private:
  std::vector<TransferPiece> pieces_;
};

/// A gadget in its local frame. Immutable after construction.
class Gadget {
 public:
  virtual ~Gadget() = default;
  virtual GadgetKind kind() const = 0;
  /// Stable one-line parameter description (used by serialization).
  virtual std::string params() const = 0;

  const std::vector<Port>& inputs() const { return inputs_; }
  const std::vector<Port>& outputs() const { return outputs_; }
  const BBox& bbox() const { return bbox_; }

  virtual std::optional<Transit> forward(int in_port, const Rational& u) const = 0;
  /// Time reversal: from an output value back to the input.
  virtual std::optional<Transit> backward(int out_port, const Rational& v) const = 0;
  /// Walls; families indexed by head position only include |k| <= level_cap.
  virtual void collect_walls(int level_cap, std::vector<Wall>& out) const = 0;
  std::vector<Wall> walls(int level_cap = 1 << 20) const;
  virtual TransferMap transfer(int level_cap) const = 0;

 protected:
  std::vector<Port> inputs_;
  std::vector<Port> outputs_;
  BBox bbox_;
};

using GadgetPtr = std::shared_ptr<const Gadget>;

// ---------------------------------------------------------------- separators

/// One branch domain of a separator. Read-side 0 leaves at x - 2, side 1 at x + 2,
/// plus the rewrite displacement.
struct SepBlock {
  std::int64_t k{0};
  std::string tag;
  Rational lo;
  Rational hi;
  int side{0};
  Rational disp;

  Rational delta() const { return Rational(side == 0 ? -2 : 2) + disp; }
};

/// Primary and return wall of one block together with the reflected direction slope.
struct BlockWalls {
  Wall primary;
  Wall ret;
  Rational slope;     // slope of both walls
  Rational ray_rise;  // dy/dx of the ray between them
};

/// Zig-zag separator: vertical beam in at the bottom, two vertical lanes out at the top.
/// Primary walls of side 0 climb with x, side 1 sit in a higher band and fall with x,
/// so a reflected ray passes over (under) every other wall of its band.
class Separator : public Gadget {
 public:
  std::optional<Transit> forward(int in_port, const Rational& u) const override;
  std::optional<Transit> backward(int out_port, const Rational& v) const override;
  void collect_walls(int level_cap, std::vector<Wall>& out) const override;
  TransferMap transfer(int level_cap) const override;

  virtual std::optional<SepBlock> locate(const Rational& x) const = 0;
  /// Block whose image on lane `side` contains v.
  virtual std::optional<SepBlock> locate_image(int side, const Rational& v) const = 0;
  virtual void for_each_block(int level_cap, const std::function<void(const SepBlock&)>& fn) const = 0;

  BlockWalls walls_of(const SepBlock& b) const;
  const Rational& height() const { return height_; }
  const Rational& domain_lo() const { return x0_; }
  const Rational& domain_hi() const { return x1_; }

 protected:
  /// Sets bands, ports and bounding box from the domain hull and the largest |disp|.
  void init_frame(const Rational& x0, const Rational& x1, const Rational& max_disp);

  Rational x0_, x1_;
  Rational band0_, band1_;
  Rational height_;
};

/// Split on the head-cell symbol for every Cantor block with |k| <= K.
class CantorSplit final : public Separator {
 public:
  CantorSplit(int K, std::array<Symbol, 2> write);
  GadgetKind kind() const override { return GadgetKind::Split; }
  std::string params() const override;
  std::optional<SepBlock> locate(const Rational& x) const override;
  std::optional<SepBlock> locate_image(int side, const Rational& v) const override;
  void for_each_block(int level_cap, const std::function<void(const SepBlock&)>& fn) const override;

  int K() const { return K_; }
  const std::array<Symbol, 2>& write() const { return write_; }

 private:
  std::optional<SepBlock> block_at(const Rational& x) const;
  SepBlock make_block(std::int64_t k, const std::string& digits, Symbol s) const;

  int K_;
  std::array<Symbol, 2> write_;
};

/// Separator over an explicit list of blocks (used for head regimes).
class IntervalSplit final : public Separator {
 public:
  explicit IntervalSplit(std::vector<SepBlock> blocks, std::string label);
  GadgetKind kind() const override { return GadgetKind::RegimeSplit; }
  std::string params() const override;
  std::optional<SepBlock> locate(const Rational& x) const override;
  std::optional<SepBlock> locate_image(int side, const Rational& v) const override;
  void for_each_block(int level_cap, const std::function<void(const SepBlock&)>& fn) const override;

 private:
  std::vector<SepBlock> blocks_;
  std::string label_;
};

/// Time reversal of a separator: its walls mirrored in y, inputs and outputs swapped.
class MergeGadget final : public Gadget {
 public:
  explicit MergeGadget(std::shared_ptr<const Separator> split);
  GadgetKind kind() const override { return GadgetKind::Merge; }
  std::string params() const override;
  std::optional<Transit> forward(int in_port, const Rational& u) const override;
  std::optional<Transit> backward(int out_port, const Rational& v) const override;
  void collect_walls(int level_cap, std::vector<Wall>& out) const override;
  TransferMap transfer(int level_cap) const override;
  const Separator& split() const { return *split_; }

 private:
  std::shared_ptr<const Separator> split_;
};

// ---------------------------------------------------------------- parabolas

/// Confocal pair: P1 (opens down, p1 = 1) above the focus, P2 (opens up, p2 = a) below.
/// Beam in going up at x1 > 0, out going up at -a*x1; the output axis is mirrored so the
/// transfer reads u -> a*u + b.
class ShiftGadget final : public Gadget {
 public:
  ShiftGadget(GadgetKind kind, Rational a, Rational b, Rational dlo, Rational dhi, std::string label);
  GadgetKind kind() const override { return kind_; }
  std::string params() const override;
  std::optional<Transit> forward(int in_port, const Rational& u) const override;
  std::optional<Transit> backward(int out_port, const Rational& v) const override;
  void collect_walls(int level_cap, std::vector<Wall>& out) const override;
  TransferMap transfer(int level_cap) const override;

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }

 private:
  GadgetKind kind_;
  Rational a_, b_, dlo_, dhi_;
  std::string label_;
  Wall p1_, p2_;
};

enum class Regime { Low, High };

/// Input hull of the head regime: for eps = +1 Low is k < 0 and High is k >= 0;
/// for eps = -1 Low is k <= 0 and High is k >= 1.
std::pair<Rational, Rational> regime_hull(Regime r, int eps, int K);
/// Output hull of the regime after the shift.
std::pair<Rational, Rational> regime_image(Regime r, int eps, int K);
/// The affine head shift on a regime: (a, b).
std::pair<Rational, Rational> regime_map(Regime r, int eps);

std::shared_ptr<const ShiftGadget> build_shift_gadget(Regime r, int eps, int K);
/// Orientation-restoring confocal pair with identity transfer on [lo, hi].
std::shared_ptr<const ShiftGadget> build_invert_gadget(const Rational& lo, const Rational& hi);

// ---------------------------------------------------------------- splits

std::shared_ptr<const CantorSplit> build_split_gadget(int K, std::array<Symbol, 2> write = {0, 1},
                                                      int k_max = encoding::kDefaultKMax);
/// Regime separator for the shift stage (no rewrite).
std::shared_ptr<const IntervalSplit> build_regime_split(int eps, int K);
/// Regime merger joining the two shifted regimes.
std::shared_ptr<const MergeGadget> build_regime_merge(int eps, int K);
/// Throws ConstructionError if the split is not injective on blocks with |k| <= check_cap.
std::shared_ptr<const MergeGadget> build_merge_gadget(std::shared_ptr<const Separator> split, int check_cap = 6);

// ---------------------------------------------------------------- flat pieces

/// Single flat 45 degree mirror in global coordinates.
class TurnGadget final : public Gadget {
 public:
  /// Beam `in` turns to `out_dir` at distance `dist` along its travel. The mirror spans
  /// transverse values [ext_lo, ext_hi]; the beam hull must lie inside.
  TurnGadget(const Port& in, Dir out_dir, const Rational& dist, const Rational& ext_lo, const Rational& ext_hi,
             std::string label);
  GadgetKind kind() const override { return GadgetKind::Turn; }
  std::string params() const override;
  std::optional<Transit> forward(int in_port, const Rational& u) const override;
  std::optional<Transit> backward(int out_port, const Rational& v) const override;
  void collect_walls(int level_cap, std::vector<Wall>& out) const override;
  TransferMap transfer(int level_cap) const override;
  const Segment& mirror() const { return std::get<Segment>(wall_.shape); }

 private:
  Wall wall_;
  std::string label_;
};

/// Local-frame turn of an upward beam at the origin: +1 turns left, -1 turns right.
std::shared_ptr<const TurnGadget> build_turn_gadget(int direction, const Rational& beam_lo = -4,
                                                    const Rational& beam_hi = 4, const Rational& ext_lo = -4,
                                                    const Rational& ext_hi = 4);

/// Marked crossing segment; identity transfer, no walls.
class CheckpointGadget final : public Gadget {
 public:
  CheckpointGadget(const Port& at, std::string state);
  GadgetKind kind() const override { return GadgetKind::Checkpoint; }
  std::string params() const override;
  std::optional<Transit> forward(int in_port, const Rational& u) const override;
  std::optional<Transit> backward(int out_port, const Rational& v) const override;
  void collect_walls(int, std::vector<Wall>&) const override {}
  TransferMap transfer(int) const override;
  const std::string& state() const { return state_; }
  Segment marker() const;

 private:
  std::string state_;
};

/// Orthogonal boundary wall: Launch emits into its output, Halt absorbs from its input.
class EndGadget final : public Gadget {
 public:
  EndGadget(GadgetKind kind, const Port& at, std::string state);
  GadgetKind kind() const override { return kind_; }
  std::string params() const override;
  std::optional<Transit> forward(int, const Rational&) const override { return std::nullopt; }
  std::optional<Transit> backward(int, const Rational&) const override { return std::nullopt; }
  void collect_walls(int, std::vector<Wall>& out) const override { out.push_back(wall_); }
  TransferMap transfer(int) const override { return {}; }
  const std::string& state() const { return state_; }
  const Wall& wall() const { return wall_; }

 private:
  GadgetKind kind_;
  std::string state_;
  Wall wall_;
};

// ---------------------------------------------------------------- audit

struct SeparationReport {
  std::int64_t k{0};
  std::int64_t k2{0};
  std::uint64_t pairs{0};
  Rational min_slack;
  bool pass{false};
};

/// A wall moved horizontally, for mutation tests.
struct WallPerturbation {
  std::int64_t k{0};
  std::size_t index{0};  // block index within level k, side 0 first
  Rational dx;
};

/// Exact audit of one separator over blocks with |k| <= level_cap: the block-gap
/// inequality between same-side blocks and exact clearance of every beam region.
std::vector<SeparationReport> audit_separator(const Separator& sep, int level_cap,
                                              const std::optional<WallPerturbation>& mutation = std::nullopt);

/// Audits the read-only split and all rewrite variants for |k| <= K; one report per (k, k').
std::vector<SeparationReport> check_separation(int K, int k_max = encoding::kDefaultKMax,
                                               const std::optional<WallPerturbation>& mutation = std::nullopt);

}  // namespace tmb::geometry
