#include "tmb/gadgets.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tmb::geometry {

namespace {

const Rational kSlopeScale{4};  // band height per unit of x
const Rational kHalf{1, 2};
const Rational kQuarter{1, 4};
const Rational kMaxMargin{1, 36};

// how far a flat separator wall runs past its block
Rational wall_margin(const Rational& w) { return std::min(w * kQuarter, kMaxMargin); }

bool inside(const Rational& x, const Rational& lo, const Rational& hi) { return lo <= x && x <= hi; }

std::string rat(const Rational& r) { return tmb::to_string(r); }

}  // namespace

std::string to_string(GadgetKind k) {
  switch (k) {
    case GadgetKind::Shift: return "shift";
    case GadgetKind::Invert: return "invert";
    case GadgetKind::Split: return "split";
    case GadgetKind::RegimeSplit: return "regime-split";
    case GadgetKind::Merge: return "merge";
    case GadgetKind::Turn: return "turn";
    case GadgetKind::Checkpoint: return "checkpoint";
    case GadgetKind::Launch: return "launch";
    case GadgetKind::Halt: return "halt";
  }
  return "?";
}

// ---------------------------------------------------------------- TransferMap

std::optional<std::pair<int, Rational>> TransferMap::apply(int port, const Rational& x) const {
  for (const auto& p : pieces_) {
    if (p.in_port == port && inside(x, p.lo, p.hi)) return std::make_pair(p.out_port, p.a * x + p.b);
  }
  return std::nullopt;
}

namespace {

bool pairwise_disjoint(std::vector<std::pair<Rational, Rational>> iv) {
  std::sort(iv.begin(), iv.end());
  for (std::size_t i = 1; i < iv.size(); ++i) {
    if (iv[i].first <= iv[i - 1].second) return false;
  }
  return true;
}

}  // namespace

bool TransferMap::disjoint_domains() const {
  std::map<int, std::vector<std::pair<Rational, Rational>>> by_port;
  for (const auto& p : pieces_) by_port[p.in_port].emplace_back(p.lo, p.hi);
  return std::all_of(by_port.begin(), by_port.end(), [](const auto& kv) { return pairwise_disjoint(kv.second); });
}

bool TransferMap::injective() const {
  std::map<int, std::vector<std::pair<Rational, Rational>>> by_port;
  for (const auto& p : pieces_) {
    if (p.a == 0) return false;
    Rational u = p.a * p.lo + p.b, v = p.a * p.hi + p.b;
    if (v < u) std::swap(u, v);
    by_port[p.out_port].emplace_back(u, v);
  }
  return std::all_of(by_port.begin(), by_port.end(), [](const auto& kv) { return pairwise_disjoint(kv.second); });
}

std::vector<Wall> Gadget::walls(int level_cap) const {
  std::vector<Wall> out;
  collect_walls(level_cap, out);
  return out;
}

// ---------------------------------------------------------------- Separator

void Separator::init_frame(const Rational& x0, const Rational& x1, const Rational& max_disp) {
  x0_ = x0;
  x1_ = x1;
  const Rational span = x1 - x0;
  band0_ = 2;
  band1_ = band0_ + (kSlopeScale + 2) * span + 3;
  height_ = band1_ + (kSlopeScale + 2) * span + 3;
  inputs_ = {Port{{0, 0}, kUp, kRight, x0, x1}};
  outputs_ = {Port{{0, height_}, kUp, kRight, x0 - 2 - max_disp, x1 - 2 + max_disp},
              Port{{0, height_}, kUp, kRight, x0 + 2 - max_disp, x1 + 2 + max_disp}};
  bbox_ = {x0 - 2 - max_disp - wall_margin(span), Rational(0), x1 + 2 + max_disp + wall_margin(span), height_};
}

BlockWalls Separator::walls_of(const SepBlock& b) const {
  const Rational w = b.hi - b.lo;
  const Rational m = (b.lo + b.hi) * kHalf;
  const Rational rho = abs(b.disp) * kHalf;
  const Rational slope = Rational(b.side == 0 ? -1 : 1) / (1 + rho);
  const Rational c = b.side == 0 ? band0_ + kSlopeScale * (b.lo - x0_) + w : band1_ + kSlopeScale * (x1_ - b.hi) + w;
  const Rational xa = b.lo - wall_margin(w), xb = b.hi + wall_margin(w);
  const Point pa{xa, c + slope * (xa - m)}, pb{xb, c + slope * (xb - m)};
  const Rational rise = (slope * slope - 1) / (2 * slope);
  const Rational d = b.delta();
  const Point shift{d, d * rise};
  BlockWalls out;
  out.primary = Wall{"W[" + b.tag + "]", Segment{pa, pb}, WallRole::Mirror};
  out.ret = Wall{"R[" + b.tag + "]", Segment{pa + shift, pb + shift}, WallRole::Mirror};
  out.slope = slope;
  out.ray_rise = rise;
  return out;
}

std::optional<Transit> Separator::forward(int in_port, const Rational& u) const {
  if (in_port != 0) return std::nullopt;
  auto b = locate(u);
  if (!b) return std::nullopt;
  return Transit{b->side, u + b->delta(), {"W[" + b->tag + "]", "R[" + b->tag + "]"}};
}

std::optional<Transit> Separator::backward(int out_port, const Rational& v) const {
  auto b = locate_image(out_port, v);
  if (!b) return std::nullopt;
  return Transit{0, v - b->delta(), {"R[" + b->tag + "]", "W[" + b->tag + "]"}};
}

void Separator::collect_walls(int level_cap, std::vector<Wall>& out) const {
  for_each_block(level_cap, [&](const SepBlock& b) {
    auto bw = walls_of(b);
    out.push_back(std::move(bw.primary));
    out.push_back(std::move(bw.ret));
  });
}

TransferMap Separator::transfer(int level_cap) const {
  std::vector<TransferPiece> pieces;
  for_each_block(level_cap, [&](const SepBlock& b) {
    pieces.push_back({0, b.lo, b.hi, Rational(1), b.delta(), b.side, b.tag});
  });
  return TransferMap(std::move(pieces));
}

// ---------------------------------------------------------------- CantorSplit

namespace {

/// Number of digits before the head digit.
unsigned prefix_digits(std::int64_t k) { return k >= 0 ? static_cast<unsigned>(2 * k) : static_cast<unsigned>(-2 * k - 1); }

}  // namespace

CantorSplit::CantorSplit(int K, std::array<Symbol, 2> write) : K_(K), write_(write) {
  for (Symbol s : write_) {
    if (s != 0 && s != 1) throw ConstructionError("written symbol must be 0 or 1");
  }
  const bool rewrites = write_[0] != 0 || write_[1] != 1;
  init_frame(0, 1, rewrites ? Rational(2, 9) : Rational(0));
}

std::string CantorSplit::params() const {
  return "K=" + std::to_string(K_) + " write=" + std::to_string(write_[0]) + std::to_string(write_[1]);
}

SepBlock CantorSplit::make_block(std::int64_t k, const std::string& bits, Symbol s) const {
  const auto hi_iv = encoding::head_interval(k);
  const Rational lo_k = hi_iv.lo.to_rational();
  const Rational len = hi_iv.hi.to_rational() - lo_k;
  const unsigned d = prefix_digits(k) + 1;
  BigInt m = 0;
  for (char c : bits) m = m * 3 + (c == '1' ? 2 : 0);
  m = m * 3 + 2 * s;
  const Rational scale = len * inv_pow3(d);
  SepBlock b;
  b.k = k;
  b.tag = "k=" + std::to_string(k) + ",s=" + std::to_string(s) + ",p=" + bits;
  b.lo = lo_k + scale * Rational(m);
  b.hi = b.lo + scale;
  b.side = s;
  b.disp = Rational(write_[s] - s) * 2 * scale;
  return b;
}

std::optional<SepBlock> CantorSplit::block_at(const Rational& x) const {
  for (std::int64_t k = -K_; k <= K_; ++k) {
    const auto iv = encoding::head_interval(k);
    const Rational lo = iv.lo.to_rational(), hi = iv.hi.to_rational();
    if (x < lo || x > hi) continue;
    const unsigned d = prefix_digits(k) + 1;
    const Rational z = (x - lo) / (hi - lo) * Rational(pow3(d));
    BigInt m = numerator(z) / denominator(z);
    const bool integral = denominator(z) == 1;
    auto digits_of = [&](BigInt v) -> std::optional<std::string> {
      if (v < 0) return std::nullopt;
      std::string ds(d, '0');
      for (unsigned i = 0; i < d; ++i) {
        const int r = static_cast<int>(static_cast<long>(v % 3));
        if (r == 1) return std::nullopt;
        ds[d - 1 - i] = r == 2 ? '1' : '0';
        v /= 3;
      }
      if (v != 0) return std::nullopt;
      return ds;
    };
    auto ds = digits_of(m);
    if (!ds && integral) ds = digits_of(m - 1);
    if (!ds) return std::nullopt;
    return make_block(k, ds->substr(0, d - 1), ds->back() == '1' ? 1 : 0);
  }
  return std::nullopt;
}

std::optional<SepBlock> CantorSplit::locate(const Rational& x) const { return block_at(x); }

std::optional<SepBlock> CantorSplit::locate_image(int side, const Rational& v) const {
  if (side != 0 && side != 1) return std::nullopt;
  const Rational y = v - Rational(side == 0 ? -2 : 2);
  auto img = block_at(y);
  if (!img || img->side != write_[side]) return std::nullopt;
  const std::string bits = img->tag.substr(img->tag.find("p=") + 2);
  return make_block(img->k, bits, side);
}

void CantorSplit::for_each_block(int level_cap, const std::function<void(const SepBlock&)>& fn) const {
  const int cap = std::min(K_, level_cap);
  for (std::int64_t k = -cap; k <= cap; ++k) {
    const unsigned n = prefix_digits(k);
    if (n > 40) throw encoding::ResourceLimit("too many blocks to enumerate");
    const std::uint64_t count = std::uint64_t{1} << n;
    for (Symbol s = 0; s <= 1; ++s) {
      std::string bits(n, '0');
      for (std::uint64_t i = 0; i < count; ++i) {
        for (unsigned j = 0; j < n; ++j) bits[j] = (i >> (n - 1 - j)) & 1U ? '1' : '0';
        fn(make_block(k, bits, s));
      }
    }
  }
}

// ---------------------------------------------------------------- IntervalSplit

IntervalSplit::IntervalSplit(std::vector<SepBlock> blocks, std::string label)
    : blocks_(std::move(blocks)), label_(std::move(label)) {
  if (blocks_.empty()) throw ConstructionError("separator needs at least one block");
  Rational lo = blocks_.front().lo, hi = blocks_.front().hi, d = 0;
  for (const auto& b : blocks_) {
    if (!(b.lo < b.hi)) throw ConstructionError("empty separator block");
    lo = std::min(lo, b.lo);
    hi = std::max(hi, b.hi);
    d = std::max(d, Rational(abs(b.disp)));
  }
  init_frame(lo, hi, d);
}

std::string IntervalSplit::params() const {
  std::string out = label_;
  for (const auto& b : blocks_) out += " [" + rat(b.lo) + "," + rat(b.hi) + "]:" + std::to_string(b.side);
  return out;
}

std::optional<SepBlock> IntervalSplit::locate(const Rational& x) const {
  for (const auto& b : blocks_) {
    if (inside(x, b.lo, b.hi)) return b;
  }
  return std::nullopt;
}

std::optional<SepBlock> IntervalSplit::locate_image(int side, const Rational& v) const {
  for (const auto& b : blocks_) {
    if (b.side == side && inside(v - b.delta(), b.lo, b.hi)) return b;
  }
  return std::nullopt;
}

void IntervalSplit::for_each_block(int, const std::function<void(const SepBlock&)>& fn) const {
  for (const auto& b : blocks_) fn(b);
}

// ---------------------------------------------------------------- MergeGadget

MergeGadget::MergeGadget(std::shared_ptr<const Separator> split) : split_(std::move(split)) {
  const Rational h = split_->height();
  for (const auto& p : split_->outputs()) inputs_.push_back(Port{{p.origin.x, h - p.origin.y}, kUp, p.axis, p.lo, p.hi});
  for (const auto& p : split_->inputs()) outputs_.push_back(Port{{p.origin.x, h - p.origin.y}, kUp, p.axis, p.lo, p.hi});
  const auto& b = split_->bbox();
  bbox_ = {b.xlo, h - b.yhi, b.xhi, h - b.ylo};
}

std::string MergeGadget::params() const { return "of " + to_string(split_->kind()) + " " + split_->params(); }

std::optional<Transit> MergeGadget::forward(int in_port, const Rational& u) const {
  return split_->backward(in_port, u);
}

std::optional<Transit> MergeGadget::backward(int out_port, const Rational& v) const {
  return split_->forward(out_port, v);
}

void MergeGadget::collect_walls(int level_cap, std::vector<Wall>& out) const {
  std::vector<Wall> tmp;
  split_->collect_walls(level_cap, tmp);
  for (const auto& w : tmp) out.push_back(flip_vertical(w, split_->height()));
}

TransferMap MergeGadget::transfer(int level_cap) const {
  std::vector<TransferPiece> pieces;
  const TransferMap forward = split_->transfer(level_cap);
  for (const auto& p : forward.pieces()) {
    pieces.push_back({p.out_port, p.lo + p.b, p.hi + p.b, Rational(1), -p.b, 0, p.label});
  }
  return TransferMap(std::move(pieces));
}

}  // namespace tmb::geometry

namespace tmb::geometry {

namespace {

const Rational kArcMargin{1, 8};

Rational third_power(int e) { return inv_pow3(static_cast<unsigned>(e)); }

}  // namespace

// ---------------------------------------------------------------- ShiftGadget

ShiftGadget::ShiftGadget(GadgetKind kind, Rational a, Rational b, Rational dlo, Rational dhi, std::string label)
    : kind_(kind), a_(std::move(a)), b_(std::move(b)), dlo_(std::move(dlo)), dhi_(std::move(dhi)),
      label_(std::move(label)) {
  if (!(a_ > 0)) throw ConstructionError("shift slope must be positive");
  if (!(dlo_ < dhi_)) throw ConstructionError("empty shift domain");
  const Rational width = dhi_ - dlo_;
  const Rational x1_lo = kHalf - kArcMargin, x1_hi = kHalf + width + kArcMargin;
  if (!(x1_hi < 2)) throw ConstructionError("shift domain too wide for the parabola pair");
  const Rational c = kHalf - dlo_;
  p1_ = Wall{"P1", ParabolaArc{{0, 1}, Rational(1), -1, x1_lo, x1_hi}, WallRole::Mirror};
  p2_ = Wall{"P2", ParabolaArc{{0, -a_}, a_, 1, -a_ * x1_hi, -a_ * x1_lo}, WallRole::Mirror};
  const Rational y_in = -a_ - 1, y_out = 2;
  inputs_ = {Port{{c, y_in}, kUp, kRight, dlo_, dhi_}};
  outputs_ = {Port{{b_ - a_ * c, y_out}, kUp, kLeft, a_ * dlo_ + b_, a_ * dhi_ + b_}};
  bbox_ = {-a_ * x1_hi, y_in, x1_hi, y_out};
}

std::string ShiftGadget::params() const {
  return label_ + " a=" + rat(a_) + " b=" + rat(b_) + " domain=[" + rat(dlo_) + "," + rat(dhi_) + "]";
}

std::optional<Transit> ShiftGadget::forward(int in_port, const Rational& u) const {
  if (in_port != 0 || !inside(u, dlo_, dhi_)) return std::nullopt;
  return Transit{0, a_ * u + b_, {"P1", "P2"}};
}

std::optional<Transit> ShiftGadget::backward(int out_port, const Rational& v) const {
  if (out_port != 0) return std::nullopt;
  Rational u = (v - b_) / a_;
  if (!inside(u, dlo_, dhi_)) return std::nullopt;
  return Transit{0, std::move(u), {"P2", "P1"}};
}

void ShiftGadget::collect_walls(int, std::vector<Wall>& out) const {
  out.push_back(p1_);
  out.push_back(p2_);
}

TransferMap ShiftGadget::transfer(int) const { return TransferMap({{0, dlo_, dhi_, a_, b_, 0, label_}}); }

std::pair<Rational, Rational> regime_hull(Regime r, int eps, int K) {
  if (eps != 1 && eps != -1) throw std::invalid_argument("shift must be +1 or -1");
  const Rational tiny = third_power(K + 1);
  if (eps == 1) return r == Regime::Low ? std::pair{tiny, Rational(2, 9)} : std::pair{Rational(1, 3), 1 - tiny};
  return r == Regime::Low ? std::pair{tiny, Rational(2, 3)} : std::pair{Rational(7, 9), 1 - tiny};
}

std::pair<Rational, Rational> regime_map(Regime r, int eps) {
  if (eps == 1) return r == Regime::Low ? std::pair{Rational(3), Rational(0)} : std::pair{Rational(1, 3), Rational(2, 3)};
  if (eps == -1) return r == Regime::Low ? std::pair{Rational(1, 3), Rational(0)} : std::pair{Rational(3), Rational(-2)};
  throw std::invalid_argument("shift must be +1 or -1");
}

std::pair<Rational, Rational> regime_image(Regime r, int eps, int K) {
  const auto [lo, hi] = regime_hull(r, eps, K);
  const auto [a, b] = regime_map(r, eps);
  return {a * lo + b, a * hi + b};
}

std::shared_ptr<const ShiftGadget> build_shift_gadget(Regime r, int eps, int K) {
  const auto [lo, hi] = regime_hull(r, eps, K);
  if (!(lo < hi)) throw ConstructionError("regime is empty for K=" + std::to_string(K));
  const auto [a, b] = regime_map(r, eps);
  const std::string label = std::string(r == Regime::Low ? "low" : "high") + (eps > 0 ? "+" : "-");
  return std::make_shared<ShiftGadget>(GadgetKind::Shift, a, b, lo, hi, label);
}

std::shared_ptr<const ShiftGadget> build_invert_gadget(const Rational& lo, const Rational& hi) {
  return std::make_shared<ShiftGadget>(GadgetKind::Invert, Rational(1), Rational(0), lo, hi, "invert");
}

// ---------------------------------------------------------------- split builders

std::shared_ptr<const CantorSplit> build_split_gadget(int K, std::array<Symbol, 2> write, int k_max) {
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  if (K > k_max) throw encoding::ResourceLimit("K=" + std::to_string(K) + " exceeds cap " + std::to_string(k_max));
  return std::make_shared<CantorSplit>(K, write);
}

namespace {

std::vector<SepBlock> regime_blocks(bool image, int eps, int K) {
  std::vector<SepBlock> out;
  for (Regime r : {Regime::Low, Regime::High}) {
    auto [lo, hi] = image ? regime_image(r, eps, K) : regime_hull(r, eps, K);
    if (!(lo < hi)) throw ConstructionError("regime is empty for K=" + std::to_string(K));
    SepBlock b;
    b.k = 0;
    b.tag = r == Regime::Low ? "low" : "high";
    b.lo = lo;
    b.hi = hi;
    b.side = r == Regime::Low ? 0 : 1;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

std::shared_ptr<const IntervalSplit> build_regime_split(int eps, int K) {
  return std::make_shared<IntervalSplit>(regime_blocks(false, eps, K), std::string("regimes") + (eps > 0 ? "+" : "-"));
}

std::shared_ptr<const MergeGadget> build_regime_merge(int eps, int K) {
  auto sep = std::make_shared<IntervalSplit>(regime_blocks(true, eps, K), std::string("images") + (eps > 0 ? "+" : "-"));
  return build_merge_gadget(sep);
}

std::shared_ptr<const MergeGadget> build_merge_gadget(std::shared_ptr<const Separator> split, int check_cap) {
  if (!split) throw std::invalid_argument("null split");
  if (!split->transfer(check_cap).injective()) throw ConstructionError("cannot merge beams whose images overlap");
  return std::make_shared<MergeGadget>(std::move(split));
}

// ---------------------------------------------------------------- TurnGadget

namespace {

Point to_point(Dir d) { return {d.dx, d.dy}; }

Dir to_dir(const Point& p) {
  Dir d{static_cast<int>(numerator(p.x).convert_to<long>()), static_cast<int>(numerator(p.y).convert_to<long>())};
  if (denominator(p.x) != 1 || denominator(p.y) != 1 || std::abs(d.dx) + std::abs(d.dy) != 1)
    throw std::logic_error("direction is not axis aligned");
  return d;
}

Rational dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }

}  // namespace

TurnGadget::TurnGadget(const Port& in, Dir out_dir, const Rational& dist, const Rational& ext_lo,
                       const Rational& ext_hi, std::string label)
    : label_(std::move(label)) {
  if (in.travel.dx * out_dir.dx + in.travel.dy * out_dir.dy != 0)
    throw ConstructionError("turn must rotate the beam by 90 degrees");
  if (in.lo < ext_lo || in.hi > ext_hi)
    throw ConstructionError("beam [" + rat(in.lo) + "," + rat(in.hi) + "] is wider than turn extent [" + rat(ext_lo) +
                            "," + rat(ext_hi) + "]");
  const Point t = to_point(in.travel) + to_point(out_dir);
  const Point n = to_point(out_dir) - to_point(in.travel);
  const Point corner = along(in.at((in.lo + in.hi) * kHalf), in.travel, dist);
  auto hit = [&](const Rational& u) {
    const Point p = in.at(u);
    const Rational s = -dot(n, corner - p);  // n . travel = -1
    return along(p, in.travel, s);
  };
  wall_ = Wall{label_, Segment{hit(ext_lo), hit(ext_hi)}, WallRole::Mirror};
  const Point o_ref = corner + reflect(in.origin - corner, t);
  const Dir axis = to_dir(reflect(to_point(in.axis), t));
  const Rational ahead = (ext_hi - ext_lo) * kHalf + kHalf;
  const Point origin = along(o_ref, out_dir, ahead - dot(o_ref - corner, to_point(out_dir)));
  inputs_ = {in};
  outputs_ = {Port{origin, out_dir, axis, in.lo, in.hi}};
  bbox_ = bbox_of(std::get<Segment>(wall_.shape));
}

std::string TurnGadget::params() const {
  const auto& s = mirror();
  return label_ + " " + to_string(inputs_[0].travel) + "->" + to_string(outputs_[0].travel) + " (" + rat(s.a.x) + "," +
         rat(s.a.y) + ")-(" + rat(s.b.x) + "," + rat(s.b.y) + ")";
}

std::optional<Transit> TurnGadget::forward(int in_port, const Rational& u) const {
  if (in_port != 0) return std::nullopt;
  return Transit{0, u, {label_}};
}

std::optional<Transit> TurnGadget::backward(int out_port, const Rational& v) const {
  if (out_port != 0) return std::nullopt;
  return Transit{0, v, {label_}};
}

void TurnGadget::collect_walls(int, std::vector<Wall>& out) const { out.push_back(wall_); }

TransferMap TurnGadget::transfer(int) const {
  return TransferMap({{0, inputs_[0].lo, inputs_[0].hi, Rational(1), Rational(0), 0, label_}});
}

std::shared_ptr<const TurnGadget> build_turn_gadget(int direction, const Rational& beam_lo, const Rational& beam_hi,
                                                    const Rational& ext_lo, const Rational& ext_hi) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("turn direction must be +1 or -1");
  const Port in{{0, 0}, kUp, kRight, beam_lo, beam_hi};
  return std::make_shared<TurnGadget>(in, direction > 0 ? kLeft : kRight, ext_hi - ext_lo + 1, ext_lo, ext_hi,
                                      direction > 0 ? "turn+" : "turn-");
}

// ---------------------------------------------------------------- checkpoints and ends

CheckpointGadget::CheckpointGadget(const Port& at, std::string state) : state_(std::move(state)) {
  inputs_ = {at};
  outputs_ = {at};
  bbox_ = bbox_of(marker());
}

Segment CheckpointGadget::marker() const { return {inputs_[0].at(inputs_[0].lo), inputs_[0].at(inputs_[0].hi)}; }

std::string CheckpointGadget::params() const { return state_; }

std::optional<Transit> CheckpointGadget::forward(int in_port, const Rational& u) const {
  if (in_port != 0) return std::nullopt;
  return Transit{0, u, {}};
}

std::optional<Transit> CheckpointGadget::backward(int out_port, const Rational& v) const {
  if (out_port != 0) return std::nullopt;
  return Transit{0, v, {}};
}

TransferMap CheckpointGadget::transfer(int) const {
  return TransferMap({{0, inputs_[0].lo, inputs_[0].hi, Rational(1), Rational(0), 0, state_}});
}

EndGadget::EndGadget(GadgetKind kind, const Port& at, std::string state) : kind_(kind), state_(std::move(state)) {
  if (kind != GadgetKind::Launch && kind != GadgetKind::Halt) throw std::invalid_argument("end gadget kind");
  const Segment s{at.at(at.lo - kArcMargin), at.at(at.hi + kArcMargin)};
  const bool launch = kind == GadgetKind::Launch;
  wall_ = Wall{(launch ? "launch:" : "halt:") + state_, s, launch ? WallRole::Launch : WallRole::Halt};
  if (launch) outputs_ = {at};
  else inputs_ = {at};
  bbox_ = bbox_of(s);
}

std::string EndGadget::params() const { return state_; }

}  // namespace tmb::geometry

#include <cmath>
#include <future>

namespace tmb::geometry {

namespace {

struct DBox {
  double x0, y0, x1, y1;
  bool overlaps(const DBox& o) const { return !(x1 < o.x0 || o.x1 < x0 || y1 < o.y0 || o.y1 < y0); }
};

DBox to_dbox(const BBox& b) {
  const double pad = 1e-9;
  return {b.xlo.convert_to<double>() - pad, b.ylo.convert_to<double>() - pad, b.xhi.convert_to<double>() + pad,
          b.yhi.convert_to<double>() + pad};
}

struct AuditWall {
  Segment seg;
  BBox box;
  DBox dbox;
  std::size_t block;
  std::int64_t k;
};

struct LevelIndex {
  std::vector<std::size_t> by_x, by_y;
  double max_w{0}, max_h{0};
};

using PairKey = std::pair<std::int64_t, std::int64_t>;

struct Accum {
  std::uint64_t pairs{0};
  std::optional<Rational> slack;
  bool violated{false};

  void take(const Rational& s) {
    if (!slack || s < *slack) slack = s;
  }
};

PairKey key_of(std::int64_t a, std::int64_t b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

std::vector<SeparationReport> audit_separator(const Separator& sep, int level_cap,
                                              const std::optional<WallPerturbation>& mutation) {
  std::vector<SepBlock> blocks;
  sep.for_each_block(level_cap, [&](const SepBlock& b) { blocks.push_back(b); });
  std::vector<BlockWalls> design;
  design.reserve(blocks.size());
  for (const auto& b : blocks) design.push_back(sep.walls_of(b));

  // walls as built (possibly perturbed)
  std::vector<AuditWall> walls;
  std::map<std::int64_t, std::size_t> seen_in_level;
  std::vector<Rational> xpos(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    Segment prim = std::get<Segment>(design[i].primary.shape);
    const std::size_t idx = seen_in_level[blocks[i].k]++;
    if (mutation && mutation->k == blocks[i].k && mutation->index == idx) {
      prim.a.x += mutation->dx;
      prim.b.x += mutation->dx;
    }
    xpos[i] = prim.a.x + wall_margin(blocks[i].hi - blocks[i].lo);
    const Segment ret = std::get<Segment>(design[i].ret.shape);
    for (const Segment& s : {prim, ret}) {
      const BBox bb = bbox_of(s);
      walls.push_back({s, bb, to_dbox(bb), i, blocks[i].k});
    }
  }

  std::map<std::int64_t, LevelIndex> index;
  for (std::size_t w = 0; w < walls.size(); ++w) {
    auto& li = index[walls[w].k];
    li.by_x.push_back(w);
    li.by_y.push_back(w);
    li.max_w = std::max(li.max_w, walls[w].dbox.x1 - walls[w].dbox.x0);
    li.max_h = std::max(li.max_h, walls[w].dbox.y1 - walls[w].dbox.y0);
  }
  for (auto& [k, li] : index) {
    std::sort(li.by_x.begin(), li.by_x.end(), [&](auto a, auto b) { return walls[a].dbox.x0 < walls[b].dbox.x0; });
    std::sort(li.by_y.begin(), li.by_y.end(), [&](auto a, auto b) { return walls[a].dbox.y0 < walls[b].dbox.y0; });
  }

  std::map<PairKey, Accum> acc;

  // clearance of every beam region against every other wall
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const Segment& pw = std::get<Segment>(design[i].primary.shape);
    const Rational slope = design[i].slope;
    auto yw = [&](const Rational& x) { return pw.a.y + (x - pw.a.x) * slope; };
    const Rational d = b.delta();
    const Point lift{d, d * design[i].ray_rise};
    const Point plo{b.lo, yw(b.lo)}, phi{b.hi, yw(b.hi)};
    const Point qlo = plo + lift, qhi = phi + lift;
    struct Part {
      std::vector<Point> poly;
      bool allow_primary, allow_ret;
    };
    const std::vector<Part> parts{
        {{{b.lo, 0}, {b.hi, 0}, phi, plo}, true, false},
        {{plo, phi, qhi, qlo}, true, true},
        {{qlo, qhi, {qhi.x, sep.height()}, {qlo.x, sep.height()}}, false, true},
    };
    for (const auto& part : parts) {
      BBox rb{part.poly[0].x, part.poly[0].y, part.poly[0].x, part.poly[0].y};
      for (const auto& p : part.poly) rb.include(p);
      const DBox rd = to_dbox(rb);
      const bool use_x = (rd.x1 - rd.x0) <= (rd.y1 - rd.y0);
      for (const auto& [k, li] : index) {
        const auto& order = use_x ? li.by_x : li.by_y;
        const double lo = use_x ? rd.x0 - li.max_w : rd.y0 - li.max_h;
        const double hi = use_x ? rd.x1 : rd.y1;
        auto it = std::lower_bound(order.begin(), order.end(), lo, [&](std::size_t w, double v) {
          return (use_x ? walls[w].dbox.x0 : walls[w].dbox.y0) < v;
        });
        for (; it != order.end(); ++it) {
          const auto& w = walls[*it];
          if ((use_x ? w.dbox.x0 : w.dbox.y0) > hi) break;
          if (!w.dbox.overlaps(rd)) continue;
          const bool own_primary = w.block == i && (*it % 2 == 0);
          const bool own_ret = w.block == i && (*it % 2 == 1);
          if ((own_primary && part.allow_primary) || (own_ret && part.allow_ret)) continue;
          auto& a = acc[key_of(b.k, w.k)];
          ++a.pairs;
          if (!w.box.overlaps(rb) || !segment_meets_convex(w.seg, part.poly)) continue;
          a.violated = true;
          Rational overlap = std::min(rb.xhi, w.box.xhi) - std::max(rb.xlo, w.box.xlo);
          if (overlap == 0) overlap = std::min(rb.yhi, w.box.yhi) - std::max(rb.ylo, w.box.ylo);
          a.take(-overlap);
        }
      }
    }
  }

  // block-gap inequalities: same side (nearest neighbour per level) and across sides
  std::map<std::pair<int, std::int64_t>, std::vector<std::size_t>> lists;
  for (std::size_t i = 0; i < blocks.size(); ++i) lists[{blocks[i].side, blocks[i].k}].push_back(i);
  for (auto& [key, v] : lists) {
    std::sort(v.begin(), v.end(), [&](auto a, auto b) { return blocks[a].lo < blocks[b].lo; });
  }
  auto width = [&](std::size_t i) { return blocks[i].hi - blocks[i].lo; };
  auto nearest = [&](const std::vector<std::size_t>& v, const Rational& lo, bool left) -> std::optional<std::size_t> {
    auto it = std::lower_bound(v.begin(), v.end(), lo, [&](std::size_t j, const Rational& x) { return blocks[j].lo < x; });
    if (left) {
      if (it == v.begin()) return std::nullopt;
      return *std::prev(it);
    }
    while (it != v.end() && !(lo < blocks[*it].lo)) ++it;
    if (it == v.end()) return std::nullopt;
    return *it;
  };
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const Rational wi = width(i);
    for (const auto& [key, v] : lists) {
      const auto [side, k2] = key;
      if (side == b.side) {
        auto j = nearest(v, b.lo, b.side == 0);
        if (!j) continue;
        const Rational wj = width(*j);
        const Rational gap = b.side == 0 ? xpos[i] - (xpos[*j] + wj) : xpos[*j] - (xpos[i] + wi);
        auto& a = acc[key_of(b.k, k2)];
        ++a.pairs;
        a.take(gap - (wi + wj) * kHalf);
      } else if (b.side == 0 && k2 == b.k) {
        auto j = nearest(v, b.lo, false);
        if (!j) continue;
        auto& a = acc[key_of(b.k, k2)];
        ++a.pairs;
        a.take(xpos[*j] - (xpos[i] + wi) - wall_margin(wi));
      }
    }
  }

  std::vector<SeparationReport> out;
  for (const auto& [key, a] : acc) {
    if (!a.slack) continue;
    SeparationReport r{key.first, key.second, a.pairs, *a.slack, false};
    r.pass = !a.violated && r.min_slack > 0;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SeparationReport> check_separation(int K, int k_max, const std::optional<WallPerturbation>& mutation) {
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  if (K > k_max) throw encoding::ResourceLimit("K=" + std::to_string(K) + " exceeds cap " + std::to_string(k_max));
  if (K > 9) throw encoding::ResourceLimit("separation audit enumerates 4^K blocks; K <= 9 supported");
  const std::array<std::array<Symbol, 2>, 4> rules{{{0, 1}, {1, 1}, {0, 0}, {1, 0}}};
  std::vector<std::future<std::vector<SeparationReport>>> jobs;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    jobs.push_back(std::async(std::launch::async, [K, r, &rules, &mutation] {
      CantorSplit split(K, rules[r]);
      return audit_separator(split, K, r == 0 ? mutation : std::nullopt);
    }));
  }
  std::map<PairKey, SeparationReport> merged;
  for (auto& j : jobs) {
    for (auto& rep : j.get()) {
      auto [it, fresh] = merged.emplace(PairKey{rep.k, rep.k2}, rep);
      if (fresh) continue;
      it->second.pairs += rep.pairs;
      if (rep.min_slack < it->second.min_slack) it->second.min_slack = rep.min_slack;
      it->second.pass = it->second.pass && rep.pass;
    }
  }
  std::vector<SeparationReport> out;
  for (auto& [k, r] : merged) out.push_back(std::move(r));
  return out;
}

}  // namespace tmb::geometry
