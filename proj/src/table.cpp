#include "tmb/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace tmb::table {

using namespace geometry;

namespace {

const Rational kEighth{1, 8};

Rational mid(const Port& p) { return (p.lo + p.hi) / 2; }

BBox port_box(const Port& p) {
  BBox b{p.origin.x, p.origin.y, p.origin.x, p.origin.y};
  b.include(p.at(p.lo));
  b.include(p.at(p.hi));
  return b;
}

std::string rat(const Rational& r) { return tmb::to_string(r); }

}  // namespace

BBox PlacedGadget::bbox() const {
  const BBox& b = gadget->bbox();
  const Point p = placement.apply(Point{b.xlo, b.ylo}), q = placement.apply(Point{b.xhi, b.yhi});
  return {std::min(p.x, q.x), std::min(p.y, q.y), std::max(p.x, q.x), std::max(p.y, q.y)};
}

std::vector<Wall> PlacedGadget::walls(int level_cap) const {
  std::vector<Wall> out;
  for (auto& w : gadget->walls(level_cap)) {
    Wall g = place(placement, w);
    g.key = name + "/" + g.key;
    out.push_back(std::move(g));
  }
  return out;
}

Rational Chart::from_point(const Point& p) const {
  const Rational x = port.value_of(p);
  if (!(port.at(x) == p)) throw std::domain_error("point is not on the chart segment");
  if (x < port.lo || x > port.hi) throw std::domain_error("point is outside the chart segment");
  return x;
}

// ---------------------------------------------------------------- builder

class Builder {
 public:
  Builder(const Machine& m, int K, int k_max, std::optional<std::size_t> flip_edge)
      : graph_(build_graph(m)), flip_edge_(flip_edge) {
    t_.machine_ = m;
    t_.K_ = K;
    k_max_ = k_max;
  }

  BilliardTable build();

 private:
  struct Entry {
    std::size_t gadget;
    int port;
  };
  struct Tower {
    std::size_t begin{0}, end{0};
    std::map<int, Entry> inputs;   // written symbol (merge) or -1
    std::map<int, Entry> outputs;  // read symbol
  };

  std::size_t add(std::string name, GadgetPtr g, Placement pl = {}) {
    t_.gadgets_.push_back({std::move(name), std::move(g), std::move(pl)});
    return t_.gadgets_.size() - 1;
  }

  void connect(std::size_t from, int out, std::size_t to, int in) {
    const Port po = t_.gadgets_[from].output(out), pi = t_.gadgets_[to].input(in);
    if (!(po.travel == pi.travel) || !(po.axis == pi.axis))
      throw LayoutError("port frames differ between " + t_.gadgets_[from].name + " and " + t_.gadgets_[to].name);
    if (dot(pi.origin - po.origin, po.travel) < 0)
      throw LayoutError(t_.gadgets_[to].name + " sits behind " + t_.gadgets_[from].name);
    t_.links_.push_back({from, out, to, in, dot(po.origin - pi.origin, po.axis)});
  }

  /// Places g so its input sits `gap` ahead of (from, out) and reads values shifted by c.
  std::size_t place_on(std::string name, GadgetPtr g, std::size_t from, int out, const Rational& gap, bool mirror,
                       const Rational& c) {
    const Port beam = t_.gadgets_[from].output(out);
    const Port& local = g->inputs().at(0);
    const Point target = along(along(beam.origin, beam.axis, -c), beam.travel, gap);
    Placement pl{mirror, target.x - (mirror ? -local.origin.x : local.origin.x), target.y - local.origin.y};
    const std::size_t idx = add(std::move(name), std::move(g), pl);
    connect(from, out, idx, 0);
    return idx;
  }

  /// Flat mirror turning the beam leaving (from, out) to `dir` with its centre ray at `corner`.
  std::size_t turn_at(const std::string& name, std::size_t from, int out, Dir dir, const Point& corner) {
    const Port beam = t_.gadgets_[from].output(out);
    const Point c = beam.at(mid(beam));
    const Rational dist = dot(corner - c, beam.travel);
    if (!(along(c, beam.travel, dist) == corner)) throw LayoutError(name + ": corner is off the beam axis");
    auto g = std::make_shared<TurnGadget>(beam, dir, dist, beam.lo - kEighth, beam.hi + kEighth, "M");
    const std::size_t idx = add(name, g);
    connect(from, out, idx, 0);
    return idx;
  }

  /// Up-going beam: side-step at height y so the centre ray continues up at x. Returns the last gadget.
  std::size_t jog(const std::string& name, std::size_t from, int out, const Rational& y, const Rational& x) {
    const Port beam = t_.gadgets_[from].output(out);
    const Point c = beam.at(mid(beam));
    if (c.x == x) return from;
    const std::size_t a = turn_at(name + ".a", from, out, x < c.x ? kLeft : kRight, {c.x, y});
    return turn_at(name + ".b", a, 0, kUp, {x, y});
  }

  Rational top(std::size_t g) const { return t_.gadgets_[g].bbox().yhi; }

  Tower build_tower(StateId q);
  void shift_tower(const Tower& tw, const Rational& dx);
  BBox tower_box(const Tower& tw) const;

  BilliardTable t_;
  MachineGraph graph_;
  std::optional<std::size_t> flip_edge_;
  int k_max_{encoding::kDefaultKMax};
};

Builder::Tower Builder::build_tower(StateId q) {
  const Machine& m = *t_.machine_;
  const int K = t_.K_;
  const std::string base = m.name(q);
  Tower tw;
  tw.begin = t_.gadgets_.size();
  const auto incoming = graph_.incoming(q);
  std::optional<Entry> cur;
  Rational y = 0;

  if (incoming.size() > 2) throw LayoutError("state " + base + " has in-degree above 2");
  std::optional<std::size_t> merge;
  if (incoming.size() == 2) {
    auto g = build_merge_gadget(build_split_gadget(K, {0, 1}, k_max_));
    merge = add(base + "/merge", g, {false, 0, 0});
    tw.inputs[0] = {*merge, 0};
    tw.inputs[1] = {*merge, 1};
    cur = Entry{*merge, 0};
  }
  if (!incoming.empty()) {
    const int eps = incoming.front().shift;
    auto rs = build_regime_split(eps, K);
    std::size_t rsi;
    if (merge) {
      rsi = place_on(base + "/regimes", rs, *merge, 0, 1, false, 0);
    } else {
      rsi = add(base + "/regimes", rs, {false, 0, 0});
      tw.inputs[-1] = {rsi, 0};
    }
    const Rational rs_top = top(rsi);
    // low regime goes left, high regime right
    auto branch = [&](int side, Regime r, const Rational& y_in, const Rational& x_in) {
      const std::string tag = side == 0 ? "low" : "high";
      const std::size_t j = jog(base + "/" + tag + ".in", rsi, side, y_in, x_in);
      const std::size_t s = place_on(base + "/" + tag + ".shift", build_shift_gadget(r, eps, K), j, 0, 1, false,
                                     side == 0 ? Rational(2) : Rational(-2));
      const Port so = t_.gadgets_[s].output(0);
      return place_on(base + "/" + tag + ".invert", build_invert_gadget(so.lo, so.hi), s, 0, 1, true, 0);
    };
    const std::size_t lo = branch(0, Regime::Low, rs_top + 1, -10);
    const std::size_t hi = branch(1, Regime::High, rs_top + 3, 12);
    const Rational y_rm = std::max(top(lo), top(hi)) + 5;
    auto rm_gadget = build_regime_merge(eps, K);
    const std::size_t rm = add(base + "/unregimes", rm_gadget, {false, 0, y_rm});
    const Port in0 = t_.gadgets_[rm].input(0), in1 = t_.gadgets_[rm].input(1);
    const Port lo_out = t_.gadgets_[lo].output(0), hi_out = t_.gadgets_[hi].output(0);
    const std::size_t jl = jog(base + "/low.out", lo, 0, y_rm - 3, in0.at(mid(lo_out) - 2).x);
    connect(jl, 0, rm, 0);
    const std::size_t jh = jog(base + "/high.out", hi, 0, y_rm - 2, in1.at(mid(hi_out) + 2).x);
    connect(jh, 0, rm, 1);
    cur = Entry{rm, 0};
    y = top(rm) + 1;
  } else if (q == m.initial()) {
    const std::size_t l = add(base + "/launch", std::make_shared<EndGadget>(GadgetKind::Launch,
                                                                          Port{{0, 0}, kUp, kRight, 0, 1}, base));
    t_.launch_ = l;
    cur = Entry{l, 0};
    y = 1;
  }

  const std::size_t cp = add(base + "/checkpoint", std::make_shared<CheckpointGadget>(Port{{0, y}, kUp, kRight, 0, 1}, base));
  t_.checkpoints_[q] = cp;
  if (cur) connect(cur->gadget, cur->port, cp, 0);
  y += 1;

  if (m.is_halting(q)) {
    const std::size_t h = add(base + "/halt", std::make_shared<EndGadget>(GadgetKind::Halt, Port{{0, y}, kUp, kRight, 0, 1}, base));
    t_.halts_[q] = h;
    connect(cp, 0, h, 0);
  } else {
    std::array<Symbol, 2> write{m.delta(q, 0).write, m.delta(q, 1).write};
    if (flip_edge_) {
      const auto& e = graph_.edges.at(*flip_edge_);
      if (e.source == q) write[static_cast<std::size_t>(e.read)] ^= 1;
    }
    const std::size_t s = add(base + "/split", build_split_gadget(K, write, k_max_), {false, 0, y});
    connect(cp, 0, s, 0);
    tw.outputs[0] = {s, 0};
    tw.outputs[1] = {s, 1};
  }
  tw.end = t_.gadgets_.size();
  return tw;
}

BBox Builder::tower_box(const Tower& tw) const {
  BBox b = t_.gadgets_[tw.begin].bbox();
  for (std::size_t i = tw.begin; i < tw.end; ++i) {
    b.include(t_.gadgets_[i].bbox());
    const auto& g = *t_.gadgets_[i].gadget;
    for (std::size_t p = 0; p < g.inputs().size(); ++p) b.include(port_box(t_.gadgets_[i].input(static_cast<int>(p))));
    for (std::size_t p = 0; p < g.outputs().size(); ++p) b.include(port_box(t_.gadgets_[i].output(static_cast<int>(p))));
  }
  return b;
}

void Builder::shift_tower(const Tower& tw, const Rational& dx) {
  for (std::size_t i = tw.begin; i < tw.end; ++i) t_.gadgets_[i].placement.dx += dx;
}

BilliardTable Builder::build() {
  const Machine& m = *t_.machine_;
  std::vector<Tower> towers;
  Rational x = 0, y_max = 0;
  for (StateId q = 0; q < static_cast<StateId>(m.num_states()); ++q) {
    towers.push_back(build_tower(q));
    const BBox b = tower_box(towers.back());
    shift_tower(towers.back(), x - b.xlo);
    x += b.xhi - b.xlo + 6;
    y_max = std::max(y_max, b.yhi);
  }
  const Rational& pitch = t_.pitch_;
  for (std::size_t i = 0; i < graph_.edges.size(); ++i) {
    const GraphEdge& e = graph_.edges[i];
    const Tower& src = towers.at(static_cast<std::size_t>(e.source));
    const Tower& dst = towers.at(static_cast<std::size_t>(e.target));
    const Entry out = src.outputs.at(e.read);
    const bool merged = dst.inputs.count(0) != 0;
    const Entry in = merged ? dst.inputs.at(e.write) : dst.inputs.at(-1);
    const Rational lane_out = e.read ? 2 : -2;
    const Rational c = merged ? Rational(e.write ? 2 : -2) - lane_out : -lane_out;
    const Rational step = pitch * static_cast<long>(i);
    const Rational y_top = y_max + pitch + step;
    const Rational x_down = x + pitch + step;
    const Rational y_bot = -pitch - step;
    const Port po = t_.gadgets_[out.gadget].output(out.port);
    const Port pi = t_.gadgets_[in.gadget].input(in.port);
    const std::string name = "route" + std::to_string(i) + "." + m.name(e.source) + std::to_string(e.read);
    Corridor cor{e, out.gadget, out.port, in.gadget, in.port, {}};
    const Point c0 = po.at(mid(po));
    cor.route.push_back(turn_at(name + ".1", out.gadget, out.port, kRight, {c0.x, y_top}));
    cor.route.push_back(turn_at(name + ".2", cor.route.back(), 0, kDown, {x_down, y_top}));
    cor.route.push_back(turn_at(name + ".3", cor.route.back(), 0, kLeft, {x_down, y_bot}));
    cor.route.push_back(turn_at(name + ".4", cor.route.back(), 0, kUp, {pi.at(mid(po) + c).x, y_bot}));
    connect(cor.route.back(), 0, in.gadget, in.port);
    if (t_.links_.back().offset != c) throw LayoutError(name + ": route does not deliver the lane offset");
    t_.corridors_.push_back(std::move(cor));
  }
  for (std::size_t i = 0; i < t_.links_.size(); ++i) {
    const Link& l = t_.links_[i];
    if (!t_.out_index_.emplace(std::pair{l.from, l.out_port}, i).second ||
        !t_.in_index_.emplace(std::pair{l.to, l.in_port}, i).second)
      throw LayoutError("port linked twice at " + t_.gadgets_[l.from].name);
  }
  return std::move(t_);
}

BilliardTable compile(const Machine& m, int K, int k_max) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (K > k_max) throw encoding::ResourceLimit("K=" + std::to_string(K) + " exceeds cap " + std::to_string(k_max));
  auto rep = check_reversible(m);
  if (!rep.reversible) {
    std::string msg = "machine is not reversible";
    if (rep.witness) {
      const auto& [a, b] = *rep.witness;
      msg += ": " + m.name(a.source) + " " + std::to_string(a.read) + " and " + m.name(b.source) + " " +
             std::to_string(b.read) + " both enter " + m.name(a.transition.target);
    }
    throw NotReversible(msg, rep);
  }
  return Builder(m, K, k_max, std::nullopt).build();
}

BilliardTable compile_with_flipped_write(const Machine& m, int K, std::size_t edge_index) {
  if (edge_index >= build_graph(m).edges.size()) throw std::out_of_range("no such edge");
  return Builder(m, K, encoding::kDefaultKMax, edge_index).build();
}

// ---------------------------------------------------------------- queries

std::optional<std::size_t> BilliardTable::checkpoint(StateId q) const {
  auto it = checkpoints_.find(q);
  if (it == checkpoints_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> BilliardTable::halt_wall(StateId q) const {
  auto it = halts_.find(q);
  if (it == halts_.end()) return std::nullopt;
  return it->second;
}

std::size_t BilliardTable::merge_count() const {
  return static_cast<std::size_t>(std::count_if(gadgets_.begin(), gadgets_.end(), [](const PlacedGadget& g) {
    return g.gadget->kind() == GadgetKind::Merge && g.name.ends_with("/merge");
  }));
}

const Link* BilliardTable::link_from(std::size_t g, int out_port) const {
  auto it = out_index_.find({g, out_port});
  return it == out_index_.end() ? nullptr : &links_[it->second];
}

const Link* BilliardTable::link_to(std::size_t g, int in_port) const {
  auto it = in_index_.find({g, in_port});
  return it == in_index_.end() ? nullptr : &links_[it->second];
}

Leg BilliardTable::advance(std::size_t g, int in_port, const Rational& value) const {
  Leg leg;
  Rational v = value;
  int port = in_port;
  for (std::size_t guard = 0; guard < gadgets_.size() + 4; ++guard) {
    const auto& pg = gadgets_[g];
    auto tr = pg.gadget->forward(port, v);
    if (!tr) {
      leg.end = Leg::End::Stuck;
      leg.gadget = g;
      leg.value = v;
      leg.diagnostic = "no branch of " + pg.name + " accepts " + rat(v);
      return leg;
    }
    for (auto& w : tr->walls) leg.walls.push_back(pg.name + "/" + w);
    const Link* l = link_from(g, tr->port);
    if (!l) {
      leg.end = Leg::End::Stuck;
      leg.gadget = g;
      leg.value = tr->value;
      leg.diagnostic = "beam leaves the table at " + pg.name;
      return leg;
    }
    g = l->to;
    port = l->in_port;
    v = tr->value + l->offset;
    const auto kind = gadgets_[g].gadget->kind();
    if (kind == GadgetKind::Checkpoint || kind == GadgetKind::Halt) {
      leg.end = kind == GadgetKind::Checkpoint ? Leg::End::Checkpoint : Leg::End::Halt;
      leg.gadget = g;
      leg.value = v;
      if (kind == GadgetKind::Halt) leg.walls.push_back(gadgets_[g].name + "/" + gadgets_[g].gadget->walls().front().key);
      return leg;
    }
  }
  leg.diagnostic = "beam loops without reaching a checkpoint";
  return leg;
}

Leg BilliardTable::retreat(std::size_t g, int in_port, const Rational& value) const {
  Leg leg;
  Rational v = value;
  int port = in_port;
  for (std::size_t guard = 0; guard < gadgets_.size() + 4; ++guard) {
    const Link* l = link_to(g, port);
    if (!l) {
      leg.end = Leg::End::Stuck;
      leg.gadget = g;
      leg.value = v;
      leg.diagnostic = "no beam enters " + gadgets_[g].name;
      return leg;
    }
    g = l->from;
    v = v - l->offset;
    const auto& pg = gadgets_[g];
    const auto kind = pg.gadget->kind();
    if (kind == GadgetKind::Checkpoint || kind == GadgetKind::Launch) {
      leg.end = kind == GadgetKind::Checkpoint ? Leg::End::Checkpoint : Leg::End::Launch;
      leg.gadget = g;
      leg.value = v;
      if (kind == GadgetKind::Launch) leg.walls.push_back(pg.name + "/" + pg.gadget->walls().front().key);
      return leg;
    }
    auto tr = pg.gadget->backward(l->out_port, v);
    if (!tr) {
      leg.end = Leg::End::Stuck;
      leg.gadget = g;
      leg.value = v;
      leg.diagnostic = "no branch of " + pg.name + " leads back from " + rat(v);
      return leg;
    }
    for (auto& w : tr->walls) leg.walls.push_back(pg.name + "/" + w);
    port = tr->port;
    v = tr->value;
  }
  leg.diagnostic = "beam loops without reaching a checkpoint";
  return leg;
}

std::optional<Rational> BilliardTable::corridor_transfer(std::size_t corridor, const Rational& x) const {
  const Corridor& c = corridors_.at(corridor);
  const auto& split = gadgets_[c.exit_gadget];
  auto tr = split.gadget->forward(0, x);
  if (!tr || tr->port != c.exit_port) return std::nullopt;
  const Link* l = link_from(c.exit_gadget, c.exit_port);
  Leg leg = advance(l->to, l->in_port, tr->value + l->offset);
  if (leg.end != Leg::End::Checkpoint && leg.end != Leg::End::Halt) return std::nullopt;
  return leg.value;
}

std::int64_t BilliardTable::corridor_cycles() const {
  // vertices: checkpoints; edges: corridors joined by the checkpoints they leave and reach
  std::map<std::size_t, std::size_t> parent;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [q, cp] : checkpoints_) parent[cp] = cp;
  std::size_t comps = parent.size();
  auto owner = [&](std::size_t g) {
    const std::string prefix = gadgets_[g].name.substr(0, gadgets_[g].name.find('/'));
    for (const auto& [q, cp] : checkpoints_) {
      if (machine_->name(q) == prefix) return cp;
    }
    throw std::logic_error("gadget without a tower: " + gadgets_[g].name);
  };
  for (const auto& c : corridors_) {
    const std::size_t a = find(owner(c.exit_gadget)), b = find(owner(c.entry_gadget));
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  }
  return static_cast<std::int64_t>(corridors_.size()) - static_cast<std::int64_t>(checkpoints_.size()) +
         static_cast<std::int64_t>(comps);
}

std::vector<Wall> BilliardTable::scene(int level_cap) const {
  std::vector<Wall> out;
  for (const auto& g : gadgets_) {
    auto w = g.walls(level_cap);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

BBox BilliardTable::bounds() const {
  BBox b = gadgets_.front().bbox();
  for (const auto& g : gadgets_) b.include(g.bbox());
  return b;
}

Chart iota_chart(const BilliardTable& t, ChartKind which, const std::string& state) {
  const auto& m = t.machine();
  switch (which) {
    case ChartKind::Initial: {
      const std::size_t g = t.launch() ? *t.launch() : *t.checkpoint(m.initial());
      const auto& pg = t.gadgets()[g];
      return {"initial", t.launch() ? pg.output(0) : pg.input(0)};
    }
    case ChartKind::Halt: {
      for (StateId q : m.halting()) {
        if (auto h = t.halt_wall(q)) return {"halt:" + m.name(q), t.gadgets()[*h].input(0)};
      }
      throw std::invalid_argument("machine has no halting state");
    }
    case ChartKind::State: {
      auto q = m.find(state);
      if (!q) throw std::invalid_argument("no checkpoint named '" + state + "'");
      return {m.name(*q), t.gadgets()[*t.checkpoint(*q)].input(0)};
    }
  }
  throw std::invalid_argument("unknown chart");
}

}  // namespace tmb::table

namespace tmb::table {

namespace {

struct DBox {
  double x0, y0, x1, y1;
};

DBox widen(const BBox& b) {
  const double pad = 1e-9;
  return {b.xlo.convert_to<double>() - pad, b.ylo.convert_to<double>() - pad, b.xhi.convert_to<double>() + pad,
          b.yhi.convert_to<double>() + pad};
}

/// Travel-range [s0, s1] of a gadget's walls measured along d from origin o.
std::pair<Rational, Rational> reach(const PlacedGadget& g, const Point& o, Dir d) {
  std::optional<Rational> lo, hi;
  for (const auto& w : g.walls(0)) {
    const auto* s = std::get_if<Segment>(&w.shape);
    if (!s) continue;
    for (const Point& p : {s->a, s->b}) {
      const Rational t = dot(p - o, d);
      if (!lo || t < *lo) lo = t;
      if (!hi || t > *hi) hi = t;
    }
  }
  return {lo.value_or(0), hi.value_or(0)};
}

}  // namespace

LayoutReport BilliardTable::verify_layout(int level_cap) const {
  LayoutReport rep;
  auto fail = [&](std::string why) {
    rep.ok = false;
    rep.failure = std::move(why);
    return rep;
  };
  std::vector<std::size_t> solid;
  std::vector<BBox> boxes(gadgets_.size());
  for (std::size_t i = 0; i < gadgets_.size(); ++i) {
    boxes[i] = gadgets_[i].bbox();
    if (gadgets_[i].gadget->kind() != GadgetKind::Checkpoint) solid.push_back(i);
  }
  for (std::size_t a = 0; a < solid.size(); ++a) {
    for (std::size_t b = a + 1; b < solid.size(); ++b) {
      ++rep.boxes_checked;
      if (boxes[solid[a]].overlaps(boxes[solid[b]]))
        return fail("gadgets " + gadgets_[solid[a]].name + " and " + gadgets_[solid[b]].name + " overlap");
    }
  }

  for (const auto& l : links_) {
    const Port po = gadgets_[l.from].output(l.out_port);
    const Port pi = gadgets_[l.to].input(l.in_port);
    Rational s0 = 0, s1 = dot(pi.origin - po.origin, po.travel);
    if (gadgets_[l.from].gadget->kind() == GadgetKind::Turn) s0 = std::min(s0, reach(gadgets_[l.from], po.origin, po.travel).first);
    if (gadgets_[l.to].gadget->kind() == GadgetKind::Turn) s1 = std::max(s1, reach(gadgets_[l.to], po.origin, po.travel).second);
    const Point first = po.at(po.lo);
    BBox beam{first.x, first.y, first.x, first.y};
    for (const Rational& u : {po.lo, po.hi}) {
      for (const Rational& s : {s0, s1}) beam.include(along(po.at(u), po.travel, s));
    }
    for (std::size_t g : solid) {
      if (g == l.from || g == l.to) continue;
      ++rep.beams_checked;
      if (beam.overlaps(boxes[g]))
        return fail("beam " + gadgets_[l.from].name + " -> " + gadgets_[l.to].name + " crosses " + gadgets_[g].name);
    }
  }

  std::set<const Separator*> audited;
  for (const auto& g : gadgets_) {
    const Separator* sep = dynamic_cast<const Separator*>(g.gadget.get());
    if (auto m = dynamic_cast<const MergeGadget*>(g.gadget.get())) sep = &m->split();
    if (!sep || !audited.insert(sep).second) continue;
    for (const auto& r : audit_separator(*sep, level_cap)) {
      if (!r.pass) return fail("separator " + g.name + " fails clearance at levels " + std::to_string(r.k) + "," +
                               std::to_string(r.k2));
    }
  }

  auto walls = scene(level_cap);
  std::vector<std::pair<DBox, std::size_t>> order;
  for (std::size_t i = 0; i < walls.size(); ++i) order.emplace_back(widen(bbox_of(walls[i])), i);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first.x0 < b.first.x0; });
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size() && order[b].first.x0 <= order[a].first.x1; ++b) {
      const DBox &p = order[a].first, &q = order[b].first;
      if (q.y1 < p.y0 || p.y1 < q.y0) continue;
      ++rep.wall_pairs_checked;
      if (walls_intersect(walls[order[a].second], walls[order[b].second]))
        return fail("walls " + walls[order[a].second].key + " and " + walls[order[b].second].key + " intersect");
    }
  }
  return rep;
}

}  // namespace tmb::table
