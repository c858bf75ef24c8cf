#include "tmb/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "tmb/serialize.hpp"

namespace tmb::sim {

using table::BilliardTable;
using table::Leg;

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Launch: return "launch";
    case EventKind::Reflection: return "reflect";
    case EventKind::Checkpoint: return "checkpoint";
    case EventKind::HaltBounce: return "halt";
    case EventKind::OutOfRange: return "out-of-range";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Halted: return "halted";
    case Verdict::BudgetExhausted: return "budget-exhausted";
    case Verdict::OutOfRange: return "out-of-range";
  }
  return "?";
}

std::size_t RunOutcome::crossings() const {
  return static_cast<std::size_t>(
      std::count_if(trace.begin(), trace.end(), [](const TraceEvent& e) { return e.kind == EventKind::Checkpoint; }));
}

namespace {

std::string point_str(const geometry::Point& p) { return io::exact_str(p.x) + " " + io::exact_str(p.y); }

StateId state_of(const BilliardTable& t, std::size_t g) {
  const auto* cp = dynamic_cast<const geometry::CheckpointGadget*>(t.gadgets()[g].gadget.get());
  if (!cp) throw CompilerBug("leg ended on " + t.gadgets()[g].name + ", which is not a checkpoint");
  return *t.machine().find(cp->state());
}

encoding::Decoded decode_or_throw(const BilliardTable& t, std::size_t g, const Rational& v) {
  auto d = encoding::decode(v);
  if (!d) throw CompilerBug("checkpoint " + t.gadgets()[g].name + " received " + tmb::to_string(v) + ", not a code");
  return *d;
}

void push_walls(std::vector<TraceEvent>& out, const std::vector<std::string>& walls, std::uint64_t step) {
  for (const auto& w : walls) out.push_back({EventKind::Reflection, step, w, std::nullopt, "", 0});
}

/// Checkpoint gadget and value where the initial chart delivers x0.
std::pair<std::size_t, Rational> first_checkpoint(const BilliardTable& t, const Rational& x0) {
  const Machine& m = t.machine();
  const std::size_t cp = *t.checkpoint(m.initial());
  if (auto l = t.launch()) {
    const table::Link* link = t.link_from(*l, 0);
    if (!link || link->to != cp) throw CompilerBug("launch wall does not feed the initial checkpoint");
    return {cp, x0 + link->offset};
  }
  return {cp, x0};
}

}  // namespace

RunOutcome run_symbolic(const BilliardTable& t, const Tape& t0, std::uint64_t budget) {
  const Machine& m = t.machine();
  RunOutcome r;
  const Rational x0 = encoding::encode_state(t0, 0).value.to_rational();
  r.trace.push_back({EventKind::Launch, 0, m.name(m.initial()), x0,
                     point_str(table::iota_chart(t, table::ChartKind::Initial).to_point(x0)), 0});
  auto [cp, v] = first_checkpoint(t, x0);
  StateId q = m.initial();
  std::uint64_t steps = 0;
  while (true) {
    const auto d = decode_or_throw(t, cp, v);
    r.tape = d.tape;
    r.head = d.head;
    r.state = q;
    r.steps = steps;
    if (m.is_halting(q)) {
      Leg leg = t.advance(cp, 0, v);
      if (leg.end != Leg::End::Halt) throw CompilerBug("halting state " + m.name(q) + " misses its halt wall: " + leg.diagnostic);
      leg.walls.pop_back();
      push_walls(r.trace, leg.walls, steps);
      const auto& halt_port = t.gadgets()[leg.gadget].input(0);
      r.trace.push_back({EventKind::HaltBounce, steps, m.name(q), leg.value, point_str(halt_port.at(leg.value)), 0});
      r.verdict = Verdict::Halted;
      r.periodic = true;
      return r;
    }
    if (steps >= budget) {
      r.verdict = Verdict::BudgetExhausted;
      return r;
    }
    const Transition& tr = m.delta(q, d.tape.read(d.head));
    const std::int64_t k2 = d.head + tr.shift;
    if (k2 > t.K() || k2 < -t.K()) {
      r.trace.push_back({EventKind::OutOfRange, steps, m.name(q), std::nullopt, "", k2});
      r.verdict = Verdict::OutOfRange;
      r.out_of_range_k = k2;
      return r;
    }
    Leg leg = t.advance(cp, 0, v);
    if (leg.end != Leg::End::Checkpoint) throw CompilerBug("leg from " + m.name(q) + " ends early: " + leg.diagnostic);
    push_walls(r.trace, leg.walls, steps);
    ++steps;
    cp = leg.gadget;
    v = leg.value;
    q = state_of(t, cp);
    r.trace.push_back({EventKind::Checkpoint, steps, m.name(q), v, point_str(t.gadgets()[cp].input(0).at(v)), 0});
  }
}

std::string trace_text(const Machine& m, const RunOutcome& r) {
  std::ostringstream out;
  for (const auto& e : r.trace) {
    out << e.step << ' ' << to_string(e.kind) << ' ' << e.id;
    if (e.value) out << " value=" << io::exact_str(*e.value);
    if (e.kind == EventKind::OutOfRange) out << " k=" << e.k;
    if (!e.position.empty()) out << " at " << e.position;
    out << '\n';
  }
  out << "--- verdict\n"
      << "verdict " << to_string(r.verdict) << '\n'
      << "state " << m.name(r.state) << '\n'
      << "steps " << r.steps << '\n'
      << "head " << r.head << '\n'
      << "tape " << r.tape.str() << '\n'
      << "periodic " << (r.periodic ? "true" : "false") << '\n';
  if (r.out_of_range_k) out << "out_of_range_k " << *r.out_of_range_k << '\n';
  return out.str();
}

std::optional<PeriodicityCertificate> detect_periodicity(const BilliardTable& t, const RunOutcome& r) {
  if (r.verdict != Verdict::Halted || r.trace.empty() || r.trace.back().kind != EventKind::HaltBounce) return std::nullopt;
  const Machine& m = t.machine();
  PeriodicityCertificate c;
  c.forward = r.trace;
  c.start = *r.trace.front().value;
  c.closed = t.launch().has_value();

  // replay from the halt wall with the inverse maps down to step 0, then onto the launch wall if any
  const auto halt_g = *t.halt_wall(*m.find(r.trace.back().id));
  Leg leg = t.retreat(halt_g, 0, *r.trace.back().value);
  std::uint64_t step = r.steps;
  while (true) {
    if (leg.end == Leg::End::Stuck) return c;
    if (leg.end == Leg::End::Launch) {
      leg.walls.pop_back();
      push_walls(c.backward, leg.walls, 0);
      c.backward.push_back({EventKind::Launch, 0, m.name(m.initial()), leg.value, "", 0});
      c.returned = leg.value;
      c.returns = step == 0 && leg.value == c.start;
      break;
    }
    push_walls(c.backward, leg.walls, step);
    const StateId q = state_of(t, leg.gadget);
    if (step == 0 && !t.launch()) {
      // the initial chart is this checkpoint
      c.backward.push_back({EventKind::Launch, 0, m.name(q), leg.value, "", 0});
      c.returned = leg.value;
      c.returns = q == m.initial() && leg.value == c.start;
      break;
    }
    if (step == 0) {
      // crossing folded into the launch, as on the way out
      leg = t.retreat(leg.gadget, 0, leg.value);
      continue;
    }
    c.backward.push_back({EventKind::Checkpoint, step, m.name(q), leg.value, "", 0});
    --step;
    leg = t.retreat(leg.gadget, 0, leg.value);
  }
  c.period = c.forward.size() + c.backward.size();
  return c;
}

namespace {

std::optional<std::string> check_tape(const Machine& m, const BilliardTable& t, const Tape& tape, std::uint64_t budget,
                                      std::uint64_t& at, bool& halted) {
  const RunOutcome r = run_symbolic(t, tape, budget);
  Configuration c{tape, m.initial(), 0};
  std::uint64_t i = 0;
  for (const auto& e : r.trace) {
    if (e.kind != EventKind::Checkpoint) continue;
    c = step(m, c);
    ++i;
    at = i;
    if (e.step != i) return "crossing " + std::to_string(i) + " logged as step " + std::to_string(e.step);
    if (e.id != m.name(c.state)) return "crossing at " + e.id + ", machine is in " + m.name(c.state);
    const Rational want = encoding::encode_state(c.tape, c.head).value.to_rational();
    if (*e.value != want) return "crossing value " + io::exact_str(*e.value) + ", expected " + io::exact_str(want);
  }
  // verdicts
  const bool machine_halts = m.is_halting(c.state);
  const auto tr = machine_halts ? std::optional<Transition>{} : std::optional<Transition>{m.delta(c.state, c.tape.read(c.head))};
  switch (r.verdict) {
    case Verdict::Halted:
      halted = true;
      if (!machine_halts) return std::string("table halted, machine did not");
      if (r.tape != c.tape || r.head != c.head || r.steps != i) return std::string("halting configuration differs");
      return std::nullopt;
    case Verdict::BudgetExhausted:
      if (machine_halts) return std::string("machine halted, table ran out of budget");
      if (i != budget) return "budget exhausted after " + std::to_string(i) + " steps";
      return std::nullopt;
    case Verdict::OutOfRange: {
      if (machine_halts) return std::string("machine halted, table reported out of range");
      const std::int64_t k2 = c.head + tr->shift;
      if (k2 >= -t.K() && k2 <= t.K()) return "out of range reported at head " + std::to_string(k2);
      if (r.out_of_range_k != k2) return std::string("out-of-range head differs");
      return std::nullopt;
    }
  }
  return std::string("unknown verdict");
}

}  // namespace

EquivalenceReport verify_equivalence(const Machine& m, const BilliardTable& t, const std::vector<Tape>& tapes,
                                     std::uint64_t budget, unsigned threads) {
  if (m.hash() != t.machine().hash()) throw std::invalid_argument("table was compiled from a different machine");
  EquivalenceReport rep;
  rep.tapes = tapes.size();
  if (tapes.empty()) return rep;
  if (threads == 0) threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  threads = std::min<unsigned>(threads, static_cast<unsigned>(tapes.size()));

  struct Result {
    std::optional<std::string> failure;
    std::uint64_t at{0};
    bool halted{false};
  };
  std::vector<Result> results(tapes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tapes.size(); i = next++) {
      try {
        results[i].failure = check_tape(m, t, tapes[i], budget, results[i].at, results[i].halted);
      } catch (const std::exception& e) {
        results[i].failure = std::string("exception: ") + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // first failing tape in input order, so the report does not depend on scheduling
  for (std::size_t i = 0; i < tapes.size(); ++i) {
    rep.halted += results[i].halted ? 1 : 0;
    if (results[i].failure && rep.pass) {
      rep.pass = false;
      rep.failing_tape = tapes[i];
      rep.failing_step = results[i].at;
      rep.divergence = *results[i].failure;
    }
  }
  return rep;
}

}  // namespace tmb::sim
