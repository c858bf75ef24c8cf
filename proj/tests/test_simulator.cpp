#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "tmb/simulator.hpp"

using namespace tmb;
using namespace tmb::sim;

namespace {

std::vector<std::pair<EventKind, std::string>> shape(const std::vector<TraceEvent>& ev) {
  std::vector<std::pair<EventKind, std::string>> out;
  for (const auto& e : ev) out.emplace_back(e.kind, e.id);
  return out;
}

std::vector<Tape> tapes_on(int lo, int hi) { return oracle::all_tapes(lo, hi); }

}  // namespace

TEST_CASE("run_symbolic on REV-MOVE") {
  const Machine m = oracle::fixture("rev_move.tm");
  const auto t = table::compile(m, 4);
  const auto r = run_symbolic(t, Tape({2}), 100);
  CHECK(r.verdict == Verdict::Halted);
  CHECK(r.tape == Tape({2}));
  CHECK(r.head == 3);
  CHECK(r.steps == 3);
  CHECK(r.periodic);
  CHECK(r.crossings() == 3);
  REQUIRE_FALSE(r.trace.empty());
  CHECK(r.trace.front().kind == EventKind::Launch);
  CHECK(*r.trace.front().value == Rational(oracle::code_value(Tape({2}), 0)));
  CHECK(r.trace.back().kind == EventKind::HaltBounce);
  CHECK(*r.trace.back().value == oracle::code_value(Tape({2}), 3));
  // every crossing decodes
  for (const auto& e : r.trace) {
    if (e.kind == EventKind::Checkpoint) CHECK(encoding::decode(*e.value));
  }
}

TEST_CASE("budget exhaustion on the looper") {
  const Machine m = oracle::fixture("looper.tm");
  const auto t = table::compile(m, 4);
  const auto r = run_symbolic(t, Tape(), 100);
  CHECK(r.verdict == Verdict::BudgetExhausted);
  CHECK(r.crossings() == 100);
  CHECK_FALSE(r.periodic);
  CHECK_FALSE(detect_periodicity(t, r));
  // every crossing against the raw oracle
  oracle::RawConfig c{{}, m.initial(), 0};
  for (const auto& e : r.trace) {
    if (e.kind != EventKind::Checkpoint) continue;
    c = oracle::raw_step(m, c);
    const auto& [ones, q, k] = c;
    CHECK(e.id == m.name(q));
    CHECK(*e.value == oracle::code_value(Tape(ones), k));
  }
}

TEST_CASE("out of range") {
  const Machine m = oracle::fixture("rev_move.tm");
  const auto t = table::compile(m, 4);
  const auto r = run_symbolic(t, Tape({7}), 100);
  CHECK(r.verdict == Verdict::OutOfRange);
  REQUIRE(r.out_of_range_k);
  CHECK(*r.out_of_range_k == 5);
  CHECK(r.steps == 4);
  CHECK(r.trace.back().kind == EventKind::OutOfRange);
  CHECK_FALSE(detect_periodicity(t, r));
}

TEST_CASE("trace text") {
  const Machine m = oracle::fixture("rev_move.tm");
  const auto t = table::compile(m, 4);
  const auto r = run_symbolic(t, Tape({2}), 100);
  const std::string text = trace_text(m, r);
  CHECK(text == trace_text(m, run_symbolic(table::compile(m, 4), Tape({2}), 100)));
  CHECK(text.find("--- verdict\nverdict halted\nstate H\nsteps 3\nhead 3\ntape {2:1}\nperiodic true\n") != std::string::npos);
  CHECK(text.rfind("0 launch A value=", 0) == 0);
}

TEST_CASE("periodicity certificate retraces the run") {
  for (const char* name : {"rev_move.tm", "counter.tm", "flipper.tm", "seeker.tm", "walker.tm"}) {
    INFO(name);
    const Machine m = oracle::fixture(name);
    const auto t = table::compile(m, 4);
    for (const auto& tape : tapes_on(-1, 1)) {
      const auto r = run_symbolic(t, tape, 200);
      if (r.verdict != Verdict::Halted) continue;
      const auto c = detect_periodicity(t, r);
      REQUIRE(c);
      CHECK(c->returns);
      CHECK(c->returned == oracle::code_value(tape, 0));
      CHECK(c->closed == t.launch().has_value());
      // the backward events are the forward ones in reverse, halt bounce excepted
      auto back = c->backward;
      std::reverse(back.begin(), back.end());
      auto fwd = c->forward;
      fwd.pop_back();
      REQUIRE(back.size() == fwd.size());
      for (std::size_t i = 0; i < fwd.size(); ++i) {
        CHECK(back[i].kind == fwd[i].kind);
        CHECK(back[i].id == fwd[i].id);
        CHECK(back[i].step == fwd[i].step);
        CHECK(back[i].value == fwd[i].value);
      }
      CHECK(c->period == 2 * c->forward.size() - 1);
    }
  }
}

TEST_CASE("verify_equivalence") {
  const Machine m = oracle::fixture("rev_move.tm");
  const auto t = table::compile(m, 4);
  const auto rep = verify_equivalence(m, t, tapes_on(0, 2), 50);
  CHECK(rep.pass);
  CHECK(rep.tapes == 8);
  CHECK(rep.halted == 7);
  CHECK(verify_equivalence(m, t, {}, 50).pass);
  CHECK_THROWS_AS(verify_equivalence(oracle::fixture("flipper.tm"), t, {Tape()}, 10), std::invalid_argument);

  // flipping the write of A0 -> A breaks the first step that reads a 0
  const auto bad = table::compile_with_flipped_write(m, 4, 0);
  REQUIRE(bad.corridors()[0].edge.read == 0);
  const auto fail = verify_equivalence(m, bad, tapes_on(0, 2), 50);
  CHECK_FALSE(fail.pass);
  REQUIRE(fail.failing_tape);
  CHECK(*fail.failing_tape == Tape());
  CHECK(fail.failing_step == 1);
  // a tape whose first read is 1 never uses that corridor
  CHECK(verify_equivalence(m, bad, {Tape({0})}, 50).pass);
}

TEST_CASE("numeric trace agrees with symbolic") {
  const Machine m = oracle::fixture("rev_move.tm");
  const auto t = table::compile(m, 4);
  const auto sym = run_symbolic(t, Tape({2}), 100);
  double previous = 1;
  for (int p : {40, 60, 80}) {
    CAPTURE(p);
    const auto num = run_numeric(t, Tape({2}), 100, {p});
    CHECK(shape(num.run.trace) == shape(sym.trace));
    CHECK(num.run.verdict == Verdict::Halted);
    CHECK(num.max_deviation <= std::pow(10.0, -p / 2.0));
    CHECK(num.max_deviation < previous);
    previous = num.max_deviation;
    if (p == 60) CHECK(num.max_deviation < 1e-40);
  }
  // digit-for-digit determinism
  const auto a = run_numeric(t, Tape({2}), 100, {60});
  const auto b = run_numeric(t, Tape({2}), 100, {60});
  CHECK(a.run.trace == b.run.trace);
}

TEST_CASE("numeric runs on the launch-wall fixtures") {
  for (const char* name : {"flipper.tm", "counter.tm", "walker.tm", "seeker.tm", "looper.tm"}) {
    INFO(name);
    const auto t = table::compile(oracle::fixture(name), 4);
    const auto sym = run_symbolic(t, Tape({-1, 1}), 40);
    const auto num = run_numeric(t, Tape({-1, 1}), 40, {60});
    CHECK(shape(num.run.trace) == shape(sym.trace));
    CHECK(num.max_deviation < 1e-40);
  }
}

TEST_CASE("too few digits exhaust the precision") {
  const auto t = table::compile(oracle::fixture("rev_move.tm"), 6);
  CHECK_THROWS_AS(run_numeric(t, Tape({5}), 100, {8}), PrecisionExhausted);
  CHECK_NOTHROW(run_numeric(t, Tape({5}), 100, {60}));
}

TEST_CASE("single shift gadget maps 1/3 to 7/9") {
  const auto g = geometry::build_shift_gadget(geometry::Regime::High, 1, 3);
  const auto want = g->forward(0, Rational(1, 3));
  REQUIRE(want);
  CHECK(want->value == Rational(7, 9));
  const auto tr = trace_gadget(*g, 0, Rational(1, 3), 60, 3);
  CHECK(tr.out_port == want->port);
  CHECK(tr.deviation < 1e-30);
  CHECK(tr.walls == want->walls);
  CHECK_THROWS_AS(trace_gadget(*g, 0, Rational(1, 9), 60, 3), std::invalid_argument);
}

TEST_CASE("beam landing on a port endpoint") {
  // the empty tape at k=-3 is the low end of the merged regime hull
  const auto g = geometry::build_regime_merge(1, 4);
  const auto src = g->backward(0, Rational(1, 81));
  REQUIRE(src);
  for (int p : {40, 60, 80, 100}) {
    CAPTURE(p);
    const auto tr = trace_gadget(*g, src->port, src->value, p, 4);
    CHECK(tr.out_port == 0);
    CHECK(tr.deviation < std::pow(10.0, -p / 2.0));
  }
}

TEST_CASE("reusable gadget tracer") {
  const auto g = geometry::build_split_gadget(3);
  const GadgetTracer tracer(*g, 60, 3);
  for (const auto& t : tapes_on(-2, 2)) {
    const Rational x = oracle::code_value(t, 1);
    const auto a = tracer.trace(0, x);
    const auto b = trace_gadget(*g, 0, x, 60, 3);
    CHECK(a.value == b.value);
    CHECK(a.walls == b.walls);
    CHECK(a.out_port == b.out_port);
  }
  CHECK_THROWS_AS(tracer.trace(0, Rational(1, 2)), std::invalid_argument);
}
