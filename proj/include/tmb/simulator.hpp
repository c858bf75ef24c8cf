#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmb/table.hpp"

namespace tmb::sim {

enum class EventKind { Launch, Reflection, Checkpoint, HaltBounce, OutOfRange };
std::string to_string(EventKind k);

struct TraceEvent {
  EventKind kind{EventKind::Reflection};
  std::uint64_t step{0};          // machine steps completed when the event happens
  std::string id;                 // wall key or state name
  std::optional<Rational> value;  // exact chart value (symbolic mode)
  std::string position;           // exact "x y" (symbolic) or decimals (numeric)
  std::int64_t k{0};              // requested head position (out-of-range only)

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class Verdict { Halted, BudgetExhausted, OutOfRange };
std::string to_string(Verdict v);

struct RunOutcome {
  Verdict verdict{Verdict::BudgetExhausted};
  Tape tape;
  std::int64_t head{0};
  StateId state{0};
  std::uint64_t steps{0};
  bool periodic{false};
  std::optional<std::int64_t> out_of_range_k;
  std::vector<TraceEvent> trace;

  std::size_t crossings() const;
};

/// A checkpoint received a value that is not a configuration code: the compiled table is wrong.
class CompilerBug : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Exact evolution through the composed transfer maps, one leg per machine step.
RunOutcome run_symbolic(const table::BilliardTable& t, const Tape& t0, std::uint64_t budget);

/// Line-per-event log followed by a verdict block.
std::string trace_text(const Machine& m, const RunOutcome& r);

// ---------------------------------------------------------------- numeric

class PrecisionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TracingDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NumericOptions {
  int precision{60};                // decimal digits
  std::optional<int> level_cap;     // separator levels materialised; default from the symbolic run
  double grazing{1e-6};             // |cos| below this is a tangential hit
  std::size_t max_bounces{2000000};
};

struct NumericOutcome {
  RunOutcome run;                   // events with decimal positions
  double max_deviation{0};          // over checkpoint and halt values, against symbolic
  double tolerance{0};              // 10^(-precision/2)
  int level_cap{0};
  std::size_t walls{0};             // scene size traced against
  std::vector<geometry::Point> path;  // bounce points, rounded to rationals (for drawing)
};

/// Ray tracing through the walls of the table at the given precision, checked event by
/// event against run_symbolic. Throws PrecisionExhausted or TracingDegeneracy.
NumericOutcome run_numeric(const table::BilliardTable& t, const Tape& t0, std::uint64_t budget,
                           const NumericOptions& opt = {});

struct GadgetTrace {
  int out_port{-1};
  std::string value;  // decimal, precision digits
  double deviation{0};
  std::vector<std::string> walls;
};

/// Traces one beam through a gadget in isolation and compares with forward(); throws
/// PrecisionExhausted if the ray leaves through the wrong port.
GadgetTrace trace_gadget(const geometry::Gadget& g, int in_port, const Rational& x, int precision,
                         int level_cap);

/// Same, with the wall scene built once for many beams. The gadget must outlive the tracer.
class GadgetTracer {
 public:
  GadgetTracer(const geometry::Gadget& g, int precision, int level_cap);
  ~GadgetTracer();
  GadgetTracer(GadgetTracer&&) noexcept;
  GadgetTracer& operator=(GadgetTracer&&) noexcept;
  GadgetTrace trace(int in_port, const Rational& x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------- periodicity

struct PeriodicityCertificate {
  std::vector<TraceEvent> forward;
  std::vector<TraceEvent> backward;  // replay from the halt wall, time reversed
  std::size_t period{0};             // events in forward + backward
  Rational start;                    // x_{t0,0}
  Rational returned;                 // value reached by the replay at the initial chart
  bool returns{false};               // replay ends exactly at the initial chart point
  bool closed{false};                // the initial chart is a boundary wall, so the orbit closes
};

/// Palindromic certificate for a halted run (replayed with the inverse transfer maps); none otherwise.
std::optional<PeriodicityCertificate> detect_periodicity(const table::BilliardTable& t, const RunOutcome& r);

// ---------------------------------------------------------------- equivalence

struct EquivalenceReport {
  bool pass{true};
  std::size_t tapes{0};
  std::size_t halted{0};
  std::optional<Tape> failing_tape;
  std::uint64_t failing_step{0};
  std::string divergence;
};

/// Lockstep check of run_symbolic against the machine on every tape.
EquivalenceReport verify_equivalence(const Machine& m, const table::BilliardTable& t, const std::vector<Tape>& tapes,
                                     std::uint64_t budget, unsigned threads = 0);

}  // namespace tmb::sim
