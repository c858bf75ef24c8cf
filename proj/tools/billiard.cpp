#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tmb/serialize.hpp"
#include "tmb/simulator.hpp"

using namespace tmb;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kNegative = 1, kInput = 2, kInternal = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  int K{8};
  bool K_set{false};
  std::uint64_t budget{10000};
  int precision{60};
  std::string tape{"{}"};
  std::string mode{"symbolic"};
  bool json{false};
  std::string out;
  int k_max{encoding::kDefaultKMax};
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

void validate(const Options& o) {
  if (o.K < 1 || o.K > o.k_max)
    throw InputError("--K must be in [1, " + std::to_string(o.k_max) + "] (BILLIARD_KMAX raises the cap)");
  if (o.precision < 20) throw InputError("--precision must be at least 20");
}

Tape parse_tape(const std::string& s) {
  try {
    return Tape::parse(s);
  } catch (const ParseError& e) {
    throw InputError(std::string("bad tape: ") + e.what());
  }
}

std::string witness_text(const Machine& m, const ReversibilityReport& r) {
  if (!r.witness) return "";
  auto one = [&](const IncomingTransition& t) {
    return m.name(t.source) + " " + std::to_string(t.read) + " -> " + m.name(t.transition.target) + " " +
           std::to_string(t.transition.write) + " " + (t.transition.shift > 0 ? "R" : "L");
  };
  return one(r.witness->first) + " | " + one(r.witness->second);
}

/// A table file (JSON) is loaded and verified; anything else is a machine to compile.
table::BilliardTable table_from(const std::string& path, const Options& o) {
  const std::string text = slurp(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return io::load_table(text);
  return table::compile(parse_machine(text), o.K, o.k_max);
}

json outcome_json(const sim::RunOutcome& r, const Machine& m) {
  json j{{"verdict", sim::to_string(r.verdict)},
         {"state", m.name(r.state)},
         {"steps", r.steps},
         {"head", r.head},
         {"tape", r.tape.str()},
         {"periodic", r.periodic},
         {"crossings", r.crossings()}};
  if (r.out_of_range_k) j["out_of_range_k"] = *r.out_of_range_k;
  return j;
}

int cmd_check(const std::string& path, const Options& o) {
  const Machine m = parse_machine(slurp(path));
  const auto rep = check_reversible(m);
  if (o.json) {
    json j{{"reversible", rep.reversible}, {"states", m.num_states()}, {"hash", m.hash()}};
    if (rep.witness) j["witness"] = witness_text(m, rep);
    std::cout << j.dump() << "\n";
  } else if (rep.reversible) {
    std::cout << "reversible\n";
  } else {
    std::cout << "not reversible: " << witness_text(m, rep) << "\n";
  }
  return rep.reversible ? kOk : kNegative;
}

int cmd_encode(const std::string& tape_text, std::int64_t k, const Options& o) {
  // in a symbol string the '@' marks the head cell
  Tape t = parse_tape(tape_text);
  if (tape_text.find('@') != std::string::npos) {
    std::set<std::int64_t> ones;
    for (auto c : t.ones()) ones.insert(c + k);
    t = Tape(ones);
  }
  const auto x = encoding::encode_state(t, k);
  if (o.json) {
    std::cout << json{{"value", x.value.str()}, {"ternary", x.value.ternary_digits()}, {"tape", t.str()}, {"head", k}}.dump()
              << "\n";
  } else {
    std::cout << x.value.str() << "  ternary " << x.value.ternary_digits() << "\n";
  }
  return kOk;
}

int cmd_compile(const std::string& path, const Options& o, int walls_level) {
  const Machine m = parse_machine(slurp(path));
  const auto rep = check_reversible(m);
  if (!rep.reversible) throw InputError("machine is not reversible: " + witness_text(m, rep));
  const auto t = table::compile(m, o.K, o.k_max);
  const auto layout = t.verify_layout(std::min(2, o.K));
  if (!layout.ok) throw table::LayoutError("layout verification failed: " + layout.failure);
  if (!o.out.empty()) spit(o.out, io::serialize_table(t, walls_level));
  if (o.json) {
    std::cout << json{{"K", t.K()},
                      {"gadgets", t.gadgets().size()},
                      {"corridors", t.corridors().size()},
                      {"merges", t.merge_count()},
                      {"cycles", t.corridor_cycles()},
                      {"layout_ok", layout.ok},
                      {"output", o.out}}
                     .dump()
              << "\n";
  } else {
    std::cout << "compiled K=" << t.K() << ": " << t.gadgets().size() << " gadgets, " << t.corridors().size()
              << " corridors, " << t.merge_count() << " merges, layout ok\n";
    if (!o.out.empty()) std::cout << "wrote " << o.out << "\n";
  }
  return kOk;
}

int cmd_run(const std::string& path, const Options& o) {
  if (o.mode != "symbolic" && o.mode != "numeric" && o.mode != "both") throw InputError("--mode is symbolic, numeric or both");
  const auto t = table_from(path, o);
  const Machine& m = t.machine();
  const Tape t0 = parse_tape(o.tape);
  const auto sym = sim::run_symbolic(t, t0, o.budget);
  std::optional<sim::NumericOutcome> num;
  if (o.mode != "symbolic") num = sim::run_numeric(t, t0, o.budget, {o.precision});
  const sim::RunOutcome& shown = o.mode == "numeric" ? num->run : sym;
  if (!o.out.empty()) spit(o.out, sim::trace_text(m, shown));
  if (o.json) {
    json j = outcome_json(sym, m);
    j["mode"] = o.mode;
    if (num) {
      j["numeric"] = {{"precision", o.precision},
                      {"max_deviation", num->max_deviation},
                      {"tolerance", num->tolerance},
                      {"level_cap", num->level_cap},
                      {"walls", num->walls},
                      {"events", num->run.trace.size()}};
    }
    if (auto c = sim::detect_periodicity(t, sym)) {
      j["certificate"] = {{"returns", c->returns}, {"closed", c->closed}, {"period", c->period}};
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "verdict " << sim::to_string(sym.verdict) << "\n"
              << "steps " << sym.steps << "\nhead " << sym.head << "\ntape " << sym.tape.str() << "\nstate " << m.name(sym.state)
              << "\n";
    if (sym.out_of_range_k) std::cout << "out of range at head " << *sym.out_of_range_k << "\n";
    if (auto c = sim::detect_periodicity(t, sym)) {
      std::cout << "periodic: replay " << (c->returns ? "returns to" : "misses") << " the launch point, period "
                << c->period << " events" << (c->closed ? "" : " (launch point is an interior checkpoint)") << "\n";
    }
    if (num) {
      std::cout << "numeric " << o.precision << " digits: " << num->run.trace.size() << " events match, max deviation "
                << num->max_deviation << " (tolerance " << num->tolerance << ", levels <= " << num->level_cap << ", "
                << num->walls << " walls)\n";
    }
  }
  return sym.verdict == sim::Verdict::Halted ? kOk : kNegative;
}

int cmd_verify(const std::string& path, const Options& o, int lo, int hi, int flip, unsigned threads) {
  const Machine m = parse_machine(slurp(path));
  if (lo > hi) throw InputError("empty support range");
  if (hi - lo > 14) throw InputError("support range too wide for an exhaustive sweep");
  const auto t = flip >= 0 ? table::compile_with_flipped_write(m, o.K, static_cast<std::size_t>(flip))
                           : table::compile(m, o.K, o.k_max);
  std::vector<Tape> tapes;
  const int n = hi - lo + 1;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    std::set<std::int64_t> ones;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1) ones.insert(lo + i);
    }
    tapes.emplace_back(ones);
  }
  const auto rep = sim::verify_equivalence(m, t, tapes, o.budget, threads);
  if (o.json) {
    json j{{"pass", rep.pass}, {"tapes", rep.tapes}, {"halted", rep.halted}};
    if (!rep.pass) j["divergence"] = {{"tape", rep.failing_tape->str()}, {"step", rep.failing_step}, {"what", rep.divergence}};
    std::cout << j.dump() << "\n";
  } else if (rep.pass) {
    std::cout << "pass: " << rep.tapes << " tapes, " << rep.halted << " halted\n";
  } else {
    std::cout << "FAIL on tape " << rep.failing_tape->str() << " at step " << rep.failing_step << ": " << rep.divergence << "\n";
  }
  return rep.pass ? kOk : kNegative;
}

int cmd_audit(const Options& o, const std::string& mutate) {
  const int K = o.K_set ? o.K : 4;
  std::optional<geometry::WallPerturbation> mut;
  if (!mutate.empty()) {
    // k:index:dx
    const auto a = mutate.find(':'), b = mutate.rfind(':');
    if (a == std::string::npos || a == b) throw InputError("--mutate wants k:index:dx");
    mut = geometry::WallPerturbation{std::stoll(mutate.substr(0, a)), std::stoull(mutate.substr(a + 1, b - a - 1)),
                                     io::parse_exact(mutate.substr(b + 1))};
  }
  const auto reports = geometry::check_separation(K, o.k_max, mut);
  bool pass = true;
  std::optional<Rational> slack;
  std::uint64_t pairs = 0;
  json rows = json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    pairs += r.pairs;
    if (!slack || r.min_slack < *slack) slack = r.min_slack;
    rows.push_back({{"k", r.k}, {"k2", r.k2}, {"pairs", r.pairs}, {"min_slack", io::exact_str(r.min_slack)}, {"pass", r.pass}});
  }
  if (o.json) {
    std::cout << json{{"K", K}, {"pass", pass}, {"pairs", pairs}, {"min_slack", slack ? io::exact_str(*slack) : ""}, {"levels", rows}}
                     .dump()
              << "\n";
  } else {
    for (const auto& r : reports) {
      if (!r.pass) std::cout << "fail at levels " << r.k << "," << r.k2 << ": slack " << io::exact_str(r.min_slack) << "\n";
    }
    std::cout << (pass ? "pass" : "FAIL") << ": K=" << K << ", " << pairs << " checks, min slack "
              << (slack ? io::exact_str(*slack) + " (" + io::fixed(*slack, 12) + ")" : "-") << "\n";
  }
  return pass ? kOk : kNegative;
}

int cmd_svg(const std::string& path, const Options& o, int level_cap, int digits, bool trace) {
  if (o.out.empty()) throw InputError("svg needs -o");
  const auto t = table_from(path, o);
  io::SvgOptions svg;
  svg.level_cap = level_cap;
  svg.digits = digits;
  if (trace) svg.traces.push_back(sim::run_numeric(t, parse_tape(o.tape), o.budget, {o.precision}).path);
  spit(o.out, io::export_svg(t, svg));
  const auto walls = t.scene(level_cap).size();
  if (o.json) {
    std::cout << json{{"output", o.out}, {"walls", walls}}.dump() << "\n";
  } else {
    std::cout << "wrote " << o.out << " (" << walls << " walls)\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* cap = std::getenv("BILLIARD_KMAX")) {
    try {
      o.k_max = std::stoi(cap);
    } catch (const std::exception&) {
      std::cerr << "error: BILLIARD_KMAX must be an integer\n";
      return kInput;
    }
  }

  CLI::App app{"Compile reversible Turing machines into billiard tables and check them."};
  app.require_subcommand(1);
  auto common = [&](CLI::App* c) {
    c->add_flag("--json", o.json, "structured output");
    return c;
  };
  auto with_K = [&](CLI::App* c) {
    c->add_option_function<int>("--K", [&](const int& k) { o.K = k; o.K_set = true; }, "head range bound (default 8)");
    return c;
  };

  std::string machine, tape_arg;
  std::int64_t k = 0;
  int walls_level = 2, svg_level = 2, digits = 12, lo = -3, hi = 3, flip = -1;
  unsigned threads = 0;
  bool svg_trace = false;
  std::string mutate;

  auto* check = common(app.add_subcommand("check", "validate a machine and test reversibility"));
  check->add_option("machine", machine, "machine file")->required();

  auto* encode = common(app.add_subcommand("encode", "encode a tape and head position"));
  encode->add_option("tape", tape_arg, "tape literal, e.g. @1 or {2:1}")->required();
  encode->add_option("k", k, "head position");

  auto* compile = with_K(common(app.add_subcommand("compile", "compile a machine into a table file")));
  compile->add_option("machine", machine, "machine file")->required();
  compile->add_option("-o", o.out, "table file to write");
  compile->add_option("--walls-level", walls_level, "separator levels written to the file");

  auto* run = with_K(common(app.add_subcommand("run", "simulate a table on a tape")));
  run->add_option("table", machine, "machine or table file")->required();
  run->add_option("--tape", o.tape, "initial tape");
  run->add_option("--budget", o.budget, "machine steps");
  run->add_option("--mode", o.mode, "symbolic, numeric or both");
  run->add_option("--precision", o.precision, "numeric digits");
  run->add_option("-o", o.out, "trace file to write");

  auto* verify = with_K(common(app.add_subcommand("verify", "lockstep check against the machine on every tape")));
  verify->add_option("machine", machine, "machine file")->required();
  verify->add_option("--budget", o.budget, "machine steps");
  verify->add_option("--lo", lo, "lowest cell of the tape support");
  verify->add_option("--hi", hi, "highest cell of the tape support");
  verify->add_option("--flip-edge", flip, "compile with this edge's written bit flipped");
  verify->add_option("--threads", threads, "worker threads");

  auto* audit = with_K(common(app.add_subcommand("audit", "exact separation audit of the split walls")));
  audit->add_option("--mutate", mutate, "shift one wall: k:index:dx");

  auto* svg = with_K(common(app.add_subcommand("svg", "draw a table")));
  svg->add_option("table", machine, "machine or table file")->required();
  svg->add_option("-o", o.out, "SVG file")->required();
  svg->add_option("--levels", svg_level, "separator levels drawn");
  svg->add_option("--digits", digits, "decimal places");
  svg->add_flag("--trace", svg_trace, "overlay the numeric trajectory of --tape");
  svg->add_option("--tape", o.tape, "initial tape for --trace");
  svg->add_option("--budget", o.budget, "machine steps for --trace");
  svg->add_option("--precision", o.precision, "numeric digits for --trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInput;
  }

  try {
    validate(o);
    if (*check) return cmd_check(machine, o);
    if (*encode) return cmd_encode(tape_arg, k, o);
    if (*compile) return cmd_compile(machine, o, walls_level);
    if (*run) return cmd_run(machine, o);
    if (*verify) return cmd_verify(machine, o, lo, hi, flip, threads);
    if (*audit) return cmd_audit(o, mutate);
    if (*svg) return cmd_svg(machine, o, svg_level, digits, svg_trace);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const table::NotReversible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const io::TableFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const encoding::ResourceLimit& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const sim::PrecisionExhausted& e) {
    std::cerr << "precision exhausted: " << e.what() << "\n";
    return kNegative;
  } catch (const sim::TracingDegeneracy& e) {
    std::cerr << "tracing degeneracy: " << e.what() << "\n";
    return kInternal;
  } catch (const sim::CompilerBug& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const table::LayoutError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInput;
}
