#pragma once
// Test-only reference implementations. They read machine data directly and
// never call the library's step / reversibility / encoding routines.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tmb/exact.hpp"
#include "tmb/turing.hpp"

namespace oracle {

#ifndef TMB_FIXTURE_DIR
#define TMB_FIXTURE_DIR "tests/fixtures"
#endif

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(TMB_FIXTURE_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline tmb::Machine fixture(const std::string& name) { return tmb::parse_machine(read_fixture(name)); }

/// Configuration as (ones, state, head), independent of tmb::Configuration.
using RawConfig = std::tuple<std::set<std::int64_t>, int, std::int64_t>;

inline RawConfig raw_step(const tmb::Machine& m, const RawConfig& c) {
  auto [ones, q, k] = c;
  const int read = ones.count(k) ? 1 : 0;
  const auto& tr = m.transitions().at({q, read});
  if (tr.write) {
    ones.insert(k);
  } else {
    ones.erase(k);
  }
  return {ones, tr.target, k + tr.shift};
}

/// Exhaustive injectivity check over tapes with support in [-b,b], head in [-b,b].
inline bool brute_injective(const tmb::Machine& m, int b) {
  std::map<RawConfig, RawConfig> seen;
  const int cells = 2 * b + 1;
  for (int q = 0; q < static_cast<int>(m.num_states()); ++q) {
    if (m.is_halting(q)) continue;
    for (std::uint32_t bits = 0; bits < (1u << cells); ++bits) {
      std::set<std::int64_t> ones;
      for (int i = 0; i < cells; ++i) {
        if (bits >> i & 1u) ones.insert(i - b);
      }
      for (std::int64_t k = -b; k <= b; ++k) {
        RawConfig c{ones, q, k};
        auto img = raw_step(m, c);
        auto [it, fresh] = seen.emplace(img, c);
        if (!fresh && it->second != c) return false;
      }
    }
  }
  return true;
}

/// Random machine with `n` states, state n-1 halting.
inline tmb::Machine random_machine(std::mt19937_64& rng, int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("q" + std::to_string(i));
  std::map<std::pair<int, int>, tmb::Transition> delta;
  std::uniform_int_distribution<int> state(0, n - 1), bit(0, 1);
  for (int q = 0; q + 1 < n; ++q) {
    for (int a : {0, 1}) delta[{q, a}] = tmb::Transition{state(rng), bit(rng), bit(rng) ? 1 : -1};
  }
  return tmb::Machine(names, 0, {n - 1}, delta);
}

/// All tapes with support inside [lo, hi].
inline std::vector<tmb::Tape> all_tapes(int lo, int hi) {
  std::vector<tmb::Tape> out;
  const int cells = hi - lo + 1;
  for (std::uint32_t bits = 0; bits < (1u << cells); ++bits) {
    std::set<std::int64_t> ones;
    for (int i = 0; i < cells; ++i) {
      if (bits >> i & 1u) ones.insert(lo + i);
    }
    out.emplace_back(ones);
  }
  return out;
}

/// Exact value of 2 * sum t_n 3^-(digit(n)) computed with plain rationals.
inline tmb::Rational tape_value(const tmb::Tape& t) {
  tmb::Rational x = 0;
  for (auto n : t.ones()) {
    const std::int64_t digit = n >= 0 ? 2 * n + 1 : -2 * n;
    tmb::Rational term = 2;
    for (std::int64_t i = 0; i < digit; ++i) term /= 3;
    x += term;
  }
  return x;
}

/// tau_k from its closed form with plain rationals.
inline tmb::Rational tau_value(std::int64_t k, const tmb::Rational& x) {
  tmb::Rational scale = 1;
  const std::int64_t e = k < 0 ? 1 - k : 1 + k;
  for (std::int64_t i = 0; i < e; ++i) scale /= 3;
  return k < 0 ? scale * (1 + x) : 1 + scale * (x - 2);
}

inline tmb::Rational code_value(const tmb::Tape& t, std::int64_t k) { return tau_value(k, tape_value(t)); }

}  // namespace oracle
