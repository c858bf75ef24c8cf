#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tmb/exact.hpp"
#include "tmb/turing.hpp"

namespace tmb::encoding {

/// Thrown when a point is not the code of any (tape, head) pair.
class NotACode : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when enumeration would exceed the configured block cap.
class ResourceLimit : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr int kDefaultKMax = 64;

/// Ternary digit (1-based) of x_t that stores tape cell `cell`.
std::uint64_t digit_index(std::int64_t cell);

/// x_t = 2 (t_0 3^-1 + t_-1 3^-2 + t_1 3^-3 + ...).
TernaryRational encode_tape(const Tape& t);

/// Affine embedding of [0,1] onto I_k. Throws std::domain_error if x is outside [0,1].
TernaryRational tau(std::int64_t k, const TernaryRational& x);
/// Inverse of tau on I_k (no range check).
TernaryRational tau_inverse(std::int64_t k, const TernaryRational& y);
/// Scale factor of tau_k: 3^-(1+|k|).
unsigned tau_scale_exponent(std::int64_t k);

struct HeadInterval {
  std::int64_t k;
  TernaryRational lo;
  TernaryRational hi;
};

HeadInterval head_interval(std::int64_t k);

struct Decoded {
  Tape tape;
  std::int64_t head;
  friend bool operator==(const Decoded&, const Decoded&) = default;
};

struct EncodedPoint {
  TernaryRational value;
  std::optional<Decoded> decoded;
};

EncodedPoint encode_state(const Tape& t, std::int64_t k);

/// Head position k with x in I_k, if any.
std::optional<std::int64_t> head_of(const TernaryRational& x);
/// Exact inverse of encode_state; nullopt for points that are not codes.
std::optional<Decoded> decode(const TernaryRational& x);
std::optional<Decoded> decode(const Rational& x);

/// Moves the head by eps in {-1,+1} using the affine relations between I_k and I_{k+1}.
EncodedPoint shift_point(const EncodedPoint& x, int eps);
/// Symbol under the head.
Symbol read_digit(const EncodedPoint& x);
/// Writes s under the head: x +- 2*unit(k), or x unchanged.
EncodedPoint rewrite_point(const EncodedPoint& x, Symbol s);

/// Length of a Cantor block at head k: 3^-(3k+2) for k >= 0, 3^-(3|k|+1) for k < 0.
/// A symbol change under the head moves the code by twice this amount.
unsigned block_exponent(std::int64_t k);
TernaryRational block_length(std::int64_t k);

struct CantorBlock {
  std::int64_t k;
  std::vector<Symbol> prefix;  // digits before the head digit, most significant first
  Symbol symbol;
  TernaryRational lo;
  TernaryRational hi;
};

/// All blocks of I_k whose head cell holds s, left to right.
std::vector<CantorBlock> cantor_blocks(std::int64_t k, Symbol s, int k_max = kDefaultKMax);
/// Number of blocks per symbol at head k.
std::uint64_t block_count(std::int64_t k);

/// Prefix digits (interleaved tape cells before the head digit) of a tape for head k.
std::vector<Symbol> head_prefix(const Tape& t, std::int64_t k);

}  // namespace tmb::encoding
