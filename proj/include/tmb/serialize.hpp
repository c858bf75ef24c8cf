#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tmb/table.hpp"

namespace tmb::io {

inline constexpr const char* kTableFormat = "tmbilliard-table/1";

/// Malformed table file, or one that does not match the machine it embeds.
class TableFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "n/3^e" when the denominator is a power of 3, else "p/q".
std::string exact_str(const Rational& r);
Rational parse_exact(std::string_view s);

nlohmann::json to_json(const geometry::Point& p);
nlohmann::json to_json(const geometry::Port& p);
nlohmann::json to_json(const geometry::Wall& w);
nlohmann::json to_json(const geometry::TransferMap& t);
/// Kind, params, ports, walls and transfer pieces in the gadget's local frame.
nlohmann::json gadget_json(const geometry::Gadget& g, int level_cap);

/// Whole table: meta, machine text, gadgets with placements, links, corridors,
/// charts and the global scene (separator families up to level_cap).
nlohmann::json table_json(const table::BilliardTable& t, int level_cap = 2);
std::string serialize_table(const table::BilliardTable& t, int level_cap = 2);

/// Recompiles the embedded machine and checks the document field by field.
table::BilliardTable load_table(std::string_view text);

struct SvgOptions {
  int level_cap{2};
  int digits{12};
  /// Polylines drawn over the table, in table coordinates.
  std::vector<std::vector<geometry::Point>> traces;
};

/// Fixed-point decimal with `digits` places, rounded half away from zero.
std::string fixed(const Rational& r, int digits);

std::string export_svg(const table::BilliardTable& t, const SvgOptions& opt = {});

}  // namespace tmb::io
