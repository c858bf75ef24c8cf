#include "tmb/serialize.hpp"

#include <sstream>

namespace tmb::io {

using geometry::ParabolaArc;
using geometry::Point;
using geometry::Port;
using geometry::Segment;
using geometry::Wall;
using nlohmann::json;

std::string exact_str(const Rational& r) {
  if (auto t = TernaryRational::from_rational(r)) return t->str();
  return tmb::to_string(r);
}

Rational parse_exact(std::string_view s) {
  if (s.find("^") != std::string_view::npos) return TernaryRational::parse(s).to_rational();
  return parse_rational(s);
}

json to_json(const Point& p) { return json::array({exact_str(p.x), exact_str(p.y)}); }

json to_json(const Port& p) {
  return {{"origin", to_json(p.origin)},
          {"travel", geometry::to_string(p.travel)},
          {"axis", geometry::to_string(p.axis)},
          {"lo", exact_str(p.lo)},
          {"hi", exact_str(p.hi)}};
}

json to_json(const Wall& w) {
  json j{{"key", w.key}, {"role", geometry::to_string(w.role)}};
  if (const auto* s = std::get_if<Segment>(&w.shape)) {
    j["segment"] = json::array({to_json(s->a), to_json(s->b)});
  } else {
    const auto& a = std::get<ParabolaArc>(w.shape);
    j["parabola"] = {{"vertex", to_json(a.vertex)},
                     {"p", exact_str(a.p)},
                     {"opening", a.opening},
                     {"x", json::array({exact_str(a.xlo), exact_str(a.xhi)})}};
  }
  return j;
}

json to_json(const geometry::TransferMap& t) {
  json out = json::array();
  for (const auto& p : t.pieces()) {
    out.push_back({{"in", p.in_port},
                   {"domain", json::array({exact_str(p.lo), exact_str(p.hi)})},
                   {"a", exact_str(p.a)},
                   {"b", exact_str(p.b)},
                   {"out", p.out_port},
                   {"label", p.label}});
  }
  return out;
}

json gadget_json(const geometry::Gadget& g, int level_cap) {
  json j{{"kind", geometry::to_string(g.kind())}, {"params", g.params()}};
  json ins = json::array(), outs = json::array(), walls = json::array();
  for (const auto& p : g.inputs()) ins.push_back(to_json(p));
  for (const auto& p : g.outputs()) outs.push_back(to_json(p));
  for (const auto& w : g.walls(level_cap)) walls.push_back(to_json(w));
  j["inputs"] = std::move(ins);
  j["outputs"] = std::move(outs);
  j["walls"] = std::move(walls);
  j["transfer"] = to_json(g.transfer(level_cap));
  return j;
}

json table_json(const table::BilliardTable& t, int level_cap) {
  const Machine& m = t.machine();
  json doc;
  doc["meta"] = {{"format", kTableFormat},
                 {"machine_hash", m.hash()},
                 {"K", t.K()},
                 {"pitch", exact_str(t.pitch())},
                 {"walls_level", level_cap}};
  doc["machine"] = m.str();

  json gadgets = json::array();
  for (const auto& pg : t.gadgets()) {
    json g = gadget_json(*pg.gadget, level_cap);
    g["name"] = pg.name;
    g["placement"] = {{"mirror", pg.placement.mirror}, {"dx", exact_str(pg.placement.dx)}, {"dy", exact_str(pg.placement.dy)}};
    gadgets.push_back(std::move(g));
  }
  doc["gadgets"] = std::move(gadgets);

  json links = json::array();
  for (const auto& l : t.links()) {
    links.push_back({{"from", l.from}, {"out", l.out_port}, {"to", l.to}, {"in", l.in_port}, {"offset", exact_str(l.offset)}});
  }
  doc["links"] = std::move(links);

  json corridors = json::array();
  for (const auto& c : t.corridors()) {
    corridors.push_back({{"edge",
                          {{"source", m.name(c.edge.source)},
                           {"read", c.edge.read},
                           {"write", c.edge.write},
                           {"shift", c.edge.shift},
                           {"target", m.name(c.edge.target)}}},
                         {"exit", json::array({c.exit_gadget, c.exit_port})},
                         {"entry", json::array({c.entry_gadget, c.entry_port})},
                         {"route", c.route}});
  }
  doc["corridors"] = std::move(corridors);

  json charts = json::array();
  auto chart = [&](const table::Chart& c) { charts.push_back({{"name", c.name}, {"port", to_json(c.port)}}); };
  chart(table::iota_chart(t, table::ChartKind::Initial));
  chart(table::iota_chart(t, table::ChartKind::Halt));
  for (StateId q = 0; q < static_cast<StateId>(m.num_states()); ++q) {
    chart(table::iota_chart(t, table::ChartKind::State, m.name(q)));
  }
  doc["charts"] = std::move(charts);

  json scene = json::array();
  for (const auto& w : t.scene(level_cap)) scene.push_back(to_json(w));
  doc["scene"] = std::move(scene);
  return doc;
}

std::string serialize_table(const table::BilliardTable& t, int level_cap) {
  return table_json(t, level_cap).dump(1) + "\n";
}

table::BilliardTable load_table(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TableFormatError(std::string("table file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("meta") || !doc.contains("machine"))
    throw TableFormatError("table file lacks meta or machine block");
  const json& meta = doc["meta"];
  if (meta.value("format", "") != kTableFormat)
    throw TableFormatError("unsupported table format '" + meta.value("format", "") + "'");
  const Machine m = parse_machine(doc["machine"].get<std::string>());
  if (meta.value("machine_hash", "") != m.hash()) throw TableFormatError("machine hash mismatch");
  const int K = meta.at("K").get<int>();
  const int level_cap = meta.at("walls_level").get<int>();
  table::BilliardTable t = table::compile(m, K, std::max(K, encoding::kDefaultKMax));
  const json fresh = table_json(t, level_cap);
  if (fresh != doc) {
    const json patch = json::diff(fresh, doc);
    const std::string where = patch.empty() ? "?" : patch[0].value("path", "?");
    throw TableFormatError("table file differs from the compiled machine at " + where);
  }
  return t;
}

std::string fixed(const Rational& r, int digits) {
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const BigInt num = boost::multiprecision::numerator(r) * scale;
  const BigInt den = boost::multiprecision::denominator(r);
  BigInt q = num / den;
  const BigInt rem = num - q * den;
  if (2 * abs(rem) >= den) q += num < 0 ? -1 : 1;
  const bool neg = q < 0;
  std::string s = (neg ? -q : q).str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "0") return s;
  return neg ? "-" + s : s;
}

std::string export_svg(const table::BilliardTable& t, const SvgOptions& opt) {
  const geometry::BBox b = t.bounds();
  const Rational margin = 2;
  const Rational top = b.yhi + margin;
  const int d = opt.digits;
  auto X = [&](const Rational& x) { return fixed(x, d); };
  auto Y = [&](const Rational& y) { return fixed(top - y, d); };
  auto pt = [&](const Point& p) { return X(p.x) + " " + Y(p.y); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << X(b.xlo - margin) << " 0 "
      << X(b.xhi - b.xlo + 2 * margin) << " " << X(b.yhi - b.ylo + 2 * margin) << "\">\n"
      << "<style>.wall{fill:none;stroke:#111;stroke-width:0.05}.halt{stroke:#c00}.launch{stroke:#070}"
         ".checkpoint{stroke:#06c;stroke-width:0.15}.trace{fill:none;stroke:#e80;stroke-width:0.03}</style>\n";
  for (const auto& w : t.scene(opt.level_cap)) {
    std::string cls = "wall";
    if (w.role == geometry::WallRole::Halt) cls += " halt";
    if (w.role == geometry::WallRole::Launch) cls += " launch";
    out << "<path class=\"" << cls << "\" data-key=\"" << w.key << "\" d=\"";
    if (const auto* s = std::get_if<Segment>(&w.shape)) {
      out << "M " << pt(s->a) << " L " << pt(s->b);
    } else {
      // the arc is exactly a quadratic Bezier
      const auto& a = std::get<ParabolaArc>(w.shape);
      const Rational c = Rational(a.opening) / (4 * a.p);
      const Point p0{a.xlo, a.y_at(a.xlo)}, p2{a.xhi, a.y_at(a.xhi)};
      const Rational xm = (a.xlo + a.xhi) / 2;
      const Point p1{xm, p0.y + 2 * c * (a.xlo - a.vertex.x) * (xm - a.xlo)};
      out << "M " << pt(p0) << " Q " << pt(p1) << " " << pt(p2);
    }
    out << "\"/>\n";
  }
  for (StateId q = 0; q < static_cast<StateId>(t.machine().num_states()); ++q) {
    const auto c = table::iota_chart(t, table::ChartKind::State, t.machine().name(q));
    out << "<line class=\"checkpoint\" data-state=\"" << c.name << "\" x1=\"" << X(c.to_point(0).x) << "\" y1=\""
        << Y(c.to_point(0).y) << "\" x2=\"" << X(c.to_point(1).x) << "\" y2=\"" << Y(c.to_point(1).y) << "\"/>\n";
  }
  for (const auto& tr : opt.traces) {
    out << "<polyline class=\"trace\" points=\"";
    for (std::size_t i = 0; i < tr.size(); ++i) out << (i ? " " : "") << X(tr[i].x) << "," << Y(tr[i].y);
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tmb::io
