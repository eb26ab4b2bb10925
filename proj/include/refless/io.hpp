#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cmv.hpp"
#include "herglotz.hpp"
#include "jacobi.hpp"
#include "measure.hpp"
#include "purity.hpp"
#include "schrodinger.hpp"
#include "sets.hpp"

namespace refless {

using Json = nlohmann::json;

using OperatorConfig = std::variant<JacobiCoefficients, VerblunskyCoefficients, PiecewisePotential>;
using SetConfig = std::variant<FiniteGapSet, ArcSet>;

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

// Rejects keys outside `allowed`, matching the shipped schemas.
inline void only_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw InvalidInput(what + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidInput("unknown field \"" + key + "\" in " + what);
  }
}

inline double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw InvalidInput(what + " must be a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, what));
  return out;
}

// A complex number is either a real number or [re, im].
inline cplx complex_number(const Json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], what), number(j[1], what)};
  throw InvalidInput(what + " must be a number or [re, im]");
}

inline std::vector<cplx> complex_numbers(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + " must be an array");
  std::vector<cplx> out;
  for (const auto& x : j) out.push_back(complex_number(x, what));
  return out;
}

inline Interval interval(const Json& j, const std::string& what) {
  auto v = numbers(j, what);
  if (v.size() != 2) throw InvalidInput(what + " must be [lo, hi]");
  return {v[0], v[1]};
}

inline JacobiTail jacobi_tail(const Json& j) {
  only_keys(j, {"a", "b"}, "Jacobi tail");
  JacobiTail t{numbers(require(j, "a"), "tail a"), numbers(require(j, "b"), "tail b")};
  if (t.a.empty() || t.a.size() != t.b.size()) throw InvalidInput("tail a and b need equal nonzero length");
  return t;
}

inline VerblunskyTail verblunsky_tail(const Json& j) {
  only_keys(j, {"alpha"}, "Verblunsky tail");
  VerblunskyTail t{complex_numbers(require(j, "alpha"), "tail alpha")};
  if (t.alpha.empty()) throw InvalidInput("empty Verblunsky tail");
  return t;
}

}  // namespace detail

// {"type":"jacobi","n_min":0,"a":[…],"b":[…],"left":{"a":[…],"b":[…]},"right":{…}}
// with "periodic":{"a":[…],"b":[…]} as shorthand for equal tails; missing
// tails are free.
inline JacobiCoefficients parse_jacobi(const Json& j) {
  detail::only_keys(j, {"type", "n_min", "a", "b", "periodic", "left", "right"}, "Jacobi operator");
  JacobiCoefficients c;
  if (j.contains("periodic")) c.left = c.right = detail::jacobi_tail(j["periodic"]);
  if (j.contains("left")) c.left = detail::jacobi_tail(j["left"]);
  if (j.contains("right")) c.right = detail::jacobi_tail(j["right"]);
  if (j.contains("n_min")) c.n_min = j["n_min"].get<long>();
  if (j.contains("a")) c.a_core = detail::numbers(j["a"], "a");
  if (j.contains("b")) c.b_core = detail::numbers(j["b"], "b");
  if (c.a_core.size() != c.b_core.size()) throw InvalidInput("core a and b need equal length");
  c.validate();
  return c;
}

// {"type":"cmv","n_min":0,"alpha":[…],"left":{"alpha":[…]},"right":{…}},
// complex entries as numbers or [re, im].
inline VerblunskyCoefficients parse_cmv(const Json& j) {
  detail::only_keys(j, {"type", "n_min", "alpha", "periodic", "left", "right"}, "CMV operator");
  VerblunskyCoefficients c;
  if (j.contains("periodic")) c.left = c.right = detail::verblunsky_tail(j["periodic"]);
  if (j.contains("left")) c.left = detail::verblunsky_tail(j["left"]);
  if (j.contains("right")) c.right = detail::verblunsky_tail(j["right"]);
  if (j.contains("n_min")) c.n_min = j["n_min"].get<long>();
  if (j.contains("alpha")) c.core = detail::complex_numbers(j["alpha"], "alpha");
  c.validate();
  return c;
}

// {"type":"schrodinger","cells":[{"interval":[a,b],"v":c},…],"v_left":…,"v_right":…}
inline PiecewisePotential parse_schrodinger(const Json& j) {
  detail::only_keys(j, {"type", "cells", "v_left", "v_right"}, "Schrodinger operator");
  std::vector<PotentialCell> cells;
  if (j.contains("cells")) {
    if (!j["cells"].is_array()) throw InvalidInput("cells must be an array");
    for (const auto& c : j["cells"]) {
      detail::only_keys(c, {"interval", "v"}, "potential cell");
      auto iv = detail::interval(detail::require(c, "interval"), "cell interval");
      cells.push_back({iv.lo, iv.hi, detail::number(detail::require(c, "v"), "cell v")});
    }
  }
  const double vl = j.contains("v_left") ? detail::number(j["v_left"], "v_left") : 0.0;
  const double vr = j.contains("v_right") ? detail::number(j["v_right"], "v_right") : 0.0;
  return PiecewisePotential::from_cells(std::move(cells), vl, vr);
}

inline OperatorConfig parse_operator(const Json& j) {
  const auto type = detail::require(j, "type").get<std::string>();
  if (type == "jacobi") return parse_jacobi(j);
  if (type == "cmv") return parse_cmv(j);
  if (type == "schrodinger") return parse_schrodinger(j);
  throw InvalidInput("unknown operator type \"" + type + "\"");
}

// {"bands":[[lo,hi],…],"unbounded":false} on the line,
// {"arcs":[[θ1,θ2],…]} or {"arcs":"full"} on the circle.
inline SetConfig parse_set(const Json& j) {
  if (j.contains("bands")) {
    detail::only_keys(j, {"bands", "unbounded"}, "line set");
    std::vector<Interval> bands;
    if (!j["bands"].is_array()) throw InvalidInput("bands must be an array");
    for (const auto& b : j["bands"]) bands.push_back(detail::interval(b, "band"));
    return FiniteGapSet::from_bands(std::move(bands), j.value("unbounded", false));
  }
  if (j.contains("arcs")) {
    detail::only_keys(j, {"arcs"}, "arc set");
    if (j["arcs"].is_string()) {
      if (j["arcs"] != "full") throw InvalidInput("arcs must be a list or \"full\"");
      return ArcSet::full_circle();
    }
    std::vector<Arc> arcs;
    if (!j["arcs"].is_array()) throw InvalidInput("arcs must be an array");
    for (const auto& a : j["arcs"]) {
      auto iv = detail::interval(a, "arc");
      arcs.push_back({iv.lo, iv.hi});
    }
    return ArcSet::from_kept(std::move(arcs));
  }
  throw InvalidInput("set needs \"bands\" or \"arcs\"");
}

// {"space":"line"|"circle","c":0,"slope":0,"kernel":"stieltjes"|"nevanlinna",
//  "atoms":[[position,weight],…],
//  "ac":[{"interval":[lo,hi],"edge":"regular"|"inverse_sqrt","smooth":k}
//        or {…,"samples":[values at Chebyshev points]}]}
inline SpectralMeasure parse_measure(const Json& j) {
  detail::only_keys(j, {"space", "kernel", "c", "slope", "atoms", "ac"}, "measure");
  SpectralMeasure mu;
  const auto space = j.value("space", std::string("line"));
  if (space != "line" && space != "circle") throw InvalidInput("space must be line or circle");
  mu.space = space == "line" ? Space::Line : Space::Circle;
  if (j.contains("atoms")) {
    for (const auto& a : j["atoms"]) {
      auto v = detail::numbers(a, "atom");
      if (v.size() != 2) throw InvalidInput("atom must be [position, weight]");
      mu.atoms.push_back({v[0], v[1]});
    }
  }
  if (j.contains("ac")) {
    for (const auto& p : j["ac"]) {
      detail::only_keys(p, {"interval", "edge", "smooth", "samples"}, "ac piece");
      auto iv = detail::interval(detail::require(p, "interval"), "ac interval");
      const auto edge_name = p.value("edge", std::string("regular"));
      if (edge_name != "regular" && edge_name != "inverse_sqrt") throw InvalidInput("edge must be regular or inverse_sqrt");
      const Edge edge = edge_name == "regular" ? Edge::Regular : Edge::InverseSqrt;
      if (p.contains("samples")) {
        mu.ac.push_back(AcPiece::from_samples(iv.lo, iv.hi, detail::numbers(p["samples"], "samples"), edge));
      } else {
        const double k = detail::number(detail::require(p, "smooth"), "smooth");
        mu.ac.push_back({iv.lo, iv.hi, [k](double) { return k; }, edge});
      }
    }
  }
  mu.validate();
  return mu;
}

inline HerglotzFunction parse_herglotz(const Json& j) {
  const auto kernel = j.value("kernel", std::string("stieltjes"));
  if (kernel != "stieltjes" && kernel != "nevanlinna") throw InvalidInput("kernel must be stieltjes or nevanlinna");
  return HerglotzFunction(j.value("c", 0.0), j.value("slope", 0.0), parse_measure(j),
                          kernel == "stieltjes" ? Kernel::Stieltjes : Kernel::Nevanlinna);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

// A path, or inline JSON when the text starts with '{'.
inline Json load_json(const std::string& path_or_text) {
  const auto first = path_or_text.find_first_not_of(" \t\n");
  if (first != std::string::npos && path_or_text[first] == '{') {
    try {
      return Json::parse(path_or_text);
    } catch (const Json::parse_error& e) {
      throw InvalidInput(std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(path_or_text);
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline Json complex_json(cplx z) { return z.imag() == 0.0 ? Json(z.real()) : Json::array({z.real(), z.imag()}); }

// JSON has no infinities; they are written as strings.
inline Json real_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

}  // namespace detail

inline Json to_json(const JacobiCoefficients& c) {
  return {{"type", "jacobi"},
          {"n_min", c.n_min},
          {"a", c.a_core},
          {"b", c.b_core},
          {"left", {{"a", c.left.a}, {"b", c.left.b}}},
          {"right", {{"a", c.right.a}, {"b", c.right.b}}}};
}

inline Json to_json(const VerblunskyCoefficients& c) {
  auto arr = [](const std::vector<cplx>& v) {
    Json out = Json::array();
    for (auto z : v) out.push_back(detail::complex_json(z));
    return out;
  };
  return {{"type", "cmv"},
          {"n_min", c.n_min},
          {"alpha", arr(c.core)},
          {"left", {{"alpha", arr(c.left.alpha)}}},
          {"right", {{"alpha", arr(c.right.alpha)}}}};
}

inline Json to_json(const PiecewisePotential& v) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < v.values.size(); ++i)
    cells.push_back({{"interval", {v.breaks[i], v.breaks[i + 1]}}, {"v", v.values[i]}});
  return {{"type", "schrodinger"}, {"cells", cells}, {"v_left", v.v_left}, {"v_right", v.v_right}};
}

inline Json to_json(const FiniteGapSet& s) {
  Json bands = Json::array();
  for (const auto& b : s.bands()) bands.push_back({b.lo, b.hi});
  return {{"bands", bands}, {"unbounded", s.unbounded}};
}

inline Json to_json(const ArcSet& s) {
  if (s.is_full()) return {{"arcs", "full"}};
  Json arcs = Json::array();
  for (const auto& k : s.kept()) arcs.push_back({k.lo, k.hi});
  return {{"arcs", arcs}};
}

inline Json to_json(const OperatorConfig& op) {
  return std::visit([](const auto& o) { return to_json(o); }, op);
}
inline Json to_json(const SetConfig& s) {
  return std::visit([](const auto& o) { return to_json(o); }, s);
}

inline Json to_json(const Thresholds& t) {
  return {{"defect", t.defect}, {"xi", t.xi}, {"atom", t.atom}, {"mass", t.mass}};
}

inline Thresholds parse_thresholds(const Json& j, Thresholds base = {}) {
  detail::only_keys(j, {"defect", "xi", "atom", "mass"}, "thresholds");
  auto take = [&](const char* key, double& slot) {
    if (j.contains(key)) {
      slot = detail::number(j[key], key);
      if (!(slot > 0.0)) throw InvalidInput(std::string(key) + " threshold must be positive");
    }
  };
  take("defect", base.defect);
  take("xi", base.xi);
  take("atom", base.atom);
  take("mass", base.mass);
  return base;
}

inline Json to_json(const PurityReport& r) {
  using detail::real_json;
  Json stages = Json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"name", s.name},
                      {"status", to_string(s.status)},
                      {"value", real_json(s.value)},
                      {"threshold", real_json(s.threshold)},
                      {"note", s.note}});
  Json ledger = Json::array();
  for (const auto& l : r.ledger)
    ledger.push_back({{"position", real_json(l.position)}, {"weight", real_json(l.weight)}, {"near", l.near}});
  Json density = Json::array();
  for (const auto& d : r.ac_density)
    density.push_back({{"x", real_json(d.x)}, {"density", real_json(d.density)}, {"converged", d.converged}});
  Json atoms = Json::array();
  for (const auto& a : r.atoms) atoms.push_back({{"position", real_json(a.position)}, {"mass", real_json(a.mass)}});
  Json out = {{"operator", r.operator_kind},
              {"set", r.set_description},
              {"thresholds", to_json(r.thresholds)},
              {"reflectionless_sup_defect", real_json(r.defect_sup)},
              {"reflectionless_mean_defect", real_json(r.defect_mean)},
              {"xi_deviation", real_json(r.xi_deviation)},
              {"homogeneity_epsilon", real_json(r.homogeneity)},
              {"far_part",
               {{"sup", real_json(r.far.sup)},
                {"bound", real_json(r.far.bound)},
                {"distance", real_json(r.far.distance)},
                {"mass", real_json(r.far.mass)}}},
              {"eigen_ledger", ledger},
              {"ac_density", density},
              {"atoms_on_set", atoms},
              {"total_mass", real_json(r.total_mass)},
              {"mass_residual", real_json(r.mass_residual)},
              {"stages", stages},
              {"verdict", to_string(r.verdict)},
              {"reason", r.reason}};
  if (r.blaschke) {
    Json b = {{"classification", to_string(r.blaschke->classification)},
              {"partial_sum", real_json(r.blaschke->partial_sum)},
              {"terms", r.blaschke->terms.size()}};
    if (r.blaschke->fitted_power) b["fitted_power"] = *r.blaschke->fitted_power;
    out["blaschke"] = b;
  } else {
    out["blaschke"] = nullptr;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration

struct GridSpec {
  double start = 0.0, stop = 0.0;
  int count = 2;

  // "start:stop:count", inclusive of both ends; "x:x:1" is the single point x.
  static GridSpec parse(const std::string& text) {
    std::stringstream ss(text);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c) || c.find(':') != std::string::npos)
      throw InvalidInput("grid must be start:stop:count");
    GridSpec g;
    try {
      std::size_t pa = 0, pb = 0, pc = 0;
      g.start = std::stod(a, &pa);
      g.stop = std::stod(b, &pb);
      g.count = std::stoi(c, &pc);
      if (pa != a.size() || pb != b.size() || pc != c.size()) throw InvalidInput("");
    } catch (const std::exception&) {
      throw InvalidInput("grid must be start:stop:count with numeric fields");
    }
    if (g.count == 1 && g.start == g.stop) return g;
    if (g.count < 2) throw InvalidInput("grid count must be at least 2 unless start == stop");
    if (!(g.stop > g.start)) throw InvalidInput("grid needs stop > start");
    return g;
  }
  std::vector<double> points() const {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = i + 1 == count ? stop : start + (stop - start) * i / (count - 1.0);
    return out;
  }
  std::string text() const {
    std::ostringstream os;
    os << std::setprecision(17) << start << ':' << stop << ':' << count;
    return os.str();
  }
  bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
  std::string command;
  std::optional<OperatorConfig> op;
  std::optional<SetConfig> set;
  std::optional<GridSpec> grid;
  double margin = 1e-3;
  int ladder_first = 10, ladder_last = 40;
  Thresholds thresholds;
  long n0 = 0;
  double x0 = 0.0;
  std::string out;
  std::string csv;
  unsigned seed = 0;
  Json params = Json::object();  // command-specific options

  bool operator==(const RunConfig& o) const {
    return command == o.command && op == o.op && set == o.set && grid == o.grid && margin == o.margin &&
           ladder_first == o.ladder_first && ladder_last == o.ladder_last && thresholds.defect == o.thresholds.defect &&
           thresholds.xi == o.thresholds.xi && thresholds.atom == o.thresholds.atom &&
           thresholds.mass == o.thresholds.mass && n0 == o.n0 && x0 == o.x0 && out == o.out && csv == o.csv &&
           seed == o.seed && params == o.params;
  }
};

inline Json to_json(const RunConfig& rc) {
  Json j = {{"command", rc.command},
            {"margin", rc.margin},
            {"ladder", {rc.ladder_first, rc.ladder_last}},
            {"thresholds", to_json(rc.thresholds)},
            {"n0", rc.n0},
            {"x0", rc.x0},
            {"seed", rc.seed},
            {"params", rc.params}};
  if (rc.op) j["operator"] = to_json(*rc.op);
  if (rc.set) j["set"] = to_json(*rc.set);
  if (rc.grid) j["grid"] = rc.grid->text();
  if (!rc.out.empty()) j["out"] = rc.out;
  if (!rc.csv.empty()) j["csv"] = rc.csv;
  return j;
}

// "operator" and "set" may be inline objects or file paths.
inline RunConfig parse_run_config(const Json& j) {
  detail::only_keys(j, {"command", "operator", "set", "grid", "margin", "ladder", "thresholds", "n0", "x0", "out", "csv",
                       "seed", "params"},
                    "run configuration");
  RunConfig rc;
  rc.command = detail::require(j, "command").get<std::string>();
  auto object_or_file = [](const Json& v) { return v.is_string() ? read_json_file(v.get<std::string>()) : v; };
  if (j.contains("operator")) rc.op = parse_operator(object_or_file(j["operator"]));
  if (j.contains("set")) rc.set = parse_set(object_or_file(j["set"]));
  if (j.contains("grid")) rc.grid = GridSpec::parse(j["grid"].get<std::string>());
  rc.margin = j.value("margin", rc.margin);
  if (j.contains("ladder")) {
    auto l = j["ladder"];
    if (!l.is_array() || l.size() != 2) throw InvalidInput("ladder must be [first, last] exponents");
    rc.ladder_first = l[0].get<int>();
    rc.ladder_last = l[1].get<int>();
    if (rc.ladder_last - rc.ladder_first < 2) throw InvalidInput("ladder needs at least three rungs");
  }
  if (j.contains("thresholds")) rc.thresholds = parse_thresholds(j["thresholds"]);
  rc.n0 = j.value("n0", 0L);
  rc.x0 = j.value("x0", 0.0);
  rc.out = j.value("out", std::string());
  rc.csv = j.value("csv", std::string());
  rc.seed = j.value("seed", 0u);
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw InvalidInput("params must be an object");
    rc.params = j["params"];
  }
  return rc;
}

// ---------------------------------------------------------------------------
// CSV

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << *d;
    return os.str();
  }
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  return csv_field(std::get<std::string>(c));
}

}  // namespace detail

// Header row plus one line per row, CRLF-free, 17 significant digits.
inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + detail::csv_field(t.header[i]);
  out += '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw InvalidInput("table is not rectangular");
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + detail::format_cell(r[i]);
    out += '\n';
  }
  return out;
}

inline void emit_csv(const Table& t, const std::string& path) {
  const auto text = to_csv(t);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path);
  f << text;
  if (!f) throw InvalidInput("cannot write " + path);
}

inline void emit_json(const Json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path);
  f << j.dump(2) << '\n';
  if (!f) throw InvalidInput("cannot write " + path);
}

inline Table density_table(const std::vector<DensityRow>& rows) {
  Table t{{"lambda", "density", "converged"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.x, r.density, static_cast<long>(r.converged)});
  return t;
}

}  // namespace refless
