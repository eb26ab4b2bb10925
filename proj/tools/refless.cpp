#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <refless/refless.hpp>

using namespace refless;

namespace {

constexpr int exit_ok = 0, exit_fail = 1, exit_config = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
const T& need(const std::optional<T>& v, const char* what) {
  if (!v) throw ConfigError(std::string("missing ") + what);
  return *v;
}

const FiniteGapSet& line_set(const RunConfig& rc) {
  const auto& s = need(rc.set, "--set");
  if (const auto* e = std::get_if<FiniteGapSet>(&s)) return *e;
  throw ConfigError("this command needs a line set (bands)");
}

Ladder ladder_of(const RunConfig& rc, Space space) {
  if (rc.ladder_first == 10 && rc.ladder_last == 40)
    return space == Space::Line ? default_line_ladder() : default_circle_ladder();
  return Ladder::geometric(rc.ladder_first, rc.ladder_last);
}

std::vector<double> points_of(const RunConfig& rc) { return need(rc.grid, "--grid").points(); }

void write_table(const Table& t, const RunConfig& rc) {
  if (rc.out.empty())
    std::cout << to_csv(t);
  else
    emit_csv(t, rc.out);
}

// Console scalars carry 15 significant digits; files keep full precision.
std::string fmt(double x) {
  std::ostringstream os;
  os.precision(15);
  os << x;
  return os.str();
}

int cmd_xi(const RunConfig& rc) {
  const auto& op = need(rc.op, "--op");
  Table t{{"x", "xi", "decided"}, {}};
  for (double x : points_of(rc)) {
    XiValue v;
    if (const auto* j = std::get_if<JacobiCoefficients>(&op)) v = xi_function(*j, rc.n0, x, ladder_of(rc, Space::Line));
    if (const auto* c = std::get_if<VerblunskyCoefficients>(&op)) v = xi_cmv(*c, rc.n0, x, ladder_of(rc, Space::Circle));
    if (const auto* s = std::get_if<PiecewisePotential>(&op)) v = xi_schrodinger(*s, rc.x0, x, ladder_of(rc, Space::Line));
    t.rows.push_back({x, v.value, static_cast<long>(v.decided)});
  }
  write_table(t, rc);
  return exit_ok;
}

int cmd_mfun(const RunConfig& rc) {
  const auto& op = need(rc.op, "--op");
  const auto side_name = rc.params.value("side", std::string("plus"));
  if (side_name != "plus" && side_name != "minus") throw ConfigError("--side must be plus or minus");
  const Side side = side_name == "plus" ? Side::Plus : Side::Minus;
  const double eps = rc.params.value("eps", 0.0);
  const bool circle = std::holds_alternative<VerblunskyCoefficients>(op);
  AnalyticFn f;
  if (const auto* j = std::get_if<JacobiCoefficients>(&op))
    f = [j, side, n0 = rc.n0](cplx z) { return m_halflattice(*j, side, n0, z); };
  if (const auto* c = std::get_if<VerblunskyCoefficients>(&op))
    f = [c, side, n0 = rc.n0](cplx z) { return m_cmv(*c, side, n0, z); };
  if (const auto* s = std::get_if<PiecewisePotential>(&op))
    f = [s, side, x0 = rc.x0](cplx z) { return m_schrodinger(*s, side, x0, z); };
  Table t{{"x", "re", "im", "converged"}, {}};
  for (double x : points_of(rc)) {
    cplx v;
    bool ok = true;
    if (eps > 0.0) {
      v = circle ? f((1.0 - eps) * std::polar(1.0, x)) : f(cplx(x, eps));
    } else {
      auto bv = circle ? boundary_value_circle(f, x, ladder_of(rc, Space::Circle))
                       : boundary_value_line(f, x, ladder_of(rc, Space::Line));
      v = bv.value;
      ok = bv.converged;
    }
    t.rows.push_back({x, v.real(), v.imag(), static_cast<long>(ok)});
  }
  write_table(t, rc);
  return exit_ok;
}

int cmd_green(const RunConfig& rc) {
  const auto& set = line_set(rc);
  Table t{{"x", "green"}, {}};
  if (rc.params.contains("pole")) {
    const double l0 = rc.params["pole"].get<double>();
    const auto img = green_data(invert_set(set, l0));
    for (double x : points_of(rc)) t.rows.push_back({x, green_eval_finite_pole(img, x, l0).value});
  } else {
    const auto gd = green_data(set);
    for (double x : points_of(rc)) t.rows.push_back({x, green_eval(gd, x)});
  }
  write_table(t, rc);
  return exit_ok;
}

int cmd_capacity(const RunConfig& rc) {
  std::cout << fmt(green_data(line_set(rc)).capacity) << '\n';
  return exit_ok;
}

int cmd_homog(const RunConfig& rc) {
  const auto& s = need(rc.set, "--set");
  const auto h = std::visit([](const auto& e) { return homogeneity_epsilon(e); }, s);
  std::cout << fmt(h.epsilon) << '\n';
  return h.homogeneous ? exit_ok : exit_fail;
}

int cmd_blaschke(const RunConfig& rc) {
  const auto& set = line_set(rc);
  Pole pole;
  if (rc.params.contains("pole")) pole = {Pole::Finite, rc.params["pole"].get<double>()};
  BlaschkeResult res;
  if (rc.params.contains("points")) {
    res = blaschke_sum(set, rc.params["points"].get<std::vector<double>>(), pole);
  } else if (rc.params.contains("power")) {
    const double edge = rc.params.value("edge", set.e_inf), p = rc.params["power"].get<double>();
    const int count = rc.params.value("count", 40);
    res = blaschke_sum(set, [edge, p](int k) { return edge + std::pow(static_cast<double>(k), -p); }, count, pole);
  } else {
    throw ConfigError("blaschke needs --points or --power");
  }
  std::cout << "classification " << to_string(res.classification) << '\n'
            << "partial_sum " << fmt(res.partial_sum) << '\n';
  if (res.fitted_power) std::cout << "fitted_power " << fmt(*res.fitted_power) << '\n';
  return res.classification == SeriesClass::Divergent ? exit_fail : exit_ok;
}

int cmd_reflect(const RunConfig& rc) {
  const auto& op = need(rc.op, "--op");
  const auto& set = need(rc.set, "--set");
  const int count = rc.params.value("count", 101);
  Defect d;
  if (const auto* j = std::get_if<JacobiCoefficients>(&op)) {
    const auto& e = line_set(rc);
    d = reflectionless_defect(*j, rc.n0, e, band_grid(e, count, rc.margin), ladder_of(rc, Space::Line));
  } else if (const auto* c = std::get_if<VerblunskyCoefficients>(&op)) {
    const auto* e = std::get_if<ArcSet>(&set);
    if (!e) throw ConfigError("CMV operators need an arc set");
    d = reflectionless_defect_cmv(*c, rc.n0, *e, arc_grid(*e, count, rc.margin), ladder_of(rc, Space::Circle));
  } else {
    const auto& e = line_set(rc);
    const FiniteGapSet cut{e.e0, e.unbounded ? std::max(e.e_inf, rc.params.value("cap", 100.0)) : e.e_inf, e.gaps, false};
    d = reflectionless_defect_schrodinger(std::get<PiecewisePotential>(op), rc.x0, e, band_grid(cut, count, rc.margin),
                                          ladder_of(rc, Space::Line));
  }
  std::cout << "sup_defect " << fmt(d.sup) << '\n' << "mean_defect " << fmt(d.mean) << '\n'
            << "evaluated " << d.evaluated << '\n' << "undecided " << d.undecided << '\n';
  return d.sup <= rc.thresholds.defect ? exit_ok : exit_fail;
}

int cmd_multiplicity(const RunConfig& rc) {
  const auto& op = need(rc.op, "--op");
  Table t{{"x", "class"}, {}};
  for (double x : points_of(rc)) {
    Multiplicity m = Multiplicity::Undecided;
    if (const auto* j = std::get_if<JacobiCoefficients>(&op)) m = multiplicity_classify(*j, x, rc.n0);
    if (const auto* c = std::get_if<VerblunskyCoefficients>(&op)) m = multiplicity_classify_cmv(*c, x, rc.n0);
    if (const auto* s = std::get_if<PiecewisePotential>(&op))
      m = multiplicity_from(m_schrodinger_boundary(*s, Side::Plus, rc.x0, x),
                            m_schrodinger_boundary(*s, Side::Minus, rc.x0, x));
    t.rows.push_back({x, to_string(m)});
  }
  write_table(t, rc);
  return exit_ok;
}

int cmd_certify(const RunConfig& rc) {
  const auto& op = need(rc.op, "--op");
  const auto& set = need(rc.set, "--set");
  CertifyOptions opt;
  opt.n0 = rc.n0;
  opt.x0 = rc.x0;
  opt.margin = rc.margin;
  opt.grid_count = rc.params.value("count", 101);
  opt.cap = rc.params.value("cap", 100.0);
  PurityReport rep;
  if (const auto* c = std::get_if<VerblunskyCoefficients>(&op)) {
    const auto* e = std::get_if<ArcSet>(&set);
    if (!e) throw ConfigError("CMV operators need an arc set");
    std::vector<Arc> O;
    if (rc.params.contains("neighbourhood"))
      for (const auto& a : rc.params["neighbourhood"]) O.push_back({a[0].get<double>(), a[1].get<double>()});
    rep = certify(*c, *e, O, rc.thresholds, opt);
  } else {
    const auto& e = line_set(rc);
    std::vector<Interval> O;
    if (rc.params.contains("neighbourhood"))
      for (const auto& a : rc.params["neighbourhood"]) O.push_back({a[0].get<double>(), a[1].get<double>()});
    if (const auto* j = std::get_if<JacobiCoefficients>(&op)) rep = certify(*j, e, O, rc.thresholds, opt);
    else rep = certify(std::get<PiecewisePotential>(op), e, O, rc.thresholds, opt);
  }
  if (!rc.out.empty()) emit_json({{"config", to_json(rc)}, {"report", to_json(rep)}}, rc.out);
  if (!rc.csv.empty()) emit_csv(density_table(rep.ac_density), rc.csv);
  std::cout << "verdict " << to_string(rep.verdict);
  if (!rep.reason.empty()) std::cout << " (" << rep.reason << ')';
  std::cout << '\n';
  return rep.verdict == Verdict::Pass ? exit_ok : exit_fail;
}

int cmd_massbalance(const RunConfig& rc) {
  if (!rc.params.contains("measure")) throw ConfigError("missing --measure");
  const auto& pm = rc.params["measure"];
  const auto m = parse_herglotz(pm.is_string() ? read_json_file(pm.get<std::string>()) : pm);
  const double r = mass_balance_check(m, line_set(rc));
  std::cout << fmt(r) << '\n';
  return r <= rc.thresholds.mass ? exit_ok : exit_fail;
}

int dispatch(const RunConfig& rc) {
  if (rc.command == "xi") return cmd_xi(rc);
  if (rc.command == "mfun") return cmd_mfun(rc);
  if (rc.command == "green") return cmd_green(rc);
  if (rc.command == "capacity") return cmd_capacity(rc);
  if (rc.command == "homog") return cmd_homog(rc);
  if (rc.command == "blaschke") return cmd_blaschke(rc);
  if (rc.command == "reflect") return cmd_reflect(rc);
  if (rc.command == "multiplicity") return cmd_multiplicity(rc);
  if (rc.command == "certify") return cmd_certify(rc);
  if (rc.command == "massbalance") return cmd_massbalance(rc);
  throw ConfigError("unknown command \"" + rc.command + "\"");
}

struct Flags {
  std::string op, set, grid, out, csv, side = "plus", measure, neighbourhood, points;
  double margin = 1e-3, eps = 0.0, pole = 0.0, power = 0.0, edge = 0.0, x0 = 0.0, cap = 100.0;
  long n0 = 0;
  int count = 0;
  unsigned seed = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflectionless operators: spectral diagnostics and purity certificates"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "run configuration JSON (command and all inputs)");
  Flags f;

  auto common = [&](CLI::App* sub, bool op, bool set, bool grid) {
    if (op) sub->add_option("--op", f.op, "operator config (file or inline JSON)");
    if (set) sub->add_option("--set", f.set, "set config (file or inline JSON)");
    if (grid) sub->add_option("--grid", f.grid, "start:stop:count");
    sub->add_option("--out", f.out, "output path");
    sub->add_option("--n0", f.n0, "lattice site");
    sub->add_option("--x0", f.x0, "base point on the line");
    sub->add_option("--margin", f.margin, "relative band-edge margin");
    sub->add_option("--seed", f.seed, "seed recorded in outputs");
  };
  std::vector<CLI::App*> subs;
  auto add = [&](const char* name, const char* help) {
    subs.push_back(app.add_subcommand(name, help));
    return subs.back();
  };
  common(add("xi", "ξ (line) or Ξ (circle) on a grid"), true, false, true);
  auto* mfun = add("mfun", "half-line Weyl functions on a grid");
  common(mfun, true, false, true);
  mfun->add_option("--side", f.side, "plus or minus");
  mfun->add_option("--eps", f.eps, "fixed distance from the real line or circle; 0 takes the boundary limit");
  auto* green = add("green", "potential-theoretic Green's function of a line set");
  common(green, false, true, true);
  auto* green_pole = green->add_option("--pole", f.pole, "finite pole λ0 (default: ∞)");
  common(add("capacity", "logarithmic capacity of a line set"), false, true, false);
  common(add("homog", "homogeneity constant of a set"), false, true, false);
  auto* bl = add("blaschke", "Blaschke-type sum of Green's function values");
  common(bl, false, true, false);
  auto* bl_points = bl->add_option("--points", f.points, "comma-separated points");
  auto* bl_power = bl->add_option("--power", f.power, "generate λ_k = edge + k^-power");
  auto* bl_edge = bl->add_option("--edge", f.edge, "edge for generated points (default: top of the set)");
  auto* bl_count = bl->add_option("--count", f.count, "number of generated points");
  auto* bl_pole = bl->add_option("--pole", f.pole, "finite pole λ0 (default: ∞)");
  auto* rf = add("reflect", "reflectionless defect on the set");
  common(rf, true, true, false);
  auto* rf_count = rf->add_option("--count", f.count, "grid points (default 101)");
  auto* rf_cap = rf->add_option("--cap", f.cap, "upper cut of unbounded sets");
  common(add("multiplicity", "spectral multiplicity classes on a grid"), true, false, true);
  auto* ce = add("certify", "purity certificate");
  common(ce, true, true, false);
  ce->add_option("--csv", f.csv, "AC density table output");
  auto* ce_count = ce->add_option("--count", f.count, "grid points (default 101)");
  auto* ce_cap = ce->add_option("--cap", f.cap, "upper cut of unbounded sets");
  auto* ce_nb = ce->add_option("--neighbourhood", f.neighbourhood, "JSON list of open intervals or arcs O");
  auto* mb = add("massbalance", "mass balance of a measure config");
  common(mb, false, true, false);
  mb->add_option("--measure", f.measure, "measure config (file or inline JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }

  RunConfig rc;
  try {
    if (!config_path.empty()) {
      if (!app.get_subcommands().empty()) throw ConfigError("--config replaces the subcommand");
      rc = parse_run_config(read_json_file(config_path));
    } else {
      if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return exit_config;
      }
      auto* sub = app.get_subcommands().front();
      rc.command = sub->get_name();
      if (!f.op.empty()) rc.op = parse_operator(load_json(f.op));
      if (!f.set.empty()) rc.set = parse_set(load_json(f.set));
      if (!f.grid.empty()) rc.grid = GridSpec::parse(f.grid);
      rc.out = f.out;
      rc.csv = f.csv;
      rc.n0 = f.n0;
      rc.x0 = f.x0;
      rc.margin = f.margin;
      rc.seed = f.seed;
      if (rc.command == "mfun") rc.params = {{"side", f.side}, {"eps", f.eps}};
      if (rc.command == "green" && green_pole->count()) rc.params["pole"] = f.pole;
      if (rc.command == "blaschke") {
        if (bl_points->count()) {
          std::vector<double> pts;
          std::stringstream ss(f.points);
          for (std::string tok; std::getline(ss, tok, ',');) {
            try {
              pts.push_back(std::stod(tok));
            } catch (const std::exception&) {
              throw ConfigError("bad point \"" + tok + "\"");
            }
          }
          rc.params["points"] = pts;
        }
        if (bl_power->count()) rc.params["power"] = f.power;
        if (bl_edge->count()) rc.params["edge"] = f.edge;
        if (bl_count->count()) rc.params["count"] = f.count;
        if (bl_pole->count()) rc.params["pole"] = f.pole;
      }
      if (rc.command == "reflect") {
        if (rf_count->count()) rc.params["count"] = f.count;
        if (rf_cap->count()) rc.params["cap"] = f.cap;
      }
      if (rc.command == "certify") {
        if (ce_count->count()) rc.params["count"] = f.count;
        if (ce_cap->count()) rc.params["cap"] = f.cap;
        if (ce_nb->count()) rc.params["neighbourhood"] = Json::parse(f.neighbourhood);
      }
      if (rc.command == "massbalance" && !f.measure.empty()) rc.params["measure"] = load_json(f.measure);
    }
    rc.thresholds = rc.thresholds.with_env();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }

  try {
    return dispatch(rc);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << '\n';
    return exit_fail;
  }
}
