#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "hahn/calculus.hpp"
#include "hahn/error.hpp"
#include "hahn/expr.hpp"
#include "hahn/lattice.hpp"
#include "hahn/variational.hpp"
#include "json.hpp"

namespace hahn::cli {

namespace {

using Json = nlohmann::ordered_json;

struct RunConfig {
  double q = 0.5;
  double omega = 1.0;
  double a = 2.0;
  double b = 6.0;
  int depth = 12;
  double tol = 1e-10;
  int max_terms = 10000;
  std::string output_format = "text";
  std::string output_path;
  bool strict = false;

  SeriesOptions series() const { return SeriesOptions{tol, max_terms}; }
};

// Bad command-line input that is not caught by CLI11 itself.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Report {
  explicit Report(std::string name = {}) : command(std::move(name)) {}

  std::string command;
  Json result = Json::object();
  std::vector<std::string> columns;
  Json rows = Json::array();
  std::vector<std::string> warnings;
  int exit_code = kExitOk;
};

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, const std::string& what) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw InputError(what + ": '" + std::string(text) + "' is not a finite number");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  for (std::string_view part : split(text, ',')) values.push_back(parse_number(part, what));
  return values;
}

expr::Expr parse_expr(const std::string& source, const std::set<expr::Var>& vars,
                      const std::string& flag) {
  if (source.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw InputError(flag + ": expression is empty");
  }
  try {
    return expr::parse(source, vars);
  } catch (const ParseError& e) {
    std::ostringstream os;
    os << flag << ": " << e.what() << "\n  " << source << "\n  "
       << std::string(std::min(e.offset(), source.size()), ' ') << "^";
    throw InputError(os.str());
  }
}

const std::set<expr::Var> kT{expr::Var::t};
const std::set<expr::Var> kTUV{expr::Var::t, expr::Var::u, expr::Var::v};

RealFn parse_fn(const std::string& source, const HahnParams& params, const std::string& flag) {
  return expr::to_real_fn(parse_expr(source, kT, flag), params);
}

Lagrangian parse_lagrangian(const std::string& source, const HahnParams& params, bool fd) {
  return lagrangian_from_expr(parse_expr(source, kTUV, "--lagrangian"), params,
                              fd ? PartialMode::central_difference : PartialMode::forward_mode);
}

LatticeTableFn parse_table(const std::string& text, const HahnParams& params) {
  std::vector<std::pair<double, double>> entries;
  for (std::string_view item : split(text, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw InputError("--table: entry '" + std::string(item) + "' is not of the form point:value");
    }
    entries.emplace_back(parse_number(item.substr(0, colon), "--table point"),
                         parse_number(item.substr(colon + 1), "--table value"));
  }
  return LatticeTableFn(params, std::move(entries), 0.0);
}

Json series_json(const SeriesResult& r) {
  Json j;
  j["value"] = r.value;
  j["terms_used"] = r.terms_used;
  j["last_term_magnitude"] = r.last_term_magnitude;
  j["tail_bound"] = r.tail_bound;
  j["converged"] = r.converged;
  return j;
}

void non_convergence(Report& report, const RunConfig& cfg, const std::string& what) {
  report.warnings.push_back(what + " did not converge within max_terms=" +
                            std::to_string(cfg.max_terms));
  if (cfg.strict) report.exit_code = kExitNotConverged;
}

// ---------------------------------------------------------------------------
// Commands

Report cmd_deriv(const HahnParams& params, const std::string& source, double at,
                 std::optional<double> h0) {
  if (h0 && !(*h0 > 0.0)) throw InputError("--h0 must be positive");
  const RealFn f = parse_fn(source, params, "--expr");
  const DerivativeSample s = hahn_derivative_sample(params, f, at, h0);
  Report r{"deriv"};
  r.result["expr"] = source;
  r.result["t"] = at;
  r.result["value"] = s.value;
  r.result["sigma_t"] = s.sigma_t;
  r.result["sigma_inv_t"] = s.sigma_inv_t;
  r.result["omega0_fallback"] = s.classical;
  return r;
}

Report cmd_integrate(const RunConfig& cfg, const HahnParams& params, const std::string& source,
                     const std::string& table, double from, double to) {
  if (source.empty() == table.empty()) throw InputError("give exactly one of --expr and --table");
  RealFn f;
  std::string label;
  if (!table.empty()) {
    f = parse_table(table, params).to_real_fn();
    label = f.label();
  } else {
    f = parse_fn(source, params, "--expr");
    label = source;
  }
  const SeriesResult s = hahn_integral(params, f, from, to, cfg.series());
  Report r{"integrate"};
  r.result["integrand"] = label;
  r.result["from"] = from;
  r.result["to"] = to;
  const Json fields = series_json(s);
  for (const auto& [key, value] : fields.items()) r.result[key] = value;
  if (!s.converged) non_convergence(r, cfg, "integral");
  return r;
}

Report cmd_el_check(const RunConfig& cfg, const HahnParams& params, const std::string& lsrc,
                    const std::string& ysrc, double tol_el, bool fd) {
  if (!(tol_el > 0.0)) throw InputError("--tol-el must be positive");
  const Lagrangian lag = parse_lagrangian(lsrc, params, fd);
  const RealFn y = parse_fn(ysrc, params, "--y");
  const BoundaryConditions bc{cfg.a, cfg.b, y(cfg.a), y(cfg.b)};
  const ELReport el = el_residual(params, lag, y, bc, cfg.depth);
  const bool common = on_common_orbit(params, cfg.a, cfg.b);

  Report r{"el-check"};
  r.result["lagrangian"] = lsrc;
  r.result["y"] = ysrc;
  r.result["partials"] = fd ? "central-difference" : "forward-mode";
  r.result["points"] = el.points.size();
  r.result["max_abs_residual"] = el.max_abs_residual;
  r.result["tol_el"] = tol_el;
  r.result["non_converged_points"] = el.non_converged_points;
  r.result["common_orbit"] = common;
  const bool pass = el.max_abs_residual < tol_el;
  r.result["status"] = pass ? "PASS" : "FAIL";
  r.columns = {"point", "residual", "converged"};
  for (std::size_t i = 0; i < el.points.size(); ++i) {
    r.rows.push_back(Json::array({el.points[i], el.residuals[i], static_cast<bool>(el.converged[i])}));
  }
  if (!common) {
    r.warnings.push_back(
        "a and b do not lie on a common sigma-orbit; the sufficiency theorem does not apply");
  }
  if (!el.non_converged_points.empty()) non_convergence(r, cfg, "residual evaluation");
  if (!pass) r.exit_code = kExitVerification;
  return r;
}

Report cmd_first_variation(const RunConfig& cfg, const HahnParams& params, const std::string& lsrc,
                           const std::string& ysrc, const std::string& esrc, double eps, bool fd) {
  if (!(eps > 0.0)) throw InputError("--eps must be positive");
  const Lagrangian lag = parse_lagrangian(lsrc, params, fd);
  const RealFn y = parse_fn(ysrc, params, "--y");
  const RealFn eta = parse_fn(esrc, params, "--eta");
  const BoundaryConditions bc{cfg.a, cfg.b, y(cfg.a), y(cfg.b)};
  const SeriesResult dl = first_variation(params, lag, y, eta, bc, cfg.series());
  const double oracle = phi_prime_fd(params, lag, y, eta, bc, eps, cfg.series());

  Report r{"first-variation"};
  r.result["lagrangian"] = lsrc;
  r.result["y"] = ysrc;
  r.result["eta"] = esrc;
  r.result["first_variation"] = dl.value;
  r.result["converged"] = dl.converged;
  r.result["eps"] = eps;
  r.result["phi_prime_fd"] = oracle;
  r.result["difference"] = dl.value - oracle;
  if (!dl.converged) non_convergence(r, cfg, "first variation");
  return r;
}

Report cmd_leitmann(const RunConfig& cfg, const HahnParams& params, double alpha, double beta) {
  const BoundaryConditions bc{cfg.a, cfg.b, alpha, beta};
  const LeitmannSolution sol = leitmann_affine_solve(params, bc, cfg.depth);
  const Lagrangian lag = leitmann_lagrangian(params);
  const SeriesResult act = action(params, lag, sol.y, bc, cfg.series());
  const ELReport el = el_residual(params, lag, sol.y, bc, cfg.depth);

  Report r{"leitmann"};
  r.result["alpha"] = alpha;
  r.result["beta"] = beta;
  r.result["c"] = sol.c;
  r.result["d"] = sol.d;
  r.result["minimizer"] = "y(t) = " + number(sol.c) + "*t " + (sol.d < 0 ? "- " : "+ ") +
                          number(std::fabs(sol.d));
  r.result["action"] = act.value;
  r.result["action_converged"] = act.converged;
  r.result["el_max_abs_residual"] = el.max_abs_residual;
  r.result["gauge_residual"] = sol.gauge_residual;
  if (!act.converged) non_convergence(r, cfg, "action integral");
  return r;
}

Json sample_json(const ConvexitySample& s) {
  Json j;
  j["t"] = s.t;
  j["u"] = s.u;
  j["v"] = s.v;
  j["u1"] = s.u1;
  j["v1"] = s.v1;
  j["gap"] = s.gap;
  return j;
}

Report cmd_convexity(const RunConfig& cfg, const HahnParams& params, const std::string& lsrc,
                     const std::string& box_text, int grid, const std::string& t_text, bool fd) {
  const std::vector<double> box = parse_list(box_text, "--box");
  if (box.size() != 4) throw InputError("--box expects u_lo,u_hi,v_lo,v_hi");
  std::vector<double> ts = t_text.empty() ? build_interval(params, cfg.a, cfg.b, cfg.depth).points
                                          : parse_list(t_text, "--t-samples");
  const Lagrangian lag = parse_lagrangian(lsrc, params, fd);
  const ConvexityReport c =
      joint_convexity_check(lag, ts, ConvexityBox{box[0], box[1], box[2], box[3]}, grid);

  Report r{"convexity"};
  r.result["lagrangian"] = lsrc;
  r.result["box"] = box;
  r.result["grid"] = grid;
  r.result["t_samples"] = ts.size();
  r.result["verdict"] = to_string(c.verdict);
  r.result["samples"] = c.samples;
  r.result["failures"] = c.failures;
  if (c.samples > c.failures) {
    r.result["most_negative"] = sample_json(c.most_negative);
    r.result["most_positive"] = sample_json(c.most_positive);
  }
  r.warnings.push_back("the verdict is sampling evidence on the box, not a proof");
  return r;
}

// Built-in functions of the verify suites.
struct Pair {
  const char* f;
  const char* g;
};
constexpr const char* kFtcFunctions[] = {"t^3 - 2*t + 1", "exp(t/3)", "1/(1 + t^2)", "sin(t)"};
constexpr Pair kPairs[] = {{"t", "t^2"}, {"t^3 - t", "exp(t/4)"}, {"cos(t)", "t^2 + 1"}};
constexpr const char* kSmooth[] = {"t^3 - 2*t + 1", "exp(t/3)", "sin(t) + t"};

struct Suite {
  std::string name;
  double threshold;
  long cases = 0;
  double worst = 0.0;

  void record(double err) {
    ++cases;
    if (std::isnan(err) || err > worst) worst = std::isnan(err) ? INFINITY : err;
  }
  bool passed() const { return cases > 0 && worst < threshold; }
};

// Relative error with an absolute floor of 1 so values near zero are compared absolutely.
double rel_err(double lhs, double rhs) {
  return std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
}

Report cmd_verify(const RunConfig& cfg, const HahnParams& params) {
  const double a = cfg.a;
  const double b = cfg.b;
  const SeriesOptions opts = cfg.series();
  // The pointwise identities are sampled where difference quotients keep
  // most of their precision.
  const std::vector<double> shallow = build_interval(params, a, b, std::min(cfg.depth, 6)).points;

  Suite ftc_d{"ftc-derivative", 1e-8};
  Suite ftc_i{"ftc-integral", 1e-8};
  for (const char* src : kFtcFunctions) {
    const FtcReport rep = ftc_check(params, parse_fn(src, params, "ftc"), a, b, cfg.depth, 1e-8);
    const std::size_t n = build_interval(params, a, b, cfg.depth).points.size();
    const bool clean = rep.non_converged_points.empty();
    for (std::size_t i = 0; i < n; ++i) ftc_d.record(clean ? rep.derivative_residual : INFINITY);
    ftc_i.record(rep.integral_converged ? rep.integral_residual : INFINITY);
  }

  Suite ibp1{"ibp-sigma-inv", 1e-8};
  Suite ibp2{"ibp-shifted", 1e-8};
  for (const Pair& p : kPairs) {
    const RealFn f = parse_fn(p.f, params, "ibp");
    const RealFn g = parse_fn(p.g, params, "ibp");
    for (auto [variant, suite] : {std::pair{IbpVariant::sigma_inv, &ibp1},
                                  std::pair{IbpVariant::shifted, &ibp2}}) {
      const IbpResult res = ibp_residual(params, f, g, a, b, variant, opts);
      suite->record(res.converged ? res.residual : INFINITY);
    }
  }

  Suite product{"product-rule", 1e-10};
  Suite quotient{"quotient-rule", 1e-10};
  for (const Pair& p : kPairs) {
    const RealFn f = parse_fn(p.f, params, "product");
    const RealFn g = parse_fn(p.g, params, "product");
    const RealFn fg([&](double t) { return f(t) * g(t); });
    const RealFn fq([&](double t) { return f(t) / g(t); });
    for (double t : shallow) {
      const double s = sigma(params, t);
      const double si = sigma_inv(params, t);
      const double df = hahn_derivative(params, f, t);
      const double dg = hahn_derivative(params, g, t);
      product.record(rel_err(hahn_derivative(params, fg, t), df * g(s) + f(si) * dg));
      if (g(s) * g(si) != 0.0) {
        quotient.record(rel_err(hahn_derivative(params, fq, t),
                                (df * g(si) - f(si) * dg) / (g(s) * g(si))));
      }
    }
  }

  Suite composition{"composition-lemma", 1e-10};
  for (const char* src : kSmooth) {
    const RealFn f = parse_fn(src, params, "composition");
    const RealFn fs = shifted(params, f);
    for (double t : shallow) {
      composition.record(rel_err(hahn_derivative(params, fs, t),
                                 params.q() * hahn_derivative(params, f, sigma(params, t))));
    }
  }

  Suite gap{"gap-lemma", 1e-10};
  for (double t : shallow) {
    for (double x : {t, a, b}) {
      for (int n = 0; n <= 10; ++n) {
        const double lhs = sigma(params, n + 1, x) - sigma(params, n - 1, x);
        const double rhs = std::pow(params.q(), n) * (sigma(params, x) - sigma_inv(params, x));
        gap.record(std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1e-300}));
      }
    }
  }

  Report r{"verify"};
  r.columns = {"suite", "cases", "worst", "threshold", "status"};
  bool all = true;
  for (const Suite* s : {&ftc_d, &ftc_i, &ibp1, &ibp2, &product, &quotient, &composition, &gap}) {
    all = all && s->passed();
    r.rows.push_back(Json::array({s->name, s->cases, s->worst, s->threshold,
                                  s->passed() ? "PASS" : "FAIL"}));
  }
  r.result["suites"] = r.rows.size();
  r.result["status"] = all ? "PASS" : "FAIL";
  if (!all) r.exit_code = kExitVerification;
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

struct Style {
  bool enabled;
  std::string operator()(const std::string& text, const char* code) const {
    return enabled ? std::string("\x1b[") + code + "m" + text + "\x1b[0m" : text;
  }
};

std::string plain(const Json& v) {
  if (v.is_number_float()) return number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "nan";
  if (v.is_array()) {
    std::string s;
    for (const auto& item : v) s += (s.empty() ? "" : ",") + plain(item);
    return s;
  }
  if (v.is_object()) {
    std::string s;
    for (const auto& [key, item] : v.items()) s += (s.empty() ? "" : " ") + key + "=" + plain(item);
    return s;
  }
  return v.dump();
}

std::string styled(const Json& v, const Style& style) {
  const std::string s = plain(v);
  if (s == "PASS" || s == "CONVEX" || s == "CONCAVE") return style(s, "32");
  if (s == "FAIL" || s == "NEITHER" || s == "INCONCLUSIVE") return style(s, "31");
  return s;
}

void render_text(const Report& r, const Json& params, std::ostream& os, const Style& style) {
  os << style("hahn " + r.command, "1") << "\n";
  os << " ";
  for (const auto& [key, value] : params.items()) os << " " << key << "=" << plain(value);
  os << "\n";
  std::size_t width = 0;
  for (const auto& [key, value] : r.result.items()) width = std::max(width, key.size());
  for (const auto& [key, value] : r.result.items()) {
    os << "  " << std::left << std::setw(static_cast<int>(width) + 2) << key
       << styled(value, style) << "\n";
  }
  if (!r.columns.empty()) {
    std::vector<std::size_t> widths;
    for (const auto& c : r.columns) widths.push_back(c.size());
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], plain(row[i]).size());
    }
    os << "\n ";
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      os << " " << std::left << std::setw(static_cast<int>(widths[i])) << r.columns[i];
    }
    os << "\n";
    for (const auto& row : r.rows) {
      os << " ";
      for (std::size_t i = 0; i < row.size(); ++i) {
        const std::string cell = plain(row[i]);
        os << " " << styled(row[i], style)
           << std::string(widths[i] > cell.size() ? widths[i] - cell.size() : 0, ' ');
      }
      os << "\n";
    }
  }
}

std::string csv_cell(const Json& v) {
  std::string s = v.is_boolean() ? (v.get<bool>() ? "true" : "false") : plain(v);
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    return quoted + "\"";
  }
  return s;
}

void render_csv(const Report& r, std::ostream& os) {
  if (!r.columns.empty()) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
    os << "\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << "\n";
    }
    return;
  }
  os << "field,value\n";
  for (const auto& [key, value] : r.result.items()) os << key << "," << csv_cell(value) << "\n";
}

void render_json(const Report& r, const Json& params, std::ostream& os) {
  Json doc;
  doc["command"] = r.command;
  doc["params"] = params;
  doc["result"] = r.result;
  if (!r.columns.empty()) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
      Json obj;
      for (std::size_t i = 0; i < r.columns.size(); ++i) obj[r.columns[i]] = row[i];
      rows.push_back(obj);
    }
    doc["rows"] = rows;
  }
  doc["warnings"] = r.warnings;
  doc["exit_code"] = r.exit_code;
  os << doc.dump(2) << "\n";
}

bool color_disabled_by_env() {
  const char* env = std::getenv("HAHN_NO_COLOR");
  return env != nullptr && *env != '\0' && std::string_view(env) != "0";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color) {
  RunConfig cfg;
  CLI::App app{"Hahn symmetric quantum calculus: derivatives, integrals and variational checks",
               "hahn"};
  app.set_config("--config", "", "TOML file with q, omega, a, b, depth, tol, max_terms, "
                                 "output_format, output_path");
  app.allow_config_extras(false);
  app.add_option("--q", cfg.q, "Dilation parameter, 0 < q < 1")->capture_default_str();
  app.add_option("--omega", cfg.omega, "Translation parameter, omega >= 0")->capture_default_str();
  app.add_option("--a", cfg.a, "Left endpoint")->capture_default_str();
  app.add_option("--b", cfg.b, "Right endpoint")->capture_default_str();
  app.add_option("--depth", cfg.depth, "Orbit points per endpoint in the lattice")
      ->capture_default_str();
  app.add_option("--tol", cfg.tol, "Absolute series tolerance")->capture_default_str();
  app.add_option("--max-terms,--max_terms", cfg.max_terms, "Series term limit")
      ->capture_default_str();
  app.add_option("--format,--output_format", cfg.output_format, "Report format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--out,--output_path", cfg.output_path, "Write the report to PATH");
  app.add_flag("--strict", cfg.strict, "Exit 4 when a series does not converge");
  app.require_subcommand(1);

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  std::string expr_src, table, lag_src, y_src, eta_src, box = "-3,3,-3,3", t_samples;
  double at = 0.0, tol_el = 1e-6, eps = 1e-5, alpha = 0.0, beta = 0.0;
  std::optional<double> h0, from, to;
  int grid = 7;
  bool fd = false;

  CLI::App* deriv = sub("deriv", "Hahn symmetric derivative of f at a point");
  deriv->add_option("--expr", expr_src, "f(t)")->required();
  deriv->add_option("--at", at, "Evaluation point")->required();
  deriv->add_option("--h0", h0, "Classical-derivative step at omega0");

  CLI::App* integrate = sub("integrate", "Hahn symmetric integral of f from --from to --to");
  integrate->add_option("--expr", expr_src, "f(t)");
  integrate->add_option("--table", table, "Lattice table p1:v1,p2:v2,... (default 0)");
  integrate->add_option("--from", from, "Lower limit (default a)");
  integrate->add_option("--to", to, "Upper limit (default b)");

  CLI::App* el = sub("el-check", "Euler-Lagrange residual of y on the lattice of [a, b]");
  el->add_option("--lagrangian", lag_src, "L(t, u, v)")->required();
  el->add_option("--y", y_src, "Trajectory y(t)")->required();
  el->add_option("--tol-el", tol_el, "Pass threshold on max |residual|")->capture_default_str();
  el->add_flag("--fd", fd, "Central-difference partials instead of forward mode");

  CLI::App* fv = sub("first-variation", "First variation of the action along eta");
  fv->add_option("--lagrangian", lag_src, "L(t, u, v)")->required();
  fv->add_option("--y", y_src, "Trajectory y(t)")->required();
  fv->add_option("--eta", eta_src, "Variation eta(t), zero at a and b")->required();
  fv->add_option("--eps", eps, "Step of the difference-quotient oracle")->capture_default_str();
  fv->add_flag("--fd", fd, "Central-difference partials instead of forward mode");

  CLI::App* leit = sub("leitmann", "Affine minimizer of v^2 + q u + t v with y(a)=alpha, y(b)=beta");
  leit->add_option("--alpha", alpha, "y(a)")->required();
  leit->add_option("--beta", beta, "y(b)")->required();

  CLI::App* conv = sub("convexity", "Sampled joint convexity of L in (u, v)");
  conv->add_option("--lagrangian", lag_src, "L(t, u, v)")->required();
  conv->add_option("--box", box, "u_lo,u_hi,v_lo,v_hi")->capture_default_str();
  conv->add_option("--grid", grid, "Grid points per axis")->capture_default_str();
  conv->add_option("--t-samples", t_samples, "Comma-separated t values (default: lattice)");
  conv->add_flag("--fd", fd, "Central-difference partials instead of forward mode");

  CLI::App* verify = sub("verify", "Run the built-in identity suites");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  Report report;
  Json params;
  try {
    const HahnParams hp(cfg.q, cfg.omega);
    build_interval(hp, cfg.a, cfg.b, cfg.depth);
    if (!(cfg.tol > 0.0)) throw ValidationError("--tol must be positive");
    if (cfg.max_terms < 1) throw ValidationError("--max-terms must be >= 1");
    params["q"] = hp.q();
    params["omega"] = hp.omega();
    params["omega0"] = hp.omega0();
    params["a"] = cfg.a;
    params["b"] = cfg.b;
    params["depth"] = cfg.depth;

    if (deriv->parsed()) {
      report = cmd_deriv(hp, expr_src, at, h0);
    } else if (integrate->parsed()) {
      report = cmd_integrate(cfg, hp, expr_src, table, from.value_or(cfg.a), to.value_or(cfg.b));
    } else if (el->parsed()) {
      report = cmd_el_check(cfg, hp, lag_src, y_src, tol_el, fd);
    } else if (fv->parsed()) {
      report = cmd_first_variation(cfg, hp, lag_src, y_src, eta_src, eps, fd);
    } else if (leit->parsed()) {
      report = cmd_leitmann(cfg, hp, alpha, beta);
    } else if (conv->parsed()) {
      report = cmd_convexity(cfg, hp, lag_src, box, grid, t_samples, fd);
    } else if (verify->parsed()) {
      report = cmd_verify(cfg, hp);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitEvaluation;
  }

  std::ofstream file;
  if (!cfg.output_path.empty()) {
    file.open(cfg.output_path);
    if (!file) {
      err << "error: cannot open " << cfg.output_path << " for writing\n";
      return kExitInput;
    }
  }
  std::ostream& os = cfg.output_path.empty() ? out : file;
  const Style style{color && cfg.output_path.empty() && !color_disabled_by_env()};
  for (const auto& w : report.warnings) err << style("warning: ", "33") << w << "\n";
  if (cfg.output_format == "json") {
    render_json(report, params, os);
  } else if (cfg.output_format == "csv") {
    render_csv(report, os);
  } else {
    render_text(report, params, os, style);
  }
  os.flush();
  if (!os) {
    err << "error: failed to write the report\n";
    return kExitInput;
  }
  return report.exit_code;
}

}  // namespace hahn::cli
