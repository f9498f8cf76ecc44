#include "wkstab/jobs.hpp"

#include <chrono>
#include <cmath>
#include <future>

#include "wkstab/abreu.hpp"
#include "wkstab/errors.hpp"
#include "wkstab/quad.hpp"

namespace wkstab::jobs {

namespace {

using nlohmann::json;

// ordered parallel map over [0, n); body(i) must be independent of order
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  size_t chunk = (n + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
  std::vector<std::future<void>> futures;
  for (size_t begin = 0; begin < n; begin += chunk) {
    size_t end = std::min(begin + chunk, n);
    futures.push_back(std::async(std::launch::async, [&body, begin, end] {
      for (size_t i = begin; i < end; ++i) body(i);
    }));
  }
  for (auto& f : futures) f.get();
}

[[noreturn]] void schema_fail(const std::string& what) { fail(ErrorCode::SchemaError, what); }

const json& field(const json& j, const std::string& key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) schema_fail(context + ": missing field '" + key + "'");
  return j[key];
}

int int_field(const json& j, const std::string& key, const std::string& context, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) schema_fail(context + "." + key + " must be an integer");
  return j[key].get<int>();
}

RatVec rational_vector(const json& j, const std::string& context) {
  if (!j.is_array()) schema_fail(context + " must be an array");
  RatVec out;
  for (const auto& entry : j) out.push_back(rational_field(entry, context));
  return out;
}

WeightExpr family_from_json(const json& j, int dim) {
  std::string family = field(j, "family", "weight").get<std::string>();
  if (family == "constant") return WeightExpr::constant(dim, rational_field(field(j, "c", "weight"), "weight.c"));
  if (family == "affine")
    return WeightExpr::affine(rational_vector(field(j, "xi", "weight"), "weight.xi"),
                              rational_field(field(j, "a", "weight"), "weight.a"));
  if (family == "affine_power")
    return WeightExpr::affine_power(rational_vector(field(j, "xi", "weight"), "weight.xi"),
                                    rational_field(field(j, "a", "weight"), "weight.a"),
                                    rational_field(field(j, "k", "weight"), "weight.k"));
  if (family == "exponential")
    return WeightExpr::exponential(rational_vector(field(j, "xi", "weight"), "weight.xi"));
  if (family == "product") {
    const json& factors = field(j, "factors", "weight");
    if (!factors.is_array() || factors.empty()) schema_fail("weight.factors must be a nonempty array");
    std::vector<WeightExpr> parts;
    for (const auto& f : factors) parts.push_back(weight_from_json(f, dim));
    return WeightExpr::product(parts);
  }
  if (family == "generalized_calabi_v" || family == "generalized_calabi_w") {
    std::vector<CalabiFactor> base;
    for (const auto& bf : field(j, "base", "weight")) {
      CalabiFactor factor;
      factor.d = int_field(bf, "d", "weight.base[]", 1);
      factor.scal = rational_field(field(bf, "scal", "weight.base[]"), "weight.base[].scal");
      factor.xi = rational_vector(field(bf, "xi", "weight.base[]"), "weight.base[].xi");
      factor.c = rational_field(field(bf, "c", "weight.base[]"), "weight.base[].c");
      base.push_back(std::move(factor));
    }
    RatVec xi0 = rational_vector(field(j, "xi0", "weight"), "weight.xi0");
    Rational c0 = rational_field(field(j, "c0", "weight"), "weight.c0");
    auto [v, w] = generalized_calabi_weights(base, xi0, c0);
    return family == "generalized_calabi_v" ? v : w;
  }
  schema_fail("unknown weight family '" + family + "'");
}

// results serialization: every scalar carries its pipeline provenance
json value_json(const Scalar& s, const JobOptions& options) {
  json out;
  if (options.pipeline == "float") {
    out["value"] = s.value;
    out["pipeline"] = "float";
    return out;
  }
  if (options.pipeline == "exact") {
    if (!s.exact)
      fail(ErrorCode::SchemaError,
           "pipeline 'exact' requested but the configuration is not exactly evaluable");
    out["exact"] = wkstab::to_string(*s.exact);
    out["value"] = s.exact->get_d();
    out["pipeline"] = "exact";
    return out;
  }
  out["float"] = s.value;
  if (s.exact) {
    out["exact"] = wkstab::to_string(*s.exact);
    out["divergence"] = std::abs(s.value - s.exact->get_d());
    out["pipeline"] = "both";
  } else {
    out["exact"] = nullptr;
    out["pipeline"] = "float";
  }
  return out;
}

json value_json(double v) {
  json out;
  out["value"] = v;
  out["pipeline"] = "float";
  return out;
}

std::string poly_pretty(const RatVec& coeffs, const std::string& var) {
  if (coeffs.empty()) return "0";
  std::string out;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    Rational c = coeffs[i];
    bool negative = c < 0;
    if (negative) c = -c;
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    std::string magnitude = wkstab::to_string(c);
    if (i == 0) {
      out += magnitude;
    } else {
      if (magnitude != "1") out += magnitude + "*";
      out += var;
      if (i > 1) out += "^" + std::to_string(i);
    }
  }
  return out.empty() ? "0" : out;
}

struct ToricInputs {
  Polytope poly;
  WeightExpr v, w;
};

ToricInputs toric_inputs(const json& config) {
  Polytope poly = Polytope::from_json(field(config, "polytope", "config"));
  int dim = poly.dim();
  WeightExpr v = weight_from_json(field(config, "v", "config"), dim);
  WeightExpr w = weight_from_json(field(config, "w", "config"), dim);
  return {std::move(poly), std::move(v), std::move(w)};
}

json run_slope(const json& config, const JobOptions& options) {
  ToricInputs in = toric_inputs(config);
  json results;
  results["slope"] = value_json(slope(in.poly, in.v, in.w, options.order), options);
  return results;
}

json run_wext(const json& config, const JobOptions& options, json& residuals) {
  ToricInputs in = toric_inputs(config);
  ExtremalAffine ext = solve_w_ext(in.poly, in.v, in.w, options.order);
  json results;
  Scalar c{ext.c, std::nullopt};
  std::vector<Scalar> xi(ext.xi.size());
  for (size_t i = 0; i < ext.xi.size(); ++i) xi[i] = Scalar{ext.xi[i], std::nullopt};
  if (ext.exact) {
    c.exact = (*ext.exact)[0];
    for (size_t i = 0; i < ext.xi.size(); ++i) xi[i].exact = (*ext.exact)[i + 1];
  }
  results["c"] = value_json(c, options);
  results["xi"] = json::array();
  for (const auto& component : xi) results["xi"].push_back(value_json(component, options));
  results["gram_condition"] = ext.gram_condition;
  residuals["orthogonality"] = ext.max_orthogonality_residual;
  return results;
}

json run_futaki(const json& config, const JobOptions& options) {
  ToricInputs in = toric_inputs(config);
  PLConvex f = pl_from_json(field(config, "f", "config"), in.poly.dim());
  Scalar c = config.contains("c")
                 ? Scalar::of(rational_field(config["c"], "config.c"))
                 : slope(in.poly, in.v, in.w, options.order);
  bool relative = config.value("relative", false);
  json results;
  Scalar value = relative ? relative_futaki(in.poly, in.v, in.w, f, options.order)
                          : futaki(in.poly, in.v, in.w, f, c, options.order);
  results["futaki"] = value_json(value, options);
  if (!relative) results["c"] = value_json(c, options);
  // optional transparent rescaling by (2 pi)^dim; reported values stay
  // polytope-normalized otherwise
  if (config.value("two_pi", false))
    results["futaki_two_pi_scaled"] =
        value_json(value.value * std::pow(2.0 * M_PI, in.poly.dim()));
  return results;
}

json run_scan(const json& config, const JobOptions& options, std::string& csv) {
  ToricInputs in = toric_inputs(config);
  ScanGrid grid;
  if (config.contains("scan")) {
    const json& g = config["scan"];
    grid.direction_range = int_field(g, "direction_range", "config.scan", 2);
    grid.direction_den = int_field(g, "direction_den", "config.scan", 1);
    grid.offset_range = int_field(g, "offset_range", "config.scan", 4);
    grid.offset_den = int_field(g, "offset_den", "config.scan", 2);
  }
  double tolerance = config.value("tolerance", 1e-9);
  auto entries = scan_destabilizers(in.poly, in.v, in.w, grid, options.order, options.threads);
  json results;
  results["count"] = entries.size();
  results["entries"] = json::array();
  csv = "value";
  for (int i = 0; i < in.poly.dim(); ++i) csv += ",a" + std::to_string(i + 1);
  csv += ",b\n";
  for (const auto& entry : entries) {
    json row;
    row["value"] = value_json(entry.value, options);
    row["grad"] = json::array();
    for (const auto& g : entry.f.pieces()[0].grad) row["grad"].push_back(wkstab::to_string(g));
    row["offset"] = wkstab::to_string(entry.f.pieces()[0].offset);
    results["entries"].push_back(row);
    csv += std::to_string(entry.value.value);
    for (const auto& g : entry.f.pieces()[0].grad) csv += "," + wkstab::to_string(g);
    csv += "," + wkstab::to_string(entry.f.pieces()[0].offset) + "\n";
  }
  if (!entries.empty()) {
    results["min"] = value_json(entries.front().value, options);
    results["destabilizer_candidate"] = entries.front().value.value < -tolerance;
  }
  return results;
}

json run_abreu(const json& config, const JobOptions& options, json& residuals) {
  ToricInputs in = toric_inputs(config);
  SymplecticPotential potential =
      config.contains("correction")
          ? SymplecticPotential::guillemin_plus(
                in.poly, weight_from_json(config["correction"], in.poly.dim()))
          : SymplecticPotential::guillemin(in.poly);

  int grid_n = int_field(config, "grid_n", "config", in.poly.dim() == 1 ? 41 : 15);
  auto [lo_r, hi_r] = in.poly.bounding_box();
  auto lo = to_doubles(lo_r), hi = to_doubles(hi_r);
  const int dim = in.poly.dim();

  json grid_points = json::array(), grid_values = json::array();
  std::vector<int> idx(static_cast<size_t>(dim), 0);
  std::vector<double> p(static_cast<size_t>(dim));
  double min_dist = 2.5e-3 * in.poly.inradius() + 1e-12;
  while (true) {
    for (int i = 0; i < dim; ++i)
      p[static_cast<size_t>(i)] = lo[static_cast<size_t>(i)] +
                                  (hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]) *
                                      (idx[static_cast<size_t>(i)] + 1.0) / (grid_n + 1.0);
    bool usable = true;
    for (const auto& label : in.poly.labels())
      if (label.eval(p) / label.norm2() < min_dist) usable = false;
    if (usable) {
      grid_points.push_back(p);
      grid_values.push_back(scal_v(potential, in.v, p));
    }
    int axis = dim - 1;
    while (axis >= 0) {
      if (++idx[static_cast<size_t>(axis)] < grid_n) break;
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }

  json results;
  results["grid"] = json{{"points", grid_points}, {"scal_v", grid_values}};

  if (config.contains("f")) {
    WeightExpr f = weight_from_json(config["f"], dim);
    Scalar c = config.contains("c") ? Scalar::of(rational_field(config["c"], "config.c"))
                                    : slope(in.poly, in.v, in.w, options.order);
    double residual = check_futaki_identity(potential, in.v, in.w, f, c, options.order);
    residuals["futaki_identity"] = residual;
    results["c"] = value_json(c, options);
  }
  return results;
}

json series_json(const std::vector<std::pair<int, Scalar>>& series, const JobOptions& options) {
  json out = json::array();
  for (const auto& [k, w] : series) {
    json row;
    row["k"] = k;
    row["W"] = value_json(w, options);
    out.push_back(row);
  }
  return out;
}

json run_df(const json& config, const JobOptions& options, std::string& csv) {
  ToricInputs in = toric_inputs(config);
  PLConvex f = pl_from_json(field(config, "f", "config"), in.poly.dim());
  Rational cap = rational_field(field(config, "R", "config"), "config.R");
  std::vector<int> klist;
  if (config.contains("klist")) {
    for (const auto& k : config["klist"]) {
      if (!k.is_number_integer() || k.get<int>() < 1) schema_fail("config.klist must hold positive integers");
      klist.push_back(k.get<int>());
    }
  } else {
    klist = default_klist(in.poly, f);
  }

  auto report = donaldson_futaki(in.poly, f, cap, in.v, in.w, klist, options.order,
                                 options.threads);
  json results;
  results["c"] = value_json(report.c, options);
  results["a_v0"] = value_json(report.a_v0, options);
  results["a_v1"] = value_json(report.a_v1, options);
  results["a_w0"] = value_json(report.a_w0, options);
  results["fit_residual_v"] = value_json(report.v_fit.residual, options);
  results["DF"] = value_json(report.df, options);
  results["F_P"] = value_json(report.f_p, options);
  if (report.ratio) results["ratio"] = value_json(*report.ratio, options);
  results["note"] = report.note;
  results["v_series"] = series_json(report.v_series, options);
  results["w_series"] = series_json(report.w_series, options);

  csv = "k,W_v,W_w\n";
  for (size_t i = 0; i < report.v_series.size(); ++i)
    csv += std::to_string(report.v_series[i].first) + "," +
           std::to_string(report.v_series[i].second.value) + "," +
           std::to_string(report.w_series[i].second.value) + "\n";
  return results;
}

json theta_json(const AdmissibleData& data, const ThetaSolution& sol, const JobOptions& options) {
  json out;
  if (sol.phi_poly()) {
    RatVec coeffs = sol.phi_poly()->coefficients();
    out["kind"] = "polynomial";
    out["phi"] = poly_pretty(coeffs, "z");
    json exact = json::array();
    for (const auto& c : coeffs) exact.push_back(wkstab::to_string(c));
    out["phi_coefficients"] = exact;
    // when v u == 1, phi is Theta itself
    if (data.factors().empty()) {
      auto v_poly = data.v().as_polynomial();
      if (v_poly && v_poly->total_degree() == 0 &&
          v_poly->coefficient(RationalPoly::Monomial(1, 0)) == 1)
        out["theta"] = poly_pretty(coeffs, "z");
    }
  } else {
    out["kind"] = "samples";
  }
  json samples = json::array();
  for (int i = 0; i <= 20; ++i) {
    double z = -1.0 + 0.1 * i;
    samples.push_back(json{{"z", z}, {"theta", sol.theta(z)}});
  }
  out["samples"] = samples;
  json res = json::array();
  for (double r : sol.boundary_residuals()) res.push_back(r);
  out["boundary_residuals"] = res;
  return out;
}

json verdict_json(const PositivityVerdict& verdict) {
  json out;
  out["positive"] = verdict.positive;
  out["certificate"] = verdict.exact_certificate ? "sturm" : "grid";
  out["margin"] = verdict.margin;
  if (!verdict.positive) out["nonpositive_at"] = verdict.nonpositive_at;
  return out;
}

json run_pbundle_solve(const json& config, const JobOptions& options, json& residuals) {
  AdmissibleData data = admissible_from_json(field(config, "admissible", "config"));
  WExtCoefficients wext = solve_w_ext_ode(data, options.order);
  ThetaSolution sol = solve_theta(data, wext, options.order);
  json results;
  results["A1"] = value_json(wext.a1, options);
  results["A2"] = value_json(wext.a2, options);
  results["c_vw"] = value_json(pbundle_slope(data, options.order), options);
  results["theta"] = theta_json(data, sol, options);
  results["positivity"] = verdict_json(check_positivity(data, sol));
  double worst = 0;
  for (double r : sol.boundary_residuals()) worst = std::max(worst, r);
  residuals["boundary"] = worst;
  return results;
}

json run_pbundle_futaki(const json& config, const JobOptions& options, std::string& csv,
                        json& residuals) {
  AdmissibleData data = admissible_from_json(field(config, "admissible", "config"));
  WExtCoefficients wext = solve_w_ext_ode(data, options.order);
  ThetaSolution sol = solve_theta(data, wext, options.order);

  std::vector<double> z0s;
  if (config.contains("z0")) {
    if (config["z0"].is_array())
      for (const auto& z : config["z0"]) z0s.push_back(z.is_string() ? rational_field(z, "z0").get_d() : z.get<double>());
    else
      z0s.push_back(config["z0"].is_string() ? rational_field(config["z0"], "z0").get_d()
                                             : config["z0"].get<double>());
  } else {
    for (int i = 1; i <= 99; ++i) z0s.push_back(-1.0 + 0.02 * i);
  }

  std::vector<double> values(z0s.size()), identities(z0s.size());
  parallel_for(z0s.size(), options.threads, [&](size_t i) {
    values[i] = futaki_z0(data, wext, z0s[i], options.order);
    identities[i] = data.v().eval({z0s[i]}) * data.u_at(z0s[i]) * sol.theta(z0s[i]);
  });
  json curve = json::array();
  csv = "z0,F\n";
  double worst = 0;
  for (size_t i = 0; i < z0s.size(); ++i) {
    worst = std::max(worst, std::abs(values[i] - identities[i]));
    curve.push_back(json{{"z0", z0s[i]}, {"F", values[i]}});
    csv += std::to_string(z0s[i]) + "," + std::to_string(values[i]) + "\n";
  }
  residuals["futaki_identity"] = worst;

  json results;
  results["A1"] = value_json(wext.a1, options);
  results["A2"] = value_json(wext.a2, options);
  results["curve"] = curve;
  return results;
}

json run_pbundle_report(const json& config, const JobOptions& options, std::string& csv,
                        json& residuals) {
  AdmissibleData data = admissible_from_json(field(config, "admissible", "config"));
  StabilityReport report = stability_report(data, options.order);
  json results;
  results["A1"] = value_json(report.wext.a1, options);
  results["A2"] = value_json(report.wext.a2, options);
  results["theta"] = theta_json(data, report.theta, options);
  results["positivity"] = verdict_json(report.verdict);
  results["verdict"] = report.conclusion;
  json curve = json::array();
  csv = "z0,F\n";
  for (const auto& [z0, f] : report.futaki_curve) {
    curve.push_back(json{{"z0", z0}, {"F", f}});
    csv += std::to_string(z0) + "," + std::to_string(f) + "\n";
  }
  results["futaki_curve"] = curve;
  residuals["futaki_identity"] = report.max_identity_residual;
  double worst = 0;
  for (double r : report.theta.boundary_residuals()) worst = std::max(worst, r);
  residuals["boundary"] = worst;
  return results;
}

}  // namespace

Command command_from_string(const std::string& name) {
  if (name == "slope") return Command::Slope;
  if (name == "wext") return Command::WExt;
  if (name == "futaki") return Command::Futaki;
  if (name == "scan") return Command::Scan;
  if (name == "abreu") return Command::Abreu;
  if (name == "df") return Command::Df;
  if (name == "pbundle-solve") return Command::PBundleSolve;
  if (name == "pbundle-futaki") return Command::PBundleFutaki;
  if (name == "pbundle-report") return Command::PBundleReport;
  fail(ErrorCode::SchemaError, "unknown command '" + name + "'");
}

const char* to_string(Command cmd) {
  switch (cmd) {
    case Command::Slope: return "slope";
    case Command::WExt: return "wext";
    case Command::Futaki: return "futaki";
    case Command::Scan: return "scan";
    case Command::Abreu: return "abreu";
    case Command::Df: return "df";
    case Command::PBundleSolve: return "pbundle-solve";
    case Command::PBundleFutaki: return "pbundle-futaki";
    case Command::PBundleReport: return "pbundle-report";
  }
  return "?";
}

Rational rational_field(const nlohmann::json& j, const std::string& context) {
  if (j.is_string()) return rational_from_string(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  schema_fail(context + " must be an exact rational (string or integer)");
}

WeightExpr weight_from_json(const nlohmann::json& j, int dim) {
  if (!j.is_object()) schema_fail("weight must be an object");
  if (j.contains("expr")) {
    if (!j["expr"].is_string()) schema_fail("weight.expr must be a string");
    return WeightExpr::parse(j["expr"].get<std::string>(), dim);
  }
  if (j.contains("family")) return family_from_json(j, dim);
  schema_fail("weight needs either 'expr' or 'family'");
}

PLConvex pl_from_json(const nlohmann::json& j, int dim) {
  if (!j.is_object() || !j.contains("pieces") || !j["pieces"].is_array() || j["pieces"].empty())
    schema_fail("f must be {pieces: [{grad, offset}...]}");
  std::vector<PLConvex::Piece> pieces;
  for (const auto& jp : j["pieces"]) {
    PLConvex::Piece piece;
    piece.grad = rational_vector(field(jp, "grad", "f.pieces[]"), "f.pieces[].grad");
    if (static_cast<int>(piece.grad.size()) != dim)
      schema_fail("f.pieces[].grad must have the polytope dimension");
    piece.offset = rational_field(field(jp, "offset", "f.pieces[]"), "f.pieces[].offset");
    pieces.push_back(std::move(piece));
  }
  return PLConvex::from_pieces(std::move(pieces));
}

AdmissibleData admissible_from_json(const nlohmann::json& j) {
  std::vector<BundleFactor> factors;
  if (j.contains("factors")) {
    for (const auto& jf : j["factors"]) {
      BundleFactor factor;
      factor.d = int_field(jf, "d", "admissible.factors[]", 1);
      const json& scal = field(jf, "scal", "admissible.factors[]");
      if (scal.is_number_float()) {
        factor.scal = scal.get<double>();  // free real input; exact pipeline disengages
      } else {
        Rational exact = rational_field(scal, "admissible.factors[].scal");
        factor.scal = exact.get_d();
        factor.scal_exact = exact;
      }
      factor.xi = rational_field(field(jf, "xi", "admissible.factors[]"), "admissible.factors[].xi");
      factor.c = rational_field(field(jf, "c", "admissible.factors[]"), "admissible.factors[].c");
      factors.push_back(std::move(factor));
    }
  }
  WeightExpr v = weight_from_json(field(j, "v", "admissible"), 1);
  WeightExpr w = weight_from_json(field(j, "w", "admissible"), 1);
  return AdmissibleData::create(std::move(factors), std::move(v), std::move(w));
}

Report run(Command cmd, const nlohmann::json& config, const JobOptions& options) {
  if (options.pipeline != "float" && options.pipeline != "exact" && options.pipeline != "both")
    schema_fail("pipeline must be one of float|exact|both");
  auto start = std::chrono::steady_clock::now();

  Report report;
  json results, residuals = json::object();
  switch (cmd) {
    case Command::Slope: results = run_slope(config, options); break;
    case Command::WExt: results = run_wext(config, options, residuals); break;
    case Command::Futaki: results = run_futaki(config, options); break;
    case Command::Scan: results = run_scan(config, options, report.csv); break;
    case Command::Abreu: results = run_abreu(config, options, residuals); break;
    case Command::Df: results = run_df(config, options, report.csv); break;
    case Command::PBundleSolve: results = run_pbundle_solve(config, options, residuals); break;
    case Command::PBundleFutaki:
      results = run_pbundle_futaki(config, options, report.csv, residuals);
      break;
    case Command::PBundleReport:
      results = run_pbundle_report(config, options, report.csv, residuals);
      break;
  }

  double elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  report.body["command"] = to_string(cmd);
  report.body["config"] = config;
  report.body["pipeline"] = options.pipeline;
  report.body["order"] = options.order;
  report.body["results"] = results;
  report.body["residuals"] = residuals;
  report.body["wall_time_ms"] = elapsed_ms;
  return report;
}

}  // namespace wkstab::jobs
