#pragma once

// Built-in manifolds and soliton specifications.

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/lie/soliton.hpp"

namespace yamabe {

struct CatalogEntry {
  std::string name;  // includes parameters, e.g. "round_sphere:n=3,rho=2"
  Chart chart;
  MetricField metric;
  std::vector<SolitonSpec> specs;
  std::string provenance;

  bool has_spec(const std::string& spec_name) const {
    for (const auto& s : specs)
      if (s.name == spec_name) return true;
    return false;
  }

  const SolitonSpec& spec(const std::string& spec_name) const {
    for (const auto& s : specs)
      if (s.name == spec_name) return s;
    std::string names;
    for (const auto& s : specs) names += (names.empty() ? "" : ", ") + s.name;
    throw std::invalid_argument("manifold " + name + " has no soliton '" + spec_name + "'" +
                                (names.empty() ? std::string(" (it declares none)") : " (available: " + names + ")"));
  }

  /// First declared soliton, the default subject of the verifiers.
  const SolitonSpec& default_spec() const {
    if (specs.empty()) throw std::invalid_argument("manifold " + name + " declares no soliton field");
    return specs.front();
  }
};

using CatalogParams = std::map<std::string, double>;

namespace catalog_detail {

inline std::string num(double v) { return Expr::number(v).str(); }

inline std::string coord(int i) { return "x" + std::to_string(i + 1); }

/// Sum of coef * x_j terms; "0" when empty.
inline std::string linear(const std::vector<double>& row) {
  std::string s;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] == 0.0) continue;
    if (!s.empty()) s += " + ";
    s += row[j] == 1.0 ? coord(static_cast<int>(j)) : num(row[j]) + "*" + coord(static_cast<int>(j));
  }
  return s.empty() ? "0" : s;
}

inline VectorField linear_field(const std::vector<std::vector<double>>& m) {
  std::vector<std::string> comps;
  for (const auto& row : m) comps.push_back(linear(row));
  return VectorField::parse(comps, static_cast<int>(m.size()));
}

inline double param(const CatalogParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline int dim_param(const CatalogParams& p, double fallback) {
  const double n = param(p, "n", fallback);
  if (n != std::floor(n) || n < 2 || n > kMaxJetDim)
    throw std::invalid_argument("dimension n must be an integer in [2, " + std::to_string(kMaxJetDim) + "]");
  return static_cast<int>(n);
}

inline void check_keys(const std::string& name, const CatalogParams& p, std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw std::invalid_argument("catalog entry " + name + " has no parameter '" + k + "'");
  }
}

inline std::string label(const std::string& base, const CatalogParams& p) {
  if (p.empty()) return base;
  std::string s = base + ":";
  bool first = true;
  for (const auto& [k, v] : p) {
    s += (first ? "" : ",") + k + "=" + num(v);
    first = false;
  }
  return s;
}

inline SolitonSpec make_spec(const CatalogEntry& e, std::string name, VectorField v, std::variant<double, ScalarField> c,
                             std::string provenance) {
  SolitonSpec s;
  s.name = std::move(name);
  s.chart = e.chart;
  s.metric = e.metric;
  s.field = std::move(v);
  s.c = std::move(c);
  s.claimed_valid = true;
  s.provenance = std::move(provenance);
  return s;
}

// Linear solitons V = (a I + A) x on flat space have L_V g = 2a g, so c = -a.
inline CatalogEntry euclidean(const CatalogParams& p) {
  check_keys("euclidean", p, {"n", "a"});
  const int n = dim_param(p, 2);
  const double a = param(p, "a", 1.0);
  CatalogEntry e;
  e.name = label("euclidean", p);
  e.chart = Chart::make(std::vector<Interval>(n, Interval{-1.0, 1.0}));
  e.metric = MetricField::diagonal(std::vector<std::string>(n, "1"));
  e.provenance = "Flat metric on [-1,1]^n. For V = (a I + A) x with A antisymmetric, L_V g = 2a g and R = 0, so c = -a.";

  auto scaled_identity = [&](double s) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) m[i][i] = s;
    return m;
  };
  auto m_dil = scaled_identity(a);
  auto m_a = scaled_identity(a);
  m_a[0][1] = -1.0;  // rotation in the (x1, x2) plane
  m_a[1][0] = 1.0;
  auto m_b = scaled_identity(2 * a);
  m_b[0][1] = 0.5;
  m_b[1][0] = -0.5;
  if (n >= 3) {
    m_b[1][2] = 0.25;
    m_b[2][1] = -0.25;
  }
  e.specs.push_back(make_spec(e, "dilation", linear_field(m_dil), -a, "V = a x; L_V g = 2a g."));
  e.specs.push_back(make_spec(e, "dilation+rotA", linear_field(m_a), -a, "V = a x + A x, A a unit rotation generator."));
  e.specs.push_back(
      make_spec(e, "dilation+rotB", linear_field(m_b), -2 * a, "V = 2a x + B x, B antisymmetric; c = -2a."));
  return e;
}

inline CatalogEntry flat_torus(const CatalogParams& p) {
  check_keys("flat_torus", p, {"n"});
  const int n = dim_param(p, 2);
  CatalogEntry e;
  e.name = label("flat_torus", p);
  e.chart = Chart::make(std::vector<Interval>(n, Interval{0.0, 2 * std::numbers::pi}), std::vector<bool>(n, true));
  e.metric = MetricField::diagonal(std::vector<std::string>(n, "1"));
  e.provenance = "Flat periodic metric, R = 0. No soliton field.";
  return e;
}

/// Nested-angle chart of the radius-rho sphere: x1..x(n-1) in [0, pi], x_n in
/// [0, 2 pi) periodic, g = rho^2 diag(1, sin^2 x1, sin^2 x1 sin^2 x2, ...).
inline CatalogEntry sphere_base(const std::string& base, int n, double rho, const CatalogParams& p) {
  if (!(rho > 0.0)) throw std::invalid_argument("sphere radius rho must be positive");
  CatalogEntry e;
  e.name = label(base, p);
  std::vector<Interval> box(n, Interval{0.0, std::numbers::pi});
  box[n - 1] = Interval{0.0, 2 * std::numbers::pi};
  std::vector<bool> periodic(n, false);
  periodic[n - 1] = true;
  std::vector<double> margins(n, 0.05);
  margins[n - 1] = 0.0;
  e.chart = Chart::make(box, periodic, margins);
  // Gauss-Legendre nodes never reach the poles, so integration uses the full box.
  e.chart.quadrature_margins.assign(n, 0.0);
  const std::string r2 = rho == 1.0 ? "" : num(rho * rho) + "*";
  std::vector<std::string> diag;
  std::string prod;
  for (int i = 0; i < n; ++i) {
    diag.push_back(prod.empty() ? (rho == 1.0 ? "1" : num(rho * rho)) : r2 + prod);
    prod += (prod.empty() ? "" : "*") + ("sin(" + coord(i) + ")^2");
  }
  e.metric = MetricField::diagonal(diag);
  return e;
}

inline CatalogEntry round_sphere(const CatalogParams& p) {
  check_keys("round_sphere", p, {"n", "rho"});
  const int n = dim_param(p, 2);
  const double rho = param(p, "rho", 1.0);
  auto e = sphere_base("round_sphere", n, rho, p);
  const double r = n * (n - 1) / (rho * rho);
  e.provenance = "Round sphere of radius rho, R = n(n-1)/rho^2. The azimuthal field d/dx_n is Killing, so c = R.";
  std::vector<std::string> v(n, "0");
  v[n - 1] = "1";
  e.specs.push_back(make_spec(e, "rotation", VectorField::parse(v, n), r, "Killing rotation, c = R."));
  return e;
}

// V = kappa r d/dr on (dx^2 + dy^2)/(1 + r^2): L_V g = 2 kappa / (1 + r^2)^2 (dx^2 + dy^2)
// and R = 4 / (1 + r^2), so L_V g = 2 R g exactly when kappa = 4.
inline constexpr double kCigarKappa = 4.0;

inline CatalogEntry cigar(const CatalogParams& p) {
  check_keys("cigar", p, {});
  CatalogEntry e;
  e.name = "cigar";
  e.chart = Chart::make({Interval{-10.0, 10.0}, Interval{-10.0, 10.0}});
  e.metric = MetricField::diagonal({"1/(1 + x1^2 + x2^2)", "1/(1 + x1^2 + x2^2)"});
  e.provenance =
      "Cigar metric on the box [-10,10]^2, R = 4/(1+r^2). Symbolic computation of L_V g - 2 R g for "
      "V = kappa (x1 d1 + x2 d2) gives (2 kappa - 8)/(1+r^2)^2 delta, so kappa = 4 and c = 0 (steady).";
  e.specs.push_back(make_spec(e, "soliton", VectorField::parse({num(kCigarKappa) + "*x1", num(kCigarKappa) + "*x2"}, 2),
                              0.0, "kappa = 4 from the symbolic derivation."));
  return e;
}

inline CatalogEntry perturbed_torus(const CatalogParams& p) {
  check_keys("perturbed_torus", p, {"eps"});
  const double eps = param(p, "eps", 0.1);
  CatalogEntry e;
  e.name = label("perturbed_torus", p);
  e.chart = Chart::make({Interval{0.0, 2 * std::numbers::pi}, Interval{0.0, 2 * std::numbers::pi}}, {true, true});
  const std::string f = "exp(" + num(2 * eps) + "*sin(x1)*sin(x2))";
  e.metric = MetricField::diagonal({f, f});
  e.provenance = "Conformally flat torus g = exp(2 eps sin x1 sin x2) delta with nonconstant R. No soliton field.";
  return e;
}

// V = -sin(x1) d/dx1 on the round sphere is the gradient of cos(x1) (a first
// spherical harmonic) and satisfies L_V g = -2 cos(x1) g in every dimension
// and radius. Hence c = R + cos(x1).
inline CatalogEntry almost_sphere(const CatalogParams& p) {
  check_keys("almost_sphere", p, {"n", "rho"});
  const int n = dim_param(p, 2);
  const double rho = param(p, "rho", 1.0);
  auto e = sphere_base("almost_sphere", n, rho, p);
  const double r = n * (n - 1) / (rho * rho);
  e.provenance =
      "Round sphere with the conformal field V = -sin(x1) d/dx1 = grad cos(x1) (up to rho^2). "
      "Symbolic computation gives L_V g = -2 cos(x1) g, so sigma = -cos(x1) and c = R + cos(x1).";
  std::vector<std::string> v(n, "0");
  v[0] = "-sin(x1)";
  e.specs.push_back(make_spec(e, "conformal", VectorField::parse(v, n),
                              ScalarField::parse(num(r) + " + cos(x1)", n), "c(x) = R - sigma(x), sigma = -cos(x1)."));
  return e;
}

}  // namespace catalog_detail

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"euclidean", "flat_torus",      "round_sphere",
                                              "cigar",     "perturbed_torus", "almost_sphere"};
  return names;
}

/// Builds a catalog entry. Entries are values; concurrent calls are safe.
inline CatalogEntry catalog_get(const std::string& name, const CatalogParams& params = {}) {
  using namespace catalog_detail;
  if (name == "euclidean") return euclidean(params);
  if (name == "flat_torus") return flat_torus(params);
  if (name == "round_sphere") return round_sphere(params);
  if (name == "cigar") return cigar(params);
  if (name == "perturbed_torus") return perturbed_torus(params);
  if (name == "almost_sphere") return almost_sphere(params);
  std::string known;
  for (const auto& n : catalog_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown catalog manifold '" + name + "' (known: " + known + ")");
}

/// Parses "name" or "name:key=value,key=value".
inline CatalogEntry catalog_get_ref(const std::string& ref) {
  const auto colon = ref.find(':');
  CatalogParams params;
  if (colon != std::string::npos) {
    std::string rest = ref.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) throw std::invalid_argument("malformed catalog parameter '" + item + "'");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item.substr(eq + 1), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size() - eq - 1)
        throw std::invalid_argument("catalog parameter '" + item + "' is not a number");
      params[item.substr(0, eq)] = v;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return catalog_get(ref.substr(0, colon), params);
}

/// Manifolds with claimed-valid solitons that the acceptance suite covers.
inline std::vector<CatalogEntry> catalog_soliton_entries() {
  return {catalog_get("euclidean"), catalog_get("round_sphere"), catalog_get("cigar"), catalog_get("almost_sphere")};
}

/// Every default-parameter catalog entry.
inline std::vector<CatalogEntry> catalog_all() {
  std::vector<CatalogEntry> out;
  for (const auto& n : catalog_names()) out.push_back(catalog_get(n));
  return out;
}

}  // namespace yamabe
