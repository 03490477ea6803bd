#pragma once

// Manifold specification files (JSON). Schema: docs/manifold_schema.md.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "yamabe/catalog/catalog.hpp"

namespace yamabe {

class ManifoldFormatError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace io_detail {

using ojson = nlohmann::ordered_json;

inline const ojson& require(const ojson& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ManifoldFormatError(where + ": missing field \"" + key + "\"");
  return j.at(key);
}

template <class T>
T get_as(const ojson& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ManifoldFormatError(where + ": unexpected type " + std::string(j.type_name()));
  }
}

inline std::vector<std::string> string_list(const ojson& j, const std::string& where) {
  if (!j.is_array()) throw ManifoldFormatError(where + ": expected an array of expression strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_as<std::string>(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

template <class F>
auto with_context(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ManifoldFormatError(where + ": " + e.what());
  } catch (const ManifoldFormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ManifoldFormatError(where + ": " + e.what());
  }
}

}  // namespace io_detail

inline CatalogEntry manifold_from_json(const nlohmann::ordered_json& j) {
  using namespace io_detail;
  if (!j.is_object()) throw ManifoldFormatError("manifold: expected a JSON object");
  CatalogEntry e;
  e.name = get_as<std::string>(require(j, "name", "manifold"), "name");
  const int dim = get_as<int>(require(j, "dim", "manifold"), "dim");
  if (dim < 2 || dim > kMaxJetDim)
    throw ManifoldFormatError("dim: must be in [2, " + std::to_string(kMaxJetDim) + "]");

  const auto& box = require(j, "box", "manifold");
  if (!box.is_array() || static_cast<int>(box.size()) != dim) throw ManifoldFormatError("box: expected dim intervals");
  std::vector<Interval> intervals;
  for (int a = 0; a < dim; ++a) {
    const auto& b = box[a];
    const std::string w = "box[" + std::to_string(a) + "]";
    if (!b.is_array() || b.size() != 2) throw ManifoldFormatError(w + ": expected [lo, hi]");
    intervals.push_back({get_as<double>(b[0], w), get_as<double>(b[1], w)});
  }
  auto bool_list = [&](const char* key, bool fallback) {
    std::vector<bool> out(dim, fallback);
    if (!j.contains(key)) return out;
    const auto& v = j.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
      throw ManifoldFormatError(std::string(key) + ": expected dim booleans");
    for (int a = 0; a < dim; ++a) out[a] = get_as<bool>(v[a], std::string(key) + "[" + std::to_string(a) + "]");
    return out;
  };
  auto double_list = [&](const char* key, const std::vector<double>& fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
      throw ManifoldFormatError(std::string(key) + ": expected dim numbers");
    std::vector<double> out(dim);
    for (int a = 0; a < dim; ++a) out[a] = get_as<double>(v[a], std::string(key) + "[" + std::to_string(a) + "]");
    return out;
  };
  e.chart.dim = dim;
  e.chart.box = intervals;
  e.chart.periodic = bool_list("periodic", false);
  e.chart.margins = double_list("margins", std::vector<double>(dim, 0.0));
  e.chart.quadrature_margins = double_list("quadrature_margins", e.chart.margins);
  with_context("chart", [&] {
    e.chart.validate();
    return 0;
  });

  const auto& metric = require(j, "metric", "manifold");
  if (!metric.is_array() || static_cast<int>(metric.size()) != dim)
    throw ManifoldFormatError("metric: expected dim rows");
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < dim; ++i) {
    rows.push_back(string_list(metric[i], "metric[" + std::to_string(i) + "]"));
    if (static_cast<int>(rows.back().size()) != dim)
      throw ManifoldFormatError("metric[" + std::to_string(i) + "]: expected dim entries");
  }
  e.metric = with_context("metric", [&] { return MetricField::parse(rows); });

  std::map<std::string, VectorField> fields;
  if (j.contains("fields")) {
    const auto& f = j.at("fields");
    if (!f.is_object()) throw ManifoldFormatError("fields: expected an object of name -> components");
    for (const auto& [name, comps] : f.items()) {
      const std::string w = "fields." + name;
      const auto strs = string_list(comps, w);
      fields.emplace(name, with_context(w, [&] { return VectorField::parse(strs, dim); }));
    }
  }
  if (j.contains("provenance")) e.provenance = get_as<std::string>(j.at("provenance"), "provenance");

  if (j.contains("solitons")) {
    const auto& sl = j.at("solitons");
    if (!sl.is_array()) throw ManifoldFormatError("solitons: expected an array");
    for (std::size_t k = 0; k < sl.size(); ++k) {
      const std::string w = "solitons[" + std::to_string(k) + "]";
      const auto& s = sl[k];
      if (!s.is_object()) throw ManifoldFormatError(w + ": expected an object");
      SolitonSpec spec;
      spec.name = get_as<std::string>(require(s, "name", w), w + ".name");
      const auto field_name = get_as<std::string>(require(s, "field", w), w + ".field");
      auto it = fields.find(field_name);
      if (it == fields.end()) throw ManifoldFormatError(w + ".field: no field named \"" + field_name + "\"");
      spec.field = it->second;
      const auto& c = require(s, "c", w);
      if (c.is_number()) spec.c = c.get<double>();
      else if (c.is_string())
        spec.c = with_context(w + ".c", [&] { return ScalarField::parse(c.get<std::string>(), dim); });
      else throw ManifoldFormatError(w + ".c: expected a number or an expression string");
      spec.claimed_valid = s.contains("claimed_valid") ? get_as<bool>(s.at("claimed_valid"), w + ".claimed_valid") : true;
      if (s.contains("provenance")) spec.provenance = get_as<std::string>(s.at("provenance"), w + ".provenance");
      spec.chart = e.chart;
      spec.metric = e.metric;
      e.specs.push_back(std::move(spec));
    }
  }
  return e;
}

inline nlohmann::ordered_json manifold_to_json(const CatalogEntry& e) {
  nlohmann::ordered_json j;
  const int dim = e.chart.dim;
  j["name"] = e.name;
  j["dim"] = dim;
  j["box"] = nlohmann::ordered_json::array();
  for (const auto& b : e.chart.box) j["box"].push_back({b.lo, b.hi});
  j["periodic"] = nlohmann::ordered_json::array();
  for (int a = 0; a < dim; ++a) j["periodic"].push_back(static_cast<bool>(e.chart.periodic[a]));
  j["margins"] = e.chart.margins;
  j["quadrature_margins"] = e.chart.quadrature_margins;
  j["metric"] = e.metric.strings();
  j["fields"] = nlohmann::ordered_json::object();
  for (const auto& s : e.specs) j["fields"][s.name] = s.field.strings();
  j["solitons"] = nlohmann::ordered_json::array();
  for (const auto& s : e.specs) {
    nlohmann::ordered_json o;
    o["name"] = s.name;
    o["field"] = s.name;
    if (const double* c = std::get_if<double>(&s.c)) o["c"] = *c;
    else o["c"] = s.c_string();
    o["claimed_valid"] = s.claimed_valid;
    o["provenance"] = s.provenance;
    j["solitons"].push_back(o);
  }
  j["provenance"] = e.provenance;
  return j;
}

inline CatalogEntry load_manifold_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifoldFormatError("cannot open manifold file " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifoldFormatError(path + ": " + e.what());
  }
  return manifold_from_json(j);
}

/// A catalog reference ("cigar", "round_sphere:n=3") or a path to a JSON file.
inline CatalogEntry resolve_manifold(const std::string& source) {
  const auto base = source.substr(0, source.find(':'));
  for (const auto& n : catalog_names())
    if (base == n) return catalog_get_ref(source);
  if (source.size() > 5 && source.ends_with(".json")) return load_manifold_file(source);
  std::ifstream probe(source);
  if (probe) return load_manifold_file(source);
  return catalog_get_ref(source);  // reports the unknown name
}

}  // namespace yamabe
