#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "yamabe/io/manifold_json.hpp"
#include "yamabe/io/report_json.hpp"
#include "yamabe/lie/verify.hpp"

using namespace yamabe;
namespace fs = std::filesystem;

namespace {

void check_same_entry(const CatalogEntry& a, const CatalogEntry& b) {
  CHECK(a.chart.dim == b.chart.dim);
  for (int i = 0; i < a.chart.dim; ++i) {
    CHECK(a.chart.box[i].lo == b.chart.box[i].lo);
    CHECK(a.chart.box[i].hi == b.chart.box[i].hi);
  }
  CHECK(a.chart.periodic == b.chart.periodic);
  CHECK(a.chart.margins == b.chart.margins);
  CHECK(a.chart.quadrature_margins == b.chart.quadrature_margins);
  CHECK(same_metric(a.metric, b.metric));
  REQUIRE(a.specs.size() == b.specs.size());
  for (std::size_t k = 0; k < a.specs.size(); ++k) {
    CHECK(a.specs[k].name == b.specs[k].name);
    CHECK(a.specs[k].field.strings() == b.specs[k].field.strings());
    CHECK(a.specs[k].c_string() == b.specs[k].c_string());
    CHECK(a.specs[k].claimed_valid == b.specs[k].claimed_valid);
  }
}

nlohmann::ordered_json minimal() {
  return nlohmann::ordered_json::parse(R"({
    "name": "m", "dim": 2, "box": [[0, 1], [0, 1]],
    "metric": [["1", "0"], ["0", "1"]]
  })");
}

std::string message_of(const nlohmann::ordered_json& j) {
  try {
    manifold_from_json(j);
  } catch (const ManifoldFormatError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("catalog entries round-trip through JSON", "[io]") {
  auto entries = catalog_all();
  entries.push_back(catalog_get("round_sphere", {{"n", 3}, {"rho", 2}}));
  entries.push_back(catalog_get("almost_sphere", {{"n", 3}}));
  for (const auto& e : entries) {
    INFO(e.name);
    const auto text = manifold_to_json(e).dump(2);
    const auto back = manifold_from_json(nlohmann::ordered_json::parse(text));
    check_same_entry(e, back);
    CHECK(manifold_to_json(back).dump(2) == text);
    for (const auto& s : back.specs) CHECK(verify_soliton(s, SampleGrid::random(100)).pass);
  }
}

TEST_CASE("shipped manifold files match the catalog", "[io]") {
  const fs::path dir = fs::path(YAMABE_SHARE_DIR) / "manifolds";
  const std::vector<std::pair<std::string, std::string>> files{
      {"euclidean.json", "euclidean"},          {"flat_torus.json", "flat_torus"},
      {"round_sphere.json", "round_sphere"},    {"round_sphere_n3.json", "round_sphere:n=3"},
      {"cigar.json", "cigar"},                  {"perturbed_torus.json", "perturbed_torus"},
      {"almost_sphere.json", "almost_sphere"},
  };
  for (const auto& [file, ref] : files) {
    INFO(file);
    const auto loaded = load_manifold_file((dir / file).string());
    check_same_entry(loaded, catalog_get_ref(ref));
    CHECK(resolve_manifold((dir / file).string()).name == loaded.name);
  }
  CHECK(resolve_manifold("cigar").name == "cigar");
  CHECK(resolve_manifold("round_sphere:n=3").chart.dim == 3);
  CHECK_THROWS_AS(resolve_manifold("no_such_manifold"), std::invalid_argument);
  CHECK_THROWS_AS(load_manifold_file("/nonexistent/file.json"), ManifoldFormatError);
}

TEST_CASE("malformed manifold files are rejected with a location", "[io][errors]") {
  CHECK(message_of(minimal()).empty());
  {
    auto j = minimal();
    j.erase("metric");
    CHECK(message_of(j).find("metric") != std::string::npos);
  }
  {
    auto j = minimal();
    j["dim"] = 1;
    CHECK_FALSE(message_of(j).empty());
  }
  {
    auto j = minimal();
    j["metric"][0][1] = "x1 +";
    CHECK(message_of(j).find("metric") != std::string::npos);
  }
  {
    auto j = minimal();
    j["metric"][0][1] = "x1";  // asymmetric
    CHECK_FALSE(message_of(j).empty());
  }
  {
    auto j = minimal();
    j["box"][1] = nlohmann::ordered_json::array({0});
    CHECK(message_of(j).find("box[1]") != std::string::npos);
  }
  {
    auto j = minimal();
    j["metric"][1][1] = "x3";
    CHECK_FALSE(message_of(j).empty());
  }
  {
    auto j = minimal();
    j["solitons"] = nlohmann::ordered_json::parse(R"([{"name": "s", "field": "missing", "c": 0}])");
    CHECK(message_of(j).find("solitons[0].field") != std::string::npos);
  }
  {
    auto j = minimal();
    j["fields"] = nlohmann::ordered_json::parse(R"({"v": ["x1", "x2"]})");
    j["solitons"] = nlohmann::ordered_json::parse(R"([{"name": "s", "field": "v", "c": true}])");
    CHECK(message_of(j).find("solitons[0].c") != std::string::npos);
  }
  {
    auto j = minimal();
    j["periodic"] = nlohmann::ordered_json::array({true});
    CHECK(message_of(j).find("periodic") != std::string::npos);
  }
  CHECK_FALSE(message_of(nlohmann::ordered_json::array()).empty());

  const fs::path tmp = fs::temp_directory_path() / "yamabe_test_bad.json";
  std::ofstream(tmp) << "{ \"name\": ";
  CHECK_THROWS_AS(load_manifold_file(tmp.string()), ManifoldFormatError);
  fs::remove(tmp);
}

TEST_CASE("almost-soliton constants are stored as expressions", "[io]") {
  auto j = minimal();
  j["fields"] = nlohmann::ordered_json::parse(R"({"v": ["x1", "x2"]})");
  j["solitons"] = nlohmann::ordered_json::parse(R"([{"name": "s", "field": "v", "c": "x1^2 - 1"}])");
  const auto e = manifold_from_json(j);
  CHECK(e.specs[0].kind() == SolitonSpec::Kind::Almost);
  CHECK(e.specs[0].c_at(Point{2.0, 0.0}) == 3.0);
  CHECK(e.specs[0].claimed_valid);
}

TEST_CASE("run reports are deterministic and thread independent", "[io][determinism]") {
  const auto s = catalog_get("cigar").default_spec();
  auto run = [&](unsigned threads) {
    VerifyOptions opt;
    opt.threads = threads;
    ojson reports = ojson::array();
    reports.push_back(to_json(verify_soliton(s, SampleGrid::random(200, 9), kSolitonTolerance, threads)));
    reports.push_back(to_json(verify_lemma21_ii(s, SampleGrid::tensor(6), opt)));
    return make_run_report("verify", ojson{{"manifold", "cigar"}}, reports, "pass").dump(2);
  };
  const auto a = run(1);
  CHECK(a == run(1));
  CHECK(a == run(4));
  const auto j = ojson::parse(a);
  CHECK(j.at("schema_version") == kReportSchemaVersion);
  CHECK(j.at("tool") == "yamabe-lab");
  CHECK(j.at("reports").size() == 2);
  CHECK(j.at("reports")[0].at("kind") == "identity");
  // Key order is part of the format.
  auto it = j.begin();
  CHECK(it.key() == "schema_version");
}

TEST_CASE("report CSV", "[io]") {
  const auto s = catalog_get("cigar").default_spec();
  ojson reports = ojson::array();
  reports.push_back(to_json(verify_lemma21_iii(s, SampleGrid::tensor(4))));
  GlobalReport g;
  g.id = "theorem22";
  g.subject = "x, \"quoted\"";
  g.precondition_failed = true;
  g.preconditions = {"min R below alpha"};
  reports.push_back(to_json(g));
  std::ostringstream os;
  write_report_csv(os, make_run_report("verify", ojson::object(), reports, "fail"));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "report,subject,label,value,scaled,tolerance,informational,pass");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("lemma21.iii,soliton,paper-literal,", 0) == 0);
  CHECK(rows[0].find(",true,") != std::string::npos);
  CHECK(rows[2] == "theorem22,\"x, \"\"quoted\"\"\",precondition: min R below alpha,,,,false,false");
}
