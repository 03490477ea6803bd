// yamabe-lab: command-line driver for the soliton verifiers.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "yamabe/catalog/catalog.hpp"
#include "yamabe/flow/flow.hpp"
#include "yamabe/integrate/global.hpp"
#include "yamabe/io/manifold_json.hpp"
#include "yamabe/io/report_json.hpp"
#include "yamabe/lie/verify.hpp"

namespace {

using namespace yamabe;

enum Exit { kPass = 0, kViolation = 1, kUsage = 2, kEvaluation = 3 };

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string format = "json";
  std::string output;
  unsigned threads = 0;
};

struct GridOptions {
  int per_axis = 16;
  int random = 0;
  std::uint64_t seed = 12345;

  SampleGrid grid() const {
    if (random > 0) return SampleGrid::random(random, seed);
    return SampleGrid::tensor(per_axis);
  }

  void add(CLI::App* app, int default_per_axis) {
    per_axis = default_per_axis;
    app->add_option("--grid", per_axis, "Tensor sample grid, points per axis")->check(CLI::Range(4, 4096));
    app->add_option("--random", random, "Use this many random sample points instead of a tensor grid")
        ->check(CLI::Range(4, 10000000));
    app->add_option("--seed", seed, "Seed of the random sample grid");
  }
};

void require_positive(double v, const std::string& name) {
  if (!(v > 0.0)) throw UsageError(name + " must be positive");
}

std::vector<const SolitonSpec*> select_specs(const CatalogEntry& m, const std::string& name, bool all_by_default) {
  if (m.specs.empty()) throw UsageError("manifold " + m.name + " declares no soliton field");
  std::vector<const SolitonSpec*> out;
  if (!name.empty()) {
    try {
      out.push_back(&m.spec(name));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else if (all_by_default) {
    for (const auto& s : m.specs) out.push_back(&s);
  } else {
    out.push_back(&m.default_spec());
  }
  return out;
}

CatalogEntry load(const std::string& source) {
  CatalogEntry m;
  try {
    m = resolve_manifold(source);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  // A metric that fails here is an evaluation failure (exit 3), not a usage error.
  auto samples = SampleGrid::tensor(5).points(m.chart);
  const auto extra = SampleGrid::random(64, 7).points(m.chart);
  samples.insert(samples.end(), extra.begin(), extra.end());
  check_positive_definite(m.metric, samples);
  return m;
}

int exit_for(const ojson& reports) {
  bool failed = false, evaluation = false;
  for (const auto& r : reports) {
    if (!r.value("pass", false)) failed = true;
    if (r.value("failed_points", 0) > 0 || r.value("precondition_failed", false)) evaluation = true;
  }
  if (evaluation) return kEvaluation;
  return failed ? kViolation : kPass;
}

std::string verdict_for(int code) {
  switch (code) {
    case kPass: return "pass";
    case kViolation: return "fail";
    default: return "error";
  }
}

void emit_text(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw UsageError("cannot write " + c.output);
    f << text;
  }
}

void emit(const Common& c, const ojson& doc) {
  std::ostringstream os;
  if (c.format == "csv") write_report_csv(os, doc);
  else os << doc.dump(2) << '\n';
  emit_text(c, os.str());
}

int finish(const Common& c, const std::string& command, const ojson& config, const ojson& reports) {
  const int code = exit_for(reports);
  emit(c, make_run_report(command, config, reports, verdict_for(code)));
  return code;
}

ojson spec_names(const std::vector<const SolitonSpec*>& specs) {
  ojson a = ojson::array();
  for (const auto* s : specs) a.push_back(s->name);
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of Yamabe soliton identities"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, std::string threads_default = std::string("$") + util::kThreadsEnv +
                                                                   " or hardware concurrency") {
    sub->add_option("--format", common.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("-o,--output", common.output, "Write the report to this file instead of stdout");
    sub->add_option("--threads", common.threads, "Worker threads (default: " + threads_default + ")");
  };

  std::string manifold, spec_name;
  auto add_manifold = [&](CLI::App* sub) {
    sub->add_option("manifold", manifold, "Catalog name (e.g. round_sphere:n=3,rho=2) or manifold JSON file")
        ->required();
  };

  // check-soliton
  auto* cs = app.add_subcommand("check-soliton", "Soliton equation residual L_V g - 2(R-c)g");
  add_manifold(cs);
  add_common(cs);
  GridOptions cs_grid;
  cs_grid.add(cs, 32);
  double cs_tol = kSolitonTolerance;
  cs->add_option("--spec", spec_name, "Soliton name (default: every soliton of the manifold)");
  cs->add_option("--tol", cs_tol, "Tolerance on the scaled residual");

  // verify-lemma21
  auto* vl = app.add_subcommand("verify-lemma21", "Lie derivative identities of the connection and curvature");
  add_manifold(vl);
  add_common(vl);
  GridOptions vl_grid;
  vl_grid.add(vl, 16);
  std::string part = "all";
  VerifyOptions vopt;
  vl->add_option("--spec", spec_name, "Soliton name (default: the first one)");
  vl->add_option("--part", part, "Identity to check")->check(CLI::IsMember({"i", "ii", "iii", "iv", "all"}));
  vl->add_option("--tol-exact", vopt.tol_exact, "Tolerance of the jet-exact identities");
  vl->add_option("--tol-stencil", vopt.tol_stencil, "Tolerance of the stencil-based identities");
  vl->add_option("--spacing", vopt.stencil_spacing, "Stencil spacing");

  // soliton-constant
  auto* sc = app.add_subcommand("soliton-constant", "Soliton constant from int R^2 / int R and its lower bound");
  add_manifold(sc);
  add_common(sc);
  Theorem22Options topt;
  double alpha = 0.0;
  sc->add_option("--spec", spec_name, "Soliton name (default: the first one, if any)");
  sc->add_option("--alpha", alpha, "Lower bound alpha > 0 of R (default: min R over the nodes)");
  sc->add_option("--nodes", topt.nodes, "Quadrature nodes per axis")->check(CLI::Range(4, 4096));
  sc->add_option("--tol", topt.tol, "Tolerance of c_estimate checks");

  // commutator
  auto* cm = app.add_subcommand("commutator", "Homothety of V1 - V2 and Killing property of [V1, V2]");
  add_manifold(cm);
  add_common(cm);
  GridOptions cm_grid;
  cm_grid.add(cm, 16);
  std::string spec1, spec2;
  double cm_tol = 1e-10;
  cm->add_option("--spec1", spec1, "First soliton")->required();
  cm->add_option("--spec2", spec2, "Second soliton")->required();
  cm->add_option("--tol", cm_tol, "Tolerance");

  // box-check
  auto* bc = app.add_subcommand("box-check", "Box V against (n-2) grad (R-c)");
  add_manifold(bc);
  add_common(bc);
  GridOptions bc_grid;
  bc_grid.add(bc, 16);
  double bc_tol = 1e-7;
  bc->add_option("--spec", spec_name, "Soliton name (default: every soliton of the manifold)");
  bc->add_option("--tol", bc_tol, "Tolerance");

  // flow
  auto* fl = app.add_subcommand("flow", "Normalized Yamabe flow on the flat torus conformal class");
  add_common(fl, "1");
  int flow_n = 64;
  double flow_dt = 1e-3;
  long flow_steps = 10000;
  std::string initial = "0.1*sin(x1)*sin(x2)";
  std::string csv_path, dump_path;
  FlowOptions fopt;
  fl->add_option("--n", flow_n, "Grid size N (even, >= 8)");
  fl->add_option("--dt", flow_dt, "Time step");
  fl->add_option("--steps", flow_steps, "Maximum number of steps")->check(CLI::NonNegativeNumber);
  fl->add_option("--initial", initial, "Initial conformal exponent u(x1, x2)");
  fl->add_option("--csv", csv_path, "Write the trajectory CSV (t,r,minR,maxR,area) here");
  fl->add_option("--dump-u", dump_path, "Write the final u grid here");
  fl->add_option("--stop-tol", fopt.stop_tolerance, "Stop once max |R| falls below this");

  // export-manifold
  auto* ex = app.add_subcommand("export-manifold", "Write a manifold as a JSON specification file");
  add_manifold(ex);
  ex->add_option("-o,--output", common.output, "Write to this file instead of stdout");

  // report
  auto* rp = app.add_subcommand("report", "Re-serialize a saved JSON report");
  std::string report_path;
  rp->add_option("file", report_path, "JSON report written by another subcommand")->required()->check(CLI::ExistingFile);
  add_common(rp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const unsigned threads = common.threads;
    if (cs->parsed()) {
      require_positive(cs_tol, "--tol");
      const auto m = load(manifold);
      const auto specs = select_specs(m, spec_name, true);
      const auto grid = cs_grid.grid();
      ojson reports = ojson::array();
      for (const auto* s : specs) reports.push_back(to_json(verify_soliton(*s, grid, cs_tol, threads)));
      ojson config{{"manifold", manifold}, {"resolved", m.name}, {"specs", spec_names(specs)},
                   {"grid", grid.describe()}, {"tolerance", cs_tol}};
      return finish(common, "check-soliton", config, reports);
    }
    if (vl->parsed()) {
      require_positive(vopt.tol_exact, "--tol-exact");
      require_positive(vopt.tol_stencil, "--tol-stencil");
      require_positive(vopt.stencil_spacing, "--spacing");
      vopt.threads = threads;
      const auto m = load(manifold);
      const auto specs = select_specs(m, spec_name, false);
      const auto& s = *specs.front();
      const auto grid = vl_grid.grid();
      ojson reports = ojson::array();
      if (part == "i" || part == "all") reports.push_back(to_json(verify_lemma21_i(s, grid, vopt)));
      if (part == "ii" || part == "all") reports.push_back(to_json(verify_lemma21_ii(s, grid, vopt)));
      if (part == "iii" || part == "all") reports.push_back(to_json(verify_lemma21_iii(s, grid, vopt)));
      if (part == "iv" || part == "all") reports.push_back(to_json(verify_lemma21_iv(s, grid, vopt)));
      ojson config{{"manifold", manifold},        {"resolved", m.name},           {"spec", s.name},
                   {"part", part},                {"grid", grid.describe()},      {"tol_exact", vopt.tol_exact},
                   {"tol_stencil", vopt.tol_stencil}, {"spacing", vopt.stencil_spacing}};
      return finish(common, "verify-lemma21", config, reports);
    }
    if (sc->parsed()) {
      require_positive(topt.tol, "--tol");
      if (sc->count("--alpha")) {
        require_positive(alpha, "--alpha");
        topt.alpha = alpha;
      }
      topt.threads = threads;
      const auto m = load(manifold);
      const SolitonSpec* s = nullptr;
      if (!spec_name.empty() || !m.specs.empty()) s = select_specs(m, spec_name, false).front();
      const auto rep = verify_theorem22(m.chart, m.metric, s, s ? s->name : m.name, topt);
      ojson config{{"manifold", manifold}, {"resolved", m.name}, {"spec", s ? ojson(s->name) : ojson(nullptr)},
                   {"nodes", topt.nodes},  {"alpha", topt.alpha ? ojson(*topt.alpha) : ojson("min R")},
                   {"tolerance", topt.tol}};
      return finish(common, "soliton-constant", config, ojson::array({to_json(rep)}));
    }
    if (cm->parsed()) {
      require_positive(cm_tol, "--tol");
      const auto m = load(manifold);
      const auto a = select_specs(m, spec1, false);
      const auto b = select_specs(m, spec2, false);
      const auto grid = cm_grid.grid();
      const auto rep = verify_commutator_killing(*a.front(), *b.front(), grid, cm_tol, threads);
      ojson config{{"manifold", manifold}, {"resolved", m.name}, {"spec1", spec1},
                   {"spec2", spec2},       {"grid", grid.describe()}, {"tolerance", cm_tol}};
      return finish(common, "commutator", config, ojson::array({to_json(rep)}));
    }
    if (bc->parsed()) {
      require_positive(bc_tol, "--tol");
      const auto m = load(manifold);
      const auto specs = select_specs(m, spec_name, true);
      const auto grid = bc_grid.grid();
      VerifyOptions o;
      o.tol_exact = bc_tol;
      o.threads = threads;
      ojson reports = ojson::array();
      for (const auto* s : specs) reports.push_back(to_json(verify_geodesic_identity(*s, grid, o)));
      ojson config{{"manifold", manifold}, {"resolved", m.name}, {"specs", spec_names(specs)},
                   {"grid", grid.describe()}, {"tolerance", bc_tol}};
      return finish(common, "box-check", config, reports);
    }
    if (fl->parsed()) {
      require_positive(flow_dt, "--dt");
      require_positive(fopt.stop_tolerance, "--stop-tol");
      if (flow_n < 8 || flow_n % 2) throw UsageError("--n must be even and at least 8");
      ConformalState init;
      try {
        init = ConformalState::from_expression(initial, flow_n);
      } catch (const ParseError& e) {
        throw UsageError(std::string("--initial: ") + e.what());
      } catch (const EvalError& e) {
        throw UsageError(std::string("--initial: ") + e.what());
      }
      fopt.threads = threads == 0 ? 1 : threads;
      const auto tr = run_flow(init, flow_dt, flow_steps, fopt);
      if (!csv_path.empty()) {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw UsageError("cannot write " + csv_path);
        write_trajectory_csv(f, tr);
      }
      if (!dump_path.empty()) {
        std::ofstream f(dump_path, std::ios::binary);
        if (!f) throw UsageError("cannot write " + dump_path);
        write_u_grid(f, tr.final_state);
      }
      auto j = to_json(tr, flow_dt);
      // Converging to the requested tolerance counts as a pass.
      j["pass"] = tr.converged;
      ojson config{{"n", flow_n}, {"dt", flow_dt}, {"steps", flow_steps}, {"initial", initial},
                   {"stop_tolerance", fopt.stop_tolerance}};
      return finish(common, "flow", config, ojson::array({j}));
    }
    if (ex->parsed()) {
      const auto m = load(manifold);
      emit_text(common, manifold_to_json(m).dump(2) + "\n");
      return kPass;
    }
    if (rp->parsed()) {
      std::ifstream in(report_path);
      ojson doc;
      try {
        doc = ojson::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError(report_path + ": " + e.what());
      }
      if (!doc.is_object() || !doc.contains("reports") || !doc.contains("verdict"))
        throw UsageError(report_path + " is not a yamabe-lab report");
      emit(common, doc);
      const auto v = doc.at("verdict").get<std::string>();
      return v == "pass" ? kPass : v == "fail" ? kViolation : kEvaluation;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FlowError& e) {
    std::cerr << "evaluation failure: " << e.what() << '\n';
    return kEvaluation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "evaluation failure: " << e.what() << '\n';
    return kEvaluation;
  }
  return kUsage;
}
