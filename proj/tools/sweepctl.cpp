// sweepctl: simulate | optimize | certify | coderiv | convergence | examples
//
// Scenario input comes from the built-in registry (--id, optionally --param)
// or a JSON config (--scenario). Outputs per run directory: trajectory.csv,
// trace.csv, certificate.csv, residuals.csv, convergence.csv, report.json.
// Exit codes: 0 success, 2 infeasible or degenerate input, 3 solver stall,
// 4 bad configuration. Wall times go to the stderr log only, so report files
// are bitwise reproducible.

#include <CLI11.hpp>
#include <json.hpp>

#include "sweep/io.hpp"
#include "sweep/optimality.hpp"
#include "sweep/oracle.hpp"
#include "sweep/registry.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sweep;

namespace {

int log_level() {
  const char* env = std::getenv("SWEEPCTL_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "error") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[sweepctl] " << msg << "\n";
}
void log_error(const std::string& msg) { std::cerr << "[sweepctl] error: " << msg << "\n"; }

struct CommonOpts {
  std::string scenario_file;
  std::string id;
  int k = 0;
  double tau = -1.0;
  double param = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  std::string out;
};

Scenario load_scenario(const CommonOpts& copt) {
  if (!copt.scenario_file.empty()) return scenario_from_json_file(copt.scenario_file);
  if (copt.id.empty()) throw BadConfig("need --scenario <file> or --id <registry id>");
  const auto entry = registry_lookup(copt.id);
  if (!entry) throw BadConfig("unknown registry id " + copt.id);
  Scenario sc = entry->builder(std::isnan(copt.param) ? entry->default_param : copt.param);
  if (copt.tau >= 0) sc.tau = copt.tau;
  if (copt.seed != 0) sc.solver.seed = copt.seed;
  sc.validate();
  return sc;
}

int resolve_k(const CommonOpts& copt, const Scenario& sc) {
  return copt.k > 0 ? copt.k : sc.default_k;
}

fs::path ensure_out(const CommonOpts& copt) {
  fs::path dir = copt.out.empty() ? fs::path("out") / (copt.id.empty() ? "custom" : copt.id)
                                  : fs::path(copt.out);
  fs::create_directories(dir);
  return dir;
}

void write_report(const fs::path& dir, const json& body) {
  std::ofstream f(dir / "report.json");
  f << body.dump(2) << "\n";
}

json residuals_to_json(const CertificateResiduals& res) {
  json j;
  j["feasible"] = res.max_residual <= 1e-8 && res.nontrivial;
  j["degenerate"] = res.degenerate;
  j["nontrivial"] = res.nontrivial;
  j["enhanced_nontrivial"] = res.enhanced_nontrivial;
  j["max_residual"] = res.max_residual;
  return j;
}

int run_simulate(const CommonOpts& copt) {
  const Scenario sc = load_scenario(copt);
  const int k = resolve_k(copt, sc);
  const fs::path dir = ensure_out(copt);
  const auto t0 = std::chrono::steady_clock::now();
  json report;
  report["id"] = sc.id;
  report["subcommand"] = "simulate";
  report["k"] = k;
  try {
    const auto ctrl = sc.initial_controls(k);
    const auto state = catch_up(sc.x0, ctrl, sc.integrator);
    const auto rep = verify_feasible(state, ctrl);
    write_trajectory_csv((dir / "trajectory.csv").string(), Trajectory{ctrl, state});
    const Scalar cost = cost_Jk(DiscreteTriple{ctrl, state}, sc);
    report["cost"] = cost;
    report["feasible"] = rep.ok;
    report["max_violation"] = rep.max_violation;
    report["max_complementarity"] = rep.max_complementarity;
    if (sc.reference && sc.reference->cost) {
      report["reference_cost"] = *sc.reference->cost;
      report["gap"] = cost - *sc.reference->cost;
    }
    write_report(dir, report);
    log_info("simulate finished in " +
             std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count()) +
             " s");
    return 0;
  } catch (const DiscontinuityDetected& e) {
    report["error"] = "DiscontinuityDetected";
    report["node"] = e.node;
    report["jump"] = e.jump;
    write_report(dir, report);
    log_error(e.what());
    return 2;
  } catch (const EmptySetAt& e) {
    report["error"] = "EmptySetAt";
    report["node"] = e.node;
    write_report(dir, report);
    log_error(e.what());
    return 2;
  } catch (const InfeasiblePoint& e) {
    report["error"] = "InfeasibleInitial";
    write_report(dir, report);
    log_error(e.what());
    return 2;
  }
}

int run_optimize(const CommonOpts& copt) {
  const Scenario sc = load_scenario(copt);
  const int k = resolve_k(copt, sc);
  const fs::path dir = ensure_out(copt);
  const auto t0 = std::chrono::steady_clock::now();
  json report;
  report["id"] = sc.id;
  report["subcommand"] = "optimize";
  report["k"] = k;
  try {
    const auto res = solve_reduced(sc, k, sc.initial_controls(k));
    write_trajectory_csv((dir / "trajectory.csv").string(), Trajectory{res.triple.ctrl, res.triple.state});
    write_trace_csv((dir / "trace.csv").string(), res.trace);
    report["cost"] = res.cost;
    report["grad_norm"] = res.grad_norm;
    report["status"] = res.status == SolveResult::Status::Converged       ? "converged"
                       : res.status == SolveResult::Status::MeshConverged ? "mesh_converged"
                                                                          : "stalled";
    if (sc.reference && sc.reference->cost) {
      report["reference_cost"] = *sc.reference->cost;
      report["gap"] = res.cost - *sc.reference->cost;
    }
    write_report(dir, report);
    log_info("optimize finished in " +
             std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count()) +
             " s");
    return res.status == SolveResult::Status::Stalled ? 3 : 0;
  } catch (const InfeasibleInitial& e) {
    report["error"] = "InfeasibleInitial";
    write_report(dir, report);
    log_error(e.what());
    return 2;
  } catch (const EmptySetAt& e) {
    report["error"] = "EmptySetAt";
    report["node"] = e.node;
    write_report(dir, report);
    log_error(e.what());
    return 2;
  } catch (const DiscontinuityDetected& e) {
    report["error"] = "DiscontinuityDetected";
    write_report(dir, report);
    log_error(e.what());
    return 2;
  }
}

void write_certificate_csv(const fs::path& path, const Mesh& mesh, const DualCertificate& c) {
  std::ofstream f(path);
  f << "t";
  for (Index i = 0; i < c.px.cols(); ++i) f << ",px" << i;
  for (Index i = 0; i < c.pu.cols(); ++i) f << ",pu" << i;
  for (Index i = 0; i < c.pb.cols(); ++i) f << ",pb" << i;
  for (Index i = 0; i < c.gamma.cols(); ++i) f << ",gamma" << i;
  for (Index i = 0; i < c.xi.cols(); ++i) f << ",xi" << i;
  for (Index i = 0; i < c.eta.cols(); ++i) f << ",eta" << i;
  f << "\n";
  for (int j = 0; j <= mesh.k; ++j) {
    f << format_number(mesh.t(j));
    for (Index i = 0; i < c.px.cols(); ++i) f << "," << format_number(c.px(j, i));
    for (Index i = 0; i < c.pu.cols(); ++i) f << "," << format_number(c.pu(j, i));
    for (Index i = 0; i < c.pb.cols(); ++i) f << "," << format_number(c.pb(j, i));
    for (Index i = 0; i < c.gamma.cols(); ++i) {
      f << ",";
      if (j < mesh.k) f << format_number(c.gamma(j, i));
    }
    for (Index i = 0; i < c.xi.cols(); ++i) f << "," << format_number(c.xi(j, i));
    for (Index i = 0; i < c.eta.cols(); ++i) f << "," << format_number(c.eta(j, i));
    f << "\n";
  }
}

Matrix json_matrix(const json& j, Index rows, Index cols, const std::string& what) {
  if (j.is_null()) return Matrix::Zero(rows, cols);
  Matrix M(rows, cols);
  if (static_cast<Index>(j.size()) != rows) throw BadConfig(what + ": wrong row count");
  Index r = 0;
  for (const auto& row : j) {
    if (static_cast<Index>(row.size()) != cols) throw BadConfig(what + ": wrong column count");
    Index c = 0;
    for (const auto& e : row) M(r, c++) = e.get<Scalar>();
    ++r;
  }
  return M;
}

ContinuousCertificate parse_certificate(const std::string& path, const Scenario& sc, int k,
                                        const DiscreteTriple& z) {
  std::ifstream f(path);
  if (!f) throw BadConfig("cannot open certificate file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw BadConfig(std::string("certificate JSON: ") + e.what());
  }
  const Index n = sc.n, m = sc.m;
  const bool with_u = sc.mode == ControlMode::FreeU;
  ContinuousCertificate c;
  c.lambda = j.value("lambda", 0.0);
  c.px = json_matrix(j.value("px", json()), k + 1, n, "px");
  c.pu = json_matrix(j.value("pu", json()), k + 1, with_u ? n * m : 0, "pu");
  c.pb = json_matrix(j.value("pb", json()), k + 1, m, "pb");
  c.qx = j.contains("qx") ? json_matrix(j["qx"], k + 1, n, "qx") : c.px;
  c.qu = j.contains("qu") ? json_matrix(j["qu"], k + 1, c.pu.cols(), "qu") : c.pu;
  c.qb = j.contains("qb") ? json_matrix(j["qb"], k + 1, m, "qb") : c.pb;
  c.gamma_density = json_matrix(j.value("gamma_density", json()), k, m, "gamma_density");
  c.xi_density = json_matrix(j.value("xi_density", json()), k, m, "xi_density");
  for (const auto& a : j.value("gamma_atoms", json::array())) {
    Vector mass(m);
    Index i = 0;
    for (const auto& e : a.at("mass")) mass(i++) = e.get<Scalar>();
    c.gamma_atoms.push_back({a.at("t").get<Scalar>(), mass});
  }
  for (const auto& a : j.value("xi_atoms", json::array())) {
    Vector mass(m);
    Index i = 0;
    for (const auto& e : a.at("mass")) mass(i++) = e.get<Scalar>();
    c.xi_atoms.push_back({a.at("t").get<Scalar>(), mass});
  }
  c.eta = j.contains("eta") ? json_matrix(j["eta"], k, m, "eta") : z.state.eta;
  c.wx = json_matrix(j.value("wx", json()), k, n, "wx");
  c.wu = json_matrix(j.value("wu", json()), k, c.pu.cols(), "wu");
  c.wb = json_matrix(j.value("wb", json()), k, m, "wb");
  c.vx = json_matrix(j.value("vx", json()), k, n, "vx");
  c.vu = json_matrix(j.value("vu", json()), k, c.pu.cols(), "vu");
  c.vb = json_matrix(j.value("vb", json()), k, m, "vb");
  return c;
}

int run_certify(const CommonOpts& copt, const std::string& trajectory_file,
                const std::string& certificate_file, double lambda_fixed) {
  const Scenario sc = load_scenario(copt);
  const int k = resolve_k(copt, sc);
  const fs::path dir = ensure_out(copt);
  json report;
  report["id"] = sc.id;
  report["subcommand"] = "certify";
  report["k"] = k;

  DiscreteTriple z;
  if (!trajectory_file.empty()) {
    const auto traj = read_trajectory_csv(trajectory_file, sc.n, sc.m, sc.tau);
    z.ctrl = traj.ctrl;
    z.state = traj.state;
  } else if (sc.reference) {
    const Mesh mesh(sc.T, k);
    z.ctrl = ControlPath::sample(mesh, sc.reference->u, sc.reference->b, sc.tau);
    z.state.mesh = mesh;
    z.state.x.resize(k + 1, sc.n);
    for (int j = 0; j <= k; ++j) z.state.x.row(j) = sc.reference->x(mesh.t(j)).transpose();
    z.state.eta = Matrix::Zero(k, sc.m);
    for (int j = 0; j < k; ++j) {
      const Vector xdot = (z.state.x.row(j + 1) - z.state.x.row(j)).transpose() / mesh.h();
      const auto d = normal_cone_coeffs(z.state.x.row(j + 1).transpose(), z.ctrl.polyhedron(j + 1),
                                        -xdot, 1e-6);
      if (d.member) z.state.eta.row(j) = d.coeffs.eta.transpose();
    }
  } else {
    z.ctrl = sc.initial_controls(k);
    z.state = catch_up(sc.x0, z.ctrl, sc.integrator);
  }

  const auto feas = verify_feasible(z.state, z.ctrl, 1e-6);
  if (feas.max_violation > 1e-6) {
    report["error"] = "InfeasibleCandidate";
    report["max_violation"] = feas.max_violation;
    write_report(dir, report);
    log_error("candidate trajectory is infeasible");
    return 2;
  }

  if (!certificate_file.empty()) {
    // verify a supplied continuous certificate against the grid conditions
    const auto cert = parse_certificate(certificate_file, sc, k, z);
    const auto res = sc.mode == ControlMode::FixedU ? residuals_thm63(z, cert, sc)
                                                    : residuals_thm61(z, cert, sc);
    std::map<std::string, Scalar> table = res.by_name;
    write_residuals_csv((dir / "residuals.csv").string(), table);
    report["verdict"] = residuals_to_json(res);
    write_report(dir, report);
    return 0;
  }

  const LambdaMode mode =
      std::isnan(lambda_fixed) ? LambdaMode::free_mode() : LambdaMode::fixed_mode(lambda_fixed);
  const auto search = solve_certificate(z, sc, mode);
  json verdict;
  verdict["feasible"] = search.feasible;
  verdict["degenerate"] = search.degenerate;
  verdict["enhanced_nontrivial"] = search.enhanced_nontrivial;
  verdict["lambda_max"] = search.lambda_max;
  verdict["p_end_max"] = search.p_end_max;
  verdict["not_optimal"] = search.not_optimal;
  verdict["conflict"] = search.conflict;
  if (search.cert) {
    const auto res = residuals_thm52(z, *search.cert, sc);
    verdict["nontrivial"] = res.nontrivial;
    verdict["max_residual"] = res.max_residual;
    write_residuals_csv((dir / "residuals.csv").string(), res.by_name);
    write_certificate_csv(dir / "certificate.csv", z.ctrl.mesh, *search.cert);
  } else {
    verdict["nontrivial"] = false;
  }
  report["verdict"] = verdict;
  write_report(dir, report);
  return 0;
}

int run_coderiv(const std::string& query_file, const CommonOpts& copt) {
  std::ifstream f(query_file);
  if (!f) throw BadConfig("cannot open query file " + query_file);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw BadConfig(std::string("query JSON: ") + e.what());
  }
  CoderivQuery q;
  {
    const auto xb = j.at("xbar");
    q.xbar = Vector(xb.size());
    Index i = 0;
    for (const auto& e : xb) q.xbar(i++) = e.get<Scalar>();
    const auto& A = j.at("Abar");
    const Index m = static_cast<Index>(A.size());
    q.Abar = Matrix(m, q.xbar.size());
    Index r = 0;
    for (const auto& row : A) {
      Index c = 0;
      for (const auto& e : row) q.Abar(r, c++) = e.get<Scalar>();
      ++r;
    }
    q.bbar = Vector(m);
    i = 0;
    for (const auto& e : j.at("bbar")) q.bbar(i++) = e.get<Scalar>();
    q.vbar = Vector(q.xbar.size());
    i = 0;
    for (const auto& e : j.at("vbar")) q.vbar(i++) = e.get<Scalar>();
    q.u = Vector(q.xbar.size());
    i = 0;
    for (const auto& e : j.at("u")) q.u(i++) = e.get<Scalar>();
  }
  const auto cod = dstar_F(q);
  const fs::path dir = ensure_out(copt);
  json out;
  out["subcommand"] = "coderiv";
  out["exact"] = cod.exact;
  out["empty"] = cod.empty;
  json pieces = json::array();
  const auto sign_name = [](QSign s) {
    return s == QSign::Zero ? "zero" : s == QSign::NonNeg ? "nonneg" : "free";
  };
  std::cout << "coderivative pieces (" << (cod.exact ? "equality" : "inclusion") << " mode):\n";
  if (cod.empty) std::cout << "  empty (orthogonality condition fails)\n";
  for (const auto& piece : cod.pieces) {
    json pj;
    pj["p"] = std::vector<Scalar>(piece.p.data(), piece.p.data() + piece.p.size());
    std::vector<std::string> signs;
    for (auto s : piece.qsign) signs.push_back(sign_name(s));
    pj["qsign"] = signs;
    json affine;
    affine["x_slot"] = "A^T q";
    affine["A_slot"] = "q_i xbar - p_i u";
    affine["b_slot"] = "-q";
    std::vector<std::vector<Scalar>> Arows;
    for (Index r = 0; r < piece.Abar.rows(); ++r)
      Arows.push_back(std::vector<Scalar>(piece.Abar.row(r).data(),
                                          piece.Abar.row(r).data() + piece.Abar.cols()));
    affine["Abar"] = Arows;
    affine["xbar"] = std::vector<Scalar>(piece.xbar.data(), piece.xbar.data() + piece.xbar.size());
    affine["u"] = std::vector<Scalar>(piece.u.data(), piece.u.data() + piece.u.size());
    pj["affine"] = affine;
    pieces.push_back(pj);
    std::cout << "  p = [" << piece.p.transpose() << "], q signs:";
    for (auto s : piece.qsign) std::cout << " " << sign_name(s);
    std::cout << "\n";
  }
  out["pieces"] = pieces;

  if (j.contains("probes")) {
    json probe_results = json::array();
    for (const auto& pr : j["probes"]) {
      CoderivPiece::Covector w;
      w.wx = Vector(q.n());
      Index i = 0;
      for (const auto& e : pr.at("wx")) w.wx(i++) = e.get<Scalar>();
      w.wA = Matrix(q.m(), q.n());
      Index r = 0;
      for (const auto& row : pr.at("wA")) {
        Index c = 0;
        for (const auto& e : row) w.wA(r, c++) = e.get<Scalar>();
        ++r;
      }
      w.wb = Vector(q.m());
      i = 0;
      for (const auto& e : pr.at("wb")) w.wb(i++) = e.get<Scalar>();
      json one;
      one["member"] = coderiv_member(cod, q, w);
      if (q.n() <= 3 && q.m() <= 3) one["oracle"] = oracle_graph_normals(q, w);
      probe_results.push_back(one);
    }
    out["probes"] = probe_results;
  }
  write_report(dir, out);
  return 0;
}

int run_convergence(const CommonOpts& copt, std::vector<int> k_list) {
  const Scenario sc = load_scenario(copt);
  const fs::path dir = ensure_out(copt);
  if (k_list.empty()) k_list = {25, 50, 100, 200};
  std::optional<StateFunction> analytic;
  if (sc.reference) analytic = sc.reference->x;
  const auto table =
      convergence_study(sc.u_init, sc.b_init, sc.x0, sc.T, k_list, analytic, 1600, sc.tau);
  write_convergence_csv((dir / "convergence.csv").string(), table);
  json report;
  report["id"] = sc.id;
  report["subcommand"] = "convergence";
  json rows = json::array();
  for (size_t i = 0; i < table.rows.size(); ++i) {
    json r;
    r["k"] = table.rows[i].k;
    r["error"] = table.rows[i].error;
    if (i > 0) r["order"] = table.orders[i - 1];
    rows.push_back(r);
  }
  report["rows"] = rows;
  report["reference"] = analytic ? "analytic" : "richardson_k1600";
  write_report(dir, report);
  for (const auto& row : table.rows)
    std::cout << "k=" << row.k << "  sup-error=" << format_number(row.error) << "\n";
  return 0;
}

int run_examples(const CommonOpts& copt, bool run_all) {
  std::cout << "registered scenarios:\n";
  for (const auto& e : registry()) {
    std::cout << "  " << e.id << "  [" << e.default_subcommand << "]  " << e.summary;
    if (e.reference_cost) std::cout << "  (reference cost " << *e.reference_cost << ")";
    std::cout << "\n";
  }
  if (!run_all) return 0;

  // batch mode: one worker per scenario, per-scenario output directories
  const fs::path base = copt.out.empty() ? fs::path("out") : fs::path(copt.out);
  std::vector<std::future<std::pair<std::string, int>>> futures;
  for (const auto& e : registry()) {
    futures.push_back(std::async(std::launch::async, [&, e]() {
      CommonOpts sub = copt;
      sub.id = e.id;
      sub.out = (base / e.id).string();
      int code = 0;
      try {
        if (e.default_subcommand == "optimize") {
          code = run_optimize(sub);
        } else if (e.default_subcommand == "certify") {
          code = run_certify(sub, "", "", std::numeric_limits<double>::quiet_NaN());
        } else {
          code = run_simulate(sub);
        }
      } catch (const std::exception& ex) {
        log_error(e.id + ": " + ex.what());
        code = 4;
      }
      return std::make_pair(e.id, code);
    }));
  }
  int worst = 0;
  for (auto& fu : futures) {
    const auto [id, code] = fu.get();
    std::cout << "  ran " << id << " -> exit " << code << "\n";
    // the degenerate scenario is expected to stop with code 2
    if (id != "degenerate_2_3") worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controlled polyhedral sweeping process toolkit"};
  app.require_subcommand(1);

  CommonOpts copt;
  std::string trajectory_file, certificate_file, query_file, k_list_str;
  double lambda_fixed = std::numeric_limits<double>::quiet_NaN();
  bool run_all = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", copt.scenario_file, "scenario config (JSON)");
    cmd->add_option("--id", copt.id, "registry scenario id");
    cmd->add_option("--k", copt.k, "mesh intervals");
    cmd->add_option("--tau", copt.tau, "endpoint relaxation width");
    cmd->add_option("--param", copt.param, "registry scenario parameter (e.g. alpha)");
    cmd->add_option("--seed", copt.seed, "solver seed");
    cmd->add_option("--out", copt.out, "output directory");
  };

  auto* sim = app.add_subcommand("simulate", "integrate the sweeping dynamics");
  add_common(sim);
  auto* opt = app.add_subcommand("optimize", "solve the discrete control problem");
  add_common(opt);
  auto* cert = app.add_subcommand("certify", "reconstruct or verify dual certificates");
  add_common(cert);
  cert->add_option("--trajectory", trajectory_file, "candidate trajectory CSV");
  cert->add_option("--certificate", certificate_file, "continuous certificate JSON");
  cert->add_option("--lambda", lambda_fixed, "fix the cost multiplier");
  auto* cod = app.add_subcommand("coderiv", "evaluate coderivative pieces");
  add_common(cod);
  cod->add_option("--query", query_file, "coderivative query JSON")->required();
  auto* conv = app.add_subcommand("convergence", "mesh refinement study");
  add_common(conv);
  conv->add_option("--k-list", k_list_str, "comma separated mesh sizes");
  auto* ex = app.add_subcommand("examples", "list (and optionally run) the registry");
  add_common(ex);
  ex->add_flag("--run", run_all, "run every entry's default subcommand");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(sim)) return run_simulate(copt);
    if (app.got_subcommand(opt)) return run_optimize(copt);
    if (app.got_subcommand(cert)) return run_certify(copt, trajectory_file, certificate_file, lambda_fixed);
    if (app.got_subcommand(cod)) return run_coderiv(query_file, copt);
    if (app.got_subcommand(conv)) {
      std::vector<int> ks;
      if (!k_list_str.empty()) {
        size_t pos = 0;
        while (pos < k_list_str.size()) {
          const size_t comma = k_list_str.find(',', pos);
          ks.push_back(std::stoi(k_list_str.substr(pos, comma - pos)));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
      }
      return run_convergence(copt, ks);
    }
    if (app.got_subcommand(ex)) return run_examples(copt, run_all);
  } catch (const BadConfig& e) {
    log_error(e.what());
    return 4;
  } catch (const SolverStalled& e) {
    log_error(e.what());
    return 3;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 4;
  }
  return 4;
}
