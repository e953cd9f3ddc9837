// fluxspec command line: radial and planar solves, certificates and the
// config-driven experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fluxspec/fluxspec.hpp"

namespace {

using namespace fluxspec;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFailed = 2;

struct Global {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::string resolution;
  std::optional<double> tol;
  bool no_timestamp = false;
  int workers = 0;
};

struct DomainArgs {
  std::string file;
  double R0 = 1.0;
  double R1 = 2.0;
  double delta = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--domain", file, "domain JSON file");
    app->add_option("--R0", R0, "hole radius");
    app->add_option("--R1", R1, "outer radius");
    app->add_option("--delta", delta, "offset of the hole from the outer center");
  }

  StarDomain build() const {
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw InvalidArgument("cannot open domain file: " + file);
      nlohmann::json j;
      in >> j;
      return domain_from_json(j);
    }
    if (delta == 0.0) {
      char label[64];
      std::snprintf(label, sizeof label, "annulus(R0=%g;R1=%g)", R0, R1);
      return make_annulus(R0, R1, label);
    }
    return make_eccentric_annulus(R0, R1, delta);
  }
};

/// Writes to --out, or stdout when it is empty or "-".
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InvalidArgument("cannot open output: " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

MeshParams mesh_from(const Global& g, MeshParams base = {}) {
  return g.resolution.empty() ? base : parse_resolution(g.resolution, base);
}

void check_format(const Global& g) {
  if (g.format != "csv" && g.format != "json") throw InvalidArgument("--format must be csv or json");
}

int cmd_annulus(const Global& g, const DomainArgs& d, double phi, const std::string& bc_name, int n, int modes) {
  const AnnulusSpec a(d.R0, d.R1);
  const InnerBC bc = inner_bc_from_string(bc_name);
  const Flux f = reduce_flux(phi);
  RadialSolveOptions opt;
  if (g.tol) opt.tol = *g.tol;
  const AnnulusEigenvalue res = annulus_eigenvalue(a, f, bc, n, modes, opt);
  const MonotonicityReport mono = monotonicity_report(res.ground_state, f);
  Sink sink(g.out);
  if (g.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : res.per_mode)
      rows.push_back({{"m", r.mode}, {"nu", r.nu}, {"mu", r.mu}, {"est_error", r.estimated_error}});
    nlohmann::json j{{"R0", a.R0},
                     {"R1", a.R1},
                     {"phi", phi},
                     {"phi_reduced", f.reduced},
                     {"bc", to_string(bc)},
                     {"n", n},
                     {"lambda", res.lambda},
                     {"est_error", res.estimated_error()},
                     {"minimizing_mode", res.minimizing_mode},
                     {"per_mode", rows},
                     {"monotonicity",
                      {{"u_positive", mono.u_positive},
                       {"u_increasing", mono.u_increasing},
                       {"N_positive", mono.N_positive},
                       {"U_decreasing", mono.U_decreasing},
                       {"worst_violation", mono.worst_violation},
                       {"tolerance", mono.tolerance}}}};
    sink.os() << j.dump(2) << "\n";
  } else {
    sink.os() << radial_csv_header() << "\n";
    for (const auto& r : res.per_mode)
      sink.os() << radial_csv_row(a, phi, r.mode, bc, n, r.mu, r.estimated_error) << "\n";
  }
  return kExitOk;
}

int cmd_solve(const Global& g, const DomainArgs& d, double phi, const std::string& kind_name,
              const std::string& eigvec_path) {
  const StarDomain dom = d.build();
  const ProblemKind kind = problem_kind_from_string(kind_name);
  PlanarOptions opt;
  opt.mesh = mesh_from(g, opt.mesh);
  if (g.tol) opt.solver.tol = *g.tol;
  const EigenSolveResult res = planar_eigenvalue(dom, reduce_flux(phi), kind, opt);
  if (!eigvec_path.empty()) {
    std::ofstream ev(eigvec_path);
    if (!ev) throw InvalidArgument("cannot open eigenvector output: " + eigvec_path);
    write_eigenvector_csv(ev, res);
  }
  Sink sink(g.out);
  if (g.format == "json") {
    nlohmann::json j{{"label", dom.label()},
                     {"domain", domain_to_json(dom)},
                     {"phi", phi},
                     {"kind", to_string(kind)},
                     {"lambda", res.lambda},
                     {"est_error", opt_json(res.estimated_error)},
                     {"residual", res.residual},
                     {"iterations", res.iterations},
                     {"n_s", opt.mesh.n_s},
                     {"n_t", opt.mesh.n_t}};
    sink.os() << j.dump(2) << "\n";
  } else {
    char buf[256];
    std::snprintf(buf, sizeof buf, ",%.10g,%s,%.12g,%.3e,%.3e,%d,%d,%d\n", phi, to_string(kind), res.lambda,
                  res.estimated_error, res.residual, res.iterations, opt.mesh.n_s, opt.mesh.n_t);
    sink.os() << "label,phi,kind,lambda,est_error,residual,iterations,n_s,n_t\n"
              << detail::csv_field(dom.label()) << buf;
  }
  return kExitOk;
}

int cmd_certify(const Global& g, const DomainArgs& d, double phi, const std::string& bc_name, bool with_domain,
                int quad_n) {
  const StarDomain dom = d.build();
  const InnerBC bc = inner_bc_from_string(bc_name);
  const Flux f = reduce_flux(phi);
  const TrialState trial = build_trial_state(dom, f, bc);
  CertificateReport rep = rayleigh_quotient(trial, dom, f, quad_n);
  const LemmaDecomposition dec = lemma_decomposition(trial, dom, f, quad_n);
  if (with_domain) {
    PlanarOptions opt;
    opt.mesh = mesh_from(g, opt.mesh);
    if (g.tol) opt.solver.tol = *g.tol;
    const ProblemKind kind =
        bc == InnerBC::Dirichlet ? ProblemKind::PerforatedDirichletInner : ProblemKind::PerforatedNeumannInner;
    const EigenSolveResult r = planar_eigenvalue(dom, f, kind, opt);
    attach_domain_eigenvalue(rep, r.lambda, r.estimated_error);
  }
  Sink sink(g.out);
  if (g.format == "json") {
    nlohmann::json j = to_json(rep);
    j["decomposition"] = to_json(dec);
    sink.os() << j.dump(2) << "\n";
  } else {
    sink.os() << certificate_csv_header() << "\n" << certificate_csv_row(rep) << "\n";
  }
  bool ok = rep.upper_bound_ok && rep.below_annulus;
  if (!dom.is_concentric() && !f.is_integer()) ok = ok && rep.strictly_below && rep.mass_gap_positive;
  return ok ? kExitOk : kExitFailed;
}

ExperimentConfig load_config(const Global& g, Experiment fallback, const nlohmann::json& defaults) {
  ExperimentConfig cfg;
  if (!g.config.empty()) {
    cfg = config_from_file(g.config);
  } else {
    nlohmann::json j = defaults;
    j["experiment"] = to_string(fallback);
    cfg = config_from_json(j);
  }
  if (!g.resolution.empty()) cfg.mesh = parse_resolution(g.resolution, cfg.mesh);
  if (g.tol) cfg.solver_tol = *g.tol;
  if (g.workers > 0) cfg.workers = g.workers;
  return cfg;
}

int emit(const Global& g, const ExperimentConfig& cfg, const VerificationReport& rep) {
  Sink sink(g.out.empty() ? cfg.output : g.out);
  if (g.format == "json")
    sink.os() << to_json(rep).dump(2) << "\n";
  else
    write_csv(sink.os(), rep, !g.no_timestamp);
  const auto s = rep.summary();
  std::fprintf(stderr, "%s: %d rows, %d passed, %d failed, %d errors, %d candidates\n", rep.experiment.c_str(),
               s.rows, s.passed, s.failed, s.errors, s.candidates);
  return rep.all_pass() ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lowest eigenvalues of Aharonov-Bohm and localized-field magnetic Laplacians on planar domains"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output path (default stdout, - for stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--resolution", g.resolution, "planar mesh as <n_s>x<n_t>");
  app.add_option("--tol", g.tol, "solver tolerance (normwise backward error)");
  app.add_flag("--no-timestamp", g.no_timestamp, "omit the timestamp line from CSV reports");
  app.add_option("--workers", g.workers, "worker threads (FLUXSPEC_WORKERS takes precedence)");

  DomainArgs dom;
  double phi = 0.5;
  std::string bc = "dirichlet";
  std::string kind = "perforated-dirichlet";

  auto* annulus = app.add_subcommand("annulus", "radial mode solve on a concentric annulus");
  int n_el = kDefaultRadialElements, modes = kDefaultModeWindow;
  annulus->add_option("--R0", dom.R0, "hole radius");
  annulus->add_option("--R1", dom.R1, "outer radius");
  annulus->add_option("--phi", phi, "flux");
  annulus->add_option("--bc", bc, "inner boundary condition: dirichlet or neumann");
  annulus->add_option("--n", n_el, "radial elements");
  annulus->add_option("--modes", modes, "mode window |m| <= modes");

  auto* solve = app.add_subcommand("solve", "planar eigenvalue of one domain");
  std::string eigvec;
  dom.add_to(solve);
  solve->add_option("--phi", phi, "flux");
  solve->add_option("--kind", kind, "perforated-dirichlet, perforated-neumann, punctured or localized");
  solve->add_option("--eigenvector", eigvec, "write the eigenvector CSV here");

  auto* certify = app.add_subcommand("certify", "trial-state certificate against the matched annulus");
  bool with_domain = false;
  int quad_n = kDefaultQuadCells;
  DomainArgs cdom;
  cdom.add_to(certify);
  certify->add_option("--phi", phi, "flux");
  certify->add_option("--bc", bc, "dirichlet or neumann");
  certify->add_flag("--with-domain", with_domain, "also solve on the domain for the lower end of the sandwich");
  certify->add_option("--quad", quad_n, "angular quadrature cells (>= 64)");

  auto* sweep = app.add_subcommand("sweep", "lambda(phi) curves with periodicity and evenness checks");
  std::string sweep_kind = "perforated-dirichlet";
  sweep->add_option("--kind", sweep_kind, "problem kind when no config is given");

  auto* verify = app.add_subcommand("verify", "verification experiments with pass/fail rows");
  std::string experiment = "verify_theorem";
  verify->add_option("--experiment", experiment, "experiment to run when no config is given");

  auto* probe = app.add_subcommand("probe", "exploratory comparison with the matched concentric pair");

  for (auto* sub : {annulus, solve, certify, sweep, verify, probe}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    check_format(g);
    if (annulus->parsed()) return cmd_annulus(g, dom, phi, bc, n_el, modes);
    if (solve->parsed()) return cmd_solve(g, dom, phi, kind, eigvec);
    if (certify->parsed()) return cmd_certify(g, cdom, phi, bc, with_domain, quad_n);
    if (sweep->parsed()) {
      nlohmann::json def{{"family", {{"type", "eccentric"}, {"deltas", {0.3}}}},
                         {"fluxes", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}},
                         {"kind", sweep_kind}};
      ExperimentConfig cfg = load_config(g, Experiment::FluxSweep, def);
      if (cfg.experiment != Experiment::FluxSweep) throw InvalidArgument("sweep: config must describe flux_sweep");
      return emit(g, cfg, run_flux_sweep(cfg));
    }
    if (verify->parsed()) {
      const Experiment e = experiment_from_string(experiment);
      nlohmann::json def = nlohmann::json::object();
      if (e == Experiment::VerifyNeumann) def["fluxes"] = {0.25, 0.5};
      if (e == Experiment::ShrinkingHole) {
        def["domains"] = {{{"hole_radius", 0.1}, {"outer", {{"c0", 1.0}}}, {"label", "disk(R=1)"}}};
        def["fluxes"] = {0.5};
      }
      if (e == Experiment::LargeFlux) def["family"] = {{"type", "eccentric"}, {"R0", 0.25}, {"R1", 2.0}, {"deltas", {0.3}}};
      if (e == Experiment::ShapeFamily)
        def["family"] = {{"type", "perturbed"}, {"mode", 2}, {"amplitudes", {0.1, 0.2}}};
      const ExperimentConfig cfg = load_config(g, e, def);
      return emit(g, cfg, run_experiment(cfg));
    }
    if (probe->parsed()) {
      nlohmann::json def{{"fluxes", {0.0, 0.5, 1.5, 2.5}}};
      ExperimentConfig cfg = load_config(g, Experiment::ConjectureProbe, def);
      if (cfg.experiment != Experiment::ConjectureProbe)
        throw InvalidArgument("probe: config must describe conjecture_probe");
      emit(g, cfg, run_conjecture_probe(cfg));
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fluxspec: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
