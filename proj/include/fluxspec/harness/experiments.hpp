#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "fluxspec/errors.hpp"
#include "fluxspec/flux.hpp"
#include "fluxspec/geometry.hpp"
#include "fluxspec/halfflux_oracle.hpp"
#include "fluxspec/harness/config.hpp"
#include "fluxspec/harness/report.hpp"
#include "fluxspec/planar/solve.hpp"
#include "fluxspec/radial.hpp"

namespace fluxspec {

/// Worker count: FLUXSPEC_WORKERS if set, else the config value, else the
/// hardware concurrency.
inline int resolve_workers(int configured) {
  if (const char* env = std::getenv("FLUXSPEC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
  }
  if (configured > 0) return configured;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs independent tasks on up to `workers` threads. Results keep task order.
template <class T>
std::vector<T> run_parallel(const std::vector<std::function<T()>>& tasks, int workers) {
  std::vector<T> out(tasks.size());
  const int n = static_cast<int>(std::min<std::size_t>(std::max(1, workers), tasks.size()));
  if (n <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) out[i] = tasks[i]();
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) out[i] = tasks[i]();
    });
  for (auto& t : pool) t.join();
  return out;
}

/// Eigenvalue with its error estimate, or the error text.
struct CellValue {
  double lambda = 0.0;
  double est = 0.0;
  std::string error;
  bool ok() const noexcept { return error.empty(); }
};

namespace detail {

inline PlanarOptions planar_options(const ExperimentConfig& cfg) {
  PlanarOptions o;
  o.mesh = cfg.mesh;
  o.solver.tol = cfg.solver_tol;
  return o;
}

template <class F>
CellValue guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    CellValue v;
    v.error = e.what();
    return v;
  }
}

inline CellValue planar_value(const StarDomain& dom, double phi, ProblemKind kind, const PlanarOptions& opt) {
  return guarded([&] {
    const EigenSolveResult r = planar_eigenvalue(dom, reduce_flux(phi), kind, opt);
    if (!std::isfinite(r.estimated_error)) throw Error("no error estimate: resolution admits no coarsening");
    return CellValue{r.lambda, r.estimated_error, {}};
  });
}

inline CellValue radial_value(const AnnulusSpec& a, double phi, InnerBC bc, int n) {
  return guarded([&] {
    const AnnulusEigenvalue r = annulus_eigenvalue(a, reduce_flux(phi), bc, n);
    return CellValue{r.lambda, r.estimated_error(), {}};
  });
}

inline std::string control_label(const AnnulusSpec& a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "control-annulus(R0=%g;R1=%g)", a.R0, a.R1);
  return buf;
}

/// Concentric controls, one per distinct matched annulus in the list.
inline std::vector<StarDomain> controls_for(const std::vector<StarDomain>& doms) {
  std::vector<StarDomain> out;
  std::vector<AnnulusSpec> seen;
  for (const auto& d : doms) {
    const AnnulusSpec a = matched_annulus(d);
    const bool dup = std::any_of(seen.begin(), seen.end(), [&](const AnnulusSpec& s) {
      return std::fabs(s.R0 - a.R0) < 1e-12 && std::fabs(s.R1 - a.R1) < 1e-12;
    });
    if (dup) continue;
    seen.push_back(a);
    out.push_back(make_annulus(a, control_label(a)));
  }
  return out;
}

inline ReportRow base_row(const ExperimentConfig& cfg, const std::string& label, double phi) {
  ReportRow r;
  r.experiment = to_string(cfg.experiment);
  r.label = label;
  r.phi = phi;
  return r;
}

inline void fill_error(ReportRow& r, const CellValue& a, const CellValue& b) {
  r.pass = PassState::Error;
  r.note = !a.ok() ? a.error : b.error;
}

inline VerificationReport new_report(const ExperimentConfig& cfg) {
  VerificationReport rep;
  rep.experiment = to_string(cfg.experiment);
  rep.margin = cfg.margin;
  rep.config_hash = config_hash(cfg);
  return rep;
}

}  // namespace detail

/// Planar eigenvalue against the matched annulus for every (domain, flux):
/// gap = lambda_ref - lambda passes when gap > k est_error; concentric
/// controls pass when |gap| <= est_error.
inline VerificationReport run_comparison(const ExperimentConfig& cfg, InnerBC bc) {
  VerificationReport rep = detail::new_report(cfg);
  std::vector<StarDomain> doms = cfg.domains;
  if (cfg.control) {
    const bool has_control = std::any_of(doms.begin(), doms.end(), [](const StarDomain& d) { return d.is_concentric(); });
    if (!has_control)
      for (auto& c : detail::controls_for(cfg.domains)) doms.push_back(std::move(c));
  }
  const ProblemKind kind = bc == InnerBC::Dirichlet ? ProblemKind::PerforatedDirichletInner
                                                    : ProblemKind::PerforatedNeumannInner;
  const PlanarOptions opt = detail::planar_options(cfg);

  std::vector<double> fluxes;
  for (double phi : cfg.fluxes) {
    // the Neumann comparison is void at integer flux: both sides vanish
    if (bc == InnerBC::Neumann && reduce_flux(phi).is_integer()) {
      ++rep.excluded;
      continue;
    }
    fluxes.push_back(phi);
  }

  std::vector<std::function<ReportRow()>> tasks;
  for (const auto& dom : doms)
    for (double phi : fluxes)
      tasks.push_back([&cfg, &opt, dom, phi, bc, kind] {
        ReportRow row = detail::base_row(cfg, dom.label(), phi);
        row.bc = to_string(bc);
        row.kind = to_string(kind);
        row.control = dom.is_concentric();
        row.strict = !row.control;
        const CellValue p = detail::planar_value(dom, phi, kind, opt);
        const CellValue a = p.ok() ? detail::radial_value(matched_annulus(dom), phi, bc, cfg.radial_elements) : p;
        if (!p.ok() || !a.ok()) {
          detail::fill_error(row, p, a);
          return row;
        }
        row.lambda = p.lambda;
        row.lambda_ref = a.lambda;
        row.gap = a.lambda - p.lambda;
        row.est_error = p.est + a.est;
        if (row.control)
          row.pass = std::fabs(*row.gap) <= *row.est_error ? PassState::Pass : PassState::Fail;
        else
          row.pass = *row.gap > cfg.margin * *row.est_error ? PassState::Pass : PassState::Fail;
        return row;
      });
  rep.rows = run_parallel(tasks, resolve_workers(cfg.workers));

  // observation only: does the gap grow along the configured family order?
  nlohmann::json growth = nlohmann::json::object();
  for (double phi : fluxes) {
    std::vector<double> gaps;
    for (const auto& dom : cfg.domains) {
      if (dom.is_concentric()) continue;
      for (const auto& r : rep.rows)
        if (r.label == dom.label() && r.phi == phi && r.gap) gaps.push_back(*r.gap);
    }
    bool inc = gaps.size() > 1;
    for (std::size_t i = 1; i < gaps.size(); ++i) inc = inc && gaps[i] > gaps[i - 1];
    char key[32];
    std::snprintf(key, sizeof key, "%g", phi);
    growth[key] = inc;
  }
  rep.observations["gap_increasing_along_family"] = growth;
  rep.sort();
  return rep;
}

inline VerificationReport run_verify_theorem(const ExperimentConfig& cfg) { return run_comparison(cfg, InnerBC::Dirichlet); }
inline VerificationReport run_verify_neumann(const ExperimentConfig& cfg) { return run_comparison(cfg, InnerBC::Neumann); }

/// The comparison of run_verify_theorem over a shape family, with the
/// boundary condition taken from `cfg.kind`.
inline VerificationReport run_shape_family(const ExperimentConfig& cfg) {
  if (cfg.kind == ProblemKind::PerforatedDirichletInner) return run_comparison(cfg, InnerBC::Dirichlet);
  if (cfg.kind == ProblemKind::PerforatedNeumannInner) return run_comparison(cfg, InnerBC::Neumann);
  throw InvalidArgument("shape_family: kind must be perforated-dirichlet or perforated-neumann");
}

/// lambda(phi) with the raw flux in the potential (no canonical reduction),
/// paired with lambda(1 - phi). For the Aharonov-Bohm kinds the pair must
/// agree within 2 (tol + est_error).
inline VerificationReport run_flux_sweep(const ExperimentConfig& cfg) {
  VerificationReport rep = detail::new_report(cfg);
  PlanarOptions opt = detail::planar_options(cfg);
  opt.assembly.bypass_reduction = true;
  const bool periodic = cfg.kind != ProblemKind::LocalizedField;

  std::vector<double> values;
  for (double phi : cfg.fluxes) {
    values.push_back(phi);
    values.push_back(1.0 - phi);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  struct Key {
    std::size_t dom;
    double phi;
  };
  std::vector<Key> keys;
  std::vector<std::function<CellValue()>> tasks;
  for (std::size_t d = 0; d < cfg.domains.size(); ++d)
    for (double phi : values) {
      keys.push_back({d, phi});
      tasks.push_back([&cfg, &opt, d, phi] {
        const ProblemKind k = cfg.kind;
        return detail::guarded([&] {
          const PolarMesh mesh(cfg.domains[d], k, opt.mesh);
          EigenSolveResult fine = solve_on_mesh(mesh, Flux{phi, phi, 0, false}, opt);
          double est = std::numeric_limits<double>::quiet_NaN();
          if (mesh.has_coarsening())
            est = kRichardsonSafety * std::fabs(fine.lambda - solve_on_mesh(mesh.coarsened(), Flux{phi, phi, 0, false}, opt).lambda) / 3.0;
          if (!std::isfinite(est)) throw Error("no error estimate: resolution admits no coarsening");
          return CellValue{fine.lambda, est, {}};
        });
      });
    }
  const std::vector<CellValue> vals = run_parallel(tasks, resolve_workers(cfg.workers));
  const auto lookup = [&](std::size_t d, double phi) -> const CellValue& {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i].dom == d && keys[i].phi == phi) return vals[i];
    throw Error("flux_sweep: missing cell");
  };

  double worst = 0.0;
  for (std::size_t d = 0; d < cfg.domains.size(); ++d) {
    double best_phi = 0.0, best = -1.0;
    for (double phi : cfg.fluxes) {
      ReportRow row = detail::base_row(cfg, cfg.domains[d].label(), phi);
      row.kind = to_string(cfg.kind);
      if (cfg.kind == ProblemKind::PerforatedDirichletInner || cfg.kind == ProblemKind::PuncturedFriedrichs)
        row.bc = "dirichlet";
      else if (cfg.kind == ProblemKind::PerforatedNeumannInner)
        row.bc = "neumann";
      const CellValue& a = lookup(d, phi);
      const CellValue& b = lookup(d, 1.0 - phi);
      if (!a.ok() || !b.ok()) {
        detail::fill_error(row, a, b);
        rep.rows.push_back(row);
        continue;
      }
      row.lambda = a.lambda;
      row.lambda_ref = b.lambda;
      row.gap = b.lambda - a.lambda;
      row.est_error = a.est + b.est;
      if (periodic) {
        const double tol = cfg.solver_tol * std::max(1.0, std::fabs(a.lambda));
        row.pass = std::fabs(*row.gap) <= 2.0 * (tol + *row.est_error) ? PassState::Pass : PassState::Fail;
        worst = std::max(worst, std::fabs(*row.gap));
      }
      if (a.lambda > best) {
        best = a.lambda;
        best_phi = phi;
      }
      rep.rows.push_back(row);
    }
    rep.observations["argmax_phi"][cfg.domains[d].label()] = best_phi;
  }
  if (periodic) rep.observations["max_symmetry_residual"] = worst;
  rep.sort();
  return rep;
}

/// Friedrichs limit through shrinking Dirichlet cores. One row per core
/// radius (checked against the previous, larger core) and one limit row.
inline VerificationReport run_shrinking_hole(const ExperimentConfig& cfg) {
  VerificationReport rep = detail::new_report(cfg);
  PlanarOptions opt = detail::planar_options(cfg);
  if (opt.mesh.radial_grading <= 1.0) opt.mesh.radial_grading = kPuncturedGrading;

  std::vector<std::function<std::vector<ReportRow>()>> tasks;
  for (const auto& dom : cfg.domains)
    for (double phi : cfg.fluxes)
      tasks.push_back([&cfg, &opt, dom, phi] {
        std::vector<ReportRow> rows;
        const std::string kind = to_string(ProblemKind::PuncturedFriedrichs);
        try {
          const PuncturedResult res = punctured_eigenvalue(dom, reduce_flux(phi), cfg.core_radii, opt);
          for (std::size_t i = 0; i < res.table.size(); ++i) {
            char label[160];
            std::snprintf(label, sizeof label, "%s|eps=%g", dom.label().c_str(), res.table[i].core_radius);
            ReportRow row = detail::base_row(cfg, label, phi);
            row.kind = kind;
            row.bc = "dirichlet";
            row.lambda = res.table[i].lambda;
            if (i > 0) {
              row.lambda_ref = res.table[i - 1].lambda;
              row.gap = *row.lambda_ref - *row.lambda;
              row.est_error = res.table[i].estimated_error + res.table[i - 1].estimated_error;
              row.pass = *row.gap >= -*row.est_error ? PassState::Pass : PassState::Fail;
            } else {
              row.est_error = res.table[i].estimated_error;
            }
            rows.push_back(row);
          }
          ReportRow lim = detail::base_row(cfg, dom.label() + "|limit", phi);
          lim.kind = kind;
          lim.bc = "dirichlet";
          lim.lambda = res.lambda;
          lim.est_error = res.uncertainty;
          const Flux f = reduce_flux(phi);
          const bool centered_disk = dom.is_concentric();
          if (centered_disk && (f.is_integer() || f.reduced == 0.5)) {
            const double R1 = matched_annulus(dom).R1;
            lim.lambda_ref = f.is_integer() ? 0.0 : halfflux_disk_oracle(R1);
            lim.gap = *lim.lambda_ref - res.lambda;
            lim.pass = std::fabs(*lim.gap) <= res.uncertainty ? PassState::Pass : PassState::Fail;
          }
          rows.push_back(lim);
        } catch (const std::exception& e) {
          ReportRow row = detail::base_row(cfg, dom.label() + "|limit", phi);
          row.kind = kind;
          row.pass = PassState::Error;
          row.note = e.what();
          rows.push_back(row);
        }
        return rows;
      });
  for (auto& rows : run_parallel(tasks, resolve_workers(cfg.workers)))
    rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
  rep.sort();
  return rep;
}

/// Localized-field eigenvalue at phi = nu + n against the Aharonov-Bohm
/// eigenvalue of the perforated domain at nu, plus the comparison with the
/// matched concentric pair at the largest flux.
inline VerificationReport run_large_flux(const ExperimentConfig& cfg) {
  VerificationReport rep = detail::new_report(cfg);
  const PlanarOptions opt = detail::planar_options(cfg);
  const int nmax = *std::max_element(cfg.offsets.begin(), cfg.offsets.end());
  const double phi_max = cfg.nu + nmax;

  for (const auto& dom : cfg.domains) {
    const StarDomain matched = make_annulus(matched_annulus(dom), "matched");
    std::vector<std::function<CellValue()>> tasks;
    tasks.push_back([&] { return detail::planar_value(dom, cfg.nu, ProblemKind::PerforatedDirichletInner, opt); });
    for (int n : cfg.offsets)
      tasks.push_back([&, n] { return detail::planar_value(dom, cfg.nu + n, ProblemKind::LocalizedField, opt); });
    tasks.push_back([&] { return detail::planar_value(matched, phi_max, ProblemKind::LocalizedField, opt); });
    const std::vector<CellValue> v = run_parallel(tasks, resolve_workers(cfg.workers));
    const CellValue& ref = v.front();

    nlohmann::json ratios = nlohmann::json::object();
    for (std::size_t i = 0; i < cfg.offsets.size(); ++i) {
      const CellValue& loc = v[i + 1];
      ReportRow row = detail::base_row(cfg, dom.label(), cfg.nu + cfg.offsets[i]);
      row.kind = to_string(ProblemKind::LocalizedField);
      if (!loc.ok() || !ref.ok()) {
        detail::fill_error(row, loc, ref);
      } else {
        row.lambda = loc.lambda;
        row.lambda_ref = ref.lambda;
        row.gap = ref.lambda - loc.lambda;
        row.est_error = loc.est + ref.est;
        ratios[std::to_string(cfg.offsets[i])] = loc.lambda / ref.lambda;
      }
      rep.rows.push_back(row);
    }

    const CellValue& top = v[1 + static_cast<std::size_t>(std::max_element(cfg.offsets.begin(), cfg.offsets.end()) -
                                                          cfg.offsets.begin())];
    const CellValue& pair = v.back();
    ReportRow cor = detail::base_row(cfg, dom.label() + "|matched-pair", phi_max);
    cor.kind = to_string(ProblemKind::LocalizedField);
    if (!top.ok() || !pair.ok()) {
      detail::fill_error(cor, top, pair);
    } else {
      cor.lambda = top.lambda;
      cor.lambda_ref = pair.lambda;
      cor.gap = pair.lambda - top.lambda;
      cor.est_error = top.est + pair.est;
      cor.pass = *cor.gap >= -*cor.est_error ? PassState::Pass : PassState::Fail;
    }
    rep.rows.push_back(cor);

    nlohmann::json obs{{"ratios", ratios}};
    const std::string top_key = std::to_string(nmax);
    if (ratios.contains(top_key)) {
      const double rt = ratios[top_key].get<double>();
      obs["ratio_at_largest_flux"] = rt;
      obs["within_10_percent"] = std::fabs(rt - 1.0) <= 0.1;
      if (ratios.contains("2"))
        obs["closer_to_one_than_n2"] = std::fabs(rt - 1.0) < std::fabs(ratios["2"].get<double>() - 1.0);
    }
    rep.observations[dom.label()] = obs;
  }
  rep.sort();
  return rep;
}

/// Localized-field eigenvalue against the matched concentric pair at moderate
/// flux. Rows whose gap is negative beyond the error are flagged as
/// counterexample candidates for refinement; nothing is asserted.
inline VerificationReport run_conjecture_probe(const ExperimentConfig& cfg) {
  VerificationReport rep = detail::new_report(cfg);
  const PlanarOptions opt = detail::planar_options(cfg);
  std::vector<StarDomain> doms = cfg.domains;
  if (cfg.control)
    for (auto& c : detail::controls_for(cfg.domains)) doms.push_back(std::move(c));

  std::vector<std::function<ReportRow()>> tasks;
  for (const auto& dom : doms)
    for (double phi : cfg.fluxes)
      tasks.push_back([&cfg, &opt, dom, phi] {
        ReportRow row = detail::base_row(cfg, dom.label(), phi);
        row.kind = to_string(ProblemKind::LocalizedField);
        row.control = dom.is_concentric();
        const CellValue a = detail::planar_value(dom, phi, ProblemKind::LocalizedField, opt);
        const CellValue b = a.ok() ? detail::planar_value(make_annulus(matched_annulus(dom), "matched"), phi,
                                                          ProblemKind::LocalizedField, opt)
                                   : a;
        if (!a.ok() || !b.ok()) {
          detail::fill_error(row, a, b);
          return row;
        }
        row.lambda = a.lambda;
        row.lambda_ref = b.lambda;
        row.gap = b.lambda - a.lambda;
        row.est_error = a.est + b.est;
        row.pass = *row.gap < -*row.est_error && !row.control ? PassState::Candidate : PassState::NotApplicable;
        return row;
      });
  rep.rows = run_parallel(tasks, resolve_workers(cfg.workers));
  rep.sort();
  return rep;
}

inline VerificationReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::VerifyTheorem: return run_verify_theorem(cfg);
    case Experiment::VerifyNeumann: return run_verify_neumann(cfg);
    case Experiment::ShapeFamily: return run_shape_family(cfg);
    case Experiment::FluxSweep: return run_flux_sweep(cfg);
    case Experiment::ShrinkingHole: return run_shrinking_hole(cfg);
    case Experiment::LargeFlux: return run_large_flux(cfg);
    case Experiment::ConjectureProbe: return run_conjecture_probe(cfg);
  }
  throw InvalidArgument("unknown experiment");
}

}  // namespace fluxspec
