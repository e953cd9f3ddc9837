#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxspec/errors.hpp"
#include "fluxspec/geometry.hpp"
#include "fluxspec/planar/mesh.hpp"
#include "fluxspec/radial.hpp"

namespace fluxspec {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { FluxSweep, ShapeFamily, ShrinkingHole, LargeFlux, VerifyTheorem, VerifyNeumann, ConjectureProbe };

inline const char* to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::FluxSweep: return "flux_sweep";
    case Experiment::ShapeFamily: return "shape_family";
    case Experiment::ShrinkingHole: return "shrinking_hole";
    case Experiment::LargeFlux: return "large_flux";
    case Experiment::VerifyTheorem: return "verify_theorem";
    case Experiment::VerifyNeumann: return "verify_neumann";
    case Experiment::ConjectureProbe: return "conjecture_probe";
  }
  return "?";
}

inline Experiment experiment_from_string(const std::string& s) {
  for (Experiment e : {Experiment::FluxSweep, Experiment::ShapeFamily, Experiment::ShrinkingHole,
                       Experiment::LargeFlux, Experiment::VerifyTheorem, Experiment::VerifyNeumann,
                       Experiment::ConjectureProbe})
    if (s == to_string(e)) return e;
  throw InvalidArgument("unknown experiment: " + s);
}

struct ExperimentConfig {
  Experiment experiment = Experiment::VerifyTheorem;
  std::vector<StarDomain> domains;
  std::vector<double> fluxes{0.1, 0.25, 0.5};
  MeshParams mesh;
  int radial_elements = kDefaultRadialElements;
  double margin = 10.0;     ///< pass factor k in gap > k * est_error
  double solver_tol = 1e-10;
  int workers = 0;          ///< 0 selects the hardware concurrency
  std::string output;
  ProblemKind kind = ProblemKind::PerforatedDirichletInner;  ///< flux_sweep and shape_family
  bool control = true;      ///< add the concentric control rows to verify runs
  std::vector<double> core_radii{0.04, 0.02, 0.01, 0.005};
  double nu = 0.5;
  std::vector<int> offsets{0, 2, 4, 8, 12};
  nlohmann::json source;    ///< normalized input, hashed for provenance
};

/// Eccentric annuli (R0, R1, delta) for each delta.
inline std::vector<StarDomain> eccentric_family(double R0, double R1, const std::vector<double>& deltas) {
  std::vector<StarDomain> out;
  for (double d : deltas) out.push_back(make_eccentric_annulus(R0, R1, d));
  return out;
}

/// Area-preserving single-harmonic perturbations R = c0 + a cos(k theta).
inline std::vector<StarDomain> perturbed_family(double R0, double R1, int mode, const std::vector<double>& amplitudes) {
  if (mode < 1) throw InvalidArgument("perturbed family: mode must be >= 1");
  std::vector<StarDomain> out;
  for (double a : amplitudes) {
    std::vector<double> c(static_cast<std::size_t>(mode), 0.0);
    c.back() = a;
    char label[96];
    std::snprintf(label, sizeof label, "perturbed(R0=%g;R1=%g;k=%d;a=%g)", R0, R1, mode, a);
    out.push_back(make_perturbed_disk(R1, R0, std::move(c), {}, true, label));
  }
  return out;
}

/// Parses "96x192".
inline MeshParams parse_resolution(const std::string& s, MeshParams base = {}) {
  int ns = 0, nt = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%dx%d%c", &ns, &nt, &tail) != 2)
    throw InvalidArgument("resolution must look like <n_s>x<n_t>: " + s);
  if (ns < 8 || ns > 4096 || nt < 16 || nt > 8192 || nt % 2 != 0)
    throw InvalidArgument("resolution out of the supported range: " + s);
  base.n_s = ns;
  base.n_t = nt;
  return base;
}

namespace detail {

inline std::vector<StarDomain> family_from_json(const nlohmann::json& f) {
  const std::string type = f.value("type", std::string("eccentric"));
  const double R0 = f.value("R0", 1.0), R1 = f.value("R1", 2.0);
  if (type == "eccentric") return eccentric_family(R0, R1, f.at("deltas").get<std::vector<double>>());
  if (type == "perturbed")
    return perturbed_family(R0, R1, f.value("mode", 2), f.at("amplitudes").get<std::vector<double>>());
  throw InvalidArgument("unknown family type: " + type);
}

}  // namespace detail

/// Reads an experiment description. Recognized keys:
///   experiment, domains, family, fluxes, resolution, radial_elements, margin,
///   tol, workers, output, kind, control, core_radii, nu, offsets.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    if (j.contains("domains"))
      for (const auto& d : j.at("domains")) c.domains.push_back(domain_from_json(d));
    if (j.contains("family")) {
      auto fam = detail::family_from_json(j.at("family"));
      c.domains.insert(c.domains.end(), fam.begin(), fam.end());
    }
    if (c.domains.empty()) c.domains = eccentric_family(1.0, 2.0, {0.1, 0.3, 0.5});
    if (j.contains("fluxes")) c.fluxes = j.at("fluxes").get<std::vector<double>>();
    if (j.contains("resolution")) {
      const auto& r = j.at("resolution");
      if (r.is_string()) {
        c.mesh = parse_resolution(r.get<std::string>(), c.mesh);
      } else {
        c.mesh.n_s = r.value("n_s", c.mesh.n_s);
        c.mesh.n_t = r.value("n_t", c.mesh.n_t);
        c.mesh.radial_grading = r.value("grading", c.mesh.radial_grading);
      }
    }
    c.radial_elements = j.value("radial_elements", c.radial_elements);
    c.margin = j.value("margin", c.margin);
    c.solver_tol = j.value("tol", c.solver_tol);
    c.workers = j.value("workers", c.workers);
    c.output = j.value("output", c.output);
    if (j.contains("kind")) c.kind = problem_kind_from_string(j.at("kind").get<std::string>());
    c.control = j.value("control", c.control);
    if (j.contains("core_radii")) c.core_radii = j.at("core_radii").get<std::vector<double>>();
    c.nu = j.value("nu", c.nu);
    if (j.contains("offsets")) c.offsets = j.at("offsets").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (c.experiment != Experiment::LargeFlux && c.fluxes.empty())
    throw InvalidArgument("config: flux grid must be nonempty");
  if (c.experiment == Experiment::LargeFlux && c.offsets.empty())
    throw InvalidArgument("config: offsets must be nonempty");
  if (c.mesh.n_s < 8 || c.mesh.n_s > 4096 || c.mesh.n_t < 16 || c.mesh.n_t > 8192 || c.mesh.n_t % 2 != 0)
    throw InvalidArgument("config: resolution out of the supported range");
  if (c.radial_elements < 16 || c.radial_elements > (1 << 20))
    throw InvalidArgument("config: radial_elements out of range");
  if (!(c.margin > 0.0) || !(c.solver_tol > 0.0)) throw InvalidArgument("config: margin and tol must be positive");
  c.source = j;
  return c;
}

inline ExperimentConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

/// The effective configuration, after defaults and overrides.
inline nlohmann::json effective_json(const ExperimentConfig& c) {
  nlohmann::json doms = nlohmann::json::array();
  for (const auto& d : c.domains) doms.push_back(domain_to_json(d));
  return {{"experiment", to_string(c.experiment)},
          {"domains", doms},
          {"fluxes", c.fluxes},
          {"resolution", {{"n_s", c.mesh.n_s}, {"n_t", c.mesh.n_t}, {"grading", c.mesh.radial_grading}}},
          {"radial_elements", c.radial_elements},
          {"margin", c.margin},
          {"tol", c.solver_tol},
          {"kind", to_string(c.kind)},
          {"control", c.control},
          {"core_radii", c.core_radii},
          {"nu", c.nu},
          {"offsets", c.offsets}};
}

/// 64-bit FNV-1a of the effective configuration (workers and output excluded).
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string s = effective_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace fluxspec
