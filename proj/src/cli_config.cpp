#include <algorithm>
#include <cmath>

#include "hkt/cli.hpp"
#include "hkt/error.hpp"
#include "hkt/images.hpp"
#include "hkt/montecarlo.hpp"

namespace hkt::cli {
namespace {

const Json* member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) return nullptr;
  return &j.at(key);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const char* where) {
  const Json* v = member(j, key);
  if (!v) return fallback;
  try {
    return v->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Parse, std::string(where) + "." + key + " has the wrong type");
  }
}

void require_backend(const ExperimentConfig& c) {
  const auto ok = supported_backends(c.domain, c.bc);
  if (std::find(ok.begin(), ok.end(), to_string(c.backend)) != ok.end()) return;
  std::string list;
  for (const auto& b : ok) list += (list.empty() ? "" : ", ") + b;
  throw Error(ErrorKind::BackendUnavailable, std::string("backend ") + to_string(c.backend) + " does not support " +
                                                 c.domain.describe() + " with " + to_string(c.bc) +
                                                 " conditions; supported: " + (list.empty() ? "none" : list));
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "config must be a JSON object");
  ExperimentConfig c;
  c.raw = j;
  const Json* dom = member(j, "domain");
  if (!dom) throw Error(ErrorKind::Parse, "config needs a \"domain\"");
  c.domain = domain_from_json(*dom);
  c.bc = parse_bc(get_or<std::string>(j, "bc", "dirichlet", "config"));

  if (const Json* g = member(j, "t_grid")) {
    c.t_grid.t_min = get_or(*g, "t_min", c.t_grid.t_min, "t_grid");
    c.t_grid.t_max = get_or(*g, "t_max", c.t_grid.t_max, "t_grid");
    c.t_grid.n = get_or(*g, "n", c.t_grid.n, "t_grid");
    c.t_grid.spacing = get_or(*g, "spacing", c.t_grid.spacing, "t_grid");
  }
  if (!(c.t_grid.t_min > 0.0)) throw Error(ErrorKind::Argument, "t_grid.t_min must be positive");
  if (!(c.t_grid.t_max > c.t_grid.t_min)) throw Error(ErrorKind::Argument, "t_grid.t_max must exceed t_min");
  if (c.t_grid.n < 2) throw Error(ErrorKind::Argument, "t_grid.n must be at least 2");
  if (c.t_grid.spacing != "log" && c.t_grid.spacing != "linear")
    throw Error(ErrorKind::Parse, "t_grid.spacing must be log or linear");

  if (const Json* r = member(j, "recovery")) {
    c.recovery.n_terms = get_or(*r, "n_terms", c.recovery.n_terms, "recovery");
    c.recovery.k_max = get_or(*r, "k_max", c.recovery.k_max, "recovery");
    c.recovery.rel_tol = get_or(*r, "rel_tol", c.recovery.rel_tol, "recovery");
    if (const Json* w = member(*r, "sw_window")) {
      if (!w->is_array() || w->size() != 2) throw Error(ErrorKind::Parse, "recovery.sw_window must be [t_lo, t_hi]");
      c.recovery.sw_window = TimeWindow{(*w)[0].get<double>(), (*w)[1].get<double>()};
    }
  }
  if (c.recovery.k_max < 0) throw Error(ErrorKind::Argument, "recovery.k_max must be non-negative");
  if (!(c.recovery.rel_tol > 0.0)) throw Error(ErrorKind::Argument, "recovery.rel_tol must be positive");

  if (const Json* m = member(j, "mc")) {
    c.mc.n_paths = get_or(*m, "n_paths", c.mc.n_paths, "mc");
    c.mc.n_steps = get_or(*m, "n_steps", c.mc.n_steps, "mc");
    c.mc.seed = get_or(*m, "seed", c.mc.seed, "mc");
    c.mc.stratification = get_or(*m, "stratification", c.mc.stratification, "mc");
  }
  if (const Json* o = member(j, "orbits")) {
    c.orbits.delta_max = get_or(*o, "delta_max", c.orbits.delta_max, "orbits");
    c.orbits.n_max_reflections = get_or(*o, "n_max_reflections", c.orbits.n_max_reflections, "orbits");
    c.orbits.search.n_starts = get_or(*o, "n_starts", c.orbits.search.n_starts, "orbits");
    c.orbits.search.seed = get_or(*o, "seed", c.orbits.search.seed, "orbits");
  }
  if (const Json* s = member(j, "series")) {
    c.lambda_max = get_or(*s, "lambda_max", c.lambda_max, "series");
    c.series_tol = get_or(*s, "tol", c.series_tol, "series");
  }
  c.output_dir = get_or(j, "output_dir", c.output_dir, "config");

  const auto ok = supported_backends(c.domain, c.bc);
  if (member(j, "backend")) {
    c.backend = parse_backend(get_or<std::string>(j, "backend", "series", "config"));
    require_backend(c);
  } else if (!ok.empty()) {
    c.backend = parse_backend(ok.front());
  }
  return c;
}

std::vector<double> make_grid(const TimeGrid& g) {
  return g.spacing == "linear" ? linear_grid(g.t_min, g.t_max, g.n) : log_grid(g.t_min, g.t_max, g.n);
}

std::vector<std::string> supported_backends(const Domain& d, BC bc) {
  std::vector<std::string> out;
  const DomainKind k = d.kind();
  if (k == DomainKind::IntervalSet || k == DomainKind::Rectangle || k == DomainKind::Disk) out.emplace_back("series");
  if (k == DomainKind::IntervalSet || k == DomainKind::Rectangle) out.emplace_back("images");
  if (d.dimension() == 2 && bc == BC::Dirichlet) out.emplace_back("montecarlo");
  return out;
}

TraceSamples compute_trace(const ExperimentConfig& cfg) {
  require_backend(cfg);
  const auto grid = make_grid(cfg.t_grid);
  switch (cfg.backend) {
    case Backend::Series: {
      const double lm = cfg.lambda_max > 0.0 ? cfg.lambda_max : default_lambda_max(cfg.domain);
      return trace_series(eigenvalues(cfg.domain, cfg.bc, lm), grid, cfg.series_tol);
    }
    case Backend::Images: return images_trace(cfg.domain, cfg.bc, grid);
    case Backend::MonteCarlo: return mc_trace_samples(cfg.domain, cfg.bc, grid, cfg.mc);
  }
  throw Error(ErrorKind::Argument, "unknown backend");
}

double default_delta_max(const Domain& d) {
  if (const auto* s = std::get_if<IntervalSet>(&d.shape())) {
    double m = 0.0;
    for (double l : s->lengths) m = std::max(m, l);
    return 3.0 * m;
  }
  const auto box = d.bounding_box();
  return box.diagonal().norm();
}

}  // namespace hkt::cli
