#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "hkt/bessel.hpp"
#include "hkt/billiards.hpp"
#include "hkt/cli.hpp"
#include "hkt/error.hpp"

namespace fs = std::filesystem;

namespace hkt::cli {
namespace {

struct Options {
  std::string config;
  std::string out_dir;
  int threads = 0;
  bool quick = false;
  std::string fault;
  std::string trace_path;
};

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::Argument, "cannot write " + p.string());
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

ExperimentConfig load_config(const Options& o, std::istream& in) {
  if (o.config.empty()) throw Error(ErrorKind::Argument, "--config <path> is required (use - for stdin)");
  Json j;
  try {
    if (o.config == "-") {
      j = Json::parse(in);
    } else {
      std::ifstream f(o.config);
      if (!f) throw Error(ErrorKind::Argument, "cannot open config " + o.config);
      j = Json::parse(f);
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = parse_config(j);
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  return c;
}

Json trace_meta(const ExperimentConfig& c, const TraceSamples& tr) {
  Json m = {{"backend", to_string(tr.backend)},
            {"bc", to_string(tr.bc)},
            {"domain", domain_to_json(c.domain)},
            {"domain_digest", hex_digest(c.domain.digest())},
            {"dimension", tr.dimension},
            {"config_digest", c.digest()},
            {"rows", tr.t.size()}};
  if (tr.backend == Backend::MonteCarlo) {
    m["seed"] = c.mc.seed;
    m["mc"] = {{"n_paths", c.mc.n_paths}, {"n_steps", c.mc.n_steps}, {"stratification", c.mc.stratification}};
  } else {
    m["seed"] = nullptr;
  }
  return m;
}

int cmd_trace(const ExperimentConfig& c, const char* stem, std::ostream& out) {
  const TraceSamples tr = compute_trace(c);
  const fs::path dir(c.output_dir);
  write_file(dir / (std::string(stem) + ".csv"), trace_csv(tr));
  write_file(dir / (std::string(stem) + ".meta.json"), dump(trace_meta(c, tr)));
  out << "wrote " << tr.t.size() << " samples (" << to_string(tr.backend) << ", " << to_string(tr.bc) << ") to "
      << (dir / (std::string(stem) + ".csv")).string() << "\n";
  return Ok;
}

int cmd_mc(ExperimentConfig c, std::ostream& out) {
  c.backend = Backend::MonteCarlo;
  const auto ok = supported_backends(c.domain, c.bc);
  if (std::find(ok.begin(), ok.end(), "montecarlo") == ok.end())
    throw Error(ErrorKind::BackendUnavailable, "montecarlo needs a 2-D domain with dirichlet conditions");
  const int rc = cmd_trace(c, "mc", out);
  std::ifstream f(fs::path(c.output_dir) / "mc.csv");
  const TraceSamples tr = read_trace_csv(f);
  out << std::setw(14) << "t" << std::setw(18) << "P" << std::setw(14) << "stderr" << "\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    out << std::setw(14) << format_double(tr.t[i]).substr(0, 12) << std::setw(18) << tr.values[i] << std::setw(14)
        << tr.abs_error[i] << "\n";
  return rc;
}

int cmd_orbits(const ExperimentConfig& c, std::ostream& out) {
  const double dmax = c.orbits.delta_max > 0.0 ? c.orbits.delta_max : default_delta_max(c.domain);
  const LengthSpectrum s = predict_length_spectrum(c.domain, dmax, c.orbits.n_max_reflections, c.orbits.search);
  Json j = {{"config_digest", c.digest()},
            {"domain", domain_to_json(c.domain)},
            {"delta_max", dmax},
            {"entries", to_json(s)}};
  if (c.domain.dimension() == 1) j["note"] = "1-D domain: spectrum is {n * l_j}, the image exponents of each interval";
  write_file(fs::path(c.output_dir) / "orbits.json", dump(j));
  out << std::setw(12) << "delta" << std::setw(19) << "kind" << std::setw(6) << "mult" << "\n";
  for (const auto& e : s.entries)
    out << std::setw(12) << std::setprecision(8) << e.delta << std::setw(19) << to_string(e.kind) << std::setw(6)
        << e.multiplicity << "\n";
  return Ok;
}

int cmd_recover(const ExperimentConfig& c, const Options& o, std::ostream& out) {
  const fs::path csv = o.trace_path.empty() ? fs::path(c.output_dir) / "trace.csv" : fs::path(o.trace_path);
  std::ifstream f(csv);
  if (!f) throw Error(ErrorKind::Argument, "cannot open trace " + csv.string());
  TraceSamples tr = read_trace_csv(f);
  tr.dimension = c.domain.dimension();
  tr.bc = c.bc;

  RecoveryReport rep = recover(tr, c.recovery);
  LengthSpectrum predicted;
  if (!rep.exponents.empty()) {
    double dmax = c.orbits.delta_max;
    for (const auto& e : rep.exponents) dmax = std::max(dmax, 1.2 * std::sqrt(std::max(0.0, e.delta_sq)));
    try {
      predicted = predict_length_spectrum(c.domain, dmax, c.orbits.n_max_reflections, c.orbits.search);
    } catch (const Error& e) {
      rep.diagnostics.push_back(std::string("length spectrum unavailable: ") + e.what());
    }
    std::vector<double> ds;
    for (const auto& e : rep.exponents) ds.push_back(e.delta_sq);
    const MatchResult m = match_spectrum(ds, predicted, c.recovery.rel_tol);
    rep.matches = m.matches;
    rep.unexplained = m.unexplained;
  }
  Json j = to_json(rep);
  j["config_digest"] = c.digest();
  j["trace"] = csv.filename().string();
  write_file(fs::path(c.output_dir) / "report.json", dump(j));

  out << std::setprecision(10);
  out << "area       " << rep.area << "\n";
  out << "perimeter  " << rep.perimeter << "\n";
  out << "constant   " << rep.constant << "\n";
  if (rep.limits)
    out << "limits     area " << rep.limits->area << ", perimeter " << rep.limits->perimeter << ", constant "
        << rep.limits->constant << "\n";
  out << std::setw(4) << "#" << std::setw(16) << "delta_sq" << std::setw(6) << "sign" << std::setw(14) << "match delta"
      << std::setw(19) << "kind" << "\n";
  for (std::size_t i = 0; i < rep.exponents.size(); ++i) {
    out << std::setw(4) << i << std::setw(16) << rep.exponents[i].delta_sq << std::setw(6)
        << rep.exponents[i].amplitude_sign;
    bool matched = false;
    for (const auto& m : rep.matches)
      if (m.recovered_index == static_cast<int>(i)) {
        out << std::setw(14) << m.predicted.delta << std::setw(19) << to_string(m.predicted.kind);
        matched = true;
      }
    if (!matched) out << std::setw(14) << "-" << std::setw(19) << "unexplained";
    out << "\n";
  }
  for (const auto& d : rep.diagnostics) out << "note: " << d << "\n";
  return rep.unexplained.empty() ? Ok : Unexplained;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto checks = validation_suite(o.quick);
  bool all = true;
  Json j = Json::array();
  for (const auto& c : checks) {
    out << (c.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(44) << c.name << std::right << c.detail << "\n";
    all = all && c.passed;
    j.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  if (o.quick) out << "SKIP  disk Monte Carlo vs series (--quick)\n";
  if (!o.out_dir.empty()) write_file(fs::path(o.out_dir) / "validation.json", dump(j));
  return all ? Ok : ValidationFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Heat-kernel trace experiments: spectra, orbits and recovery"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "experiment config JSON (- for stdin)");
  app.add_option("--out", o.out_dir, "output directory (overrides output_dir)");
  app.add_option("--threads", o.threads, "cap on worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quick", o.quick, "validate: skip Monte Carlo checks");
  app.add_option("--inject-fault", o.fault)->group("")->check(CLI::IsMember({"bessel"}));
  app.fallthrough();

  auto* trace = app.add_subcommand("trace", "write trace.csv and trace.meta.json");
  auto* orbits = app.add_subcommand("orbits", "write orbits.json");
  auto* rec = app.add_subcommand("recover", "fit a trace CSV and write report.json");
  rec->add_option("trace_csv", o.trace_path, "trace CSV (default <out>/trace.csv)");
  auto* mc = app.add_subcommand("mc", "Monte Carlo trace to mc.csv");
  auto* val = app.add_subcommand("validate", "cross-backend identity suite");
  for (auto* s : {trace, orbits, rec, mc, val}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return UsageError;
  }

  if (o.threads > 0) omp_set_num_threads(o.threads);
  set_bessel_fault(o.fault == "bessel");
  struct Reset {
    ~Reset() { set_bessel_fault(false); }
  } reset;

  try {
    if (*val) return cmd_validate(o, out);
    const ExperimentConfig c = load_config(o, in);
    if (*trace) return cmd_trace(c, "trace", out);
    if (*mc) return cmd_mc(c, out);
    if (*orbits) return cmd_orbits(c, out);
    if (*rec) return cmd_recover(c, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return UsageError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return UsageError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return ValidationFailed;
  }
  return UsageError;
}

}  // namespace hkt::cli
