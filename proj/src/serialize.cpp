#include "hkt/serialize.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "hkt/error.hpp"

namespace hkt {
namespace {

double number(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Parse, std::string("domain is missing \"") + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::Parse, std::string("domain field \"") + key + "\" must be a number");
  return v.get<double>();
}

double parse_field(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e)
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

Domain domain_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorKind::Parse, "domain must be an object with a string \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::Argument, std::string(what) + " must be positive");
    return v;
  };
  if (kind == "disk") return Disk{positive(number(j, "R"), "R")};
  if (kind == "rectangle") return Rectangle{positive(number(j, "a"), "a"), positive(number(j, "b"), "b")};
  if (kind == "ellipse") return Ellipse{positive(number(j, "a"), "a"), positive(number(j, "b"), "b")};
  if (kind == "annulus") {
    const double a = positive(number(j, "a"), "a"), b = positive(number(j, "b"), "b");
    if (!(b < a)) throw Error(ErrorKind::Argument, "annulus needs inner radius b < outer radius a");
    return Annulus{a, b};
  }
  if (kind == "interval_set") {
    if (!j.contains("lengths") || !j.at("lengths").is_array() || j.at("lengths").empty())
      throw Error(ErrorKind::Parse, "interval_set needs a nonempty \"lengths\" array");
    IntervalSet s;
    for (const auto& v : j.at("lengths")) {
      if (!v.is_number()) throw Error(ErrorKind::Parse, "interval lengths must be numbers");
      s.lengths.push_back(positive(v.get<double>(), "interval length"));
    }
    return s;
  }
  if (kind == "polygon") {
    if (!j.contains("vertices") || !j.at("vertices").is_array() || j.at("vertices").size() < 3)
      throw Error(ErrorKind::Parse, "polygon needs a \"vertices\" array of at least 3 [x, y] pairs");
    Polygon p;
    for (const auto& v : j.at("vertices")) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw Error(ErrorKind::Parse, "polygon vertices must be [x, y] pairs");
      p.vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    return p;
  }
  throw Error(ErrorKind::Parse, "unknown domain kind '" + kind + "' (disk|rectangle|ellipse|annulus|interval_set|polygon)");
}

Json domain_to_json(const Domain& d) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return {{"kind", "disk"}, {"R", s.R}};
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          return {{"kind", "rectangle"}, {"a", s.a}, {"b", s.b}};
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          return {{"kind", "ellipse"}, {"a", s.a}, {"b", s.b}};
        } else if constexpr (std::is_same_v<T, Annulus>) {
          return {{"kind", "annulus"}, {"a", s.a}, {"b", s.b}};
        } else if constexpr (std::is_same_v<T, IntervalSet>) {
          return {{"kind", "interval_set"}, {"lengths", s.lengths}};
        } else if constexpr (std::is_same_v<T, Polygon>) {
          Json v = Json::array();
          for (const auto& p : s.vertices) v.push_back({p.x(), p.y()});
          return {{"kind", "polygon"}, {"vertices", v}};
        } else {
          return {{"kind", "smooth_boundary"}, {"samples", s.samples.size()}};
        }
      },
      d.shape());
}

std::string format_double(double x) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, p);
}

void write_trace_csv(std::ostream& os, const TraceSamples& tr) {
  os << "t,P,abs_error\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    os << format_double(tr.t[i]) << ',' << format_double(tr.values[i]) << ',' << format_double(tr.abs_error[i]) << '\n';
}

std::string trace_csv(const TraceSamples& tr) {
  std::ostringstream os;
  write_trace_csv(os, tr);
  return os.str();
}

TraceSamples read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Parse, "empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,P,abs_error") throw Error(ErrorKind::Parse, "trace header must be exactly t,P,abs_error");
  TraceSamples tr;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= line.size(); ++k)
      if (k == line.size() || line[k] == ',') {
        f.push_back(line.substr(start, k - start));
        start = k + 1;
      }
    if (f.size() != 3) throw Error(ErrorKind::Parse, "line " + std::to_string(n) + ": expected 3 fields");
    const double t = parse_field(f[0], n), p = parse_field(f[1], n), e = parse_field(f[2], n);
    if (!(t > 0.0)) throw Error(ErrorKind::Parse, "line " + std::to_string(n) + ": t must be positive");
    if (!tr.t.empty() && !(t > tr.t.back())) throw Error(ErrorKind::Parse, "line " + std::to_string(n) + ": t must increase");
    if (!(e >= 0.0)) throw Error(ErrorKind::Parse, "line " + std::to_string(n) + ": abs_error must be non-negative");
    tr.t.push_back(t);
    tr.values.push_back(p);
    tr.abs_error.push_back(e);
  }
  if (tr.t.empty()) throw Error(ErrorKind::Parse, "trace file has no samples");
  return tr;
}

Json to_json(const LengthEntry& e) {
  return {{"delta", e.delta},           {"orbit_length", e.orbit_length}, {"reflections", e.reflections},
          {"multiple", e.multiple},     {"kind", to_string(e.kind)},      {"multiplicity", e.multiplicity},
          {"source", e.source}};
}

Json to_json(const LengthSpectrum& s) {
  Json out = Json::array();
  for (const auto& e : s.entries) out.push_back(to_json(e));
  return out;
}

Json to_json(const Exponent& e) {
  return {{"delta_sq", e.delta_sq},
          {"sign", e.amplitude_sign},
          {"quality", e.quality},
          {"fit_residual", e.fit_residual},
          {"nu", e.nu},
          {"log_amplitude", e.log_amplitude},
          {"sqrt_correction", e.sqrt_correction},
          {"window", {e.window.t_lo, e.window.t_hi}}};
}

Json to_json(const RecoveryReport& r) {
  Json sw = {{"a0", r.sw.a0},
             {"a1", r.sw.a1},
             {"a2", r.sw.a2},
             {"higher", r.sw.higher},
             {"n_terms", r.sw.n_terms},
             {"dimension", r.sw.dimension},
             {"window", {r.sw.window.t_lo, r.sw.window.t_hi}},
             {"condition", r.sw.condition},
             {"chi2_per_dof", r.sw.chi2_per_dof},
             {"area_sigma", r.sw.area_sigma()},
             {"perimeter_sigma", r.sw.perimeter_sigma()}};
  Json out = {{"area", r.area}, {"perimeter", r.perimeter}, {"constant", r.constant}, {"sw", sw}};
  if (r.sw.dimension == 2) out["holes_if_smooth"] = r.holes_if_smooth;
  if (r.limits)
    out["limits"] = {{"area", r.limits->area},
                     {"perimeter", r.limits->perimeter},
                     {"constant", r.limits->constant},
                     {"area_error", r.limits->area_error},
                     {"perimeter_error", r.limits->perimeter_error},
                     {"constant_error", r.limits->constant_error}};
  out["exponents"] = Json::array();
  for (const auto& e : r.exponents) out["exponents"].push_back(to_json(e));
  out["matches"] = Json::array();
  for (const auto& m : r.matches)
    out["matches"].push_back(
        {{"recovered_index", m.recovered_index}, {"predicted", to_json(m.predicted)}, {"relative_gap", m.relative_gap}});
  out["unexplained"] = r.unexplained;
  out["diagnostics"] = r.diagnostics;
  return out;
}

std::uint64_t json_digest(const Json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex_digest(std::uint64_t d) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, d >>= 4) s[static_cast<std::size_t>(i)] = digits[d & 15];
  return s;
}

}  // namespace hkt
