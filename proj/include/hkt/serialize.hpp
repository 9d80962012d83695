#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "hkt/billiards.hpp"
#include "hkt/geometry.hpp"
#include "hkt/recovery.hpp"
#include "hkt/spectra.hpp"

namespace hkt {

using Json = nlohmann::json;

// {"kind": "disk", "R": 1} | {"kind": "rectangle", "a": 1, "b": 2} | {"kind": "ellipse", "a": 2, "b": 1}
// | {"kind": "annulus", "a": 2, "b": 1} | {"kind": "interval_set", "lengths": [1, 1.5]}
// | {"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}
Domain domain_from_json(const Json& j);
Json domain_to_json(const Domain& d);

// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

// Header exactly "t,P,abs_error".
void write_trace_csv(std::ostream& os, const TraceSamples& tr);
std::string trace_csv(const TraceSamples& tr);
TraceSamples read_trace_csv(std::istream& is);

Json to_json(const LengthEntry& e);
Json to_json(const LengthSpectrum& s);
Json to_json(const Exponent& e);
Json to_json(const RecoveryReport& r);

// FNV-1a over the compact dump; object keys are sorted, so equal documents hash equally.
std::uint64_t json_digest(const Json& j);
std::string hex_digest(std::uint64_t d);

}  // namespace hkt
