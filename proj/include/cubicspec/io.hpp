#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubicspec/bc_multiplicity.hpp"
#include "cubicspec/inverse.hpp"
#include "cubicspec/perturbation.hpp"
#include "cubicspec/potential.hpp"
#include "cubicspec/spectrum_l0.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// Insertion order is kept so serialized output is byte-stable.
using json = nlohmann::ordered_json;

// Shortest representation that round-trips through a double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Spectra.
// ---------------------------------------------------------------------------

inline json spectrum_to_json(const SpectrumL0& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"n", e.n}, {"k", e.k}, {"lambda", e.lambda}, {"mult", e.mult}});
  return {{"operator", "L0"}, {"entries", entries}, {"residual", s.residual}};
}

inline SpectrumL0 spectrum_from_json(const json& j) {
  if (j.value("operator", "") != std::string("L0"))
    fail(Err::bad_potential_format, "spectrum file is not an L0 spectrum");
  SpectrumL0 s;
  for (const auto& e : j.at("entries"))
    s.entries.push_back({e.at("n").get<int>(), e.at("k").get<double>(),
                         e.at("lambda").get<double>(), e.at("mult").get<int>()});
  s.residual = j.value("residual", 0.0);
  return s;
}

inline EigClass eig_class_from_name(const std::string& name) {
  for (EigClass c : {EigClass::sigma0_simple, EigClass::sigma2_simple,
                     EigClass::double_coincidence, EigClass::zero_special})
    if (name == eig_class_name(c)) return c;
  fail(Err::bad_potential_format, "unknown eigenvalue class '" + name + "'");
}

inline json perturbed_to_json(const PerturbedSpectrum& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"lambda", e.lambda},
                       {"mult", e.mult},
                       {"class", eig_class_name(e.cls)},
                       {"margin", e.margin}});
  return {{"operator", "Lalpha"}, {"alpha", s.alpha}, {"entries", entries}};
}

inline PerturbedSpectrum perturbed_from_json(const json& j) {
  if (j.value("operator", "") != std::string("Lalpha"))
    fail(Err::bad_potential_format, "spectrum file is not a perturbed spectrum");
  PerturbedSpectrum s;
  s.alpha = j.at("alpha").get<double>();
  for (const auto& e : j.at("entries"))
    s.entries.push_back({e.at("lambda").get<double>(), e.at("mult").get<int>(),
                         eig_class_from_name(e.at("class").get<std::string>()),
                         e.value("margin", 0.0)});
  return s;
}

// ---------------------------------------------------------------------------
// Boundary classifier verdict.
// ---------------------------------------------------------------------------

inline json verdict_to_json(const BoundaryParams& p, const MultiplicityVerdict& v) {
  return {{"gamma", p.gamma},
          {"beta", p.beta},
          {"phi", p.phi},
          {"criterion", {v.criterion_value.real(), v.criterion_value.imag()}},
          {"regime", bc_regime_name(v.regime)}};
}

// ---------------------------------------------------------------------------
// Potentials: coefficient JSON and sampled CSV (rows x,v_re,v_im).
// ---------------------------------------------------------------------------

inline json potential_to_json(const Potential& v) {
  json modes = json::array();
  for (const auto& [n, c] : v.coeff)
    modes.push_back({{"n", n}, {"re", c.real()}, {"im", c.imag()}});
  return {{"v01", {v.v01.real(), v.v01.imag()}},
          {"v02", {v.v02.real(), v.v02.imag()}},
          {"modes", modes}};
}

inline Potential potential_from_json(const json& j) {
  Potential v;
  auto pair = [](const json& a) { return cplx(a.at(0).get<double>(), a.at(1).get<double>()); };
  if (j.contains("v01")) v.v01 = pair(j.at("v01"));
  if (j.contains("v02")) v.v02 = pair(j.at("v02"));
  if (j.contains("modes")) {
    for (const auto& m : j.at("modes")) {
      int n = m.at("n").get<int>();
      if (n == 0) fail(Err::bad_potential_format, "mode index 0 belongs in v01/v02");
      v.coeff[n] = cplx(m.at("re").get<double>(), m.at("im").get<double>());
      v.cutoff = std::max(v.cutoff, std::abs(n));
    }
  }
  return v;
}

inline Potential read_potential_csv(std::istream& in) {
  std::vector<double> xs;
  std::vector<cplx> vs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string fx, fre, fim;
    if (!std::getline(row, fx, ',') || !std::getline(row, fre, ',') || !std::getline(row, fim))
      fail(Err::bad_potential_format, "potential CSV row needs x,v_re,v_im");
    auto parse = [](const std::string& s, double& out) {
      std::size_t used = 0;
      try {
        out = std::stod(s, &used);
      } catch (const std::exception&) {
        return false;
      }
      while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
      return used == s.size();
    };
    double x, re, im;
    if (!parse(fx, x) || !parse(fre, re) || !parse(fim, im)) {
      if (first) {
        first = false;  // tolerated header line
        continue;
      }
      fail(Err::bad_potential_format, "potential CSV row is not numeric: " + line);
    }
    first = false;
    if (!xs.empty() && x <= xs.back())
      fail(Err::bad_potential_format, "potential CSV abscissae must increase strictly");
    xs.push_back(x);
    vs.push_back(cplx(re, im));
  }
  if (xs.size() < 2) fail(Err::bad_potential_format, "potential CSV needs at least two rows");
  if (std::abs(xs.front()) > 1e-9 || std::abs(xs.back() - 1.0) > 1e-9)
    fail(Err::bad_potential_format, "potential CSV must cover [0,1] endpoint to endpoint");
  return make_sampled([xs = std::move(xs), vs = std::move(vs)](double x) {
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) return vs.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - t) * vs[i - 1] + t * vs[i];
  });
}

inline void write_potential_csv(std::ostream& out, const Potential& v, int samples = 129) {
  if (!v.has_sampler()) fail(Err::missing_sampler, "CSV export needs pointwise potential values");
  out << "x,v_re,v_im\n";
  for (int i = 0; i < samples; ++i) {
    double x = double(i) / (samples - 1);
    cplx val = v(x);
    out << fmt_double(x) << ',' << fmt_double(val.real()) << ',' << fmt_double(val.imag())
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Files.
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::bad_potential_format, "cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(Err::bad_potential_format, std::string("JSON parse error in ") + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(Err::bad_potential_format, "cannot write file: " + path);
  out << text;
}

inline Potential read_potential_file(const std::string& path) {
  std::filesystem::path p(path);
  if (p.extension() == ".json") return potential_from_json(read_json_file(path));
  if (p.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) fail(Err::bad_potential_format, "cannot open file: " + path);
    return read_potential_csv(in);
  }
  fail(Err::bad_potential_format, "potential file must end in .csv or .json: " + path);
}

// ---------------------------------------------------------------------------
// Reconstruction data and bundle manifests.
// ---------------------------------------------------------------------------

inline json recovered_to_json(const RecoveredData& r) {
  json weights = json::array();
  for (const auto& [n, w] : r.weights) weights.push_back({{"n", n}, {"w", w}});
  return {{"order", r.order},      {"b", r.b},
          {"c", r.c},              {"alpha_hat", r.alpha_hat},
          {"zero_weight", r.zero_weight}, {"weights", weights},
          {"err", r.err}};
}

struct BundleManifest {
  std::string s0, sv, svg, svig, probe;
};

inline json manifest_to_json(const BundleManifest& m) {
  return {{"s0", m.s0}, {"sv", m.sv}, {"svg", m.svg}, {"svig", m.svig}, {"probe", m.probe}};
}

inline BundleManifest manifest_from_json(const json& j) {
  BundleManifest m;
  m.s0 = j.at("s0").get<std::string>();
  m.sv = j.at("sv").get<std::string>();
  m.svg = j.at("svg").get<std::string>();
  m.svig = j.at("svig").get<std::string>();
  m.probe = j.value("probe", "");
  return m;
}

// Reads the four spectra (and probe, if listed) named by a manifest file,
// resolving relative paths against the manifest's directory.
inline SpectraBundle load_bundle(const std::string& manifest_path) {
  BundleManifest m = manifest_from_json(read_json_file(manifest_path));
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return fp.string();
    return (std::filesystem::path(manifest_path).parent_path() / fp).string();
  };
  SpectraBundle b;
  b.s0 = spectrum_from_json(read_json_file(resolve(m.s0)));
  b.sv = perturbed_from_json(read_json_file(resolve(m.sv)));
  b.svg = perturbed_from_json(read_json_file(resolve(m.svg)));
  b.svig = perturbed_from_json(read_json_file(resolve(m.svig)));
  if (!m.probe.empty()) b.probe = read_potential_file(resolve(m.probe));
  return b;
}

// Writes the bundle parts plus a manifest into a directory; returns the
// manifest path.
inline std::string save_bundle(const std::string& dir, const SpectraBundle& b) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const json& j) {
    write_text_file(dir + "/" + name, j.dump(2) + "\n");
    return name;
  };
  BundleManifest m;
  m.s0 = put("s0.json", spectrum_to_json(b.s0));
  m.sv = put("sv.json", perturbed_to_json(b.sv));
  m.svg = put("svg.json", perturbed_to_json(b.svg));
  m.svig = put("svig.json", perturbed_to_json(b.svig));
  m.probe = put("probe.json", potential_to_json(b.probe));
  std::string manifest = dir + "/bundle.json";
  write_text_file(manifest, manifest_to_json(m).dump(2) + "\n");
  return manifest;
}

inline json error_to_json(const Failure& f) {
  return {{"error", f.code_name()}, {"message", f.what()}};
}

}  // namespace cubicspec
