#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cubicspec/fd_oracle.hpp"
#include "cubicspec/io.hpp"

using namespace cubicspec;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "cubicspec_io_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

// Runs the installed binary named by the test environment; every invocation
// gets its own capture files so results never bleed between checks.
CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("CUBIC_SPECTRUM_BIN");
  REQUIRE(bin != nullptr);
  static int serial = 0;
  fs::path out = work_dir() / ("stdout_" + std::to_string(serial) + ".txt");
  fs::path err = work_dir() / ("stderr_" + std::to_string(serial) + ".txt");
  ++serial;
  std::string cmd = std::string(bin) + " " + args + " > " + out.string() + " 2> " + err.string();
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("spectrum serialization round trip", "[io]") {
  SpectrumL0 s = eigs_l0(3);
  json j = spectrum_to_json(s);
  CHECK(j.at("operator") == "L0");
  SpectrumL0 back = spectrum_from_json(j);
  REQUIRE(back.entries.size() == s.entries.size());
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    CHECK(back.entries[i].n == s.entries[i].n);
    CHECK(back.entries[i].k == s.entries[i].k);  // shortest form is exact
    CHECK(back.entries[i].lambda == s.entries[i].lambda);
    CHECK(back.entries[i].mult == s.entries[i].mult);
  }
  CHECK(back.residual == s.residual);

  json bad = j;
  bad["operator"] = "other";
  try {
    spectrum_from_json(bad);
    FAIL("expected a failure on the wrong operator tag");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::bad_potential_format);
  }
}

TEST_CASE("perturbed spectrum serialization round trip", "[io]") {
  PerturbedSpectrum s;
  s.alpha = 0.5;
  s.entries = {{-394.17, 1, EigClass::sigma0_simple, 0.0},
               {0.0, 2, EigClass::zero_special, 1e-3},
               {395.1, 1, EigClass::sigma2_simple, 2e-2}};
  PerturbedSpectrum back = perturbed_from_json(perturbed_to_json(s));
  REQUIRE(back.entries.size() == 3u);
  CHECK(back.alpha == s.alpha);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.entries[i].lambda == s.entries[i].lambda);
    CHECK(back.entries[i].mult == s.entries[i].mult);
    CHECK(back.entries[i].cls == s.entries[i].cls);
    CHECK(back.entries[i].margin == s.entries[i].margin);
  }
}

TEST_CASE("potential files: coefficient JSON and sampled CSV", "[io]") {
  Potential v;
  v.v01 = cplx(0.25, 0.0);
  v.coeff[2] = cplx(-0.3, 0.4);
  v.coeff[-1] = cplx(0.1, 0.0);
  v.cutoff = 2;
  Potential back = potential_from_json(potential_to_json(v));
  CHECK(back.v01 == v.v01);
  CHECK(back.coeff == v.coeff);
  CHECK(back.cutoff == 2);

  // CSV: write samples of a smooth function, read back the interpolant.
  Potential sampled = make_sampled([](double x) { return cplx(std::sin(3.0 * x), x * x); });
  std::ostringstream csv;
  write_potential_csv(csv, sampled, 257);
  std::istringstream in(csv.str());
  Potential interp = read_potential_csv(in);
  for (double x : {0.0, 0.123, 0.5, 0.777, 1.0})
    CHECK(std::abs(interp(x) - sampled(x)) < 1e-4);

  std::istringstream bad("x,v_re,v_im\n0,1,0\n0.5,1\n");
  try {
    read_potential_csv(bad);
    FAIL("expected a failure on a short row");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::bad_potential_format);
  }
}

TEST_CASE("bundle save and load round trip", "[io]") {
  Potential v;
  v.coeff[1] = cplx(0.8, -0.6);
  v.cutoff = 1;
  Potential probe;
  probe.coeff[1] = 0.5;
  probe.coeff[-1] = 0.5;
  probe.cutoff = 1;
  SpectraBundle b = make_bundle(v, 0.4, 4, probe);
  fs::path dir = work_dir() / "bundle";
  std::string manifest = save_bundle(dir.string(), b);
  SpectraBundle back = load_bundle(manifest);
  REQUIRE(back.s0.entries.size() == b.s0.entries.size());
  REQUIRE(back.sv.entries.size() == b.sv.entries.size());
  CHECK(back.sv.alpha == b.sv.alpha);
  for (std::size_t i = 0; i < b.sv.entries.size(); ++i)
    CHECK(back.sv.entries[i].lambda == b.sv.entries[i].lambda);
  CHECK(back.probe.coeff == probe.coeff);
}

TEST_CASE("failures serialize with code and message", "[io]") {
  try {
    fail(Err::not_a_root, "nothing vanishes here");
  } catch (const Failure& f) {
    json j = error_to_json(f);
    CHECK(j.at("error") == "NotARoot");
    CHECK(j.at("message") == "nothing vanishes here");
  }
}

TEST_CASE("command line: unperturbed spectrum with deterministic bytes", "[cli]") {
  fs::path out1 = work_dir() / "run1";
  fs::path out2 = work_dir() / "run2";
  CliResult r1 = run_cli("eigs0 --n-max 10 --out " + out1.string());
  CliResult r2 = run_cli("eigs0 --n-max 10 --out " + out2.string());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(r1.out == r2.out);
  CHECK(slurp(out1 / "spectrum_l0.json") == slurp(out2 / "spectrum_l0.json"));

  json j = json::parse(r1.out);
  REQUIRE(j.at("entries").size() == 21u);
  bool zero_double = false;
  for (const auto& e : j.at("entries"))
    if (e.at("n") == 0) zero_double = (e.at("mult") == 2);
  CHECK(zero_double);
}

TEST_CASE("command line: perturbed spectrum from a potential file", "[cli]") {
  Potential v;
  v.coeff[1] = 1.0;
  v.cutoff = 1;
  fs::path vp = work_dir() / "v_mode1.json";
  write_text_file(vp.string(), potential_to_json(v).dump(2) + "\n");
  CliResult r = run_cli("eigs --potential " + vp.string() + " --alpha 1 --n-max 4");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j.at("alpha") == 1.0);
  bool moved = false;
  for (const auto& e : j.at("entries")) {
    double lam = e.at("lambda").get<double>();
    if (e.at("class") == "sigma2_simple" && std::abs(lam - 395.176254169) < 1e-5) moved = true;
  }
  CHECK(moved);
}

TEST_CASE("command line: reconstruction from a saved bundle", "[cli]") {
  Potential v;
  v.coeff[1] = cplx(0.6, 0.0);
  v.coeff[-2] = cplx(0.0, 0.8);
  v.cutoff = 2;
  double nrm = v.coefficient_norm();
  for (auto& [n, c] : v.coeff) c /= nrm;
  Potential probe;
  for (int n = -3; n <= 3; ++n)
    if (n != 0) probe.coeff[n] = 1.0 / (1.0 + n * n);
  probe.cutoff = 3;
  SpectraBundle b = make_bundle(v, 0.9, 5, probe);
  fs::path dir = work_dir() / "rec_bundle";
  std::string manifest = save_bundle(dir.string(), b);

  fs::path out = work_dir() / "rec_out";
  CliResult r = run_cli("reconstruct --bundle " + manifest + " --out " + out.string());
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(std::abs(j.at("alpha_hat").get<double>() - 0.9) < 1e-6);
  Potential vh = potential_from_json(j.at("v_hat"));
  double dist2 = 0.0;
  for (int n = -5; n <= 5; ++n) {
    if (n == 0) continue;
    cplx a = v.coeff.count(n) ? v.coeff.at(n) : cplx(0.0);
    cplx c = vh.coeff.count(n) ? vh.coeff.at(n) : cplx(0.0);
    dist2 += std::norm(a - c);
  }
  CHECK(std::sqrt(dist2) < 1e-6);
  CHECK(fs::exists(out / "recovered.json"));
  CHECK(fs::exists(out / "v_hat.csv"));
}

TEST_CASE("command line: boundary classifier verdict", "[cli]") {
  CliResult r = run_cli("classify --gamma 1.5707963267948966 --beta 1.5707963267948966 --phi 0");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j.at("regime") == "double_zero_at_origin");
  CliResult r2 = run_cli("classify --gamma 0 --beta 0 --phi 3.141592653589793");
  CHECK(json::parse(r2.out).at("regime") == "all_simple");
}

TEST_CASE("command line: grid cross-check table", "[cli]") {
  CliResult r = run_cli("oracle --alpha 0.3 --n-max 1 --grid 128");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "lambda,mult,class,lambda_grid,abs_err,rel_err");
  int rows = 0;
  for (std::string line; std::getline(lines, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 3);  // minus-first, zero, plus-first
}

TEST_CASE("command line: identity self-test output", "[cli]") {
  CliResult r = run_cli("identities --samples 50");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("relation 9") != std::string::npos);
  CHECK(r.out.find("max algebraic") != std::string::npos);
}

TEST_CASE("command line: module errors exit nonzero with JSON", "[cli]") {
  fs::path missing = work_dir() / "does_not_exist.json";
  CliResult r = run_cli("eigs --potential " + missing.string() + " --alpha 1");
  REQUIRE(r.exit_code == 1);
  json j = json::parse(r.err);
  CHECK(j.at("error") == "BadPotentialFormat");
  CHECK(j.at("message").get<std::string>().find("cannot open") != std::string::npos);
}
