// Command-line front end: spectra, reconstruction, boundary classification,
// grid cross-checks, and the function-identity self-test, with JSON/CSV
// outputs suitable for golden-file comparison.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "cubicspec/fd_oracle.hpp"
#include "cubicspec/identity_suite.hpp"
#include "cubicspec/io.hpp"

using namespace cubicspec;

namespace {

void emit(const json& j, const std::string& out_dir, const std::string& name) {
  std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/" + name, text);
  }
}

void emit_text(const std::string& text, const std::string& out_dir, const std::string& name) {
  std::cout << text;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/" + name, text);
  }
}

// Potentials read from coefficient files have no pointwise values; synthesize
// them from the mode basis when a command needs samples.
void need_samples(Potential& v, int n_max) {
  if (v.has_sampler()) return;
  static std::map<int, ModeBasisL0> cache;
  int width = std::max(n_max, v.cutoff);
  auto it = cache.find(width);
  if (it == cache.end()) it = cache.emplace(width, ModeBasisL0(eigs_l0(width))).first;
  ensure_sampler(v, it->second.evaluator());
}

int run_eigs0(int n_max, const std::string& out_dir) {
  emit(spectrum_to_json(eigs_l0(n_max)), out_dir, "spectrum_l0.json");
  return 0;
}

int run_eigs(const std::string& potential_path, double alpha, int n_max, double tol,
             const std::string& out_dir) {
  Potential v = read_potential_file(potential_path);
  PerturbedSpectrum s = spectrum_alpha(v, alpha, n_max, tol);
  emit(perturbed_to_json(s), out_dir, "spectrum_alpha.json");
  return 0;
}

int run_reconstruct(const std::string& bundle_path, double g_floor, const std::string& out_dir) {
  SpectraBundle b = load_bundle(bundle_path);
  RecoveredData rd = recover_weights(b.s0, b.sv);
  Reconstruction rec = reconstruct_v(b, g_floor);
  json j = recovered_to_json(rd);
  j["alpha_hat"] = rec.alpha_hat;
  j["round_trip_err"] = rec.err;
  j["v_hat"] = potential_to_json(rec.v_hat);
  if (!rec.zero_gauge_note.empty()) j["note"] = rec.zero_gauge_note;
  emit(j, out_dir, "recovered.json");
  if (!out_dir.empty()) {
    Potential vh = rec.v_hat;
    need_samples(vh, std::max(1, vh.cutoff));
    std::ostringstream csv;
    write_potential_csv(csv, vh);
    write_text_file(out_dir + "/v_hat.csv", csv.str());
  }
  return 0;
}

int run_classify(double gamma, double beta, double phi, double tol, const std::string& out_dir) {
  BoundaryParams p{gamma, beta, phi};
  emit(verdict_to_json(p, classify_bc(p, tol)), out_dir, "verdict.json");
  return 0;
}

int run_oracle(const std::string& potential_path, double alpha, int n_max, int grid,
               const std::string& out_dir) {
  Potential v;
  if (!potential_path.empty()) v = read_potential_file(potential_path);
  need_samples(v, n_max);
  PerturbedSpectrum s = spectrum_alpha(v, alpha, n_max);
  // A few extra modes cover the discrete zero group and the outer root.
  int count = 2 * n_max + 6;
  std::vector<double> grid_eigs = oracle_eigs(discretize(v, alpha, grid), count);
  std::ostringstream csv;
  csv << "lambda,mult,class,lambda_grid,abs_err,rel_err\n";
  for (const auto& e : s.entries) {
    double nearest = grid_eigs.front();
    for (double ge : grid_eigs)
      if (std::abs(ge - e.lambda) < std::abs(nearest - e.lambda)) nearest = ge;
    double abs_err = std::abs(nearest - e.lambda);
    double rel_err = abs_err / std::max(1.0, std::abs(e.lambda));
    csv << fmt_double(e.lambda) << ',' << e.mult << ',' << eig_class_name(e.cls) << ','
        << fmt_double(nearest) << ',' << fmt_double(abs_err) << ',' << fmt_double(rel_err)
        << '\n';
  }
  emit_text(csv.str(), out_dir, "oracle.csv");
  return 0;
}

int run_identities(int samples, const std::string& out_dir) {
  IdentityReport rep = run_identity_suite(samples);
  static const char* names[9] = {
      "derivative shift",   "conjugation",        "root-of-unity rotation",
      "exponential splits", "main determinant",   "summation formulas",
      "doubling formulas",  "reduction formulas", "series tail",
  };
  std::ostringstream out;
  out << "samples: " << rep.samples << "  radius: " << rep.radius << "\n";
  for (int i = 0; i < 9; ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "relation %d (%s): max residual %.3e\n", i + 1, names[i],
                  rep.residual[i]);
    out << line;
  }
  char tail[128];
  std::snprintf(tail, sizeof tail, "max algebraic: %.3e\nmax derivative: %.3e\n",
                rep.max_algebraic, rep.max_derivative);
  out << tail;
  emit_text(out.str(), out_dir, "identities.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra and inverse problems of the third-derivative operator "
               "with a rank-one nonlocal potential"};
  app.require_subcommand(1);

  std::string potential_path, bundle_path, out_dir;
  int n_max = 10, grid = 512, samples = 200;
  double alpha = 1.0, tol = -1.0;
  double gamma = 0.0, beta = 0.0, phi = 0.0;
  double class_tol = 1e-10, g_floor = 1e-6;

  auto* eigs0 = app.add_subcommand("eigs0", "eigenvalues of the unperturbed operator");
  eigs0->add_option("--n-max", n_max, "largest eigenvalue index (default 10)");
  eigs0->add_option("--out", out_dir, "directory for spectrum_l0.json");

  auto* eigs = app.add_subcommand("eigs", "eigenvalues of the perturbed operator");
  eigs->add_option("--potential", potential_path, "potential file (.json coefficients or .csv samples)")
      ->required();
  eigs->add_option("--alpha", alpha, "coupling constant")->required();
  eigs->add_option("--n-max", n_max, "largest unperturbed index kept (default 10)");
  eigs->add_option("--tol", tol, "coincidence tolerance (default: scale-relative)");
  eigs->add_option("--out", out_dir, "directory for spectrum_alpha.json");

  auto* rec = app.add_subcommand("reconstruct", "recover the potential from a four-spectra bundle");
  rec->add_option("--bundle", bundle_path, "bundle manifest JSON")->required();
  rec->add_option("--tol", g_floor, "probe-coefficient floor (default 1e-6)");
  rec->add_option("--out", out_dir, "directory for recovered.json and v_hat.csv");

  auto* cls = app.add_subcommand("classify", "multiplicity regime of general boundary conditions");
  cls->add_option("--gamma", gamma, "first boundary angle")->required();
  cls->add_option("--beta", beta, "second boundary angle")->required();
  cls->add_option("--phi", phi, "quasi-periodicity phase")->required();
  cls->add_option("--tol", class_tol, "criterion tolerance (default 1e-10)");
  cls->add_option("--out", out_dir, "directory for verdict.json");

  auto* orc = app.add_subcommand("oracle", "side-by-side grid discretization cross-check");
  orc->add_option("--potential", potential_path, "potential file (optional; default zero)");
  orc->add_option("--alpha", alpha, "coupling constant (default 1)");
  orc->add_option("--n-max", n_max, "largest index compared (default 10)");
  orc->add_option("--grid", grid, "grid size M (default 512)");
  orc->add_option("--out", out_dir, "directory for oracle.csv");

  auto* idn = app.add_subcommand("identities", "self-test of the generalized trigonometric identities");
  idn->add_option("--samples", samples, "sample count (default 200)");
  idn->add_option("--out", out_dir, "directory for identities.txt");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eigs0->parsed()) return run_eigs0(n_max, out_dir);
    if (eigs->parsed()) return run_eigs(potential_path, alpha, n_max, tol, out_dir);
    if (rec->parsed()) return run_reconstruct(bundle_path, g_floor, out_dir);
    if (cls->parsed()) return run_classify(gamma, beta, phi, class_tol, out_dir);
    if (orc->parsed()) return run_oracle(potential_path, alpha, n_max, grid, out_dir);
    if (idn->parsed()) return run_identities(samples, out_dir);
  } catch (const Failure& f) {
    std::cerr << error_to_json(f).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
