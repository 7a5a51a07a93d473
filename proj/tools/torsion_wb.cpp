#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "torsion/error.hpp"
#include "torsion/verify.hpp"

using namespace torsion;

namespace {

struct RunConfig {
  std::uint64_t seed = 0;
  double rank_tol = kRankTolerance;
  double gap_tol = kGapTolerance;
  double rel_tol = 0.0;
  double cr_tol = 0.0;
  std::optional<double> theta;
  std::optional<double> lambda;
  std::vector<double> phase;
  std::string format = "json";
  std::string out;
  int threads = 0;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  f << text;
}

std::string error_json(const char* kind, const std::string& message) {
  Json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  return dump_json(j, false) + "\n";
}

PhiOptions phi_options(const RunConfig& cfg) {
  PhiOptions o;
  o.rank_tol = cfg.rank_tol;
  return o;
}

std::optional<Complex> phase_constant(const RunConfig& cfg) {
  if (cfg.phase.empty()) return std::nullopt;
  const Complex p(cfg.phase[0], cfg.phase[1]);
  if (std::abs(std::abs(p) - 1.0) > 1e-12) throw ValidationError("--phase must have modulus 1");
  return p;
}

AgmonAngle choose_angle(const RunConfig& cfg, const std::vector<Complex>& spectrum) {
  if (cfg.theta) return AgmonAngle(*cfg.theta);
  return default_agmon_angle(spectrum);
}

Json frame_json(const DetElement& e) {
  if (e.frame().kind == Frame::Kind::cohomology && e.frame().cohomology) {
    return to_json(*e.frame().cohomology);
  }
  Json j;
  j["standard"] = e.frame().dims;
  return j;
}

Json torsion_complex(const Json& input, const RunConfig& cfg) {
  const GradedComplex c = graded_complex_from_json(input);
  require_complex(c);
  const PhiOptions options = phi_options(cfg);
  auto h = std::make_shared<const CohomologyData>(cohomology(c, cfg.rank_tol));
  const DetElement t = phi(c, DetElement(1.0, Frame::standard(c)), h, options);
  Json out;
  out["kind"] = "complex";
  out["torsion"] = to_json(t.value());
  out["betti"] = h->betti;
  out["frame"] = frame_json(t);
  out["complex_residual"] = check_complex(c);
  return out;
}

Json torsion_model(const Json& input, const RunConfig& cfg, bool rho) {
  const ModelInput model = model_from_json(input);
  require_complex(model.complex);
  require_chirality(model.complex, model.chirality);
  const PhiOptions options = phi_options(cfg);
  const OddSignatureModel m = odd_signature(model.complex, model.chirality);
  Json out;
  out["kind"] = "model";
  out["r_sign"] = r_sign(model.complex);
  const DetElement refined = refined_torsion(model.complex, model.chirality, nullptr, options);
  out["refined_torsion"] = to_json(refined.value());
  out["betti"] = refined.frame().cohomology->betti;
  if (rho) {
    const double lambda = cfg.lambda ? *cfg.lambda : admissible_lambdas(m, cfg.gap_tol).front();
    const AgmonAngle theta =
        choose_angle(cfg, graded_spectrum(m, SpectralCut::exterior(lambda), cfg.gap_tol));
    const DetElement r = rho_lambda(m, lambda, theta, options, cfg.gap_tol);
    out["lambda"] = lambda;
    out["theta"] = theta.value();
    if (const auto p = phase_constant(cfg)) {
      out["rho_an"] = to_json(*p * r.value());
      out["phase"] = to_json(*p);
    } else {
      out["rho"] = to_json(r.value());
    }
    out["frame"] = frame_json(r);
  } else {
    out["frame"] = frame_json(refined);
  }
  out["eta_b_even"] = to_json(eta_invariant(m.b_even));
  return out;
}

Json torsion_cw(const Json& input, const RunConfig& cfg, bool flip, const std::string& rep_path) {
  const CWSystem k = cw_from_json(input);
  Representation a;
  if (!rep_path.empty()) {
    a = representation_from_json(read_json_file(rep_path));
  } else if (input.contains("representation")) {
    a = representation_from_json(input["representation"]);
  } else {
    throw ValidationError("CW input needs a representation (in the file or via --rep)");
  }
  require_representation(k.presentation, a);
  const DetElement t = ft_torsion(k, a, flip, phi_options(cfg));
  Json out;
  out["kind"] = "cw";
  out["torsion"] = to_json(t.value());
  out["n"] = a.n;
  out["flipped"] = flip;
  out["relation_residual"] = rep_check(k.presentation, a);
  out["betti"] = t.frame().cohomology->betti;
  out["frame"] = frame_json(t);
  return out;
}

std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string samples_csv(const std::vector<FamilySample>& samples, const std::vector<double>& cr,
                        const GridSpec& grid) {
  std::ostringstream out;
  out << "z_re,z_im,f_re,f_im,cr_abs\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    out << csv_number(s.z.real()) << ',' << csv_number(s.z.imag()) << ','
        << csv_number(s.value.real()) << ',' << csv_number(s.value.imag()) << ',';
    const int row = static_cast<int>(i) / grid.cols;
    const int col = static_cast<int>(i) % grid.cols;
    if (!cr.empty() && row > 0 && col > 0 && row + 1 < grid.rows && col + 1 < grid.cols) {
      out << csv_number(cr[(row - 1) * (grid.cols - 2) + (col - 1)]);
    }
    out << '\n';
  }
  return out.str();
}

int cmd_scan(const std::string& input_path, const RunConfig& cfg, std::string footer) {
  const Json input = read_json_file(input_path);
  if (classify_input(input) != InputKind::family) throw ValidationError("scan needs a family file");
  const AnalyticFamily fam = family_from_json(input);
  const PhiOptions options = phi_options(cfg);
  const FamilyValues values = torsion_family(fam, options);

  if (values.stratum_crossing) {
    std::vector<std::string> written;
    for (int s = 0; s < values.strata; ++s) {
      std::vector<FamilySample> part;
      for (const auto& x : values.samples) {
        if (x.stratum == s) part.push_back(x);
      }
      const std::string text = samples_csv(part, {}, GridSpec{fam.grid.center, fam.grid.h,
                                                               static_cast<int>(part.size()), 1});
      std::string path;
      if (!cfg.out.empty()) path = cfg.out + ".stratum" + std::to_string(s) + ".csv";
      emit(text, path);
      if (!path.empty()) written.push_back(path);
    }
    std::string msg = "family crosses a stratum: betti numbers change on the grid (" +
                      std::to_string(values.strata) + " strata";
    for (const auto& w : written) msg += ", " + w;
    throw ValidationError(msg + ")");
  }

  const HolomorphyReport report = cr_residual(fam, options);
  if (cfg.format == "csv") {
    emit(samples_csv(values.samples, report.residuals, fam.grid), cfg.out);
  } else {
    Json out;
    out["kind"] = "family";
    Json samples = Json::array();
    for (const auto& s : values.samples) {
      Json j;
      j["z"] = to_json(s.z);
      j["value"] = to_json(s.value);
      samples.push_back(j);
    }
    out["samples"] = samples;
    out["holomorphy"] = to_json(report);
    emit(dump_json(out) + "\n", cfg.out);
  }

  if (input.contains("gamma")) {
    std::vector<Complex> f, g;
    for (const auto& s : values.samples) {
      const GradedComplex c = fam.at(s.z);
      const OddSignatureModel m = odd_signature(c, chirality_from_json(input, c));
      const double lambda = cfg.lambda ? *cfg.lambda : admissible_lambdas(m, cfg.gap_tol).front();
      const AgmonAngle theta =
          choose_angle(cfg, graded_spectrum(m, SpectralCut::exterior(lambda), cfg.gap_tol));
      f.push_back(s.value);
      g.push_back(rho_lambda(m, lambda, theta, options, cfg.gap_tol).value());
    }
    const std::vector<Complex> weight;
    const PhaseVerdict v = phase_constancy(f, g, cfg.rel_tol > 0.0 ? cfg.rel_tol : 1e-8, weight,
                                           fam.grid);
    Json j;
    j["paired"] = "torsion / rho";
    j["verdict"] = to_json(v);
    if (footer.empty() && !cfg.out.empty()) footer = cfg.out + ".phase.json";
    if (footer.empty()) {
      std::cerr << dump_json(j, false) << "\n";
    } else {
      emit(dump_json(j) + "\n", footer);
    }
  }
  return 0;
}

int cmd_verify(const std::string& suite, int instances, const RunConfig& cfg) {
  VerifyConfig v;
  v.seed = cfg.seed;
  v.instances = instances;
  v.rank_tol = cfg.rank_tol;
  v.gap_tol = cfg.gap_tol;
  v.rel_tol = cfg.rel_tol;
  v.cr_tol = cfg.cr_tol;
  v.threads = cfg.threads;
  if (const char* dir = std::getenv("TORSION_WB_DATA")) v.data_dir = dir;
  const std::vector<SuiteResult> results = run_suite(suite, v);
  Json out;
  bool ok = true;
  Json suites = Json::array();
  for (const auto& r : results) {
    suites.push_back(to_json(r));
    ok = ok && r.passed();
  }
  out["passed"] = ok;
  out["seed"] = cfg.seed;
  out["suites"] = suites;
  emit(dump_json(out) + "\n", cfg.out);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refined torsion workbench"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string input;
  std::string rep_path;
  std::string footer;
  std::string suite = "all";
  int instances = 200;
  bool rho = false;
  bool flip = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Root seed");
    sub->add_option("--tol-rank", cfg.rank_tol, "Relative rank cutoff")->check(CLI::PositiveNumber);
    sub->add_option("--tol-gap", cfg.gap_tol, "Spectral gap tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--tol-rel", cfg.rel_tol, "Relative comparison tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-cr", cfg.cr_tol, "Minimum CR scaling exponent")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", cfg.out, "Output file (default stdout)");
  };

  CLI::App* torsion = app.add_subcommand("torsion", "Torsion of a complex, model or CW system");
  common(torsion);
  torsion->add_option("input,--input", input, "Input JSON file")->required();
  torsion->add_flag("--rho", rho, "Spectral element rho for a model");
  torsion->add_option("--lambda", cfg.lambda, "Spectral cut")->check(CLI::NonNegativeNumber);
  torsion->add_option("--theta", cfg.theta, "Agmon angle in (-pi, 0)");
  torsion->add_option("--phase", cfg.phase, "Unit phase constant: re im")->expected(2);
  torsion->add_flag("--flip", flip, "Reverse the cell orientation");
  torsion->add_option("--rep", rep_path, "Representation JSON for a CW input");

  CLI::App* verify = app.add_subcommand("verify", "Run property suites");
  common(verify);
  verify->add_option("suite,--suite", suite, "Suite name")->check(CLI::IsMember(suite_names()));
  verify->add_option("--instances", instances, "Random instances per property")
      ->check(CLI::PositiveNumber);
  verify->add_option("--threads", cfg.threads, "Worker threads");

  CLI::App* scan = app.add_subcommand("scan", "Evaluate a family over its grid");
  common(scan);
  scan->add_option("input,--input", input, "Family JSON file")->required();
  scan->add_option("--lambda", cfg.lambda, "Spectral cut for paired rho values")
      ->check(CLI::NonNegativeNumber);
  scan->add_option("--theta", cfg.theta, "Agmon angle in (-pi, 0)");
  scan->add_option("--footer", footer, "Phase verdict file for paired families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("validation", e.what());
    return 2;
  }

  try {
    if (torsion->parsed()) {
      const Json in = read_json_file(input);
      Json out;
      switch (classify_input(in)) {
        case InputKind::complex:
          out = torsion_complex(in, cfg);
          break;
        case InputKind::model:
          out = torsion_model(in, cfg, rho);
          break;
        case InputKind::cw:
          out = torsion_cw(in, cfg, flip, rep_path);
          break;
        case InputKind::family:
          throw ValidationError("family files are evaluated with the scan subcommand");
      }
      if (rho && !out.contains("rho") && !out.contains("rho_an")) {
        throw ValidationError("--rho needs a model input (complex plus gamma)");
      }
      emit(dump_json(out) + "\n", cfg.out);
      return 0;
    }
    if (verify->parsed()) return cmd_verify(suite, instances, cfg);
    return cmd_scan(input, cfg, footer);
  } catch (const ValidationError& e) {
    std::cerr << error_json("validation", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << error_json("numerical", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::cerr << error_json("numerical", e.what());
    return 3;
  }
}
