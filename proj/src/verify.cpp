#include "torsion/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <thread>

#include "torsion/error.hpp"
#include "torsion/random_models.hpp"

namespace torsion {

namespace {

namespace fs = std::filesystem;

double rel_dev(Complex a, Complex b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Outcome of one instance of a property.
struct Trial {
  bool skipped = false;
  bool failed = false;
  double deviation = 0.0;
  std::string error;
};

Trial check(double deviation, double threshold) {
  Trial t;
  t.deviation = deviation;
  t.failed = !(deviation <= threshold);
  return t;
}

Trial skip() {
  Trial t;
  t.skipped = true;
  return t;
}

PropertyResult collect(const std::string& name, double threshold, const std::vector<Trial>& trials,
                       std::string note = {}) {
  PropertyResult p;
  p.name = name;
  p.threshold = threshold;
  std::string first_error;
  for (const auto& t : trials) {
    if (t.skipped) {
      ++p.skipped;
      continue;
    }
    ++p.instances;
    if (t.failed) ++p.failures;
    if (!t.error.empty() && first_error.empty()) first_error = t.error;
    if (std::isfinite(t.deviation)) p.max_deviation = std::max(p.max_deviation, t.deviation);
  }
  if (!first_error.empty()) note += (note.empty() ? "" : "; ") + ("first error: " + first_error);
  p.note = note;
  return p;
}

// Runs body over instances; exceptions become failures with the message kept.
PropertyResult run_property(const std::string& name, double threshold, int count, int threads,
                            const std::function<Trial(int)>& body, std::string note = {}) {
  const std::function<Trial(int)> guarded = [&](int i) {
    try {
      return body(i);
    } catch (const std::exception& e) {
      Trial t;
      t.failed = true;
      t.deviation = INFINITY;
      t.error = e.what();
      return t;
    }
  };
  return collect(name, threshold, parallel_map<Trial>(count, threads, guarded), std::move(note));
}

double pick(double configured, double fallback) { return configured > 0.0 ? configured : fallback; }

PhiOptions phi_options(const VerifyConfig& config) {
  PhiOptions o;
  o.rank_tol = config.rank_tol;
  return o;
}

// Acyclic complex of length d: rank of d_j in 1..max_rank, dims forced.
GradedComplex random_acyclic(std::mt19937_64& rng, int d, int max_rank) {
  std::uniform_int_distribution<int> pick_rank(1, max_rank);
  std::vector<int> ranks(d);
  for (auto& r : ranks) r = pick_rank(rng);
  std::vector<int> dims(d + 1);
  for (int j = 0; j <= d; ++j) dims[j] = (j > 0 ? ranks[j - 1] : 0) + (j < d ? ranks[j] : 0);
  return random_complex(rng, dims, ranks);
}

// Arbitrary complex: dims in 1..max_dim, ranks anywhere in their admissible range.
GradedComplex random_any(std::mt19937_64& rng, int d, int max_dim) {
  std::uniform_int_distribution<int> pick_dim(1, max_dim);
  std::vector<int> dims(d + 1);
  for (auto& m : dims) m = pick_dim(rng);
  std::vector<int> ranks(d);
  int previous = 0;
  for (int j = 0; j < d; ++j) {
    const int hi = std::min(dims[j] - previous, dims[j + 1]);
    ranks[j] = std::uniform_int_distribution<int>(0, std::max(0, hi))(rng);
    previous = ranks[j];
  }
  return random_complex(rng, dims, ranks);
}

GradedComplex conjugate(const GradedComplex& c, const std::vector<CMatrix>& m) {
  std::vector<CMatrix> boundaries;
  for (int j = 0; j < c.length(); ++j) {
    boundaries.push_back(m[j + 1].partialPivLu().solve(c.boundaries()[j] * m[j]));
  }
  return GradedComplex(c.dims(), boundaries);
}

// Frame transport: determinant of the old frame `moved` written in the frame of h
// modulo coboundaries, with alternating exponents.
Complex frame_change(const CohomologyData& h, const std::vector<CMatrix>& moved) {
  Complex out(1.0);
  for (std::size_t j = 0; j < h.betti.size(); ++j) {
    const int b = h.betti[j];
    if (b == 0) continue;
    CMatrix system(h.representatives[j].rows(), b + h.coboundaries[j].cols());
    system << h.representatives[j], h.coboundaries[j];
    const CMatrix coeffs = solve_least_squares(system, moved[j]);
    const Complex t = det(CMatrix(coeffs.topRows(b)));
    out = (j % 2 == 0) ? out * t : out / t;
  }
  return out;
}

AgmonAngle angle_for(const OddSignatureModel& m, const SpectralCut& cut, double gap_tol) {
  const std::vector<Complex> spectrum = graded_spectrum(m, cut, gap_tol);
  return default_agmon_angle(spectrum);
}

// ---------------------------------------------------------------- basis

SuiteResult suite_basis(const VerifyConfig& config, int threads) {
  SuiteResult out{"basis", {}, 0.0};
  const int count = config.instances;
  const PhiOptions base = phi_options(config);

  out.properties.push_back(run_property(
      "phi_complement_independence", pick(config.rel_tol, 1e-9), count, threads, [&](int i) {
        std::mt19937_64 rng(instance_seed(config.seed, i));
        const int d = std::uniform_int_distribution<int>(1, 5)(rng);
        const GradedComplex c = random_any(rng, d, 6);
        auto h = std::make_shared<const CohomologyData>(cohomology(c, base.rank_tol));
        const DetElement unit(1.0, Frame::standard(c));
        PhiOptions oblique = base;
        oblique.complement_seed = instance_seed(config.seed ^ 0x5bd1e995u, i);
        const Complex a = phi(c, unit, h, base).value();
        const Complex b = phi(c, unit, h, oblique).value();
        return check(rel_dev(a, b), pick(config.rel_tol, 1e-9));
      }));

  out.properties.push_back(run_property(
      "base_change_covariance", pick(config.rel_tol, 1e-9), count, threads, [&](int i) {
        std::mt19937_64 rng(instance_seed(config.seed + 1, i));
        const int d = std::uniform_int_distribution<int>(1, 5)(rng);
        const GradedComplex c = random_acyclic(rng, d, 3);
        std::vector<CMatrix> m;
        Complex predicted = torsion_acyclic(c, base);
        for (int j = 0; j <= d; ++j) {
          m.push_back(random_invertible(rng, c.dim(j)));
          const Complex dm = det(m.back());
          predicted = (j % 2 == 0) ? predicted * dm : predicted / dm;
        }
        return check(rel_dev(torsion_acyclic(conjugate(c, m), base), predicted),
                     pick(config.rel_tol, 1e-9));
      }));

  out.properties.push_back(run_property("phi_linearity", 1e-14, count, threads, [&](int i) {
    std::mt19937_64 rng(instance_seed(config.seed + 2, i));
    const int d = std::uniform_int_distribution<int>(1, 5)(rng);
    const GradedComplex c = random_any(rng, d, 5);
    auto h = std::make_shared<const CohomologyData>(cohomology(c, base.rank_tol));
    const Complex s = random_matrix(rng, 1, 1)(0, 0);
    const Complex a = phi(c, DetElement(s, Frame::standard(c)), h, base).value();
    const Complex b = phi(c, DetElement(1.0, Frame::standard(c)), h, base).value();
    return check(rel_dev(a, s * b), 1e-14);
  }));

  out.properties.push_back(run_property(
      "c_gamma_choice_independence", pick(config.rel_tol, 1e-12), count, threads, [&](int i) {
        const RandomModel model = random_model(instance_seed(config.seed + 3, i));
        std::mt19937_64 rng(instance_seed(config.seed + 4, i));
        const int r = (model.complex.length() + 1) / 2;
        std::vector<CMatrix> first, second;
        for (int j = 0; j < r; ++j) {
          first.push_back(random_invertible(rng, model.complex.dim(j)));
          second.push_back(random_invertible(rng, model.complex.dim(j)));
        }
        const Complex a = c_gamma(model.complex, model.chirality, first).value();
        const Complex b = c_gamma(model.complex, model.chirality, second).value();
        return check(rel_dev(a, b), pick(config.rel_tol, 1e-12));
      }));

  out.properties.push_back(run_property(
      "involution_covariance", pick(config.rel_tol, 1e-9), count, threads, [&](int i) {
        const RandomModel model = random_model(instance_seed(config.seed + 5, i));
        std::mt19937_64 rng(instance_seed(config.seed + 6, i));
        const GradedComplex& c = model.complex;
        const int d = c.length();
        std::vector<CMatrix> m;
        for (int j = 0; j <= d; ++j) m.push_back(random_invertible(rng, c.dim(j)));
        const GradedComplex moved = conjugate(c, m);
        std::vector<CMatrix> blocks;
        for (int j = 0; j <= d; ++j) {
          blocks.push_back(m[d - j].partialPivLu().solve(model.chirality.block(j) * m[j]));
        }
        const Chirality moved_gamma(blocks);

        auto h = std::make_shared<const CohomologyData>(cohomology(c, base.rank_tol));
        auto h_moved = std::make_shared<const CohomologyData>(cohomology(moved, base.rank_tol));
        std::vector<CMatrix> old_frame;
        for (int j = 0; j <= d; ++j) {
          old_frame.push_back(m[j].partialPivLu().solve(h->representatives[j]));
        }
        const Complex a = refined_torsion(c, model.chirality, h, base).value();
        const Complex b = refined_torsion(moved, moved_gamma, h_moved, base).value();
        return check(rel_dev(b, a * frame_change(*h_moved, old_frame)),
                     pick(config.rel_tol, 1e-9));
      }));
  return out;
}

// ---------------------------------------------------------------- lambda / theta

SuiteResult suite_lambda(const VerifyConfig& config, int threads) {
  SuiteResult out{"lambda", {}, 0.0};
  const PhiOptions base = phi_options(config);
  const double tol = pick(config.rel_tol, 1e-8);

  out.properties.push_back(run_property(
      "rho_lambda_independence", tol, config.instances, threads, [&](int i) {
        const RandomModel model = random_model(instance_seed(config.seed, i));
        const OddSignatureModel m = odd_signature(model.complex, model.chirality);
        const std::vector<double> lambdas = admissible_lambdas(m, config.gap_tol);
        const double top = lambdas.back();
        const Complex reference =
            rho_lambda(m, top, AgmonAngle(-kPi / 2.0), base, config.gap_tol).value();
        double worst = 0.0;
        for (double lambda : lambdas) {
          const AgmonAngle theta = angle_for(m, SpectralCut::exterior(lambda), config.gap_tol);
          const Complex v = rho_lambda(m, lambda, theta, base, config.gap_tol).value();
          worst = std::max(worst, rel_dev(v, reference));
        }
        return check(worst, tol);
      }));

  out.properties.push_back(run_property(
      "whole_spectrum_consistency", 1e-12, config.instances, threads, [&](int i) {
        const RandomModel model = random_model(instance_seed(config.seed, i));
        const OddSignatureModel m = odd_signature(model.complex, model.chirality);
        const double top = admissible_lambdas(m, config.gap_tol).back();
        const Complex a = rho_lambda(m, top, AgmonAngle(-kPi / 2.0), base, config.gap_tol).value();
        const Complex b = refined_torsion(model.complex, model.chirality, nullptr, base).value();
        return check(rel_dev(a, b), 1e-12);
      }));

  out.properties.push_back(run_property(
      "gamma_commutes_with_b", 1e-10, config.instances, threads, [&](int i) {
        const RandomModel model = random_model(instance_seed(config.seed, i));
        const OddSignatureModel m = odd_signature(model.complex, model.chirality);
        const double scale = norm(m.gamma) * norm(m.b) + 1.0;
        return check(norm(m.gamma * m.b - m.b * m.gamma) / scale, 1e-10);
      }));
  return out;
}

SuiteResult suite_theta(const VerifyConfig& config, int threads) {
  SuiteResult out{"theta", {}, 0.0};
  const double tol = pick(config.rel_tol, 1e-10);
  const std::vector<double> grid = {-0.1, -kPi / 4.0, -kPi / 2.0, -3.0 * kPi / 4.0, -3.0};

  out.properties.push_back(run_property(
      "graded_det_theta_independence", tol, config.instances, threads, [&](int i) {
        const RandomModel model = random_model(instance_seed(config.seed, i));
        const OddSignatureModel m = odd_signature(model.complex, model.chirality);
        std::vector<double> lambdas = admissible_lambdas(m, config.gap_tol);
        lambdas.pop_back();  // nothing lies above the last cut
        double worst = 0.0;
        int compared = 0;
        for (double lambda : lambdas) {
          const SpectralCut cut = SpectralCut::exterior(lambda);
          const std::vector<Complex> spectrum = graded_spectrum(m, cut, config.gap_tol);
          std::vector<Complex> values;
          for (double t : grid) {
            const AgmonAngle theta(t);
            if (!theta.admissible_for(spectrum)) continue;
            values.push_back(graded_det(m, cut, theta, config.gap_tol).value);
          }
          for (std::size_t k = 1; k < values.size(); ++k) {
            worst = std::max(worst, rel_dev(values[k], values[0]));
            ++compared;
          }
        }
        if (compared == 0) return skip();
        return check(worst, tol);
      }));
  return out;
}

// ---------------------------------------------------------------- euler / orientation

struct CorpusEntry {
  std::string name;
  CWSystem cw;
  std::optional<Representation> representation;
};

std::vector<CorpusEntry> cw_corpus(const std::string& data_dir) {
  std::vector<CorpusEntry> out;
  for (const auto& path : corpus_files(data_dir, "corpus")) {
    const Json j = read_json_file(path);
    if (!j.contains("cells")) continue;
    CorpusEntry e{fs::path(path).stem().string(), cw_from_json(j), std::nullopt};
    if (j.contains("representation")) e.representation = representation_from_json(j["representation"]);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Word> random_shifts(std::mt19937_64& rng, const CWSystem& k) {
  std::vector<Word> shifts(k.cell_dims.size());
  std::uniform_int_distribution<int> length(0, 2);
  std::uniform_int_distribution<int> gen(1, k.presentation.generators);
  std::bernoulli_distribution invert(0.5);
  for (auto& w : shifts) {
    const int l = length(rng);
    for (int t = 0; t < l; ++t) w.push_back(invert(rng) ? -gen(rng) : gen(rng));
  }
  return shifts;
}

SuiteResult suite_euler(const VerifyConfig& config, int threads) {
  SuiteResult out{"euler", {}, 0.0};
  const PhiOptions base = phi_options(config);
  const std::vector<CorpusEntry> corpus = cw_corpus(config.data_dir);
  const int reps = 50;
  const double tol = pick(config.rel_tol, 1e-9);
  const int count = static_cast<int>(corpus.size()) * reps;

  out.properties.push_back(run_property(
      "euler_shift_law", tol, count, threads,
      [&](int i) {
        const CorpusEntry& e = corpus[i / reps];
        std::mt19937_64 rng(instance_seed(config.seed, i));
        const int n = std::uniform_int_distribution<int>(1, 3)(rng);
        const Representation a = random_representation(rng, e.cw.presentation, n);
        const std::vector<Word> shifts = random_shifts(rng, e.cw);
        const Complex before = ft_torsion(e.cw, a, false, base).value();
        const Complex after = ft_torsion(shift_lifts(e.cw, shifts), a, false, base).value();
        return check(rel_dev(after / before, euler_shift_factor(e.cw, a, shifts)), tol);
      },
      "exponent -1 on even cells, +1 on odd cells"));

  const double closed_tol = pick(config.rel_tol, 1e-10);
  const auto circle = std::find_if(corpus.begin(), corpus.end(),
                                   [](const CorpusEntry& e) { return e.name == "circle"; });
  if (circle != corpus.end()) {
    out.properties.push_back(run_property(
        "circle_closed_form", closed_tol, 50, threads,
        [&](int i) {
          const double radius = 0.1 + 0.2 * (i % 10);
          const double angle = 2.0 * kPi * (i / 10) / 5.0 + 0.3;
          const Complex lambda = 1.0 + std::polar(radius, angle);
          const Representation a{1, {CMatrix::Constant(1, 1, lambda)}};
          return check(rel_dev(ft_torsion(circle->cw, a, false, base).value(), lambda - 1.0),
                       closed_tol);
        },
        "tau = (lambda - 1)^1"));
  }

  out.properties.push_back(run_property(
      "det_word_homomorphism", 1e-12, config.instances, threads, [&](int i) {
        std::mt19937_64 rng(instance_seed(config.seed + 7, i));
        const int g = std::uniform_int_distribution<int>(1, 3)(rng);
        const int n = std::uniform_int_distribution<int>(1, 3)(rng);
        Representation a{n, {}};
        for (int k = 0; k < g; ++k) a.images.push_back(random_invertible(rng, n));
        CWSystem dummy;
        dummy.presentation.generators = g;
        dummy.cell_dims = {0, 0};
        const std::vector<Word> w = random_shifts(rng, dummy);
        Word joined = w[0];
        joined.insert(joined.end(), w[1].begin(), w[1].end());
        return check(rel_dev(det_rep_word(a, joined), det_rep_word(a, w[0]) * det_rep_word(a, w[1])),
                     1e-12);
      }));

  out.properties.push_back(run_property(
      "twisted_flatness", 1e-10, count, threads, [&](int i) {
        const CorpusEntry& e = corpus[i / reps];
        std::mt19937_64 rng(instance_seed(config.seed + 8, i));
        const int n = std::uniform_int_distribution<int>(1, 3)(rng);
        const Representation a = random_representation(rng, e.cw.presentation, n, false);
        return check(check_complex(twisted_complex(e.cw, a, INFINITY)), 1e-10);
      }));
  return out;
}

SuiteResult suite_orientation(const VerifyConfig& config, int threads) {
  SuiteResult out{"orientation", {}, 0.0};
  const PhiOptions base = phi_options(config);
  const std::vector<CorpusEntry> corpus = cw_corpus(config.data_dir);
  const int reps = 10;
  const double tol = pick(config.rel_tol, 1e-12);
  for (int n = 1; n <= 3; ++n) {
    const int per_file = reps + 2;
    const int count = static_cast<int>(corpus.size()) * per_file;
    out.properties.push_back(run_property(
        "orientation_flip_n" + std::to_string(n), tol, count, threads,
        [&, n](int i) {
          const CorpusEntry& e = corpus[i / per_file];
          const int slot = i % per_file;
          std::mt19937_64 rng(instance_seed(config.seed + n, i));
          Representation a;
          if (slot == reps) {
            // Trivial representation: the complex has cohomology.
            a = Representation{n, std::vector<CMatrix>(e.cw.presentation.generators,
                                                       CMatrix::Identity(n, n))};
          } else if (slot == reps + 1) {
            if (!e.representation || e.representation->n != 1) return skip();
            a.n = n;
            for (const auto& g : e.representation->images) {
              a.images.push_back(CMatrix::Identity(n, n) * g(0, 0));
            }
          } else {
            a = random_representation(rng, e.cw.presentation, n, slot % 2 == 0);
          }
          const Complex plain = ft_torsion(e.cw, a, false, base).value();
          const Complex flipped = ft_torsion(e.cw, a, true, base).value();
          const double sign = n % 2 == 0 ? 1.0 : -1.0;
          return check(rel_dev(flipped, sign * plain), tol);
        },
        "ratio compared with (-1)^n"));
  }
  return out;
}

// ---------------------------------------------------------------- cone

SuiteResult suite_cone(const VerifyConfig& config, int threads) {
  SuiteResult out{"cone", {}, 0.0};
  const PhiOptions base = phi_options(config);

  out.properties.push_back(run_property(
      "identity_cone_unimodular", 1e-10, config.instances, threads, [&](int i) {
        std::mt19937_64 rng(instance_seed(config.seed, i));
        const int d = std::uniform_int_distribution<int>(1, 4)(rng);
        const GradedComplex w = random_acyclic(rng, d, 3);
        std::vector<CMatrix> j;
        for (int k = 0; k <= d; ++k) j.push_back(CMatrix::Identity(w.dim(k), w.dim(k)));
        const ConeComplex cc = cone(w, w, j);
        return check(std::abs(std::abs(torsion_acyclic(cc.assembled, base)) - 1.0), 1e-10);
      }));

  const double tol = pick(config.rel_tol, 1e-8);
  out.properties.push_back(run_property(
      "cone_modulus_law", tol, config.instances, threads, [&](int i) {
        std::mt19937_64 rng(instance_seed(config.seed + 1, i));
        const int d = std::uniform_int_distribution<int>(1, 3)(rng);
        const GradedComplex w = random_any(rng, d, 3);
        // C = (W in new coordinates) + an acyclic summand; J is the inclusion.
        std::vector<CMatrix> n;
        for (int k = 0; k <= d; ++k) n.push_back(random_invertible(rng, w.dim(k)));
        const GradedComplex moved = conjugate(w, n);
        const GradedComplex extra = random_acyclic(rng, d, 2);
        std::vector<int> dims(d + 1);
        std::vector<CMatrix> boundaries;
        for (int k = 0; k <= d; ++k) dims[k] = w.dim(k) + extra.dim(k);
        for (int k = 0; k < d; ++k) {
          CMatrix b = CMatrix::Zero(dims[k + 1], dims[k]);
          b.topLeftCorner(w.dim(k + 1), w.dim(k)) = moved.boundaries()[k];
          b.bottomRightCorner(extra.dim(k + 1), extra.dim(k)) = extra.boundaries()[k];
          boundaries.push_back(b);
        }
        // Mix the two summands so J is not block-aligned.
        std::vector<CMatrix> mix;
        for (int k = 0; k <= d; ++k) mix.push_back(random_invertible(rng, dims[k]));
        const GradedComplex c = conjugate(GradedComplex(dims, boundaries), mix);
        std::vector<CMatrix> j;
        for (int k = 0; k <= d; ++k) {
          CMatrix inc = CMatrix::Zero(dims[k], w.dim(k));
          inc.topRows(w.dim(k)) = n[k].partialPivLu().inverse();
          j.push_back(mix[k].partialPivLu().solve(inc));
        }
        const ConeComplex cc = cone(w, c, j);
        const double actual = std::abs(torsion_acyclic(cc.assembled, base));
        const double predicted = cone_modulus_prediction(w, c, j, base);
        return check(std::abs(actual - predicted) / std::max(actual, predicted), tol);
      }));
  return out;
}

// ---------------------------------------------------------------- cr / phase

SuiteResult suite_cr(const VerifyConfig& config, int threads) {
  SuiteResult out{"cr", {}, 0.0};
  const PhiOptions base = phi_options(config);
  const double exponent_min = pick(config.cr_tol, 1.7);
  const std::vector<std::string> files = corpus_files(config.data_dir, "families");

  std::vector<std::string> holo, anti, crossing;
  for (const auto& f : files) {
    const std::string expect = read_json_file(f).value("expect", "holomorphic");
    if (expect == "antiholomorphic") anti.push_back(f);
    else if (expect == "stratum_crossing") crossing.push_back(f);
    else holo.push_back(f);
  }

  std::vector<std::string> floor_files;
  std::vector<Trial> trials;
  for (const auto& f : holo) {
    try {
      const HolomorphyReport r = cr_residual(family_from_json(read_json_file(f)), base);
      if (r.roundoff_floor) {
        floor_files.push_back(fs::path(f).stem().string());
        trials.push_back(check(r.max_residual, 1e-10));
      } else {
        Trial t;
        t.deviation = *r.exponent;
        t.failed = !(*r.exponent >= exponent_min);
        trials.push_back(t);
      }
    } catch (const std::exception& e) {
      Trial t{false, true, INFINITY, e.what()};
      trials.push_back(t);
    }
  }
  std::string note = "deviation is the smallest-is-worst exponent; threshold is a lower bound";
  if (!floor_files.empty()) {
    note += "; at roundoff floor (residual <= 1e-10):";
    for (const auto& n : floor_files) note += " " + n;
  }
  PropertyResult holo_result = collect("cr_exponent_holomorphic", exponent_min, trials, note);
  holo_result.max_deviation = INFINITY;
  for (const auto& t : trials) {
    if (!t.skipped && t.deviation > 1.0) holo_result.max_deviation = std::min(holo_result.max_deviation, t.deviation);
  }
  if (!std::isfinite(holo_result.max_deviation)) holo_result.max_deviation = 0.0;
  out.properties.push_back(holo_result);

  trials.clear();
  for (const auto& f : anti) {
    try {
      const HolomorphyReport r = cr_residual(family_from_json(read_json_file(f)), base);
      Trial t;
      t.deviation = std::min(r.max_residual, r.max_residual_half);
      t.failed = !(t.deviation >= 0.5);
      trials.push_back(t);
    } catch (const std::exception& e) {
      trials.push_back(Trial{false, true, INFINITY, e.what()});
    }
  }
  out.properties.push_back(collect("cr_antiholomorphic_control", 0.5, trials,
                                   "deviation is the residual; threshold is a lower bound"));

  trials.clear();
  for (const auto& f : crossing) {
    const FamilyValues v = torsion_family(family_from_json(read_json_file(f)), base);
    Trial t;
    t.failed = !v.stratum_crossing;
    trials.push_back(t);
  }
  out.properties.push_back(collect("stratum_crossing_detected", 0.0, trials));

  out.properties.push_back(run_property("phase_synthetic", 1e-9, 1, threads, [&](int) {
    GridSpec grid{Complex(0.3, 0.2), 0.1, 5, 5};
    std::vector<Complex> f, g;
    for (Complex z : grid.points()) {
      g.push_back(z * z + 1.0);
      f.push_back(std::polar(1.0, kPi / 3.0) * g.back());
    }
    const PhaseVerdict v = phase_constancy(f, g, 1e-9, {}, grid);
    if (!v.constant || v.phases.size() != 1) return Trial{false, true, INFINITY, "not constant"};
    return check(std::abs(v.phases[0] - kPi / 3.0), 1e-9);
  }));

  out.properties.push_back(run_property("phase_varying_rejected", 0.0, 1, threads, [&](int) {
    std::vector<Complex> f, g;
    for (int k = 0; k < 16; ++k) {
      const Complex z = std::polar(1.0, 0.1 * k);
      g.push_back(Complex(2.0, 1.0));
      f.push_back(z * g.back());
    }
    const PhaseVerdict v = phase_constancy(f, g, 1e-9);
    Trial t;
    t.deviation = v.max_variation;
    t.failed = v.constant;
    return t;
  }));

  // Combinatorial against spectral values on a shared model.
  trials.clear();
  for (const auto& path : files) {
    const Json j = read_json_file(path);
    if (!j.contains("gamma")) continue;
    try {
      const AnalyticFamily fam = family_from_json(j);
      const FamilyValues values = torsion_family(fam, base);
      std::vector<Complex> f, g;
      for (const auto& s : values.samples) {
        const GradedComplex c = fam.at(s.z);
        const Chirality gamma = chirality_from_json(j, c);
        const OddSignatureModel m = odd_signature(c, gamma);
        const double lambda = admissible_lambdas(m, config.gap_tol).front();
        const AgmonAngle theta = angle_for(m, SpectralCut::exterior(lambda), config.gap_tol);
        f.push_back(s.value);
        g.push_back(rho_lambda(m, lambda, theta, base, config.gap_tol).value());
      }
      const PhaseVerdict v = phase_constancy(f, g, 1e-8, {}, fam.grid);
      Trial t;
      t.deviation = v.max_variation;
      t.failed = !v.constant;
      trials.push_back(t);
    } catch (const std::exception& e) {
      trials.push_back(Trial{false, true, INFINITY, e.what()});
    }
  }
  out.properties.push_back(collect("phase_paired_families", 1e-8, trials));
  return out;
}

// ---------------------------------------------------------------- eta

// Diagonal eigenvalues of a mixed kind, sometimes inside Jordan blocks.
CMatrix random_eta_operator(std::mt19937_64& rng) {
  const int n = std::uniform_int_distribution<int>(1, 6)(rng);
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_real_distribution<double> mag(0.5, 3.0);
  std::bernoulli_distribution coin(0.5);
  CMatrix t = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = coin(rng) ? 1.0 : -1.0;
    switch (kind(rng)) {
      case 0: t(k, k) = 0.0; break;
      case 1: t(k, k) = Complex(0.0, s * mag(rng)); break;
      case 2: t(k, k) = s * mag(rng); break;
      default: t(k, k) = Complex(s * mag(rng), (coin(rng) ? 1.0 : -1.0) * mag(rng)); break;
    }
  }
  // Jordan blocks of size 2 at most: larger blocks split beyond the clustering tolerance.
  for (int k = 0; k + 1 < n; ++k) {
    if (coin(rng)) {
      t(k + 1, k + 1) = t(k, k);
      t(k, k + 1) = 1.0;
      ++k;
    }
  }
  const CMatrix p = random_invertible(rng, n);
  return p * t * p.partialPivLu().inverse();
}

SuiteResult suite_eta(const VerifyConfig& config, int threads) {
  SuiteResult out{"eta", {}, 0.0};

  out.properties.push_back(run_property("eta_forced_examples", 0.0, 3, threads, [&](int i) {
    CMatrix d;
    long expected = 0;
    if (i == 0) {
      d = CMatrix::Zero(2, 2);
      d(0, 0) = 1.0;
      d(1, 1) = -1.0;
      expected = 0;
    } else if (i == 1) {
      d = CMatrix::Zero(3, 3);
      d(0, 0) = 2.0;
      d(1, 1) = Complex(0.0, 3.0);
      d(2, 2) = -5.0;
      expected = 1;
    } else {
      d = CMatrix::Zero(5, 5);
      d(2, 2) = Complex(0.0, 1.0);
      d(3, 3) = Complex(0.0, -1.0);
      d(4, 4) = 7.0;
      expected = 3;
    }
    return check(static_cast<double>(std::labs(eta_invariant(d).twice_eta - expected)), 0.0);
  }));

  out.properties.push_back(run_property("eta_direct_sum_additivity", 0.0, 100, threads, [&](int i) {
    std::mt19937_64 rng(instance_seed(config.seed, i));
    const CMatrix a = random_eta_operator(rng);
    const CMatrix b = random_eta_operator(rng);
    CMatrix sum = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    sum.topLeftCorner(a.rows(), a.cols()) = a;
    sum.bottomRightCorner(b.rows(), b.cols()) = b;
    const long lhs = eta_invariant(sum).twice_eta;
    const long rhs = eta_invariant(a).twice_eta + eta_invariant(b).twice_eta;
    return check(static_cast<double>(std::labs(lhs - rhs)), 0.0);
  }));

  out.properties.push_back(run_property("eta_negation", 0.0, 100, threads, [&](int i) {
    std::mt19937_64 rng(instance_seed(config.seed + 1, i));
    const CMatrix a = random_eta_operator(rng);
    const EtaData e = eta_invariant(a);
    const long lhs = eta_invariant(-a).twice_eta;
    const long rhs = -e.twice_eta + 2L * e.m_zero;
    return check(static_cast<double>(std::labs(lhs - rhs)), 0.0);
  }));
  return out;
}

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.passed(); });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"basis", "lambda", "theta", "euler", "orientation",
                                                 "cone",  "cr",     "eta",   "all"};
  return names;
}

std::vector<SuiteResult> run_suite(const std::string& name, const VerifyConfig& config) {
  using Runner = SuiteResult (*)(const VerifyConfig&, int);
  static const std::vector<std::pair<std::string, Runner>> runners = {
      {"basis", suite_basis},   {"lambda", suite_lambda},           {"theta", suite_theta},
      {"euler", suite_euler},   {"orientation", suite_orientation}, {"cone", suite_cone},
      {"cr", suite_cr},         {"eta", suite_eta}};
  if (config.instances <= 0) throw ValidationError("instance count must be positive");
  const int threads = worker_count(config.threads);
  std::vector<SuiteResult> out;
  for (const auto& [suite, runner] : runners) {
    if (name != "all" && name != suite) continue;
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r = runner(config, threads);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ValidationError("unknown suite: " + name);
  return out;
}

Json to_json(const SuiteResult& s) {
  Json props = Json::array();
  for (const auto& p : s.properties) {
    Json j;
    j["name"] = p.name;
    j["passed"] = p.passed();
    j["instances"] = p.instances;
    j["failures"] = p.failures;
    j["skipped"] = p.skipped;
    j["max_deviation"] = p.max_deviation;
    j["threshold"] = p.threshold;
    if (!p.note.empty()) j["note"] = p.note;
    props.push_back(j);
  }
  Json out;
  out["suite"] = s.suite;
  out["passed"] = s.passed();
  out["seconds"] = s.seconds;
  out["properties"] = props;
  return out;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TORSION_WB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> corpus_files(const std::string& data_dir, const std::string& subdir,
                                      const std::string& prefix) {
  const fs::path dir = fs::path(data_dir) / subdir;
  if (!fs::is_directory(dir)) throw ValidationError("missing data directory: " + dir.string());
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".json") continue;
    if (name.rfind(prefix, 0) != 0) continue;
    out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace torsion
