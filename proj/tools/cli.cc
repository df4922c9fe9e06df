#include "cli.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orbitdp/bounds.h"
#include "orbitdp/geometry.h"
#include "orbitdp/harness.h"
#include "orbitdp/matrix_io.h"
#include "orbitdp/mechanisms.h"
#include "orbitdp/sampler.h"
#include "orbitdp/selftest.h"

namespace orbitdp::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "json";
  bool quiet = false;
  bool strict = false;
};

struct SamplerFlags {
  std::string method = "auto";
  int chain_length = SamplerConfig{}.chain_length;
  int burn_in = SamplerConfig{}.burn_in;
  double step_size = SamplerConfig{}.step_size;
  int chains = SamplerConfig{}.num_chains;
  bool no_diagnostics = false;
  bool no_adapt = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method, "auto, mcmc or exact")
        ->check(CLI::IsMember({"auto", "mcmc", "exact"}));
    cmd->add_option("--chain-length", chain_length, "MCMC steps per chain, burn-in included");
    cmd->add_option("--burn-in", burn_in, "MCMC burn-in steps");
    cmd->add_option("--step-size", step_size, "initial Givens angle std. deviation");
    cmd->add_option("--chains", chains, "chains used for split R-hat");
    cmd->add_flag("--no-diagnostics", no_diagnostics, "single chain, no R-hat");
    cmd->add_flag("--no-adapt", no_adapt, "keep the step size fixed during burn-in");
  }

  SamplerConfig config() const {
    SamplerConfig cfg;
    cfg.method = sampler_method_from_string(method);
    cfg.chain_length = chain_length;
    cfg.burn_in = burn_in;
    cfg.step_size = step_size;
    cfg.num_chains = chains;
    cfg.diagnostics_on = !no_diagnostics;
    cfg.adapt_step = !no_adapt;
    cfg.validate();
    return cfg;
  }
};

struct MatrixInput {
  std::optional<Dataset> dataset;
  HermitianMatrix matrix = HermitianMatrix::zero(1);
};

// Accepts a matrix file or a dataset file (an object with "points").
MatrixInput read_matrix_input(const std::string& path) {
  const Json j = read_json_file(path);
  MatrixInput in;
  try {
    if (j.is_object() && j.contains("points")) {
      in.dataset = dataset_from_json(j);
      in.matrix = in.dataset->covariance();
    } else {
      in.matrix = hermitian_from_json(j);
    }
  } catch (const Json::exception& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
  return in;
}

// Pads with zeros to length d; the rank is the number of leading positive
// values (at least 1).
Spectrum target_spectrum(const std::vector<double>& values, int d) {
  if (values.empty() || static_cast<int>(values.size()) > d) {
    throw InvalidInputError("--lambda needs between 1 and d values");
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1]) throw InvalidInputError("--lambda must be non-increasing");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidInputError("--lambda must be finite and >= 0");
  }
  std::size_t rank = 0;
  while (rank < values.size() && values[rank] > 0.0) ++rank;
  const std::span<const double> top(values.data(), std::max<std::size_t>(rank, 1));
  return Spectrum::orbit_target(top, d);
}

void require_format(const Globals& g, bool allow_table) {
  if (g.format == "table" && !allow_table) {
    throw UsageError("--format table is only available for bounds");
  }
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

void emit(const Globals& g, const std::string& text, std::ostream& out, std::ostream& err) {
  if (g.out_path.empty()) {
    out << text;
    out.flush();
    return;
  }
  write_text_file(g.out_path, text);
  if (!g.quiet) err << "wrote " << g.out_path << '\n';
}

void report_lines(const Globals& g, const std::vector<std::string>& lines, const char* tag,
                  std::ostream& err) {
  if (g.quiet) return;
  for (const auto& line : lines) err << tag << ": " << line << '\n';
}

int transcript_exit(const Globals& g, const MechanismTranscript& t, std::ostream& out,
                    std::ostream& err) {
  emit(g, g.format == "csv" ? transcript_to_csv(t) : json_text(transcript_to_json(t)), out, err);
  report_lines(g, t.warnings, "warning", err);
  std::vector<std::string> flags = t.flags;
  flags.insert(flags.end(), t.diagnostics.flags.begin(), t.diagnostics.flags.end());
  report_lines(g, flags, "flag", err);
  return g.strict && t.flagged() ? kExitFlagged : kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private low-rank approximation on unitary orbits"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "64-bit seed");
  app.add_option("--out", g.out_path, "write the artifact to this file");
  app.add_option("--format", g.format, "json, csv (table for bounds)")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  app.add_flag("--quiet", g.quiet, "suppress messages on stderr");
  app.add_flag("--strict", g.strict, "exit 3 when diagnostics are flagged");

  // privatize
  auto* privatize = app.add_subcommand("privatize", "private rank-k approximation of a matrix");
  std::string priv_in;
  int priv_k = 0;
  double priv_eps = 0.0;
  SamplerFlags priv_sampler;
  privatize->add_option("--in", priv_in, "matrix or dataset JSON file")->required();
  privatize->add_option("--k", priv_k, "target rank")->required();
  privatize->add_option("--eps", priv_eps, "privacy budget")->required();
  priv_sampler.attach(privatize);

  // sample-orbit
  auto* sample = app.add_subcommand("sample-orbit", "exponential mechanism on a fixed orbit");
  std::string sample_in;
  std::vector<double> sample_lambda;
  double sample_eps = 0.0;
  SamplerFlags sample_sampler;
  sample->add_option("--in", sample_in, "matrix or dataset JSON file")->required();
  sample->add_option("--lambda", sample_lambda, "target spectrum, comma separated")
      ->required()
      ->delimiter(',');
  sample->add_option("--eps", sample_eps, "privacy budget")->required();
  sample_sampler.attach(sample);

  // pack
  auto* pack = app.add_subcommand("pack", "packing certificate on an orbit");
  std::vector<double> pack_lambda;
  int pack_i = 0;
  int pack_j = 0;
  double pack_zeta = 0.0;
  double pack_omega = std::numeric_limits<double>::infinity();
  PackingOptions pack_options;
  pack->add_option("--lambda", pack_lambda, "spectrum, comma separated")->required()->delimiter(',');
  pack->add_option("--i", pack_i, "1-based index i")->required();
  pack->add_option("--j", pack_j, "1-based index j > i")->required();
  pack->add_option("--zeta", pack_zeta, "separation")->required();
  pack->add_option("--omega", pack_omega, "containment radius around diag(lambda)");
  pack->add_option("--budget", pack_options.budget, "consecutive rejections before stopping");
  pack->add_option("--max-points", pack_options.max_points, "largest certificate size");

  // cover
  auto* cover = app.add_subcommand("cover", "greedy spectral-norm cover of an orbit");
  std::vector<double> cover_lambda;
  double cover_zeta = 0.0;
  int cover_budget = 200;
  bool cover_points = false;
  cover->add_option("--lambda", cover_lambda, "spectrum, comma separated")->required()->delimiter(',');
  cover->add_option("--zeta", cover_zeta, "cover radius")->required();
  cover->add_option("--budget", cover_budget, "consecutive rejections before stopping");
  cover->add_flag("--points", cover_points, "include the centers in JSON output");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate utility and error bounds");
  std::vector<double> b_gamma;
  std::vector<double> b_lambda;
  int b_k = 0;
  double b_eps = 0.0;
  double b_beta = 0.1;
  double b_zeta = 0.0;
  BoundConstants b_constants;
  bounds->add_option("--gamma", b_gamma, "spectrum of M, comma separated")->required()->delimiter(',');
  bounds->add_option("--lambda", b_lambda, "target spectrum, comma separated")
      ->required()
      ->delimiter(',');
  bounds->add_option("--k", b_k, "target rank")->required();
  bounds->add_option("--eps", b_eps, "privacy budget")->required();
  bounds->add_option("--beta", b_beta, "failure probability");
  bounds->add_option("--zeta", b_zeta, "covering/packing scale (default lambda_1 / 4)");
  bounds->add_option("--c", b_constants.c, "lower-bound constant");
  bounds->add_option("--C", b_constants.C, "upper-bound constant");

  // audit
  auto* audit = app.add_subcommand("audit", "empirical privacy audit at d = 2");
  AuditConfig audit_cfg;
  int audit_pairs = 10;
  bool audit_mutated = false;
  bool audit_bins_out = false;
  audit->add_option("--eps", audit_cfg.epsilon, "privacy budget");
  audit->add_option("--runs", audit_cfg.runs_per_pair, "samples per dataset");
  audit->add_option("--pairs", audit_pairs, "number of adversarial neighbor pairs");
  audit->add_option("--bins", audit_cfg.bins, "output bins (even)");
  audit->add_option("--min-count", audit_cfg.min_count, "smallest count for an audited bin");
  audit->add_flag("--mutated", audit_mutated, "audit the mechanism with coefficient eps / lambda_1");
  audit->add_flag("--per-bin", audit_bins_out, "include per-bin rows in JSON output");

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment from a spec file");
  std::string bench_spec;
  int bench_threads = -1;
  std::string bench_norm;
  bool bench_timing = false;
  bench->add_option("--spec", bench_spec, "ExperimentSpec JSON file")->required();
  bench->add_option("--threads", bench_threads, "worker threads (0: hardware)");
  bench->add_option("--wishart-norm", bench_norm, "m or d")->check(CLI::IsMember({"m", "d"}));
  bench->add_flag("--timing", bench_timing, "record wall-clock times");

  // selftest
  auto* selftest = app.add_subcommand("selftest", "run the invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (privatize->parsed()) {
      require_format(g, false);
      const auto in = read_matrix_input(priv_in);
      const auto cfg = priv_sampler.config();
      const auto t = in.dataset ? algorithm2(*in.dataset, priv_k, priv_eps, cfg, g.seed)
                                : algorithm2(in.matrix, priv_k, priv_eps, cfg, g.seed);
      return transcript_exit(g, t, out, err);
    }
    if (sample->parsed()) {
      require_format(g, false);
      const auto in = read_matrix_input(sample_in);
      const auto lambda = target_spectrum(sample_lambda, in.matrix.dim());
      const auto t = algorithm1(in.matrix, lambda, sample_eps, sample_sampler.config(), g.seed);
      return transcript_exit(g, t, out, err);
    }
    if (pack->parsed()) {
      require_format(g, false);
      const auto lambda = target_spectrum(pack_lambda, static_cast<int>(pack_lambda.size()));
      Rng rng(g.seed);
      const auto cert = packing_lower_construct(lambda, pack_i, pack_j, pack_zeta, pack_omega, rng,
                                                pack_options);
      const auto check = verify_packing_certificate(cert);
      if (g.format == "csv") {
        std::ostringstream csv;
        csv.precision(17);
        csv << "i,j,points,min_pairwise_dist,radius,target_separation,candidates_tried,verified\n"
            << cert.i << ',' << cert.j << ',' << cert.points.size() << ','
            << cert.min_pairwise_dist << ',' << cert.radius << ',' << cert.target_separation
            << ',' << cert.candidates_tried << ',' << (check.ok() ? 1 : 0) << '\n';
        emit(g, csv.str(), out, err);
      } else {
        Json j;
        j["certificate"] = packing_certificate_to_json(cert);
        j["check"] = certificate_check_to_json(check);
        emit(g, json_text(j), out, err);
      }
      if (!check.ok() && !g.quiet) err << "flag: certificate failed re-verification\n";
      return g.strict && !check.ok() ? kExitFlagged : kExitOk;
    }
    if (cover->parsed()) {
      require_format(g, false);
      const auto lambda = target_spectrum(cover_lambda, static_cast<int>(cover_lambda.size()));
      Rng rng(g.seed);
      const auto centers = covering_construct_orbit(lambda, cover_zeta, rng, cover_budget);
      const int d = lambda.dim();
      const double log_upper = 2.0 * d * lambda.rank() * std::log1p(8.0 * lambda.top() / cover_zeta);
      if (g.format == "csv") {
        std::ostringstream csv;
        csv.precision(17);
        csv << "d,k,zeta,budget,centers,log_covering_upper\n"
            << d << ',' << lambda.rank() << ',' << cover_zeta << ',' << cover_budget << ','
            << centers.size() << ',' << log_upper << '\n';
        emit(g, csv.str(), out, err);
      } else {
        Json j;
        j["lambda"] = spectrum_to_json(lambda);
        j["zeta"] = cover_zeta;
        j["budget"] = cover_budget;
        j["centers"] = centers.size();
        j["log_covering_upper"] = log_upper;
        if (cover_points) {
          Json pts = Json::array();
          for (const auto& c : centers) pts.push_back(orbit_point_to_json(c));
          j["points"] = std::move(pts);
        }
        emit(g, json_text(j), out, err);
      }
      return kExitOk;
    }
    if (bounds->parsed()) {
      const int d = static_cast<int>(b_gamma.size());
      std::vector<double> gamma = b_gamma;
      std::sort(gamma.begin(), gamma.end(), std::greater<>());
      const auto report = evaluate_bounds(Spectrum(gamma), target_spectrum(b_lambda, d), d, b_k,
                                          b_eps, b_beta, b_constants, b_zeta);
      std::string text;
      if (g.format == "csv") {
        text = bound_report_to_csv(report);
      } else if (g.format == "table") {
        text = bound_report_to_table(report);
      } else {
        text = json_text(bound_report_to_json(report));
      }
      emit(g, text, out, err);
      return kExitOk;
    }
    if (audit->parsed()) {
      require_format(g, false);
      audit_cfg.seed = g.seed;
      audit_cfg.mechanism = audit_mutated ? AuditMechanism::kMutatedCoeff : AuditMechanism::kCorrect;
      const auto pairs = adversarial_pairs(audit_pairs);
      const auto report = audit_privacy(audit_cfg, pairs);
      emit(g, g.format == "csv" ? audit_report_to_csv(report)
                                : json_text(audit_report_to_json(report, audit_bins_out)),
           out, err);
      if (!g.quiet) err << "audit " << (report.pass ? "passed" : "failed") << '\n';
      return g.strict && !report.pass ? kExitFlagged : kExitOk;
    }
    if (bench->parsed()) {
      require_format(g, false);
      auto spec = experiment_spec_from_json(read_json_file(bench_spec));
      if (app.count("--seed") > 0) spec.seed = g.seed;
      if (bench_threads >= 0) spec.threads = bench_threads;
      if (!bench_norm.empty()) spec.wishart_norm = bench_norm;
      if (bench_timing) spec.timing = true;
      const auto result = run_experiment(spec);
      emit(g, g.format == "csv" ? experiment_result_to_csv(result)
                                : json_text(experiment_result_to_json(result)),
           out, err);
      if (!g.quiet && result.flagged_trials > 0) {
        err << "flag: " << result.flagged_trials << " trial(s) with flagged diagnostics\n";
      }
      return g.strict && result.flagged_trials > 0 ? kExitFlagged : kExitOk;
    }
    if (selftest->parsed()) {
      require_format(g, false);
      const auto report = run_selftest(g.seed);
      emit(g, g.format == "csv" ? selftest_report_to_csv(report)
                                : json_text(selftest_report_to_json(report)),
           out, err);
      if (!g.quiet) {
        for (const auto& r : report.results) {
          if (!r.passed()) err << "FAIL " << r.name << ": " << r.violations << " violation(s)\n";
        }
      }
      return report.passed() ? kExitOk : kExitFlagged;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace orbitdp::cli
