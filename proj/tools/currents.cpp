// currents: shape classification with discrete currents, a spectral grid
// basis and linear discriminant analysis.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "currents/error.hpp"
#include "currents/pipeline.hpp"

namespace pl = currents::pipeline;

namespace {

struct Args {
  std::string manifest;
  std::string bounds;
  std::optional<double> delta;
  std::vector<std::string> lambdas;
  std::vector<double> gammas;
  double rank_tol = currents::kDefaultRankTol;
  std::optional<int> lda_rank_cap;
  double lda_ridge = 1e-8;
  bool uniform_priors = false;
  std::uint64_t seed = 0;
  std::string out = ".";
  bool svg = false;
  bool dump_gram = false;
  std::string source_dir;
  std::string model;
  std::string basis;
  std::string features;
  std::vector<std::string> inputs;
};

pl::ExperimentConfig to_config(const Args& a) {
  pl::ExperimentConfig c;
  c.manifest = a.manifest;
  if (!a.bounds.empty()) c.bounds = pl::parse_bounds(a.bounds);
  c.delta = a.delta;
  if (c.delta && !(*c.delta > 0.0)) throw currents::InvalidInput("--delta must be positive");
  for (const auto& l : a.lambdas) c.lambdas.push_back(pl::LambdaSpec::parse(l));
  if (c.lambdas.empty()) c.lambdas.push_back(pl::LambdaSpec{});
  c.gammas = a.gammas;
  for (double g : c.gammas)
    if (!(g > 0.0)) throw currents::InvalidInput("--gamma values must be positive");
  c.rank_tol = a.rank_tol;
  if (!(c.rank_tol > 0.0 && c.rank_tol < 1.0)) throw currents::InvalidInput("--rank-tol must lie in (0, 1)");
  c.lda.rank_cap = a.lda_rank_cap;
  if (c.lda.rank_cap && *c.lda.rank_cap < 1) throw currents::InvalidInput("--lda-rank-cap must be at least 1");
  c.lda.ridge = a.lda_ridge;
  if (!(c.lda.ridge >= 0.0)) throw currents::InvalidInput("--lda-ridge must be nonnegative");
  c.lda.uniform_priors = a.uniform_priors;
  c.seed = a.seed;
  c.out = a.out;
  c.svg = a.svg;
  c.dump_gram = a.dump_gram;
  return c;
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classify 2D contours and 3D surfaces via discrete currents, a spectral grid basis and LDA"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key = value file (command-line flags override it)");
  app.set_version_flag("--version", "currents 1.0");

  Args a;
  app.add_option("--manifest", a.manifest, "Dataset manifest");
  app.add_option("--bounds", a.bounds, "Grid bounds lo,hi per axis (default: shape bounding box padded by delta)");
  app.add_option("--delta", a.delta, "Grid spacing");
  app.add_option("--lambda", a.lambdas, "Kernel bandwidth(s), or 'auto' (repeatable, comma-separated)")
      ->delimiter(',');
  app.add_option("--gamma", a.gammas, "Regridding regularization weight(s) (repeatable, comma-separated)")
      ->delimiter(',');
  app.add_option("--rank-tol", a.rank_tol, "Relative eigenvalue cutoff for the spectral basis")->capture_default_str();
  app.add_option("--lda-rank-cap", a.lda_rank_cap, "Upper bound on the LDA subspace dimension");
  app.add_option("--lda-ridge", a.lda_ridge, "LDA ridge factor, relative to the mean within-class variance")
      ->capture_default_str();
  app.add_flag("--uniform-priors", a.uniform_priors, "Use uniform class priors instead of empirical frequencies");
  app.add_option("--seed", a.seed, "Random seed")->capture_default_str();
  app.add_option("--out", a.out, "Output directory")->capture_default_str();
  app.add_flag("--svg", a.svg, "Also write an SVG bar chart");

  auto* synth = app.add_subcommand("synth2d", "Generate the 58-contour 2D dataset (surrogate or traced)");
  synth->add_option("--source-dir", a.source_dir, "Directory of traced <family>-<index>.csv contours");
  auto* embed = app.add_subcommand("embed", "Discretize manifest shapes into current samples");
  auto* feats = app.add_subcommand("features", "Regrid shapes and write spectral features plus the basis");
  feats->add_flag("--dump-gram", a.dump_gram, "Also write the grid Gram matrix");
  auto* fit = app.add_subcommand("fit", "Fit an LDA model");
  fit->add_option("--features", a.features, "Fit from an existing feature CSV instead of a manifest");
  auto* pred = app.add_subcommand("predict", "Classify shapes with a fitted model");
  pred->add_option("--model", a.model, "Model file from `fit`")->required();
  pred->add_option("--basis", a.basis, "Basis file from `fit` or `features`")->required();
  auto* cv = app.add_subcommand("cv", "Leave-one-out cross-validation for one (lambda, gamma)");
  cv->add_option("--features", a.features, "Cross-validate an existing feature CSV");
  auto* sweep = app.add_subcommand("sweep", "LOOCV over every (lambda, gamma) pair");
  auto* report = app.add_subcommand("report", "Merge cross-validation tables into one report");
  report->add_option("--input", a.inputs, "CV or sweep table CSV (repeatable)")->required();
  for (auto* sub : {synth, embed, feats, fit, pred, cv, sweep, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const auto extra = app.remaining();
    if (app.get_subcommands().empty() && !extra.empty() && extra.front().rfind("-", 0) != 0) {
      std::cerr << "error: unknown subcommand '" << extra.front()
                << "' (expected synth2d, embed, features, fit, predict, cv, sweep or report)\n";
      return 1;
    }
    return app.exit(e);
  }

  try {
    const pl::ExperimentConfig config = to_config(a);
    if (*synth) {
      pl::run_synth2d(a.seed, a.out, opt_path(a.source_dir));
    } else if (*embed) {
      pl::run_embed(config);
    } else if (*feats) {
      pl::run_features(config);
    } else if (*fit) {
      pl::run_fit(config, opt_path(a.features));
    } else if (*pred) {
      pl::run_predict(a.model, a.basis, a.manifest, a.out);
    } else if (*cv) {
      const auto r = pl::run_cv(config, opt_path(a.features));
      std::cout << "LOOCV: " << currents::report::format_cv_error(r.misclassified, r.total) << " misclassified, "
                << r.invalid_folds << " invalid fold(s)\n";
    } else if (*sweep) {
      const auto cells = pl::run_sweep(config);
      int failed = 0;
      for (const auto& c : cells) {
        std::cout << "lambda=" << currents::io::format_double(c.lambda) << " (" << c.spec.str()
                  << ") gamma=" << currents::io::format_double(c.gamma) << ": ";
        if (c.report) {
          std::cout << currents::report::format_cv_error(c.report->misclassified, c.report->total) << '\n';
        } else {
          std::cout << "error: " << c.error << '\n';
          ++failed;
        }
      }
      if (failed) {
        std::cerr << "error: " << failed << " sweep cell(s) failed; see the status column in "
                  << (std::filesystem::path(a.out) / "sweep.csv").string() << '\n';
        return 1;
      }
    } else if (*report) {
      std::vector<std::filesystem::path> inputs(a.inputs.begin(), a.inputs.end());
      pl::run_report(inputs, a.out, a.svg);
    }
  } catch (const currents::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
