#pragma once

// End-to-end orchestration behind the `currents` command line tool:
// dataset manifests, experiment configuration, the embed -> regrid ->
// features -> LDA pipeline, parameter sweeps, and the command entry points.
//
// Manifest format (one declarative text file, '#' starts a comment):
//
//   name = synth2d-surrogate
//   ambient_dim = 2
//   shape = contours/star-01.csv contour-csv star-small
//   shape = meshes/body.obj obj size-3 center scale=1.5
//
// Each `shape` line is: path (relative to the manifest), format
// (contour-csv | obj | shape-csv), label, then optional preprocessing steps
// applied in order: `center`, `scale=<factor>`, `resample=<points>`.
// Other `key = value` lines are kept as dataset metadata. For `predict`,
// the label `?` marks a shape whose class is unknown.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "currents/classify.hpp"
#include "currents/io.hpp"
#include "currents/regrid.hpp"
#include "currents/report.hpp"
#include "currents/spectral.hpp"

namespace currents::pipeline {

namespace fs = std::filesystem;

enum class EntryFormat { contour_csv, obj, shape_csv };

std::string to_string(EntryFormat format);
EntryFormat parse_format(const std::string& text);

struct PreprocessStep {
  enum class Kind { center, scale, resample } kind;
  double value = 0.0;
};

struct ManifestEntry {
  fs::path path;  // as written in the manifest
  EntryFormat format = EntryFormat::contour_csv;
  std::string label;
  std::vector<PreprocessStep> steps;
};

struct DatasetManifest {
  std::string name;
  int ambient_dim = 2;
  std::vector<ManifestEntry> entries;
  io::Metadata extra;
  fs::path base_dir;  // directory the entry paths are relative to
};

DatasetManifest read_manifest(const fs::path& path);
std::string manifest_text(const DatasetManifest& manifest);
void write_manifest(const fs::path& path, const DatasetManifest& manifest);

/// Loads, preprocesses and discretizes every entry. Contours are reoriented
/// counterclockwise on ingestion. Shape ids are the manifest paths.
std::vector<DiscretizedShape> load_dataset(const DatasetManifest& manifest);

/// A bandwidth, or "auto" for default_lambda over the dataset.
struct LambdaSpec {
  std::optional<double> value;
  static LambdaSpec parse(const std::string& text);
  std::string str() const;
  bool is_auto() const { return !value.has_value(); }
};

/// "lo,hi,lo,hi[,lo,hi]"
std::vector<Interval> parse_bounds(const std::string& text);
std::string format_bounds(const std::vector<Interval>& bounds);

struct ExperimentConfig {
  fs::path manifest;
  std::optional<std::vector<Interval>> bounds;
  std::optional<double> delta;
  std::vector<LambdaSpec> lambdas;
  std::vector<double> gammas;
  double rank_tol = kDefaultRankTol;
  LdaOptions lda;
  std::uint64_t seed = 0;
  fs::path out = ".";
  bool svg = false;
  bool dump_gram = false;
};

/// Labeled dataset held in memory plus a resolved grid.
struct PreparedData {
  std::vector<DiscretizedShape> shapes;
  std::vector<std::string> labels;
  std::shared_ptr<const Grid> grid;
};

PreparedData prepare(const std::vector<DiscretizedShape>& shapes, const std::optional<std::vector<Interval>>& bounds,
                     double delta);

/// Per-lambda cache of Gram matrix, spectral basis and grid samples; per
/// (lambda, gamma) feature computation reuses one factorization.
class FeaturePipeline {
 public:
  FeaturePipeline(const PreparedData& data, double rank_tol);

  double resolve(const LambdaSpec& spec) const;
  /// Computes (or reuses) the lambda stage.
  const SpectralBasis& basis(double lambda);
  const GramMatrix& gram(double lambda);
  /// Feature matrix (one row per shape) for the given parameters.
  Matrix features(double lambda, double gamma);

 private:
  struct Stage {
    double lambda = 0.0;
    std::shared_ptr<const GramMatrix> gram;
    std::unique_ptr<SpectralBasis> basis;
    std::vector<Matrix> samples;
  };
  Stage& stage(double lambda);

  const PreparedData& data_;
  double rank_tol_;
  double auto_lambda_ = 0.0;
  std::unique_ptr<Stage> stage_;
};

struct SweepCell {
  LambdaSpec spec;
  double lambda = 0.0;
  double gamma = 0.0;
  int rank_d = 0;
  std::optional<CvReport> report;
  std::string error;  // set when the cell failed
};

/// Full pipeline + LOOCV for every (lambda, gamma) pair, lambda-major in the
/// order given. Failures are recorded per cell and do not stop the sweep.
std::vector<SweepCell> sweep(const PreparedData& data, const std::vector<LambdaSpec>& lambdas,
                             const std::vector<double>& gammas, double rank_tol, const LdaOptions& lda);

report::TableRow to_row(const SweepCell& cell, const LdaOptions& lda);

// Command entry points. Each writes its artifacts under config.out and throws
// currents::Error on failure.
void run_synth2d(std::uint64_t seed, const fs::path& out, const std::optional<fs::path>& source_dir);
void run_embed(const ExperimentConfig& config);
void run_features(const ExperimentConfig& config);
void run_fit(const ExperimentConfig& config, const std::optional<fs::path>& features_csv);
void run_predict(const fs::path& model, const fs::path& basis, const fs::path& manifest, const fs::path& out);
/// Returns the report that was written.
CvReport run_cv(const ExperimentConfig& config, const std::optional<fs::path>& features_csv);
std::vector<SweepCell> run_sweep(const ExperimentConfig& config);
void run_report(const std::vector<fs::path>& inputs, const fs::path& out, bool svg);

}  // namespace currents::pipeline
