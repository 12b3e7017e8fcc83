#include "currents/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include "currents/error.hpp"
#include "currents/synth.hpp"

namespace currents::pipeline {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + io::format_double(v[i]);
  return out;
}

std::string join_lambdas(const std::vector<LambdaSpec>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i].str();
  return out;
}

io::Metadata describe(const ExperimentConfig& c, const std::string& command, const Grid* grid) {
  io::Metadata meta;
  meta.emplace_back("command", command);
  meta.emplace_back("manifest", c.manifest.generic_string());
  if (grid) {
    meta.emplace_back("bounds", format_bounds(grid->bounds()));
    meta.emplace_back("grid_points", std::to_string(grid->size()));
  } else if (c.bounds) {
    meta.emplace_back("bounds", format_bounds(*c.bounds));
  } else {
    meta.emplace_back("bounds", "auto");
  }
  meta.emplace_back("delta", c.delta ? io::format_double(*c.delta) : "unset");
  meta.emplace_back("lambda", join_lambdas(c.lambdas));
  meta.emplace_back("gamma", join_doubles(c.gammas));
  meta.emplace_back("rank_tol", io::format_double(c.rank_tol));
  meta.emplace_back("lda_rank_cap", c.lda.rank_cap ? std::to_string(*c.lda.rank_cap) : "none");
  meta.emplace_back("lda_ridge", io::format_double(c.lda.ridge));
  meta.emplace_back("priors", c.lda.uniform_priors ? "uniform" : "empirical");
  meta.emplace_back("seed", std::to_string(c.seed));
  return meta;
}

std::string sanitize(const std::string& id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out;
}

PreparedData prepare_from_config(const ExperimentConfig& config) {
  if (config.manifest.empty()) throw InvalidInput("--manifest is required");
  if (!config.delta) throw InvalidInput("--delta (grid spacing) is required");
  const DatasetManifest manifest = read_manifest(config.manifest);
  return prepare(load_dataset(manifest), config.bounds, *config.delta);
}

void require_single(const ExperimentConfig& config, const std::string& command) {
  if (config.lambdas.size() != 1 || config.gammas.size() != 1)
    throw InvalidInput(command + " takes exactly one --lambda and one --gamma (got " +
                       std::to_string(config.lambdas.size()) + " and " + std::to_string(config.gammas.size()) +
                       "); use `sweep` for parameter grids");
}

std::vector<double> validated_gammas(const std::vector<double>& gammas) {
  if (gammas.empty()) throw InvalidInput("at least one --gamma value is required");
  for (double g : gammas)
    if (!(g > 0.0)) throw InvalidInput("--gamma values must be positive");
  return gammas;
}

struct SingleRun {
  double lambda = 0.0;
  double gamma = 0.0;
  Matrix features;
  std::unique_ptr<SpectralBasis> basis;
};

SingleRun compute_single(const ExperimentConfig& config, const PreparedData& data,
                         std::optional<GramMatrix>* gram_out = nullptr) {
  FeaturePipeline fp(data, config.rank_tol);
  SingleRun run;
  run.lambda = fp.resolve(config.lambdas.front());
  run.gamma = validated_gammas(config.gammas).front();
  run.features = fp.features(run.lambda, run.gamma);
  run.basis = std::make_unique<SpectralBasis>(fp.basis(run.lambda));
  if (gram_out) *gram_out = fp.gram(run.lambda);
  return run;
}

void add_run_meta(io::Metadata& meta, const SingleRun& run) {
  meta.emplace_back("lambda_value", io::format_double(run.lambda));
  meta.emplace_back("gamma_value", io::format_double(run.gamma));
  meta.emplace_back("rank_d", std::to_string(run.basis->rank_d));
}

io::FeatureTable feature_table(const PreparedData& data, const Matrix& features, io::Metadata meta) {
  io::FeatureTable table;
  for (const auto& s : data.shapes) table.ids.push_back(s.source_id);
  table.labels = data.labels;
  table.values = features;
  table.meta = std::move(meta);
  return table;
}

std::string folds_csv(const CvReport& report, const std::vector<std::string>& ids, const io::Metadata& meta) {
  std::ostringstream os;
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
  os << "fold,shape_id,label,predicted,correct,valid,note\n";
  for (const auto& f : report.folds) {
    os << f.index << ',' << (f.index < ids.size() ? ids[f.index] : "") << ',' << f.truth << ',' << f.predicted << ','
       << (f.valid && f.predicted == f.truth ? "true" : "false") << ',' << (f.valid ? "true" : "false") << ','
       << f.note << '\n';
  }
  return os.str();
}

}  // namespace

std::string to_string(EntryFormat format) {
  switch (format) {
    case EntryFormat::contour_csv: return "contour-csv";
    case EntryFormat::obj: return "obj";
    case EntryFormat::shape_csv: return "shape-csv";
  }
  return "unknown";
}

EntryFormat parse_format(const std::string& text) {
  if (text == "contour-csv") return EntryFormat::contour_csv;
  if (text == "obj") return EntryFormat::obj;
  if (text == "shape-csv") return EntryFormat::shape_csv;
  throw InvalidInput("unknown shape format '" + text + "' (expected contour-csv, obj or shape-csv)");
}

DatasetManifest read_manifest(const fs::path& path) {
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::istringstream in(io::read_file(path));
  std::string line;
  std::size_t lineno = 0;
  bool have_dim = false;
  auto fail = [&](const std::string& what) {
    throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "name") {
      m.name = value;
    } else if (key == "ambient_dim") {
      if (value != "2" && value != "3") fail("ambient_dim must be 2 or 3");
      m.ambient_dim = value == "2" ? 2 : 3;
      have_dim = true;
    } else if (key == "shape") {
      const auto t = tokens(value);
      if (t.size() < 3) fail("shape entries need: path format label [steps...]");
      ManifestEntry e;
      e.path = t[0];
      try {
        e.format = parse_format(t[1]);
      } catch (const InvalidInput& err) {
        fail(err.what());
      }
      e.label = t[2];
      for (std::size_t i = 3; i < t.size(); ++i) {
        const std::string& step = t[i];
        try {
          if (step == "center") {
            e.steps.push_back({PreprocessStep::Kind::center, 0.0});
          } else if (step.rfind("scale=", 0) == 0) {
            e.steps.push_back({PreprocessStep::Kind::scale, io::parse_double(step.substr(6))});
          } else if (step.rfind("resample=", 0) == 0) {
            e.steps.push_back({PreprocessStep::Kind::resample, io::parse_double(step.substr(9))});
          } else {
            fail("unknown preprocessing step '" + step + "'");
          }
        } catch (const InvalidInput& err) {
          fail(err.what());
        }
      }
      if (e.format == EntryFormat::obj &&
          std::any_of(e.steps.begin(), e.steps.end(),
                      [](const PreprocessStep& s) { return s.kind == PreprocessStep::Kind::resample; }))
        fail("resample applies to contours only");
      m.entries.push_back(std::move(e));
    } else {
      m.extra.emplace_back(key, value);
    }
  }
  if (m.entries.empty()) throw InvalidInput(path.string() + ": manifest lists no shapes");
  if (!have_dim) {
    const bool any_obj = std::any_of(m.entries.begin(), m.entries.end(),
                                     [](const ManifestEntry& e) { return e.format == EntryFormat::obj; });
    m.ambient_dim = any_obj ? 3 : 2;
  }
  for (const auto& e : m.entries) {
    if (e.format == EntryFormat::contour_csv && m.ambient_dim != 2)
      throw InvalidInput(path.string() + ": contour entry '" + e.path.string() + "' in a 3D manifest");
    if (e.format == EntryFormat::obj && m.ambient_dim != 3)
      throw InvalidInput(path.string() + ": mesh entry '" + e.path.string() + "' in a 2D manifest");
  }
  return m;
}

std::string manifest_text(const DatasetManifest& m) {
  std::ostringstream os;
  os << "name = " << m.name << '\n';
  os << "ambient_dim = " << m.ambient_dim << '\n';
  for (const auto& [k, v] : m.extra) os << k << " = " << v << '\n';
  for (const auto& e : m.entries) {
    os << "shape = " << e.path.generic_string() << ' ' << to_string(e.format) << ' ' << e.label;
    for (const auto& s : e.steps) {
      switch (s.kind) {
        case PreprocessStep::Kind::center: os << " center"; break;
        case PreprocessStep::Kind::scale: os << " scale=" << io::format_double(s.value); break;
        case PreprocessStep::Kind::resample: os << " resample=" << io::format_double(s.value); break;
      }
    }
    os << '\n';
  }
  return os.str();
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  io::write_file_atomic(path, manifest_text(manifest));
}

std::vector<DiscretizedShape> load_dataset(const DatasetManifest& manifest) {
  std::vector<DiscretizedShape> shapes;
  shapes.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    const fs::path full = e.path.is_absolute() ? e.path : manifest.base_dir / e.path;
    const std::string id = e.path.generic_string();
    DiscretizedShape shape;
    try {
      switch (e.format) {
        case EntryFormat::contour_csv: {
          Polyline2D poly = io::read_contour_csv(full);
          if (!poly.closed)
            throw InvalidInput("contour is open; mark it '# closed: true' or repeat the first vertex at the end");
          for (const auto& s : e.steps) {
            if (s.kind == PreprocessStep::Kind::center) poly = center_shape(poly);
            if (s.kind == PreprocessStep::Kind::scale) poly = scale_shape(poly, s.value);
            if (s.kind == PreprocessStep::Kind::resample) poly = resample_contour(poly, static_cast<int>(s.value));
          }
          const bool flipped = orient_ccw(poly);
          shape = discretize_contour(poly, id);
          shape.stats.reoriented = flipped;
          break;
        }
        case EntryFormat::obj: {
          TriMesh3D mesh = io::read_obj(full);
          for (const auto& s : e.steps) {
            if (s.kind == PreprocessStep::Kind::center) mesh = center_shape(mesh);
            if (s.kind == PreprocessStep::Kind::scale) mesh = scale_shape(mesh, s.value);
          }
          shape = discretize_mesh(mesh, id);
          break;
        }
        case EntryFormat::shape_csv:
          if (!e.steps.empty()) throw InvalidInput("preprocessing steps do not apply to shape-csv entries");
          shape = io::read_shape_csv(full);
          break;
      }
    } catch (const InvalidInput& err) {
      throw InvalidInput("shape '" + id + "': " + err.what());
    }
    if (shape.ambient_dim != manifest.ambient_dim)
      throw DimensionMismatch("shape '" + id + "' is " + std::to_string(shape.ambient_dim) +
                              "D but the manifest declares ambient_dim = " + std::to_string(manifest.ambient_dim));
    shape.label = e.label;
    if (shape.stats.dropped > 0)
      std::cerr << "warning: " << id << ": dropped " << shape.stats.dropped << " degenerate element(s)\n";
    shapes.push_back(std::move(shape));
  }
  return shapes;
}

LambdaSpec LambdaSpec::parse(const std::string& text) {
  const std::string t = trim(text);
  if (t == "auto") return {};
  double v = 0.0;
  try {
    v = io::parse_double(t);
  } catch (const InvalidInput&) {
    v = 0.0;
  }
  if (!(v > 0.0 && std::isfinite(v))) throw InvalidInput("lambda must be positive or 'auto', got '" + t + "'");
  return {v};
}

std::string LambdaSpec::str() const { return value ? io::format_double(*value) : "auto"; }

std::vector<Interval> parse_bounds(const std::string& text) {
  std::vector<double> v;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) v.push_back(io::parse_double(item));
  if (v.size() < 2 || v.size() % 2 != 0 || v.size() > 6)
    throw InvalidInput("--bounds expects lo,hi pairs for 1 to 3 axes, got '" + text + "'");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < v.size(); i += 2) out.push_back({v[i], v[i + 1]});
  return out;
}

std::string format_bounds(const std::vector<Interval>& bounds) {
  std::string out;
  for (std::size_t i = 0; i < bounds.size(); ++i)
    out += (i ? "," : "") + io::format_double(bounds[i].lo) + "," + io::format_double(bounds[i].hi);
  return out;
}

PreparedData prepare(const std::vector<DiscretizedShape>& shapes, const std::optional<std::vector<Interval>>& bounds,
                     double delta) {
  if (shapes.empty()) throw InvalidInput("dataset is empty");
  PreparedData data;
  data.shapes = shapes;
  for (const auto& s : shapes) data.labels.push_back(s.label.value_or(""));
  std::vector<Interval> b = bounds ? *bounds : auto_bounds(shapes, delta);
  if (static_cast<int>(b.size()) != shapes.front().ambient_dim)
    throw DimensionMismatch("--bounds has " + std::to_string(b.size()) + " axes but the shapes are " +
                            std::to_string(shapes.front().ambient_dim) + "D");
  data.grid = std::make_shared<const Grid>(make_grid(std::move(b), delta));
  return data;
}

FeaturePipeline::FeaturePipeline(const PreparedData& data, double rank_tol) : data_(data), rank_tol_(rank_tol) {
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw InvalidInput("--rank-tol must lie in (0, 1)");
}

double FeaturePipeline::resolve(const LambdaSpec& spec) const {
  if (spec.value) return *spec.value;
  return default_lambda(data_.shapes);
}

FeaturePipeline::Stage& FeaturePipeline::stage(double lambda) {
  if (stage_ && stage_->lambda == lambda) return *stage_;
  stage_.reset();
  auto s = std::make_unique<Stage>();
  const KernelConfig kernel = KernelConfig::gaussian(lambda);
  s->lambda = lambda;
  s->gram = std::make_shared<const GramMatrix>(currents::gram(data_.grid->points(), kernel));
  s->basis = std::make_unique<SpectralBasis>(eigendecompose(*s->gram, rank_tol_, data_.grid));
  s->samples.reserve(data_.shapes.size());
  for (const auto& shape : data_.shapes) s->samples.push_back(sample_field(shape, *data_.grid, kernel));
  stage_ = std::move(s);
  return *stage_;
}

const SpectralBasis& FeaturePipeline::basis(double lambda) { return *stage(lambda).basis; }
const GramMatrix& FeaturePipeline::gram(double lambda) { return *stage(lambda).gram; }

Matrix FeaturePipeline::features(double lambda, double gamma) {
  Stage& s = stage(lambda);
  const RegridSolver solver(data_.grid, s.gram, gamma);
  std::vector<RegriddedField> fields;
  fields.reserve(data_.shapes.size());
  for (std::size_t k = 0; k < data_.shapes.size(); ++k)
    fields.push_back(solver.solve_samples(s.samples[k], data_.shapes[k].source_id));
  return feature_matrix(fields, *s.basis);
}

std::vector<SweepCell> sweep(const PreparedData& data, const std::vector<LambdaSpec>& lambdas,
                             const std::vector<double>& gammas, double rank_tol, const LdaOptions& lda) {
  if (lambdas.empty()) throw InvalidInput("sweep needs at least one lambda");
  validated_gammas(gammas);
  for (const auto& l : data.labels)
    if (l.empty()) throw InvalidInput("every shape needs a class label for cross-validation");

  FeaturePipeline fp(data, rank_tol);
  std::vector<SweepCell> cells;
  for (const auto& spec : lambdas) {
    double lambda = 0.0;
    std::string stage_error;
    int rank_d = 0;
    try {
      lambda = fp.resolve(spec);
      rank_d = fp.basis(lambda).rank_d;
    } catch (const Error& e) {
      stage_error = e.what();
    }
    for (double gamma : gammas) {
      SweepCell cell{spec, lambda, gamma, rank_d, std::nullopt, stage_error};
      if (stage_error.empty()) {
        try {
          cell.report = loocv(fp.features(lambda, gamma), data.labels, lda);
        } catch (const Error& e) {
          cell.error = e.what();
        }
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

report::TableRow to_row(const SweepCell& cell, const LdaOptions& lda) {
  report::TableRow row;
  row.lambda = cell.lambda;
  row.lambda_mode = cell.spec.is_auto() ? "auto" : "given";
  row.gamma = cell.gamma;
  row.rank_d = cell.rank_d;
  row.epsilon = lda.ridge;
  if (cell.report) {
    row.r = cell.report->rank;
    row.errors = cell.report->misclassified;
    row.total = cell.report->total;
  } else {
    row.status = "error: " + cell.error;
  }
  return row;
}

void run_synth2d(std::uint64_t seed, const fs::path& out, const std::optional<fs::path>& source_dir) {
  const bool traced = source_dir.has_value();
  const auto contours = traced ? synth::traced_contours(*source_dir, seed) : synth::surrogate_contours(seed);
  const std::string mode = traced ? "traced" : "surrogate";

  DatasetManifest manifest;
  manifest.name = "synth2d-" + mode;
  manifest.ambient_dim = 2;
  manifest.extra = {{"mode", mode}, {"seed", std::to_string(seed)}};
  if (traced) manifest.extra.emplace_back("source_dir", source_dir->generic_string());
  for (const auto& c : contours) {
    const fs::path rel = fs::path("contours") / (c.name + ".csv");
    io::write_contour_csv(out / rel, c.poly,
                          {{"name", c.name},
                           {"family", c.family},
                           {"label", c.label},
                           {"enlarged", c.enlarged ? "true" : "false"},
                           {"jitter_scale", io::format_double(c.jitter_scale)},
                           {"mode", mode},
                           {"seed", std::to_string(seed)}});
    manifest.entries.push_back({rel, EntryFormat::contour_csv, c.label, {}});
  }
  write_manifest(out / "manifest.txt", manifest);

  // Ready-to-run configuration reproducing the six-cell-by-two-axis table layout.
  std::ostringstream cfg;
  cfg << "# generated by `currents synth2d --seed " << seed << "`\n";
  cfg << "manifest = \"" << fs::absolute(out / "manifest.txt").lexically_normal().generic_string() << "\"\n";
  cfg << "bounds = \"-175,175,-115,115\"\n";
  cfg << "delta = 5\n";
  cfg << "lambda = [\"1\", \"2\", \"auto\", \"100\"]\n";
  cfg << "gamma = [1e-4, 3e-4, 4e-4]\n";
  cfg << "seed = " << seed << "\n";
  io::write_file_atomic(out / "experiment.cfg", cfg.str());
}

void run_embed(const ExperimentConfig& config) {
  if (config.manifest.empty()) throw InvalidInput("--manifest is required");
  const DatasetManifest manifest = read_manifest(config.manifest);
  const auto shapes = load_dataset(manifest);
  DatasetManifest embedded;
  embedded.name = manifest.name + "-embedded";
  embedded.ambient_dim = manifest.ambient_dim;
  embedded.extra = {{"source_manifest", config.manifest.generic_string()}, {"seed", std::to_string(config.seed)}};
  const io::Metadata meta = describe(config, "embed", nullptr);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "%03zu_", i);
    const fs::path rel = fs::path("shapes") / (prefix + sanitize(shapes[i].source_id) + ".csv");
    io::write_shape_csv(config.out / rel, shapes[i], meta);
    embedded.entries.push_back({rel, EntryFormat::shape_csv, manifest.entries[i].label, {}});
  }
  write_manifest(config.out / "embedded.manifest", embedded);
}

void run_features(const ExperimentConfig& config) {
  require_single(config, "features");
  const PreparedData data = prepare_from_config(config);
  std::optional<GramMatrix> gram;
  const SingleRun run = compute_single(config, data, config.dump_gram ? &gram : nullptr);
  io::Metadata meta = describe(config, "features", data.grid.get());
  add_run_meta(meta, run);
  meta.emplace_back("basis_id", io::hex_id(io::basis_id(*run.basis)));
  io::write_basis(config.out / "basis.bin", *run.basis, meta);
  io::write_feature_csv(config.out / "features.csv", feature_table(data, run.features, meta));
  if (gram) io::write_gram_csv(config.out / "gram.csv", *gram);
}

void run_fit(const ExperimentConfig& config, const std::optional<fs::path>& features_csv) {
  io::ModelFile file;
  if (features_csv) {
    const io::FeatureTable table = io::read_feature_csv(*features_csv);
    file.model = fit_lda(table.values, table.labels, config.lda);
    file.lambda = io::parse_double(io::find_meta(table.meta, "lambda_value", "0"));
    file.gamma = io::parse_double(io::find_meta(table.meta, "gamma_value", "0"));
    const std::string id = io::find_meta(table.meta, "basis_id", "0");
    file.basis_id = std::stoull(id, nullptr, 16);
    file.meta = table.meta;
    file.meta.emplace_back("features_csv", features_csv->generic_string());
  } else {
    require_single(config, "fit");
    const PreparedData data = prepare_from_config(config);
    const SingleRun run = compute_single(config, data);
    file.model = fit_lda(run.features, data.labels, config.lda);
    file.lambda = run.lambda;
    file.gamma = run.gamma;
    file.basis_id = io::basis_id(*run.basis);
    file.meta = describe(config, "fit", data.grid.get());
    add_run_meta(file.meta, run);
    file.meta.emplace_back("basis_id", io::hex_id(file.basis_id));
    io::write_basis(config.out / "basis.bin", *run.basis, file.meta);
    io::write_feature_csv(config.out / "features.csv", feature_table(data, run.features, file.meta));
  }
  file.meta.emplace_back("lda_rank", std::to_string(file.model.rank));
  file.meta.emplace_back("lda_ridge_used", io::format_double(config.lda.ridge));
  io::write_model(config.out / "model.bin", file);
}

void run_predict(const fs::path& model_path, const fs::path& basis_path, const fs::path& manifest_path,
                 const fs::path& out) {
  if (model_path.empty() || basis_path.empty() || manifest_path.empty())
    throw InvalidInput("predict needs --model, --basis and --manifest");
  const io::ModelFile model = io::read_model(model_path);
  const io::LoadedBasis loaded = io::read_basis(basis_path);
  if (model.basis_id != 0 && model.basis_id != loaded.id)
    throw InvalidInput("model " + model_path.string() + " was trained on basis " + io::hex_id(model.basis_id) +
                       " but " + basis_path.string() + " is basis " + io::hex_id(loaded.id));
  const SpectralBasis& basis = loaded.basis;
  const DatasetManifest manifest = read_manifest(manifest_path);
  const auto shapes = load_dataset(manifest);
  for (const auto& s : shapes)
    if (s.ambient_dim != basis.grid->dim())
      throw DimensionMismatch("model was trained on " + std::to_string(basis.grid->dim()) + "D shapes but '" +
                              s.source_id + "' is " + std::to_string(s.ambient_dim) + "D");
  for (const auto& s : shapes) {
    const std::string label = s.label.value_or("?");
    if (label != "?" && std::find(model.model.classes.begin(), model.model.classes.end(), label) ==
                            model.model.classes.end())
      throw InvalidInput("shape '" + s.source_id + "' has label '" + label +
                         "', which is not a class of the model; label unlabeled shapes '?'");
  }

  const auto gram_ptr = std::make_shared<const GramMatrix>(currents::gram(basis.grid->points(), basis.kernel));
  const RegridSolver solver(basis.grid, gram_ptr, model.gamma);
  std::ostringstream os;
  os << "# command: predict\n# model: " << model_path.generic_string() << "\n# basis: " << basis_path.generic_string()
     << "\n# basis_id: " << io::hex_id(loaded.id) << "\n# manifest: " << manifest_path.generic_string()
     << "\n# lambda: " << io::format_double(basis.kernel.lambda()) << "\n# gamma: " << io::format_double(model.gamma)
     << "\n# seed: " << io::find_meta(model.meta, "seed", "unknown") << '\n';
  os << "shape_id,label,predicted";
  for (const auto& c : model.model.classes) os << ",score_" << c;
  os << '\n';
  for (const auto& s : shapes) {
    const FeatureVector fv = features(solver.solve(s), basis);
    const Prediction p = predict(model.model, fv.mu);
    os << s.source_id << ',' << s.label.value_or("") << ',' << p.label;
    for (Eigen::Index c = 0; c < p.scores.size(); ++c) os << ',' << io::format_double(p.scores[c]);
    os << '\n';
  }
  io::write_file_atomic(out / "predictions.csv", os.str());
}

CvReport run_cv(const ExperimentConfig& config, const std::optional<fs::path>& features_csv) {
  CvReport report;
  std::vector<std::string> ids;
  SweepCell cell;
  io::Metadata meta;
  if (features_csv) {
    const io::FeatureTable table = io::read_feature_csv(*features_csv);
    report = loocv(table.values, table.labels, config.lda);
    ids = table.ids;
    const std::string lambda_text = io::find_meta(table.meta, "lambda", "0");
    cell.spec = lambda_text == "auto" ? LambdaSpec{} : LambdaSpec{io::parse_double(io::find_meta(table.meta, "lambda_value", "0"))};
    cell.lambda = io::parse_double(io::find_meta(table.meta, "lambda_value", "0"));
    cell.gamma = io::parse_double(io::find_meta(table.meta, "gamma_value", "0"));
    cell.rank_d = static_cast<int>(io::parse_double(io::find_meta(table.meta, "rank_d", "0")));
    meta = table.meta;
    meta.emplace_back("features_csv", features_csv->generic_string());
    meta.emplace_back("lda_rank_cap_cv", config.lda.rank_cap ? std::to_string(*config.lda.rank_cap) : "none");
    meta.emplace_back("lda_ridge_cv", io::format_double(config.lda.ridge));
  } else {
    require_single(config, "cv");
    const PreparedData data = prepare_from_config(config);
    const auto cells = sweep(data, config.lambdas, config.gammas, config.rank_tol, config.lda);
    cell = cells.front();
    if (!cell.report) throw NumericalFailure("cross-validation failed: " + cell.error);
    report = *cell.report;
    for (const auto& s : data.shapes) ids.push_back(s.source_id);
    meta = describe(config, "cv", data.grid.get());
    meta.emplace_back("lambda_value", io::format_double(cell.lambda));
    meta.emplace_back("gamma_value", io::format_double(cell.gamma));
    meta.emplace_back("rank_d", std::to_string(cell.rank_d));
  }
  cell.report = report;
  const auto row = to_row(cell, config.lda);
  io::write_file_atomic(config.out / "cv_folds.csv", folds_csv(report, ids, meta));
  io::write_file_atomic(config.out / "cv_summary.csv", report::table_csv({row}, meta));
  if (config.svg) io::write_file_atomic(config.out / "cv_summary.svg", report::table_svg({row}, "LOOCV error"));
  return report;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& config) {
  const PreparedData data = prepare_from_config(config);
  const auto cells = sweep(data, config.lambdas, config.gammas, config.rank_tol, config.lda);
  std::vector<report::TableRow> rows;
  for (const auto& c : cells) rows.push_back(to_row(c, config.lda));
  io::Metadata meta = describe(config, "sweep", data.grid.get());
  meta.emplace_back("auto_lambda", io::format_double(default_lambda(data.shapes)));
  io::write_file_atomic(config.out / "sweep.csv", report::table_csv(rows, meta));
  if (config.svg) io::write_file_atomic(config.out / "sweep.svg", report::table_svg(rows, "LOOCV error per (lambda, gamma)"));
  return cells;
}

void run_report(const std::vector<fs::path>& inputs, const fs::path& out, bool svg) {
  if (inputs.empty()) throw InvalidInput("report needs at least one --input table");
  std::vector<report::TableRow> rows;
  io::Metadata meta{{"command", "report"}};
  for (const auto& in : inputs) {
    io::Metadata m;
    const auto r = report::read_table_csv(in, &m);
    rows.insert(rows.end(), r.begin(), r.end());
    meta.emplace_back("input", in.generic_string());
    for (const auto& kv : m)
      if (kv.first == "seed" || kv.first == "manifest") meta.emplace_back(kv.first, kv.second);
  }
  io::write_file_atomic(out / "report.csv", report::table_csv(rows, meta));
  if (svg) io::write_file_atomic(out / "report.svg", report::table_svg(rows, "LOOCV error"));
}

}  // namespace currents::pipeline
