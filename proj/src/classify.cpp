#include "currents/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "currents/error.hpp"

namespace currents {
namespace {

// Eigenpairs of a symmetric matrix, descending.
void sorted_eigen(const Matrix& sym, Vector& values, Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver failed while fitting LDA");
  values = es.eigenvalues().reverse();
  vectors = es.eigenvectors().rowwise().reverse();
}

void fix_signs(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index arg = 0;
    m.col(c).cwiseAbs().maxCoeff(&arg);
    if (m(arg, c) < 0.0) m.col(c) = -m.col(c);
  }
}

// Top principal directions of the centered rows, at most `limit` of them and
// never beyond the numeric rank of the scatter.
Matrix principal_directions(const Matrix& centered, Eigen::Index limit) {
  const Eigen::Index m = centered.rows();
  const Eigen::Index p = centered.cols();
  Vector values;
  Matrix vectors;
  Matrix dirs;
  if (p <= m) {
    sorted_eigen(centered.transpose() * centered, values, vectors);
    const double tol = 1e-12 * std::max(values[0], 0.0) * static_cast<double>(p);
    Eigen::Index keep = 0;
    while (keep < std::min(limit, p) && values[keep] > tol) ++keep;
    dirs = vectors.leftCols(keep);
  } else {
    // Dual form through the m x m Gram matrix of the samples.
    sorted_eigen(centered * centered.transpose(), values, vectors);
    const double tol = 1e-12 * std::max(values[0], 0.0) * static_cast<double>(m);
    Eigen::Index keep = 0;
    while (keep < std::min(limit, m) && values[keep] > tol) ++keep;
    dirs = centered.transpose() * vectors.leftCols(keep);
    for (Eigen::Index c = 0; c < keep; ++c) dirs.col(c) /= std::sqrt(values[c]);
    // One Gram-Schmidt pass restores orthonormality lost to rounding.
    Eigen::HouseholderQR<Matrix> qr(dirs);
    Matrix q = qr.householderQ() * Matrix::Identity(p, keep);
    for (Eigen::Index c = 0; c < keep; ++c)
      if (q.col(c).dot(dirs.col(c)) < 0.0) q.col(c) = -q.col(c);
    dirs = std::move(q);
  }
  fix_signs(dirs);
  return dirs;
}

}  // namespace

LdaModel fit_lda(const Matrix& features, std::span<const std::string> labels, const LdaOptions& options) {
  const Eigen::Index m = features.rows();
  const Eigen::Index p = features.cols();
  if (static_cast<std::size_t>(m) != labels.size())
    throw InvalidInput("fit_lda: " + std::to_string(m) + " feature rows but " + std::to_string(labels.size()) +
                       " labels");
  if (m < 2) throw InvalidInput("fit_lda needs at least 2 samples");
  if (p < 1) throw InvalidInput("fit_lda needs at least one feature");
  if (!features.allFinite()) throw InvalidInput("fit_lda: features contain non-finite values");
  if (options.ridge < 0.0 || !std::isfinite(options.ridge)) throw InvalidInput("LDA ridge must be >= 0");
  if (options.rank_cap && *options.rank_cap < 1) throw InvalidInput("LDA rank cap must be >= 1");

  std::map<std::string, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (labels[static_cast<std::size_t>(i)].empty()) throw InvalidInput("fit_lda: empty label");
    members[labels[static_cast<std::size_t>(i)]].push_back(i);
  }
  const auto g = static_cast<Eigen::Index>(members.size());
  if (g < 2) throw InvalidInput("fit_lda needs at least 2 classes");
  if (m - g < 1)
    throw NumericalFailure("fit_lda: every class has a single sample, the pooled covariance has no degrees of freedom");

  LdaModel model;
  model.ridge = options.ridge;
  model.priors.resize(g);
  model.classes.reserve(static_cast<std::size_t>(g));
  {
    Eigen::Index c = 0;
    for (const auto& [label, idx] : members) {
      model.classes.push_back(label);
      model.priors[c++] = options.uniform_priors ? 1.0 / static_cast<double>(g)
                                                 : static_cast<double>(idx.size()) / static_cast<double>(m);
    }
  }

  model.center = features.colwise().mean().transpose();
  const Matrix centered = features.rowwise() - model.center.transpose();
  Eigen::Index limit = std::min(p, m - g);
  if (options.rank_cap) limit = std::min<Eigen::Index>(limit, *options.rank_cap);
  model.projection = principal_directions(centered, limit);
  const Eigen::Index r = model.projection.cols();
  if (r < 1) throw NumericalFailure("fit_lda: training features have zero total scatter");
  model.rank = static_cast<int>(r);

  const Matrix z = centered * model.projection;
  model.means = Matrix::Zero(g, r);
  Matrix within = Matrix::Zero(r, r);
  {
    Eigen::Index c = 0;
    for (const auto& [label, idx] : members) {
      Vector mean = Vector::Zero(r);
      for (Eigen::Index i : idx) mean += z.row(i).transpose();
      mean /= static_cast<double>(idx.size());
      model.means.row(c) = mean.transpose();
      for (Eigen::Index i : idx) {
        const Vector d = z.row(i).transpose() - mean;
        within.noalias() += d * d.transpose();
      }
      ++c;
    }
  }
  within /= static_cast<double>(m - g);

  const double trace = within.trace();
  model.ridge_value = options.ridge * trace / static_cast<double>(r);
  within.diagonal().array() += model.ridge_value;

  Eigen::LLT<Matrix> llt(within);
  bool singular = !(trace > 0.0) || llt.info() != Eigen::Success;
  if (!singular) {
    const Vector pivots = Matrix(llt.matrixL()).diagonal();
    const double lo = pivots.minCoeff();
    const double hi = pivots.maxCoeff();
    singular = !(lo > 0.0) || lo * lo <= 1e-14 * hi * hi;
  }
  if (singular)
    throw NumericalFailure(
        "pooled within-class covariance is singular (e.g. classes made only of duplicated samples); "
        "enable regularization with a positive LDA ridge (--lda-ridge) or lower the rank cap (--lda-rank-cap)");
  model.cov_factor = llt.matrixL();
  return model;
}

void validate(const LdaModel& model) {
  const auto g = static_cast<Eigen::Index>(model.classes.size());
  const Eigen::Index r = model.rank;
  if (g < 2) throw InvalidInput("LDA model needs at least 2 classes");
  if (model.priors.size() != g || (model.priors.array() <= 0.0).any() ||
      std::abs(model.priors.sum() - 1.0) > 1e-12)
    throw InvalidInput("LDA model priors must be positive and sum to 1");
  if (r < 1 || model.projection.rows() != model.center.size() || model.projection.cols() != r ||
      model.means.rows() != g || model.means.cols() != r || model.cov_factor.rows() != r ||
      model.cov_factor.cols() != r)
    throw InvalidInput("LDA model arrays have inconsistent shapes");
  if (!model.means.allFinite() || !model.center.allFinite() || !model.projection.allFinite() ||
      !model.cov_factor.allFinite() || !(model.cov_factor.diagonal().array() > 0.0).all())
    throw InvalidInput("LDA model contains non-finite values or a non-positive-definite covariance factor");
  if (!std::is_sorted(model.classes.begin(), model.classes.end()) ||
      std::adjacent_find(model.classes.begin(), model.classes.end()) != model.classes.end())
    throw InvalidInput("LDA model classes must be unique and sorted");
}

Prediction predict(const LdaModel& model, const Vector& x) {
  if (x.size() != model.center.size())
    throw DimensionMismatch("feature vector has dimension " + std::to_string(x.size()) + " but the model expects " +
                            std::to_string(model.center.size()));
  const Vector z = model.projection.transpose() * (x - model.center);
  const auto llt_solve = [&](const Vector& b) {
    const Vector y = model.cov_factor.triangularView<Eigen::Lower>().solve(b);
    return Vector(model.cov_factor.transpose().triangularView<Eigen::Upper>().solve(y));
  };
  const Vector sz = llt_solve(z);

  Prediction out;
  const auto g = static_cast<Eigen::Index>(model.classes.size());
  out.scores.resize(g);
  for (Eigen::Index c = 0; c < g; ++c) {
    const Vector mean = model.means.row(c).transpose();
    const Vector sm = llt_solve(mean);
    out.scores[c] = sz.dot(mean) - 0.5 * mean.dot(sm) + std::log(model.priors[c]);
  }
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < g; ++c)
    if (out.scores[c] > out.scores[best]) best = c;
  out.class_index = static_cast<std::size_t>(best);
  out.label = model.classes[out.class_index];
  return out;
}

std::vector<Prediction> predict(const LdaModel& model, const Matrix& rows) {
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.push_back(predict(model, Vector(rows.row(i).transpose())));
  return out;
}

CvReport loocv(const Matrix& features, std::span<const std::string> labels, const LdaOptions& options) {
  const Eigen::Index m = features.rows();
  if (static_cast<std::size_t>(m) != labels.size())
    throw InvalidInput("loocv: " + std::to_string(m) + " feature rows but " + std::to_string(labels.size()) +
                       " labels");
  if (m < 2) throw InvalidInput("loocv needs at least 2 samples");

  CvReport report;
  report.total = static_cast<std::size_t>(m);
  report.ridge = options.ridge;
  Matrix train(m - 1, features.cols());
  std::vector<std::string> train_labels(static_cast<std::size_t>(m - 1));
  for (Eigen::Index k = 0; k < m; ++k) {
    FoldResult fold;
    fold.index = static_cast<std::size_t>(k);
    fold.truth = labels[static_cast<std::size_t>(k)];
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == k) continue;
      train.row(row) = features.row(i);
      train_labels[static_cast<std::size_t>(row)] = labels[static_cast<std::size_t>(i)];
      ++row;
    }
    std::vector<std::string> distinct = train_labels;
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2) {
      fold.valid = false;
      fold.note = "training fold has fewer than 2 classes";
    } else {
      const LdaModel model = fit_lda(train, train_labels, options);
      report.rank = std::max(report.rank, model.rank);
      fold.predicted = predict(model, Vector(features.row(k).transpose())).label;
      if (std::find(model.classes.begin(), model.classes.end(), fold.truth) == model.classes.end())
        fold.note = "true class absent from training fold";
    }
    if (!fold.valid) ++report.invalid_folds;
    if (!fold.valid || fold.predicted != fold.truth) ++report.misclassified;
    report.folds.push_back(std::move(fold));
  }
  report.error_rate = static_cast<double>(report.misclassified) / static_cast<double>(report.total);
  return report;
}

}  // namespace currents
