#pragma once

// Gaussian equal-covariance linear discriminant analysis with a fixed
// regularization pipeline, and leave-one-out cross-validation.
//
// Feature dimensions (n*d) routinely exceed the sample count, so the pooled
// within-class covariance is singular as estimated. Fitting therefore
//   1. projects the centered training features onto the top r principal
//      directions of the total scatter, r = min(p, m - g, rank_cap), and
//   2. adds a ridge eps * trace(S_w) / r * I to the pooled covariance S_w.
// The discriminant is
//   delta_g(z) = z' S^-1 m_g - m_g' S^-1 m_g / 2 + log pi_g
// on the projected coordinates z; ties go to the lowest class index.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "currents/types.hpp"

namespace currents {

inline constexpr double kDefaultLdaRidge = 1e-8;

struct LdaOptions {
  std::optional<int> rank_cap;  // upper bound on the projection rank r
  double ridge = kDefaultLdaRidge;
  bool uniform_priors = false;
};

struct LdaModel {
  std::vector<std::string> classes;  // lexicographic
  Vector priors;                     // one per class, sums to 1
  Vector center;                     // p, mean of the training features
  Matrix projection;                 // p x r, orthonormal columns
  Matrix means;                      // g x r, class means in projected space
  Matrix cov_factor;                 // r x r lower Cholesky factor of the regularized pooled covariance
  int rank = 0;                      // r
  double ridge = 0.0;                // eps
  double ridge_value = 0.0;          // eps * trace(S_w) / r actually added

  int dim() const { return static_cast<int>(center.size()); }
};

struct Prediction {
  std::string label;
  std::size_t class_index = 0;
  Vector scores;  // delta_g per class, in model.classes order
};

LdaModel fit_lda(const Matrix& features, std::span<const std::string> labels, const LdaOptions& options = {});

/// Throws InvalidInput when the model breaks its invariants.
void validate(const LdaModel& model);

Prediction predict(const LdaModel& model, const Vector& x);
std::vector<Prediction> predict(const LdaModel& model, const Matrix& rows);

struct FoldResult {
  std::size_t index = 0;
  std::string truth;
  std::string predicted;  // empty when the fold is invalid
  bool valid = true;
  std::string note;
};

struct CvReport {
  std::size_t total = 0;
  std::size_t misclassified = 0;  // invalid folds count as misclassified
  double error_rate = 0.0;
  std::vector<FoldResult> folds;
  int rank = 0;  // largest projection rank used by any valid fold
  double ridge = 0.0;
  std::size_t invalid_folds = 0;
};

/// Each sample is predicted by a model fit on the m-1 others. A fold whose
/// training set has fewer than two classes is flagged invalid.
CvReport loocv(const Matrix& features, std::span<const std::string> labels, const LdaOptions& options = {});

}  // namespace currents
