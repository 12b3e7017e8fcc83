#pragma once

// File formats.
//
// Contour CSV: one "x,y" vertex per line. Lines starting with '#' are
// comments; "# closed: true" marks the contour closed, as does an exact
// repetition of the first vertex at the end. An optional "x,y" header row is
// skipped.
//
// OBJ subset: "v x y z" and triangular "f i j k" records (1-based, negative
// indices relative, "i/t/n" forms accepted). Other records are ignored;
// faces with more than three vertices are rejected.
//
// Shape CSV: '#' metadata lines followed by a header "x_1,..,x_n,tau_1,..,tau_n"
// and one atom per line.
//
// Feature CSV: '#' metadata lines, header "shape_id,label,mu_1,..,mu_p",
// one shape per line. Numbers use the shortest round-trip representation, so
// a read-back matrix is bitwise identical.
//
// Basis container (little-endian, 64-bit IEEE doubles):
//   char[8]  "CURBASIS"
//   u32      version (1)
//   u32      metadata length L, then L bytes of "key=value\n" text
//   u32      dim n
//   f64[2n]  bounds (lo, hi per axis)
//   f64      delta, lambda, rank_tol
//   u64      N, rank_d, stored columns k (== rank_d)
//   f64[N]   eigenvalues, descending
//   f64[N*k] leading eigenvectors, column-major
//
// Model container:
//   char[8]  "CURLDAMD"
//   u32      version (1)
//   u32      metadata length L, then L bytes
//   u64      basis id (FNV-1a of the basis payload, 0 if none)
//   f64      gamma, lambda
//   u64      p, r, g
//   g x (u32 length, bytes)  class labels
//   f64[g]   priors
//   f64[p]   center
//   f64[p*r] projection, column-major
//   f64[g*r] class means, column-major
//   f64[r*r] lower Cholesky factor, column-major
//   f64      ridge eps, ridge value

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "currents/classify.hpp"
#include "currents/geometry.hpp"
#include "currents/kernel.hpp"
#include "currents/spectral.hpp"

namespace currents::io {

namespace fs = std::filesystem;

/// Ordered key/value pairs written into every output file.
using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string format_double(double v);
double parse_double(std::string_view text);
std::string find_meta(const Metadata& meta, std::string_view key, std::string_view fallback = {});

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

Polyline2D read_contour_csv(const fs::path& path);
void write_contour_csv(const fs::path& path, const Polyline2D& poly, const Metadata& meta = {});

TriMesh3D read_obj(const fs::path& path);
TriMesh3D parse_obj(std::string_view text);
void write_obj(const fs::path& path, const TriMesh3D& mesh, const Metadata& meta = {});

DiscretizedShape read_shape_csv(const fs::path& path);
void write_shape_csv(const fs::path& path, const DiscretizedShape& shape, const Metadata& meta = {});

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  Matrix values;
  Metadata meta;
};

void write_feature_csv(const fs::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(const fs::path& path);

/// Row-major CSV dump with a "# gram rows=N cols=N lambda=.." header.
void write_gram_csv(const fs::path& path, const GramMatrix& gram);

std::uint64_t basis_id(const SpectralBasis& basis);
void write_basis(const fs::path& path, const SpectralBasis& basis, const Metadata& meta = {});

struct LoadedBasis {
  SpectralBasis basis;
  std::uint64_t id = 0;
  Metadata meta;
};
LoadedBasis read_basis(const fs::path& path);

struct ModelFile {
  LdaModel model;
  std::uint64_t basis_id = 0;
  double gamma = 0.0;
  double lambda = 0.0;
  Metadata meta;
};
void write_model(const fs::path& path, const ModelFile& file);
ModelFile read_model(const fs::path& path);

std::string hex_id(std::uint64_t id);

}  // namespace currents::io
