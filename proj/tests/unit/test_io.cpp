#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "currents/error.hpp"
#include "currents/io.hpp"
#include "currents/synth.hpp"
#include "lda_oracle.hpp"
#include "support.hpp"

using namespace currents;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "currents_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_CASE("double formatting round-trips exactly") {
  std::mt19937_64 rng(91);
  for (int i = 0; i < 2000; ++i) {
    double v;
    const std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::parse_double(" 2.5 ") == 2.5);
  CHECK_THROWS_AS(io::parse_double("abc"), InvalidInput);
  CHECK_THROWS_AS(io::parse_double("1.5x"), InvalidInput);
  CHECK_THROWS_AS(io::parse_double(""), InvalidInput);
}

TEST_CASE("contour csv: closed flag, closing duplicate, header") {
  const fs::path a = scratch("flag.csv");
  write_text(a, "# closed: true\nx,y\n0,0\n1,0\n1,1\n");
  const auto pa = io::read_contour_csv(a);
  CHECK(pa.closed);
  CHECK(pa.vertices.size() == 3);

  const fs::path b = scratch("dup.csv");
  write_text(b, "0,0\n1,0\n1,1\n0,0\n");
  CHECK(io::read_contour_csv(b).closed);

  const fs::path c = scratch("open.csv");
  write_text(c, "0,0\n1,0\n1,1\n");
  CHECK_FALSE(io::read_contour_csv(c).closed);

  const fs::path bad = scratch("bad.csv");
  write_text(bad, "0,0\n1,zz\n");
  CHECK_THROWS_WITH_AS(io::read_contour_csv(bad), doctest::Contains("bad.csv:2"), IoError);
  CHECK_THROWS_AS(io::read_contour_csv(scratch("missing.csv")), IoError);
}

TEST_CASE("contour csv round trip is bitwise") {
  std::mt19937_64 rng(92);
  const Polyline2D p = testing_support::random_polygon(rng, 57, 33.3);
  const fs::path f = scratch("round.csv");
  io::write_contour_csv(f, p, {{"seed", "92"}});
  const auto q = io::read_contour_csv(f);
  REQUIRE(q.vertices.size() == p.vertices.size());
  for (std::size_t i = 0; i < p.vertices.size(); ++i) CHECK(q.vertices[i] == p.vertices[i]);
  CHECK(q.closed);
}

TEST_CASE("obj parsing subset") {
  const auto m = io::parse_obj(
      "# tetra\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nvn 0 0 1\nf 1 3 2\nf 1/1/1 2/2/2 4/4/4\nf -4 -1 -2\nf 2 3 4\n");
  CHECK(m.vertices.size() == 4);
  REQUIRE(m.triangles.size() == 4);
  CHECK(m.triangles[0] == std::array<int, 3>{0, 2, 1});
  CHECK(m.triangles[1] == std::array<int, 3>{0, 1, 3});
  CHECK(m.triangles[2] == std::array<int, 3>{0, 3, 2});
  CHECK(tau_sum(discretize_mesh(m)).norm() == 0.0);
  CHECK_THROWS_WITH_AS(io::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n"),
                       doctest::Contains("triangular"), IoError);
  CHECK_THROWS_WITH_AS(io::parse_obj("v 0 0 0\nf 1 2 3\n"), doctest::Contains("line 2"), IoError);
  CHECK_THROWS_WITH_AS(io::parse_obj("v 0 0 0\nf 1 1 -2\n"), doctest::Contains("vertex"), IoError);
  CHECK_THROWS_AS(io::parse_obj("v 0 0\n"), IoError);
}

TEST_CASE("obj round trip") {
  const TriMesh3D m = synth::ellipsoid({3, 2, 1.5}, 2);
  const fs::path f = scratch("ell.obj");
  io::write_obj(f, m, {{"name", "ell"}});
  const auto r = io::read_obj(f);
  REQUIRE(r.vertices.size() == m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK(r.vertices[i] == m.vertices[i]);
  CHECK(r.triangles == m.triangles);
}

TEST_CASE("shape csv round trip keeps values, id, label and stats") {
  std::mt19937_64 rng(93);
  for (int dim : {2, 3}) {
    auto s = testing_support::random_shape(rng, dim, 17, 40.0);
    s.source_id = "shapes/a b.csv";
    s.label = "class-x";
    s.stats.dropped = 2;
    s.stats.reoriented = true;
    const fs::path f = scratch("shape" + std::to_string(dim) + ".csv");
    io::write_shape_csv(f, s, {{"seed", "1"}});
    const auto r = io::read_shape_csv(f);
    CHECK(r.ambient_dim == dim);
    CHECK(r.centers == s.centers);
    CHECK(r.taus == s.taus);
    CHECK(r.source_id == s.source_id);
    CHECK(r.label == s.label);
    CHECK(r.stats.dropped == 2);
    CHECK(r.stats.reoriented);
    const std::string text = io::read_file(f);
    CHECK(text.find(dim == 2 ? "x_1,x_2,tau_1,tau_2" : "x_1,x_2,x_3,tau_1,tau_2,tau_3") != std::string::npos);
  }
}

TEST_CASE("feature csv round trip is bitwise") {
  std::mt19937_64 rng(94);
  io::FeatureTable t;
  t.values = Matrix::Random(5, 7) * 1e3;
  t.values(2, 3) = 1e-300;
  for (int i = 0; i < 5; ++i) {
    t.ids.push_back("id" + std::to_string(i));
    t.labels.push_back(i % 2 ? "odd" : "even");
  }
  t.meta = {{"lambda", "auto"}, {"seed", "94"}};
  const fs::path f = scratch("features.csv");
  io::write_feature_csv(f, t);
  const auto r = io::read_feature_csv(f);
  CHECK(r.values == t.values);
  CHECK(r.ids == t.ids);
  CHECK(r.labels == t.labels);
  CHECK(io::find_meta(r.meta, "seed") == "94");
  CHECK(io::find_meta(r.meta, "nope", "fallback") == "fallback");
}

TEST_CASE("basis container round trip and identifier") {
  auto grid = std::make_shared<const Grid>(make_grid({{-2, 2}, {-1, 1}}, 0.5));
  const auto basis = eigendecompose(gram(grid->points(), KernelConfig::gaussian(0.7)), 1e-10, grid);
  const fs::path f = scratch("basis.bin");
  io::write_basis(f, basis, {{"seed", "3"}});
  const auto loaded = io::read_basis(f);
  CHECK(loaded.id == io::basis_id(basis));
  CHECK(loaded.basis.rank_d == basis.rank_d);
  CHECK(loaded.basis.eigvals == basis.eigvals);
  CHECK(loaded.basis.eigvecs == basis.eigvecs.leftCols(basis.rank_d));
  CHECK(loaded.basis.kernel == basis.kernel);
  CHECK(loaded.basis.rank_tol == basis.rank_tol);
  REQUIRE(loaded.basis.grid);
  CHECK(loaded.basis.grid->spec() == grid->spec());
  CHECK(loaded.basis.grid->points() == grid->points());
  CHECK(io::find_meta(loaded.meta, "seed") == "3");

  const auto other = eigendecompose(gram(grid->points(), KernelConfig::gaussian(0.8)), 1e-10, grid);
  CHECK(io::basis_id(other) != io::basis_id(basis));
  CHECK(io::hex_id(0x1f).size() == 16);

  // Truncated and corrupted files are rejected.
  const std::string bytes = io::read_file(f);
  write_text(scratch("short.bin"), bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(io::read_basis(scratch("short.bin")), IoError);
  std::string wrong = bytes;
  wrong[0] = 'X';
  write_text(scratch("magic.bin"), wrong);
  CHECK_THROWS_AS(io::read_basis(scratch("magic.bin")), IoError);
}

TEST_CASE("model container round trip reproduces predictions") {
  std::mt19937_64 rng(95);
  const auto inst = lda_oracle::random_instance(rng, 30, 6, 3);
  io::ModelFile file;
  file.model = fit_lda(inst.X, inst.labels);
  file.basis_id = 0xabcdef0123456789ULL;
  file.gamma = 1e-4;
  file.lambda = 67.5;
  file.meta = {{"seed", "95"}};
  const fs::path f = scratch("model.bin");
  io::write_model(f, file);
  const auto r = io::read_model(f);
  CHECK(r.basis_id == file.basis_id);
  CHECK(r.gamma == file.gamma);
  CHECK(r.lambda == file.lambda);
  CHECK(r.model.classes == file.model.classes);
  CHECK(r.model.priors == file.model.priors);
  CHECK(r.model.cov_factor == file.model.cov_factor);
  for (Eigen::Index i = 0; i < inst.X.rows(); ++i) {
    const Vector x = inst.X.row(i).transpose();
    CHECK(predict(r.model, x).scores == predict(file.model, x).scores);
  }
  const std::string bytes = io::read_file(f);
  write_text(scratch("model_short.bin"), bytes.substr(0, bytes.size() - 9));
  CHECK_THROWS_AS(io::read_model(scratch("model_short.bin")), IoError);
  CHECK_THROWS_AS(io::read_model(scratch("basis.bin")), IoError);
}

TEST_CASE("atomic write leaves no temporary behind and creates directories") {
  const fs::path dir = scratch("nested") / "deeper";
  fs::remove_all(scratch("nested"));
  io::write_file_atomic(dir / "out.txt", "hello\n");
  CHECK(io::read_file(dir / "out.txt") == "hello\n");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("gram csv dump") {
  PointMatrix p(3, 1);
  p << 0, 1, 2;
  const fs::path f = scratch("gram.csv");
  io::write_gram_csv(f, gram(p, KernelConfig::gaussian(1.0)));
  const std::string text = io::read_file(f);
  CHECK(text.rfind("# gram", 0) == 0);
  CHECK(text.find("rows=3") != std::string::npos);
}
