#include "currents/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "currents/error.hpp"

namespace currents::io {

static_assert(std::endian::native == std::endian::little, "binary containers assume a little-endian host");

namespace {

constexpr std::uint32_t kContainerVersion = 1;
constexpr std::string_view kBasisMagic = "CURBASIS";
constexpr std::string_view kModelMagic = "CURLDAMD";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// "# key: value" comment lines.
bool parse_meta_line(std::string_view line, Metadata& meta) {
  line = trim(line);
  if (line.empty() || line.front() != '#') return false;
  line = trim(line.substr(1));
  const auto colon = line.find(':');
  if (colon != std::string_view::npos)
    meta.emplace_back(std::string(trim(line.substr(0, colon))), std::string(trim(line.substr(colon + 1))));
  return true;
}

void put_meta(std::ostringstream& os, const Metadata& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
}

bool looks_numeric(std::string_view s) {
  double v;
  s = trim(s);
  const auto* begin = s.data();
  if (!s.empty() && s.front() == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t line, const std::string& what) {
  throw IoError(path.string() + ":" + std::to_string(line) + ": " + what);
}

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  template <class T>
  void put(T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf_.append(raw, sizeof(T));
  }
  void doubles(const double* p, std::size_t n) { buf_.append(reinterpret_cast<const char*>(p), n * sizeof(double)); }
  void str(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, fs::path path) : data_(data), path_(std::move(path)) {}
  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void doubles(double* out, std::size_t n) {
    if (n > (data_.size() - pos_) / sizeof(double)) truncated();
    std::memcpy(out, data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  std::string str() {
    const auto n = get<std::uint32_t>();
    return std::string(bytes(n));
  }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (n > data_.size() - pos_) truncated();
  }
  [[noreturn]] void truncated() { throw IoError(path_.string() + ": container is truncated or corrupt"); }

  std::string_view data_;
  std::size_t pos_ = 0;
  fs::path path_;
};

std::string meta_blob(const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += k + "=" + v + "\n";
  return out;
}

Metadata parse_meta_blob(std::string_view blob) {
  Metadata meta;
  for (auto line : lines_of(blob)) {
    const auto eq = line.find('=');
    if (eq != std::string_view::npos) meta.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  return meta;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string basis_payload(const SpectralBasis& basis) {
  if (!basis.grid) throw InvalidInput("only a basis built on a grid can be persisted");
  const auto n = static_cast<std::size_t>(basis.size());
  const auto k = static_cast<std::size_t>(basis.rank_d);
  if (basis.eigvecs.cols() < static_cast<Eigen::Index>(k)) throw InvalidInput("basis stores fewer vectors than its rank");
  ByteWriter w;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(basis.grid->dim()));
  for (const auto& iv : basis.grid->bounds()) {
    w.put(iv.lo);
    w.put(iv.hi);
  }
  w.put(basis.grid->delta());
  w.put(basis.kernel.lambda());
  w.put(basis.rank_tol);
  w.put<std::uint64_t>(n);
  w.put<std::uint64_t>(k);
  w.put<std::uint64_t>(k);
  w.doubles(basis.eigvals.data(), n);
  w.doubles(basis.eigvecs.data(), n * k);
  return w.data();
}

void check_magic(ByteReader& r, std::string_view magic, const fs::path& path) {
  if (r.bytes(magic.size()) != magic) throw IoError(path.string() + ": not a " + std::string(magic) + " container");
  const auto version = r.get<std::uint32_t>();
  if (version != kContainerVersion)
    throw IoError(path.string() + ": unsupported container version " + std::to_string(version));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw InvalidInput("not a number: '" + std::string(text) + "'");
  return v;
}

std::string find_meta(const Metadata& meta, std::string_view key, std::string_view fallback) {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::string(fallback);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Polyline2D read_contour_csv(const fs::path& path) {
  const std::string text = read_file(path);
  Polyline2D poly;
  poly.closed = false;
  bool closed_flag = false;
  std::size_t lineno = 0;
  for (auto line : lines_of(text)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      Metadata meta;
      parse_meta_line(line, meta);
      if (!meta.empty() && meta.front().first == "closed")
        closed_flag = meta.front().second == "true" || meta.front().second == "1";
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 2) fail_at(path, lineno, "expected 'x,y'");
    if (poly.vertices.empty() && !looks_numeric(fields[0])) continue;  // header row
    try {
      poly.vertices.emplace_back(parse_double(fields[0]), parse_double(fields[1]));
    } catch (const InvalidInput& e) {
      fail_at(path, lineno, e.what());
    }
  }
  poly.closed = closed_flag || has_closing_duplicate(poly);
  return poly;
}

void write_contour_csv(const fs::path& path, const Polyline2D& poly, const Metadata& meta) {
  std::ostringstream os;
  os << "# closed: " << (poly.closed ? "true" : "false") << '\n';
  put_meta(os, meta);
  os << "x,y\n";
  for (const auto& v : poly.vertices) os << format_double(v.x()) << ',' << format_double(v.y()) << '\n';
  write_file_atomic(path, os.str());
}

TriMesh3D parse_obj(std::string_view text) {
  TriMesh3D mesh;
  std::vector<std::size_t> face_lines;
  std::size_t lineno = 0;
  for (auto line : lines_of(text)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls{std::string(line)};
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      std::string xs, ys, zs;
      ls >> xs >> ys >> zs;
      try {
        mesh.vertices.emplace_back(parse_double(xs), parse_double(ys), parse_double(zs));
      } catch (const InvalidInput& e) {
        throw IoError("OBJ line " + std::to_string(lineno) + ": " + e.what());
      }
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        int v = 0;
        auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), v);
        if (ec != std::errc() || ptr != head.data() + head.size() || v == 0)
          throw IoError("OBJ line " + std::to_string(lineno) + ": bad face index '" + tok + "'");
        idx.push_back(v > 0 ? v - 1 : static_cast<int>(mesh.vertices.size()) + v);
      }
      if (idx.size() != 3)
        throw IoError("OBJ line " + std::to_string(lineno) + ": only triangular faces are supported (got " +
                      std::to_string(idx.size()) + " vertices)");
      mesh.triangles.push_back({idx[0], idx[1], idx[2]});
      face_lines.push_back(lineno);
    }
  }
  const int nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= nv)
        throw IoError("OBJ line " + std::to_string(face_lines[t]) + ": face refers to vertex " +
                      std::to_string(v + 1) + " but the file has " + std::to_string(nv) + " vertices");
  return mesh;
}

TriMesh3D read_obj(const fs::path& path) {
  try {
    return parse_obj(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_obj(const fs::path& path, const TriMesh3D& mesh, const Metadata& meta) {
  std::ostringstream os;
  put_meta(os, meta);
  for (const auto& v : mesh.vertices)
    os << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  write_file_atomic(path, os.str());
}

DiscretizedShape read_shape_csv(const fs::path& path) {
  const std::string text = read_file(path);
  Metadata meta;
  std::vector<std::vector<double>> rows;
  int dim = 0;
  std::size_t lineno = 0;
  for (auto line : lines_of(text)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (parse_meta_line(line, meta)) continue;
    const auto fields = split(line, ',');
    if (dim == 0) {
      if (fields.size() != 4 && fields.size() != 6) fail_at(path, lineno, "expected 4 or 6 columns");
      dim = static_cast<int>(fields.size() / 2);
      if (!looks_numeric(fields[0])) continue;
    }
    if (static_cast<int>(fields.size()) != 2 * dim) fail_at(path, lineno, "column count changed");
    std::vector<double> row;
    for (auto f : fields) {
      try {
        row.push_back(parse_double(f));
      } catch (const InvalidInput& e) {
        fail_at(path, lineno, e.what());
      }
    }
    rows.push_back(std::move(row));
  }
  DiscretizedShape shape;
  shape.ambient_dim = dim;
  shape.source_id = find_meta(meta, "source_id", path.stem().string());
  if (auto label = find_meta(meta, "label"); !label.empty()) shape.label = label;
  if (auto dropped = find_meta(meta, "dropped"); !dropped.empty())
    shape.stats.dropped = static_cast<std::size_t>(parse_double(dropped));
  shape.stats.reoriented = find_meta(meta, "reoriented") == "true";
  shape.centers.resize(static_cast<Eigen::Index>(rows.size()), dim);
  shape.taus.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int a = 0; a < dim; ++a) {
      shape.centers(static_cast<Eigen::Index>(i), a) = rows[i][static_cast<std::size_t>(a)];
      shape.taus(static_cast<Eigen::Index>(i), a) = rows[i][static_cast<std::size_t>(dim + a)];
    }
  validate(shape);
  return shape;
}

void write_shape_csv(const fs::path& path, const DiscretizedShape& shape, const Metadata& meta) {
  std::ostringstream os;
  os << "# source_id: " << shape.source_id << '\n';
  if (shape.label) os << "# label: " << *shape.label << '\n';
  os << "# ambient_dim: " << shape.ambient_dim << '\n';
  os << "# dropped: " << shape.stats.dropped << '\n';
  os << "# reoriented: " << (shape.stats.reoriented ? "true" : "false") << '\n';
  put_meta(os, meta);
  for (int a = 0; a < shape.ambient_dim; ++a) os << (a ? "," : "") << "x_" << a + 1;
  for (int a = 0; a < shape.ambient_dim; ++a) os << ",tau_" << a + 1;
  os << '\n';
  for (Eigen::Index i = 0; i < shape.centers.rows(); ++i) {
    for (int a = 0; a < shape.ambient_dim; ++a) os << (a ? "," : "") << format_double(shape.centers(i, a));
    for (int a = 0; a < shape.ambient_dim; ++a) os << ',' << format_double(shape.taus(i, a));
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

void write_feature_csv(const fs::path& path, const FeatureTable& table) {
  const auto m = static_cast<std::size_t>(table.values.rows());
  if (table.ids.size() != m || table.labels.size() != m) throw InvalidInput("feature table columns are inconsistent");
  std::ostringstream os;
  put_meta(os, table.meta);
  os << "shape_id,label";
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) os << ",mu_" << c + 1;
  os << '\n';
  for (std::size_t i = 0; i < m; ++i) {
    os << table.ids[i] << ',' << table.labels[i];
    for (Eigen::Index c = 0; c < table.values.cols(); ++c)
      os << ',' << format_double(table.values(static_cast<Eigen::Index>(i), c));
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

FeatureTable read_feature_csv(const fs::path& path) {
  const std::string text = read_file(path);
  FeatureTable table;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  std::size_t lineno = 0;
  std::size_t width = 0;
  for (auto line : lines_of(text)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (parse_meta_line(line, table.meta)) continue;
    const auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "shape_id") fail_at(path, lineno, "missing feature header");
      width = fields.size() - 2;
      header_seen = true;
      continue;
    }
    if (fields.size() != width + 2) fail_at(path, lineno, "wrong number of columns");
    table.ids.emplace_back(fields[0]);
    table.labels.emplace_back(fields[1]);
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      try {
        row.push_back(parse_double(fields[c + 2]));
      } catch (const InvalidInput& e) {
        fail_at(path, lineno, e.what());
      }
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw IoError(path.string() + ": empty feature file");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return table;
}

void write_gram_csv(const fs::path& path, const GramMatrix& gram) {
  std::ostringstream os;
  os << "# gram rows=" << gram.values.rows() << " cols=" << gram.values.cols()
     << " family=" << to_string(gram.config.family()) << " lambda=" << format_double(gram.config.lambda())
     << " order=row-major\n";
  for (Eigen::Index i = 0; i < gram.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.values.cols(); ++j) os << (j ? "," : "") << format_double(gram.values(i, j));
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

std::uint64_t basis_id(const SpectralBasis& basis) { return fnv1a(basis_payload(basis)); }

std::string hex_id(std::uint64_t id) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

void write_basis(const fs::path& path, const SpectralBasis& basis, const Metadata& meta) {
  ByteWriter w;
  w.bytes(kBasisMagic);
  w.put<std::uint32_t>(kContainerVersion);
  w.str(meta_blob(meta));
  w.bytes(basis_payload(basis));
  write_file_atomic(path, w.data());
}

LoadedBasis read_basis(const fs::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data, path);
  check_magic(r, kBasisMagic, path);
  LoadedBasis out{SpectralBasis{Vector(), Matrix(), 0, kDefaultRankTol, nullptr, KernelConfig::gaussian(1.0)}, 0, {}};
  out.meta = parse_meta_blob(r.str());
  const std::size_t payload_start = r.position();

  const auto dim = r.get<std::uint32_t>();
  if (dim < 1 || dim > 3) throw IoError(path.string() + ": invalid grid dimension");
  std::vector<Interval> bounds(dim);
  for (auto& iv : bounds) {
    iv.lo = r.get<double>();
    iv.hi = r.get<double>();
  }
  const double delta = r.get<double>();
  const double lambda = r.get<double>();
  const double rank_tol = r.get<double>();
  const auto n = r.get<std::uint64_t>();
  const auto rank = r.get<std::uint64_t>();
  const auto stored = r.get<std::uint64_t>();
  if (rank > n || stored < rank || stored > n) throw IoError(path.string() + ": inconsistent basis sizes");

  try {
    out.basis.grid = std::make_shared<const Grid>(make_grid(std::move(bounds), delta));
    out.basis.kernel = KernelConfig::gaussian(lambda);
  } catch (const InvalidInput& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (out.basis.grid->size() != n) throw IoError(path.string() + ": grid does not match stored basis size");
  out.basis.rank_tol = rank_tol;
  out.basis.rank_d = static_cast<int>(rank);
  out.basis.eigvals.resize(static_cast<Eigen::Index>(n));
  r.doubles(out.basis.eigvals.data(), n);
  out.basis.eigvecs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(stored));
  r.doubles(out.basis.eigvecs.data(), n * stored);
  if (!r.done()) throw IoError(path.string() + ": trailing bytes after basis payload");
  out.id = fnv1a(std::string_view(data).substr(payload_start));
  return out;
}

void write_model(const fs::path& path, const ModelFile& file) {
  const LdaModel& m = file.model;
  validate(m);
  ByteWriter w;
  w.bytes(kModelMagic);
  w.put<std::uint32_t>(kContainerVersion);
  w.str(meta_blob(file.meta));
  w.put<std::uint64_t>(file.basis_id);
  w.put(file.gamma);
  w.put(file.lambda);
  const auto p = static_cast<std::uint64_t>(m.center.size());
  const auto r = static_cast<std::uint64_t>(m.rank);
  const auto g = static_cast<std::uint64_t>(m.classes.size());
  w.put(p);
  w.put(r);
  w.put(g);
  for (const auto& c : m.classes) w.str(c);
  w.doubles(m.priors.data(), g);
  w.doubles(m.center.data(), p);
  w.doubles(m.projection.data(), p * r);
  w.doubles(m.means.data(), g * r);
  w.doubles(m.cov_factor.data(), r * r);
  w.put(m.ridge);
  w.put(m.ridge_value);
  write_file_atomic(path, w.data());
}

ModelFile read_model(const fs::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data, path);
  check_magic(r, kModelMagic, path);
  ModelFile file;
  file.meta = parse_meta_blob(r.str());
  file.basis_id = r.get<std::uint64_t>();
  file.gamma = r.get<double>();
  file.lambda = r.get<double>();
  const auto p = r.get<std::uint64_t>();
  const auto rank = r.get<std::uint64_t>();
  const auto g = r.get<std::uint64_t>();
  if (g > 1'000'000 || rank > p) throw IoError(path.string() + ": inconsistent model sizes");
  LdaModel& m = file.model;
  for (std::uint64_t c = 0; c < g; ++c) m.classes.push_back(r.str());
  const auto ep = static_cast<Eigen::Index>(p);
  const auto er = static_cast<Eigen::Index>(rank);
  const auto eg = static_cast<Eigen::Index>(g);
  m.priors.resize(eg);
  r.doubles(m.priors.data(), g);
  m.center.resize(ep);
  r.doubles(m.center.data(), p);
  m.projection.resize(ep, er);
  r.doubles(m.projection.data(), p * rank);
  m.means.resize(eg, er);
  r.doubles(m.means.data(), g * rank);
  m.cov_factor.resize(er, er);
  r.doubles(m.cov_factor.data(), rank * rank);
  m.rank = static_cast<int>(rank);
  m.ridge = r.get<double>();
  m.ridge_value = r.get<double>();
  if (!r.done()) throw IoError(path.string() + ": trailing bytes after model payload");
  try {
    validate(m);
  } catch (const InvalidInput& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return file;
}

}  // namespace currents::io
