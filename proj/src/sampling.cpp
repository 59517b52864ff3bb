#include "lowrank/sampling.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lowrank/rng.hpp"

namespace lowrank {

Grid::Grid(std::vector<double> pts, double measure)
    : points(std::move(pts)), domain_measure(measure) {
  if (points.empty()) throw contract_error("Grid: needs at least one point");
  if (!(domain_measure > 0.0)) throw contract_error("Grid: measure must be positive");
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (!(points[i] < points[i + 1]))
      throw contract_error("Grid: points must be strictly increasing");
  for (double p : points)
    if (!std::isfinite(p)) throw contract_error("Grid: non-finite point");
}

Grid uniform_grid(double a, double b, std::size_t m) {
  if (!(a < b)) throw contract_error("uniform_grid: requires a < b");
  if (m == 0) throw contract_error("uniform_grid: needs at least one point");
  std::vector<double> pts(m);
  if (m == 1) {
    pts[0] = 0.5 * a + 0.5 * b;
  } else {
    const double denom = static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i)
      pts[i] = (static_cast<double>(m - 1 - i) * a + static_cast<double>(i) * b) / denom;
  }
  return Grid(std::move(pts), b - a);
}

SnapshotMatrix::SnapshotMatrix(DenseMatrix vals, Grid gx, Grid gy)
    : values(std::move(vals)), grid_x(std::move(gx)), grid_y(std::move(gy)) {
  if (values.rows() != grid_x.size() || values.cols() != grid_y.size())
    throw contract_error("SnapshotMatrix: value shape does not match grids");
  weight = grid_x.domain_measure / static_cast<double>(grid_x.size());
}

SnapshotMatrix materialize(const BivariateSource& src, const Grid& gx, const Grid& gy) {
  DenseMatrix vals(gx.size(), gy.size());
  for (std::size_t i = 0; i < gx.size(); ++i)
    for (std::size_t j = 0; j < gy.size(); ++j) {
      const double v = src(gx.points[i], gy.points[j]);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "materialize: source '" << src.tag << "' is non-finite at (x="
            << gx.points[i] << ", y=" << gy.points[j] << ")";
        throw numeric_error(msg.str());
      }
      vals(i, j) = v;
    }
  return SnapshotMatrix(std::move(vals), gx, gy);
}

namespace {

double eval_poly(const std::vector<double>& coeffs, double x) {
  // Horner; empty coefficient list means the identity factor.
  if (coeffs.empty()) return x;
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
  return v;
}

}  // namespace

BivariateSource builtin_family(const std::string& name, const FamilyParams& params) {
  if (name == "product") {
    auto g = params.g_coeffs.empty() ? std::vector<double>{} : params.g_coeffs.front();
    auto h = params.h_coeffs.empty() ? std::vector<double>{} : params.h_coeffs.front();
    return {[g, h](double x, double y) { return eval_poly(g, x) * eval_poly(h, y); },
            "product"};
  }
  if (name == "rank_k") {
    if (params.g_coeffs.empty() || params.g_coeffs.size() != params.h_coeffs.size())
      throw contract_error("builtin_family: rank_k needs matching factor tables");
    auto g = params.g_coeffs;
    auto h = params.h_coeffs;
    return {[g, h](double x, double y) {
              double s = 0.0;
              for (std::size_t k = 0; k < g.size(); ++k)
                s += eval_poly(g[k], x) * eval_poly(h[k], y);
              return s;
            },
            "rank_k"};
  }
  if (name == "cauchy") {
    if (!(params.c > 0.0))
      throw contract_error("builtin_family: cauchy requires a positive shift c");
    const double c = params.c;
    return {[c](double x, double y) { return 1.0 / (x + y + c); }, "cauchy"};
  }
  if (name == "analytic") {
    return {[](double x, double y) { return 1.0 / (1.0 + x * y); }, "analytic"};
  }
  if (name == "exp_abs") {
    return {[](double x, double y) { return std::exp(-std::abs(x - y)); }, "exp_abs"};
  }
  throw contract_error("builtin_family: unknown family '" + name + "'");
}

SnapshotMatrix random_low_rank(std::size_t m, std::size_t n, std::size_t rank,
                               double noise, std::uint64_t seed) {
  if (m == 0 || n == 0) throw contract_error("random_low_rank: empty shape");
  if (rank > std::min(m, n))
    throw contract_error("random_low_rank: rank exceeds matrix size");
  SplitMix64 rng(seed);
  DenseMatrix vals(m, n);
  for (std::size_t r = 0; r < rank; ++r) {
    std::vector<double> g(m), h(n);
    for (auto& v : g) v = rng.symmetric();
    for (auto& v : h) v = rng.symmetric();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) vals(i, j) += g[i] * h[j];
  }
  if (noise != 0.0)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) vals(i, j) += noise * rng.symmetric();
  return SnapshotMatrix(std::move(vals), uniform_grid(0.0, 1.0, m),
                        uniform_grid(0.0, 1.0, n));
}

namespace {

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_cell(const std::string& cell, std::size_t line_no, std::size_t col_no) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double v = 0.0;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw io_error("CSV: cannot parse numeric cell at row " + std::to_string(line_no) +
                   ", column " + std::to_string(col_no));
  return v;
}

std::vector<double> parse_number_list(const std::string& text, std::size_t line_no) {
  std::vector<double> out;
  std::size_t start = 0, col = 1;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string cell =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_cell(cell, line_no, col));
    if (comma == std::string::npos) break;
    start = comma + 1;
    ++col;
  }
  return out;
}

// Writes `content` to path atomically (temp file in the same directory, then
// rename), so readers never observe partial output.
void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) throw io_error("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot rename '" + tmp + "' to '" + path + "'");
}

}  // namespace

SnapshotMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");

  std::vector<double> xs, ys, measures;
  bool have_x = false, have_y = false, have_measure = false;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == EOF) break;  // tolerate one trailing newline
      throw io_error("CSV: empty row " + std::to_string(line_no));
    }
    if (line.rfind("#x:", 0) == 0) {
      xs = parse_number_list(line.substr(3), line_no);
      have_x = true;
      continue;
    }
    if (line.rfind("#y:", 0) == 0) {
      ys = parse_number_list(line.substr(3), line_no);
      have_y = true;
      continue;
    }
    if (line.rfind("#measure:", 0) == 0) {
      measures = parse_number_list(line.substr(9), line_no);
      if (measures.size() != 2)
        throw io_error("CSV: #measure needs two values at row " + std::to_string(line_no));
      have_measure = true;
      continue;
    }
    if (line[0] == '#') continue;  // other comment lines are ignored
    rows.push_back(parse_number_list(line, line_no));
    if (rows.back().size() != rows.front().size())
      throw io_error("CSV: ragged row " + std::to_string(line_no) + " (expected " +
                     std::to_string(rows.front().size()) + " cells, got " +
                     std::to_string(rows.back().size()) + ")");
  }
  if (rows.empty()) throw io_error("CSV: no data rows in '" + path + "'");

  const std::size_t m = rows.size(), n = rows.front().size();
  DenseMatrix vals(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) vals(i, j) = rows[i][j];
  vals.require_finite("CSV '" + path + "'");

  if (have_x && xs.size() != m)
    throw io_error("CSV: #x header has " + std::to_string(xs.size()) + " points but " +
                   std::to_string(m) + " data rows");
  if (have_y && ys.size() != n)
    throw io_error("CSV: #y header has " + std::to_string(ys.size()) + " points but " +
                   std::to_string(n) + " data columns");

  Grid gx = have_x ? Grid(xs, have_measure ? measures[0] : 1.0)
                   : uniform_grid(0.0, 1.0, m);
  Grid gy = have_y ? Grid(ys, have_measure ? measures[1] : 1.0)
                   : uniform_grid(0.0, 1.0, n);
  if (have_measure && !have_x) gx.domain_measure = measures[0];
  if (have_measure && !have_y) gy.domain_measure = measures[1];
  return SnapshotMatrix(std::move(vals), std::move(gx), std::move(gy));
}

void write_matrix_csv(const SnapshotMatrix& s, const std::string& path) {
  s.values.require_finite("write_matrix_csv");
  std::ostringstream out;
  out << "#x:";
  for (std::size_t i = 0; i < s.grid_x.size(); ++i)
    out << (i ? "," : "") << format_shortest(s.grid_x.points[i]);
  out << "\n#y:";
  for (std::size_t j = 0; j < s.grid_y.size(); ++j)
    out << (j ? "," : "") << format_shortest(s.grid_y.points[j]);
  out << "\n#measure:" << format_shortest(s.grid_x.domain_measure) << ","
      << format_shortest(s.grid_y.domain_measure) << "\n";
  for (std::size_t i = 0; i < s.values.rows(); ++i) {
    for (std::size_t j = 0; j < s.values.cols(); ++j)
      out << (j ? "," : "") << format_shortest(s.values(i, j));
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

TrivariateSample materialize_trivariate(const TrivariateSource& src, const Grid& gx,
                                        const Grid& gy, const Grid& gz) {
  TrivariateSample out;
  out.values = Tensor3(gx.size(), gy.size(), gz.size());
  out.grid_x = gx;
  out.grid_y = gy;
  out.grid_z = gz;
  for (std::size_t i = 0; i < gx.size(); ++i)
    for (std::size_t j = 0; j < gy.size(); ++j)
      for (std::size_t k = 0; k < gz.size(); ++k) {
        const double v = src(gx.points[i], gy.points[j], gz.points[k]);
        if (!std::isfinite(v)) {
          std::ostringstream msg;
          msg << "materialize_trivariate: source '" << src.tag
              << "' is non-finite at (x=" << gx.points[i] << ", y=" << gy.points[j]
              << ", z=" << gz.points[k] << ")";
          throw numeric_error(msg.str());
        }
        out.values(i, j, k) = v;
      }
  return out;
}

}  // namespace lowrank
