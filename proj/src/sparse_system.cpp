#include "sublin/sparse_system.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sublin/errors.hpp"

namespace sublin {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
  if (n < 0) throw SolverError(ErrorCode::DimensionMismatch, "negative dimension");
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw SolverError(ErrorCode::IndexOutOfRange,
                        "triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                            ") outside " + std::to_string(n) + "x" + std::to_string(n));
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  // Merge duplicates by summation.
  std::vector<Triplet> merged;
  merged.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
      merged.back().value += t.value;
    } else {
      merged.push_back(t);
    }
  }

  SparseMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  m.row_col_.reserve(merged.size());
  m.row_val_.reserve(merged.size());
  for (const auto& t : merged) {
    m.row_ptr_[static_cast<std::size_t>(t.row) + 1]++;
    m.row_col_.push_back(t.col);
    m.row_val_.push_back(t.value);
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];

  // Build CSC by counting sort over columns.
  m.col_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& t : merged) m.col_ptr_[static_cast<std::size_t>(t.col) + 1]++;
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) m.col_ptr_[j + 1] += m.col_ptr_[j];
  m.col_row_.resize(merged.size());
  m.col_val_.resize(merged.size());
  std::vector<std::int64_t> cursor(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  for (const auto& t : merged) {
    auto& c = cursor[static_cast<std::size_t>(t.col)];
    m.col_row_[static_cast<std::size_t>(c)] = t.row;
    m.col_val_[static_cast<std::size_t>(c)] = t.value;
    ++c;
  }

  m.diag_.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& t : merged)
    if (t.row == t.col) m.diag_[static_cast<std::size_t>(t.row)] = t.value;
  return m;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(row_val_.size());
  for (int i = 0; i < n_; ++i) {
    auto r = row(i);
    for (int k = 0; k < r.size(); ++k) t.push_back({r.idx_begin[k], i, r.val_begin[k]});
  }
  return from_triplets(n_, std::move(t));
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_)
    throw SolverError(ErrorCode::DimensionMismatch, "multiply: vector length");
  std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i) {
    auto r = row(i);
    double s = 0.0;
    for (int k = 0; k < r.size(); ++k)
      s += r.val_begin[k] * x[static_cast<std::size_t>(r.idx_begin[k])];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_)
    throw SolverError(ErrorCode::DimensionMismatch, "multiply_transpose: vector length");
  std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
  for (int j = 0; j < n_; ++j) {
    auto c = col(j);
    double s = 0.0;
    for (int k = 0; k < c.size(); ++k)
      s += c.val_begin[k] * x[static_cast<std::size_t>(c.idx_begin[k])];
    y[static_cast<std::size_t>(j)] = s;
  }
  return y;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
  std::vector<Triplet> t;
  t.reserve(row_val_.size());
  for (int i = 0; i < n_; ++i) {
    auto r = row(i);
    for (int k = 0; k < r.size(); ++k) t.push_back({i, r.idx_begin[k], r.val_begin[k]});
  }
  return t;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void parse_fail(const std::string& source, const std::string& what) {
  throw SolverError(ErrorCode::ParseError, source + ": " + what);
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(source_name, "empty input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") parse_fail(source_name, "missing MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") parse_fail(source_name, "unsupported object " + object);
  if (format != "coordinate") parse_fail(source_name, "expected coordinate format");
  if (field != "real" && field != "integer" && field != "pattern")
    parse_fail(source_name, "unsupported field " + field);
  if (symmetry != "general" && symmetry != "symmetric")
    parse_fail(source_name, "unsupported symmetry " + symmetry);

  // Skip comments.
  do {
    if (!std::getline(in, line)) parse_fail(source_name, "missing size line");
  } while (!line.empty() && line[0] == '%');

  std::istringstream size_line(line);
  long rows = -1, cols = -1, entries = -1;
  size_line >> rows >> cols >> entries;
  if (rows < 0 || cols < 0 || entries < 0) parse_fail(source_name, "bad size line: " + line);
  if (rows != cols) parse_fail(source_name, "matrix must be square");

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(entries));
  long seen = 0;
  while (seen < entries) {
    if (!std::getline(in, line)) parse_fail(source_name, "unexpected end of entries");
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    long i = 0, j = 0;
    double v = 1.0;
    entry >> i >> j;
    if (field != "pattern") entry >> v;
    if (entry.fail()) parse_fail(source_name, "bad entry line: " + line);
    if (i < 1 || i > rows || j < 1 || j > cols)
      parse_fail(source_name, "entry index out of range: " + line);
    triplets.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
    if (symmetry == "symmetric" && i != j)
      triplets.push_back({static_cast<int>(j - 1), static_cast<int>(i - 1), v});
    ++seen;
  }
  return SparseMatrix::from_triplets(static_cast<int>(rows), std::move(triplets));
}

SparseMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SolverError(ErrorCode::ParseError, "cannot open " + path);
  return read_matrix_market(in, path);
}

std::vector<double> read_vector_file(const std::string& path, int expected_n) {
  std::ifstream in(path);
  if (!in) throw SolverError(ErrorCode::ParseError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, "empty vector file");

  if (line.rfind("%%MatrixMarket", 0) == 0) {
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    format = lower(format);
    field = lower(field);
    if (field != "real" && field != "integer") parse_fail(path, "unsupported vector field");
    do {
      if (!std::getline(in, line)) parse_fail(path, "missing size line");
    } while (!line.empty() && line[0] == '%');
    std::istringstream size_line(line);
    if (format == "array") {
      long rows = -1, cols = -1;
      size_line >> rows >> cols;
      if (rows < 0 || cols != 1) parse_fail(path, "vector array must be n-by-1");
      if (expected_n >= 0 && rows != expected_n) parse_fail(path, "vector length mismatch");
      std::vector<double> v;
      v.reserve(static_cast<std::size_t>(rows));
      double x = 0.0;
      while (static_cast<long>(v.size()) < rows && in >> x) v.push_back(x);
      if (static_cast<long>(v.size()) != rows) parse_fail(path, "truncated vector array");
      return v;
    }
    if (format == "coordinate") {
      long rows = -1, cols = -1, entries = -1;
      size_line >> rows >> cols >> entries;
      if (rows < 0 || cols != 1 || entries < 0) parse_fail(path, "vector coordinate must be n-by-1");
      if (expected_n >= 0 && rows != expected_n) parse_fail(path, "vector length mismatch");
      std::vector<double> v(static_cast<std::size_t>(rows), 0.0);
      for (long k = 0; k < entries;) {
        if (!std::getline(in, line)) parse_fail(path, "unexpected end of entries");
        if (line.empty() || line[0] == '%') continue;
        std::istringstream entry(line);
        long i = 0, j = 0;
        double x = 0.0;
        entry >> i >> j >> x;
        if (entry.fail() || i < 1 || i > rows || j != 1) parse_fail(path, "bad entry: " + line);
        v[static_cast<std::size_t>(i - 1)] += x;
        ++k;
      }
      return v;
    }
    parse_fail(path, "unsupported vector format");
  }

  // Plain "idx value" lines, 0-based, with optional "# n <dim>" header.
  long n = expected_n;
  std::vector<std::pair<long, double>> entries;
  auto consume = [&](const std::string& text) {
    if (text.empty()) return;
    if (text[0] == '#') {
      std::istringstream meta(text.substr(1));
      std::string key;
      meta >> key;
      if (key == "n") {
        long dim = -1;
        meta >> dim;
        if (dim >= 0) n = dim;
      }
      return;
    }
    std::istringstream entry(text);
    long i = -1;
    double x = 0.0;
    entry >> i >> x;
    if (entry.fail() || i < 0) parse_fail(path, "bad vector line: " + text);
    entries.emplace_back(i, x);
  };
  consume(line);
  while (std::getline(in, line)) consume(line);
  if (n < 0) {
    for (const auto& [i, x] : entries) n = std::max(n, i + 1);
    if (n < 0) n = 0;
  }
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (const auto& [i, x] : entries) {
    if (i >= n) parse_fail(path, "vector index " + std::to_string(i) + " out of range");
    v[static_cast<std::size_t>(i)] += x;
  }
  return v;
}

}  // namespace sublin
