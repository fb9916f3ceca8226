#include "espmv/matio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "espmv/error.hpp"

namespace espmv {

namespace {

enum class Field { Real, Integer, Pattern };
enum class Symmetry { General, Symmetric };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

template <typename T>
T parse_number(std::string_view token, std::size_t line_no, const char* what) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("cannot parse " + std::string(what) + " '" + std::string(token) + "'",
                     line_no);
  }
  return value;
}

struct Header {
  Field field = Field::Real;
  Symmetry symmetry = Symmetry::General;
};

Header parse_banner(const std::string& line) {
  auto tokens = split_ws(line);
  if (tokens.size() != 5 || lower(std::string(tokens[0])) != "%%matrixmarket") {
    throw ParseError("malformed Matrix Market banner", 1);
  }
  if (lower(std::string(tokens[1])) != "matrix") {
    throw ParseError("unsupported object '" + std::string(tokens[1]) + "'", 1);
  }
  const std::string format = lower(std::string(tokens[2]));
  if (format == "array") throw ParseError("array (dense) format is not supported", 1);
  if (format != "coordinate") throw ParseError("unknown format '" + format + "'", 1);

  Header h;
  const std::string field = lower(std::string(tokens[3]));
  if (field == "real" || field == "double") {
    h.field = Field::Real;
  } else if (field == "integer") {
    h.field = Field::Integer;
  } else if (field == "pattern") {
    h.field = Field::Pattern;
  } else if (field == "complex") {
    throw ParseError("complex matrices are not supported", 1);
  } else {
    throw ParseError("unknown field '" + field + "'", 1);
  }

  const std::string symmetry = lower(std::string(tokens[4]));
  if (symmetry == "general") {
    h.symmetry = Symmetry::General;
  } else if (symmetry == "symmetric") {
    h.symmetry = Symmetry::Symmetric;
  } else {
    throw ParseError("unsupported symmetry '" + symmetry + "'", 1);
  }
  return h;
}

}  // namespace

CooMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input", 0);
  ++line_no;
  const Header header = parse_banner(line);

  // Size line: first non-comment, non-blank line after the banner.
  bool have_size = false;
  long long rows = 0, cols = 0, declared = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line.front() == '%') continue;
    auto tokens = split_ws(line);
    if (tokens.size() != 3) throw ParseError("size line must be 'M N NNZ'", line_no);
    rows = parse_number<long long>(tokens[0], line_no, "row count");
    cols = parse_number<long long>(tokens[1], line_no, "column count");
    declared = parse_number<long long>(tokens[2], line_no, "entry count");
    have_size = true;
    break;
  }
  if (!have_size) throw ParseError("missing size line", line_no);
  constexpr long long kMaxIndex = std::numeric_limits<Index>::max();
  if (rows < 0 || cols < 0 || declared < 0 || rows > kMaxIndex || cols > kMaxIndex) {
    throw ParseError("matrix dimensions out of range", line_no);
  }

  CooMatrix m;
  m.n_rows = static_cast<Index>(rows);
  m.n_cols = static_cast<Index>(cols);
  const std::size_t reserve = static_cast<std::size_t>(
      header.symmetry == Symmetry::Symmetric ? 2 * declared : declared);
  m.row_idx.reserve(reserve);
  m.col_idx.reserve(reserve);
  m.values.reserve(reserve);

  const std::size_t expected_tokens = header.field == Field::Pattern ? 2 : 3;
  std::vector<std::size_t> source_line;  // file line of each stored entry
  source_line.reserve(reserve);
  long long seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line.front() == '%') continue;
    if (seen == declared) {
      throw ParseError("more entries than the declared " + std::to_string(declared), line_no);
    }
    auto tokens = split_ws(line);
    if (tokens.size() != expected_tokens) {
      throw ParseError("expected " + std::to_string(expected_tokens) + " fields per entry",
                       line_no);
    }
    const long long i = parse_number<long long>(tokens[0], line_no, "row index");
    const long long j = parse_number<long long>(tokens[1], line_no, "column index");
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols),
                       line_no);
    }
    double v = 1.0;
    if (header.field == Field::Real) {
      v = parse_number<double>(tokens[2], line_no, "value");
    } else if (header.field == Field::Integer) {
      v = static_cast<double>(parse_number<long long>(tokens[2], line_no, "integer value"));
    }
    const auto r = static_cast<Index>(i - 1);
    const auto c = static_cast<Index>(j - 1);
    m.row_idx.push_back(r);
    m.col_idx.push_back(c);
    m.values.push_back(v);
    source_line.push_back(line_no);
    if (header.symmetry == Symmetry::Symmetric && r != c) {
      m.row_idx.push_back(c);
      m.col_idx.push_back(r);
      m.values.push_back(v);
      source_line.push_back(line_no);
    }
    ++seen;
  }
  if (seen != declared) {
    throw ParseError("declared " + std::to_string(declared) + " entries but found " +
                         std::to_string(seen),
                     line_no);
  }

  // Duplicate scan over (row, col) keys.
  std::vector<std::size_t> order(m.nnz());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  auto key = [&](std::size_t k) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m.row_idx[k])) << 32) |
           static_cast<std::uint32_t>(m.col_idx[k]);
  };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return key(a) < key(b) || (key(a) == key(b) && a < b); });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (key(order[k]) == key(order[k - 1])) {
      throw ParseError("duplicate entry (" + std::to_string(m.row_idx[order[k]] + 1) + ", " +
                           std::to_string(m.col_idx[order[k]] + 1) + ")",
                       source_line[order[k]]);
    }
  }
  return m;
}

CooMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open file");
  try {
    return parse_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void write_matrix_market(const CooMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.n_rows << ' ' << m.n_cols << ' ' << m.nnz() << '\n';
  char buf[64];
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", m.values[k]);
    out << m.row_idx[k] + 1 << ' ' << m.col_idx[k] + 1 << ' ' << buf << '\n';
  }
  if (!out) throw Error("write failed");
}

void write_matrix_market(const CooMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_matrix_market(m, out);
}

}  // namespace espmv
