#include "dirkwso/tableau.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <sstream>

namespace dirkwso {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : TableauError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                   what),
      line_(line),
      column_(column) {}

const char* to_string(Origin origin) {
  switch (origin) {
    case Origin::builtin:
      return "built-in";
    case Origin::file:
      return "file";
    case Origin::search:
      return "search";
  }
  return "unknown";
}

Tableau Tableau::validate(const Matrix& raw_a, const Vector& raw_b, std::string label,
                          Origin origin, std::string note) {
  const Eigen::Index s = raw_a.rows();
  if (s < 1) throw TableauError("tableau must have at least one stage");
  if (raw_a.cols() != s) {
    throw TableauError("A must be square, got " + std::to_string(raw_a.rows()) + "x" +
                       std::to_string(raw_a.cols()));
  }
  if (raw_b.size() != s) {
    throw TableauError("b has length " + std::to_string(raw_b.size()) + ", expected " +
                       std::to_string(s));
  }
  if (!raw_a.allFinite() || !raw_b.allFinite()) throw TableauError("non-finite coefficient");

  Tableau t;
  t.a_ = raw_a;
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = i + 1; j < s; ++j) {
      if (std::abs(raw_a(i, j)) > 1e-14) {
        throw TableauError("A is not lower-triangular: a(" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + ") = " + std::to_string(raw_a(i, j)));
      }
      t.a_(i, j) = 0.0;
    }
  }
  t.b_ = raw_b;
  t.c_ = Vector(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) sum += t.a_(i, j);
    t.c_(i) = sum;
  }
  t.label_ = std::move(label);
  t.origin_ = origin;
  t.note_ = std::move(note);
  return t;
}

bool Tableau::stiffly_accurate() const {
  const Eigen::Index last = b_.size() - 1;
  for (Eigen::Index j = 0; j <= last; ++j) {
    if (a_(last, j) != b_(j)) return false;
  }
  return true;
}

double Tableau::max_abs_coefficient() const {
  return std::max(a_.cwiseAbs().maxCoeff(), b_.cwiseAbs().maxCoeff());
}

bool operator==(const Tableau& lhs, const Tableau& rhs) {
  return lhs.a_.rows() == rhs.a_.rows() && lhs.a_ == rhs.a_ && lhs.b_ == rhs.b_ &&
         lhs.label_ == rhs.label_;
}

ReductionReport reduce_confluent(const Tableau& t) {
  ReductionReport report;
  const std::size_t s = t.stages();
  const Vector& c = t.c();
  std::size_t r = 1;
  while (r < s && std::abs(c(Eigen::Index(r)) - c(0)) <= kConfluenceTol) ++r;
  if (r < 2) return report;

  const std::size_t m = s - r + 1;
  Matrix a = Matrix::Zero(Eigen::Index(m), Eigen::Index(m));
  Vector b(static_cast<Eigen::Index>(m));
  a(0, 0) = t.a(0, 0);
  b(0) = t.b().head(Eigen::Index(r)).sum();
  for (std::size_t i = r; i < s; ++i) {
    const auto row = Eigen::Index(i - r + 1);
    double merged = 0.0;
    for (std::size_t j = 0; j < r; ++j) merged += t.a(i, j);
    a(row, 0) = merged;
    for (std::size_t j = r; j <= i; ++j) a(row, Eigen::Index(j - r + 1)) = t.a(i, j);
    b(row) = t.b()(Eigen::Index(i));
  }
  report.reducible = true;
  report.r = r;
  report.reduced = Tableau::validate(a, b, t.label() + "-reduced", t.origin(),
                                     "reduced from " + std::to_string(s) + " stages");
  return report;
}

namespace {

std::string format_coefficient(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

struct Token {
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lines {
 public:
  explicit Lines(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      std::string_view line = text.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      std::vector<Token> tokens;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        tokens.push_back({std::string(line.substr(i, j - i)), line_no, i + 1});
        i = j;
      }
      if (!tokens.empty() && tokens.front().text.front() != '#') {
        rows_.push_back({line_no, std::string(line), std::move(tokens)});
      }
      if (end == text.size()) break;
      pos = end + 1;
    }
  }

  struct Row {
    std::size_t line_no;
    std::string raw;
    std::vector<Token> tokens;
  };

  bool done() const { return next_ >= rows_.size(); }
  const Row& next(std::size_t last_line) {
    if (done()) throw ParseError("unexpected end of input", last_line + 1, 1);
    return rows_[next_++];
  }

 private:
  std::vector<Row> rows_;
  std::size_t next_ = 0;
};

double parse_number(const Token& tok) {
  const char* begin = tok.text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ParseError("expected a number, got '" + tok.text + "'", tok.line, tok.column);
  if (!std::isfinite(v)) throw ParseError("non-finite coefficient '" + tok.text + "'", tok.line, tok.column);
  return v;
}

}  // namespace

std::string to_text(const Tableau& t) {
  std::ostringstream out;
  const std::size_t s = t.stages();
  out << "s " << s << '\n';
  out << "label " << t.label() << '\n';
  out << "# c";
  for (std::size_t i = 0; i < s; ++i) out << ' ' << format_coefficient(t.c()(Eigen::Index(i)));
  out << '\n';
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (j) out << ' ';
      out << format_coefficient(t.a(i, j));
    }
    out << '\n';
  }
  out << 'b';
  for (std::size_t j = 0; j < s; ++j) out << ' ' << format_coefficient(t.b()(Eigen::Index(j)));
  out << '\n';
  return out.str();
}

Tableau from_text(std::string_view text) {
  Lines lines(text);
  std::size_t last = 0;

  const auto& header = lines.next(last);
  last = header.line_no;
  if (header.tokens.size() != 2 || header.tokens[0].text != "s") {
    throw ParseError("expected 's <stages>'", header.line_no, 1);
  }
  const Token& count = header.tokens[1];
  const double sv = parse_number(count);
  if (sv < 1 || sv != std::floor(sv) || sv > 1000) {
    throw ParseError("invalid stage count '" + count.text + "'", count.line, count.column);
  }
  const auto s = static_cast<Eigen::Index>(sv);

  const auto& label_row = lines.next(last);
  last = label_row.line_no;
  if (label_row.tokens.front().text != "label") {
    throw ParseError("expected 'label <text>'", label_row.line_no, 1);
  }
  std::string label;
  {
    const auto& raw = label_row.raw;
    std::size_t at = raw.find("label") + 5;
    while (at < raw.size() && std::isspace(static_cast<unsigned char>(raw[at]))) ++at;
    label = raw.substr(at);
    while (!label.empty() && std::isspace(static_cast<unsigned char>(label.back()))) label.pop_back();
  }

  Matrix a = Matrix::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto& row = lines.next(last);
    last = row.line_no;
    if (static_cast<Eigen::Index>(row.tokens.size()) != i + 1) {
      const std::size_t col = row.tokens.size() > std::size_t(i + 1)
                                  ? row.tokens[std::size_t(i + 1)].column
                                  : row.raw.size() + 1;
      throw ParseError("row " + std::to_string(i + 1) + " of A must have " + std::to_string(i + 1) +
                           " entries, found " + std::to_string(row.tokens.size()),
                       row.line_no, col);
    }
    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = parse_number(row.tokens[std::size_t(j)]);
  }

  const auto& brow = lines.next(last);
  last = brow.line_no;
  if (brow.tokens.front().text != "b") throw ParseError("expected 'b' line", brow.line_no, 1);
  std::vector<Token> weights(brow.tokens.begin() + 1, brow.tokens.end());
  while (static_cast<Eigen::Index>(weights.size()) < s && !lines.done()) {
    const auto& more = lines.next(last);
    last = more.line_no;
    weights.insert(weights.end(), more.tokens.begin(), more.tokens.end());
  }
  if (static_cast<Eigen::Index>(weights.size()) != s) {
    throw ParseError("b must have " + std::to_string(s) + " entries, found " +
                         std::to_string(weights.size()),
                     last, 1);
  }
  Vector b(s);
  for (Eigen::Index j = 0; j < s; ++j) b(j) = parse_number(weights[std::size_t(j)]);
  if (!lines.done()) {
    const auto& extra = lines.next(last);
    throw ParseError("trailing content", extra.line_no, extra.tokens.front().column);
  }
  try {
    return Tableau::validate(a, b, std::move(label), Origin::file);
  } catch (const ParseError&) {
    throw;
  } catch (const TableauError& err) {
    throw ParseError(err.what(), header.line_no, 1);
  }
}

std::string to_csv(const Tableau& t) {
  std::ostringstream out;
  out << "i,j,value\n";
  const std::size_t s = t.stages();
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out << i + 1 << ',' << j + 1 << ',' << format_coefficient(t.a(i, j)) << '\n';
    }
  }
  for (std::size_t j = 0; j < s; ++j) {
    out << "b," << j + 1 << ',' << format_coefficient(t.b()(Eigen::Index(j))) << '\n';
  }
  return out.str();
}

}  // namespace dirkwso
