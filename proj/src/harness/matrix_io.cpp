#include "xi_index/harness/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "xi_index/errors.hpp"

namespace xidx::harness {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank, non-comment line; false at end of stream.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "matrix file line " << number_ << ": " << what;
    throw StructuralError(os.str());
  }

 private:
  std::istream& in_;
  int number_ = 0;
};

Complex parse_entry(const std::string& token, const LineReader& reader) {
  const auto comma = token.find(',');
  try {
    std::size_t used = 0;
    if (comma == std::string::npos) {
      const double re = std::stod(token, &used);
      if (used != token.size()) reader.fail("bad entry '" + token + "'");
      return {re, 0.0};
    }
    const std::string a = token.substr(0, comma);
    const std::string b = token.substr(comma + 1);
    const double re = std::stod(a, &used);
    if (used != a.size()) reader.fail("bad entry '" + token + "'");
    const double im = std::stod(b, &used);
    if (used != b.size()) reader.fail("bad entry '" + token + "'");
    return {re, im};
  } catch (const std::logic_error&) {
    reader.fail("bad entry '" + token + "'");
  }
}

}  // namespace

std::vector<Operator> read_operators(std::istream& in) {
  LineReader reader(in);
  std::vector<Operator> out;
  std::string line;
  while (reader.next(line)) {
    std::istringstream header(line);
    std::string magic;
    int version = 0;
    if (!(header >> magic >> version) || magic != "xi-operator" || version != 1)
      reader.fail("expected 'xi-operator 1'");

    if (!reader.next(line)) reader.fail("missing 'blocks' line");
    std::istringstream count_line(line);
    std::string word;
    int count = 0;
    if (!(count_line >> word >> count) || word != "blocks" || count < 1) reader.fail("expected 'blocks <count>'");

    std::vector<Block> blocks;
    std::vector<Matrix> data;
    for (int b = 0; b < count; ++b) {
      if (!reader.next(line)) reader.fail("missing block header");
      std::istringstream bh(line);
      Block block;
      if (!(bh >> block.dim >> block.weight) || block.dim < 1) reader.fail("expected '<dim> <weight>'");
      Matrix m(block.dim, block.dim);
      for (int r = 0; r < block.dim; ++r) {
        if (!reader.next(line)) reader.fail("missing matrix row");
        std::istringstream row(line);
        std::string token;
        int c = 0;
        while (row >> token) {
          if (c >= block.dim) reader.fail("too many entries in row");
          m(r, c++) = parse_entry(token, reader);
        }
        if (c != block.dim) reader.fail("too few entries in row");
      }
      blocks.push_back(block);
      data.push_back(std::move(m));
    }
    try {
      out.emplace_back(AlgebraDescriptor(std::move(blocks)), std::move(data));
    } catch (const Error& e) {
      reader.fail(e.what());
    }
  }
  if (out.empty()) throw StructuralError("matrix file holds no operator");
  return out;
}

std::vector<Operator> read_operator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open matrix file '" + path + "'");
  return read_operators(in);
}

void write_operator(std::ostream& out, const Operator& x) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "xi-operator 1\n";
  out << "blocks " << x.block_count() << '\n';
  for (std::size_t b = 0; b < x.block_count(); ++b) {
    const auto& block = x.algebra().blocks()[b];
    out << block.dim << ' ' << block.weight << '\n';
    const Matrix& m = x.block(b);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        out << (c ? " " : "") << m(r, c).real() << ',' << m(r, c).imag();
      out << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace xidx::harness
