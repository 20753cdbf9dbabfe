#include "lfi/artifacts.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lfi {

void write_artifact(const std::filesystem::path& path, const std::string& header, const Matrix& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# " << header << '\n' << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) out << (j ? " " : "") << data(i, j);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Artifact read_artifact(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Artifact a;
  std::string line;
  std::vector<std::vector<Scalar>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (a.header.empty()) {
        const auto start = line.find_first_not_of("# ");
        a.header = start == std::string::npos ? "" : line.substr(start);
      }
      continue;
    }
    std::istringstream fields(line);
    std::vector<Scalar> row;
    Scalar v;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) throw std::runtime_error(path.string() + ": bad number in '" + line + "'");
    if (!rows.empty() && row.size() != rows.front().size()) throw std::runtime_error(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  const auto n_cols = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  a.data.resize(static_cast<Index>(rows.size()), n_cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Index j = 0; j < n_cols; ++j) a.data(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return a;
}

}  // namespace lfi
