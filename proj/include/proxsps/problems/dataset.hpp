#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "proxsps/rng.hpp"

namespace proxsps::problems {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Row i of `inputs` / `targets` is sample i.
struct Dataset {
  Matrix inputs;
  Matrix targets;
  Matrix validation_inputs;
  Matrix validation_targets;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }

  void validate() const {
    if (inputs.rows() != targets.rows()) throw std::invalid_argument("inputs and targets differ in row count");
    if (validation_inputs.rows() != validation_targets.rows()) {
      throw std::invalid_argument("validation inputs and targets differ in row count");
    }
    if (validation_inputs.size() != 0 && validation_inputs.cols() != inputs.cols()) {
      throw std::invalid_argument("validation inputs have the wrong width");
    }
    if (validation_targets.size() != 0 && validation_targets.cols() != targets.cols()) {
      throw std::invalid_argument("validation targets have the wrong width");
    }
  }
};

inline Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline Matrix uniform(Eigen::Index rows, Eigen::Index cols, double lo, double hi, RngStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

// Text matrix format: a "rows,cols" header line followed by one line per
// row, values comma separated and printed with 17 significant digits.
inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

inline Matrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("matrix csv: missing header");
  long rows = -1;
  long cols = -1;
  char comma = 0;
  std::istringstream header(line);
  if (!(header >> rows >> comma >> cols) || comma != ',' || rows < 0 || cols < 0) {
    throw std::runtime_error("matrix csv: malformed header '" + line + "'");
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("matrix csv: expected " + std::to_string(rows) + " rows");
    std::istringstream row(line);
    std::string cell;
    long j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= cols) throw std::runtime_error("matrix csv: row " + std::to_string(i) + " has too many values");
      try {
        m(i, j++) = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("matrix csv: bad value '" + cell + "' in row " + std::to_string(i));
      }
    }
    if (j != cols) throw std::runtime_error("matrix csv: row " + std::to_string(i) + " has too few values");
  }
  return m;
}

inline void save_dataset(const std::filesystem::path& dir, const Dataset& d) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const Matrix& m) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    write_matrix_csv(out, m);
  };
  write("inputs.csv", d.inputs);
  write("targets.csv", d.targets);
  write("validation_inputs.csv", d.validation_inputs);
  write("validation_targets.csv", d.validation_targets);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    std::ifstream in(dir / name);
    if (!in) throw std::runtime_error("cannot read " + (dir / name).string());
    return read_matrix_csv(in);
  };
  Dataset d{read("inputs.csv"), read("targets.csv"), read("validation_inputs.csv"), read("validation_targets.csv")};
  d.validate();
  return d;
}

}  // namespace proxsps::problems
