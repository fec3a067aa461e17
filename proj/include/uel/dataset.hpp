#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace uel {

/// Regression sample: n rows of (x in [0,1]^d, scalar y), row-major features.
struct Dataset {
  int n = 0;
  int d = 0;
  std::vector<double> features;   // n * d, row-major
  std::vector<double> responses;  // n

  double x(int row, int col) const {
    return features[static_cast<std::size_t>(row) * d + col];
  }
  double y(int row) const { return responses[static_cast<std::size_t>(row)]; }
};

inline void validate(const Dataset& data) {
  if (data.n < 1 || data.d < 1) {
    throw std::invalid_argument("dataset: n and d must be at least 1");
  }
  if (data.features.size() != static_cast<std::size_t>(data.n) * data.d ||
      data.responses.size() != static_cast<std::size_t>(data.n)) {
    throw std::invalid_argument("dataset: feature/response sizes do not match n, d");
  }
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.d; ++j) {
      const double v = data.x(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("dataset: feature x" + std::to_string(j + 1) +
                                    " out of [0,1] at row " + std::to_string(i + 1));
      }
    }
  }
}

namespace detail {

inline double parse_real(const std::string& cell, const std::string& column, int row) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("csv: column " + column + ", row " +
                                std::to_string(row) + ": not a decimal real: '" +
                                cell + "'");
  }
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

/// Reads a dataset from CSV with header `x1,...,xd,y`, one observation per
/// row, decimal-point reals. Errors name the offending column and row.
inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header.back() != "y") {
    throw std::invalid_argument("csv: header must be x1,...,xd,y");
  }
  const int d = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < d; ++j) {
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1)) {
      throw std::invalid_argument("csv: header column " + std::to_string(j + 1) +
                                  " must be x" + std::to_string(j + 1));
    }
  }

  Dataset data;
  data.d = d;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("csv: row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    }
    for (int j = 0; j < d; ++j) {
      const double v = detail::parse_real(cells[static_cast<std::size_t>(j)],
                                          "x" + std::to_string(j + 1), row);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("csv: column x" + std::to_string(j + 1) + ", row " +
                                    std::to_string(row) + ": feature out of [0,1]");
      }
      data.features.push_back(v);
    }
    data.responses.push_back(detail::parse_real(cells.back(), "y", row));
  }
  data.n = row;
  validate(data);
  return data;
}

}  // namespace uel
