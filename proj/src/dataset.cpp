#include "ddpn/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ddpn/errors.hpp"
#include "ddpn/io.hpp"
#include "ddpn/text.hpp"

namespace ddpn {

void Dataset::push_back(std::span<const double> x, double y) {
  if (static_cast<int>(x.size()) != dim) throw ShapeError("feature width does not match dataset");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(y);
}

void Dataset::validate() const {
  if (dim < 1) throw ShapeError("dataset dimension must be positive");
  if (features.size() != labels.size() * static_cast<std::size_t>(dim)) {
    throw ShapeError("feature and label counts disagree");
  }
}

void Dataset::append(const Dataset& other) {
  if (other.dim != dim) throw ShapeError("cannot append datasets of different width");
  features.insert(features.end(), other.features.begin(), other.features.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

std::string dataset_csv_string(const Dataset& ds) {
  ds.validate();
  std::ostringstream os;
  if (ds.dim == 1) {
    os << "x,";
  } else {
    for (int k = 0; k < ds.dim; ++k) os << 'x' << k << ',';
  }
  os << "y\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) os << format_double(v) << ',';
    os << format_double(ds.labels[i]) << '\n';
  }
  return os.str();
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  write_file_atomic(path, dataset_csv_string(ds));
}

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty dataset file");
  const auto header = split(trim(line), ',');
  if (header.size() < 2 || header.back() != "y") throw IoError("dataset header must end in ',y'");
  Dataset ds;
  ds.dim = static_cast<int>(header.size() - 1);
  std::vector<double> row(static_cast<std::size_t>(ds.dim));
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != header.size()) {
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields");
    }
    for (int k = 0; k < ds.dim; ++k) row[k] = parse_double(fields[k]);
    ds.push_back(row, parse_double(fields.back()));
  }
  return ds;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  return parse_dataset_csv(read_file(path));
}

}  // namespace ddpn
