#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ddpn {

// Row-major feature matrix plus one label per row.
struct Dataset {
  int dim = 1;
  std::vector<double> features;
  std::vector<double> labels;
  std::string process;
  std::uint64_t seed = 0;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void push_back(std::span<const double> x, double y);
  void validate() const;

  // Concatenates `other` onto this dataset; dimensions must agree.
  void append(const Dataset& other);
};

// Header `x,y` for one feature, `x0,...,x{d-1},y` otherwise. Integer labels are
// written without a decimal point; everything round-trips bit-exactly.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
std::string dataset_csv_string(const Dataset& ds);
Dataset read_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(const std::string& text);

}  // namespace ddpn
