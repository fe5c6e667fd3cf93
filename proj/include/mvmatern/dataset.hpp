#pragma once

#include "mvmatern/covariance.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mvmatern {

/// Multivariate point-referenced data. Components are indexed 0..p-1 in
/// alphabetical order of their labels. Coordinates are stored row-major.
class SpatialDataset {
 public:
  SpatialDataset() = default;
  /// Builds a dataset from raw rows. Labels are sorted to assign indices.
  SpatialDataset(int dim, std::vector<double> coords, const std::vector<std::string>& labels,
                 std::vector<double> response, std::vector<std::string> coord_names = {});
  /// Builds from already-indexed components; component_labels[c] names c
  /// and labels with no observations are kept.
  static SpatialDataset from_indexed(int dim, std::vector<double> coords,
                                     std::vector<int> components, std::vector<double> response,
                                     std::vector<std::string> component_labels);

  std::size_t size() const { return response_.size(); }
  int dim() const { return dim_; }
  int components() const { return static_cast<int>(labels_.size()); }

  std::span<const double> location(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  int component(std::size_t i) const { return component_[i]; }
  double response(std::size_t i) const { return response_[i]; }
  Observation observation(std::size_t i) const { return {location(i), component_[i]}; }

  const std::vector<double>& coords() const { return coords_; }
  const std::vector<int>& component_index() const { return component_; }
  const std::vector<double>& responses() const { return response_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& coord_names() const { return coord_names_; }

  std::vector<std::size_t> component_sizes() const;
  double component_mean(int c) const;
  double component_variance(int c) const;
  /// Largest distance between any two points of the bounding box.
  double bounding_diameter() const;

  /// Observations of one component as a univariate dataset.
  SpatialDataset component_subset(int c) const;

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<int> component_;
  std::vector<double> response_;
  std::vector<std::string> labels_;
  std::vector<std::string> coord_names_;
};

struct ColumnSpec {
  std::vector<std::string> x_cols{"x", "y"};
  std::string component_col = "comp";
  std::string response_col = "value";
};

struct LoadReport {
  SpatialDataset dataset;
  std::size_t rows_read = 0;
  std::size_t missing_dropped = 0;
  std::size_t duplicates_removed = 0;
};

/// Reads a headed CSV. Rows with missing fields are dropped; repeated
/// (location, component) rows are removed keeping the first. Throws
/// InputError for an unreadable file, missing columns, or no usable rows.
LoadReport load_dataset(const std::filesystem::path& path, const ColumnSpec& columns);

/// Writes the dataset in the layout load_dataset reads with `columns`.
void write_dataset(const std::filesystem::path& path, const SpatialDataset& data,
                   const ColumnSpec& columns);

}  // namespace mvmatern
