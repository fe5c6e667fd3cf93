#include "mvmatern/dataset.hpp"

#include "mvmatern/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace mvmatern {

SpatialDataset::SpatialDataset(int dim, std::vector<double> coords,
                               const std::vector<std::string>& labels,
                               std::vector<double> response, std::vector<std::string> coord_names)
    : dim_(dim), coords_(std::move(coords)), response_(std::move(response)),
      coord_names_(std::move(coord_names)) {
  if (dim_ < 1) throw InputError("dataset dimension must be at least 1");
  if (labels.size() != response_.size() || coords_.size() != response_.size() * dim_)
    throw InputError("dataset columns have inconsistent lengths");
  labels_ = labels;
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  component_.reserve(labels.size());
  for (const auto& l : labels)
    component_.push_back(static_cast<int>(
        std::lower_bound(labels_.begin(), labels_.end(), l) - labels_.begin()));
  if (coord_names_.empty())
    for (int k = 0; k < dim_; ++k) coord_names_.push_back("x" + std::to_string(k + 1));
}

SpatialDataset SpatialDataset::from_indexed(int dim, std::vector<double> coords,
                                            std::vector<int> components,
                                            std::vector<double> response,
                                            std::vector<std::string> component_labels) {
  std::vector<std::string> labels;
  labels.reserve(components.size());
  for (int c : components) {
    if (c < 0 || c >= static_cast<int>(component_labels.size()))
      throw InputError("component index out of range");
    labels.push_back(component_labels[c]);
  }
  SpatialDataset out(dim, std::move(coords), labels, std::move(response));
  // Keep labels that no observation uses.
  out.labels_ = std::move(component_labels);
  out.component_ = std::move(components);
  return out;
}

std::vector<std::size_t> SpatialDataset::component_sizes() const {
  std::vector<std::size_t> sizes(labels_.size(), 0);
  for (int c : component_) ++sizes[c];
  return sizes;
}

double SpatialDataset::component_mean(int c) const {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i)
    if (component_[i] == c) {
      s += response_[i];
      ++n;
    }
  return n ? s / n : 0.0;
}

double SpatialDataset::component_variance(int c) const {
  const double m = component_mean(c);
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i)
    if (component_[i] == c) {
      s += (response_[i] - m) * (response_[i] - m);
      ++n;
    }
  return n > 1 ? s / (n - 1) : 0.0;
}

double SpatialDataset::bounding_diameter() const {
  if (size() == 0) return 0.0;
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) {
    double lo = coords_[k], hi = coords_[k];
    for (std::size_t i = 0; i < size(); ++i) {
      lo = std::min(lo, coords_[i * dim_ + k]);
      hi = std::max(hi, coords_[i * dim_ + k]);
    }
    s += (hi - lo) * (hi - lo);
  }
  return std::sqrt(s);
}

SpatialDataset SpatialDataset::component_subset(int c) const {
  std::vector<double> coords;
  std::vector<std::string> labels;
  std::vector<double> response;
  for (std::size_t i = 0; i < size(); ++i) {
    if (component_[i] != c) continue;
    auto loc = location(i);
    coords.insert(coords.end(), loc.begin(), loc.end());
    labels.push_back(labels_[c]);
    response.push_back(response_[i]);
  }
  return SpatialDataset(dim_, std::move(coords), labels, std::move(response), coord_names_);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "NULL";
}

std::optional<double> parse_number(const std::string& s) {
  if (is_missing(s)) return std::nullopt;
  double v = 0.0;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

LoadReport load_dataset(const std::filesystem::path& path, const ColumnSpec& columns) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + " is empty");
  const auto header = split_csv_line(line);
  auto find_column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("column '" + name + "' not found in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  if (columns.x_cols.empty()) throw InputError("at least one coordinate column is required");
  std::vector<std::size_t> x_idx;
  for (const auto& c : columns.x_cols) x_idx.push_back(find_column(c));
  const std::size_t comp_idx = find_column(columns.component_col);
  const std::size_t resp_idx = find_column(columns.response_col);

  LoadReport report;
  const int dim = static_cast<int>(x_idx.size());
  std::vector<double> coords;
  std::vector<std::string> labels;
  std::vector<double> response;
  std::set<std::pair<std::vector<double>, std::string>> seen;
  std::vector<double> loc(static_cast<std::size_t>(dim));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++report.rows_read;
    const auto fields = split_csv_line(line);
    auto field = [&fields](std::size_t k) -> const std::string& {
      static const std::string empty;
      return k < fields.size() ? fields[k] : empty;
    };
    bool ok = true;
    for (int k = 0; k < dim && ok; ++k) {
      const auto v = parse_number(field(x_idx[k]));
      if (v) loc[k] = *v; else ok = false;
    }
    const auto value = parse_number(field(resp_idx));
    const std::string& label = field(comp_idx);
    if (!ok || !value || is_missing(label)) {
      ++report.missing_dropped;
      continue;
    }
    if (!seen.emplace(loc, label).second) {
      ++report.duplicates_removed;
      continue;
    }
    coords.insert(coords.end(), loc.begin(), loc.end());
    labels.push_back(label);
    response.push_back(*value);
  }
  if (response.empty()) throw InputError("no usable rows in " + path.string());
  report.dataset = SpatialDataset(dim, std::move(coords), labels, std::move(response),
                                  columns.x_cols);
  return report;
}

void write_dataset(const std::filesystem::path& path, const SpatialDataset& data,
                   const ColumnSpec& columns) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (static_cast<int>(columns.x_cols.size()) != data.dim())
    throw InputError("column spec does not match dataset dimension");
  for (const auto& c : columns.x_cols) out << c << ',';
  out << columns.component_col << ',' << columns.response_col << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.location(i)) out << v << ',';
    out << data.labels()[data.component(i)] << ',' << data.response(i) << '\n';
  }
}

}  // namespace mvmatern
