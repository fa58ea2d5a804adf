#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "meso/fem/mesh.hpp"

namespace meso::dns {

/// Time-stamped nodal snapshots of one species on a structured mesh.
class FieldSeries {
 public:
  FieldSeries(fem::StructuredMesh mesh, std::string name) : mesh_(mesh), name_(std::move(name)) {}

  const fem::StructuredMesh& mesh() const noexcept { return mesh_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  const std::vector<double>& times() const noexcept { return times_; }
  double time(std::size_t n) const { return times_.at(n); }
  const Eigen::VectorXd& snapshot(std::size_t n) const { return snaps_.at(n); }
  const Eigen::VectorXd& back() const { return snaps_.back(); }

  /// Throws ShapeError on a size mismatch and DataError when t does not increase.
  void append(double t, Eigen::VectorXd values);

 private:
  fem::StructuredMesh mesh_;
  std::string name_;
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> snaps_;
};

/// Writes snapshot_NNNNN.csv (columns x, y, one per species) and times.csv into `dir`.
/// All series must share mesh and times. Returns the written paths in order.
std::vector<std::filesystem::path> write_series(const std::vector<const FieldSeries*>& species,
                                                const std::filesystem::path& dir);

/// Inverse of write_series for the given species names.
std::vector<FieldSeries> read_series(const fem::StructuredMesh& mesh, const std::vector<std::string>& names,
                                     const std::filesystem::path& dir);

}  // namespace meso::dns
