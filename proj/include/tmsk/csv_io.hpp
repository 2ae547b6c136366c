#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "tmsk/gm_kernels.hpp"
#include "tmsk/kriging.hpp"
#include "tmsk/sparse_designs.hpp"
#include "tmsk/sparse_matrix.hpp"

namespace tmsk {

// Header l_1..l_d,i_1..i_d,x_1..x_d; x in user coordinates.
void write_grid_csv(const std::string& path, const TruncatedSparseGrid& grid, const DomainMap& domain);
// Reads the (l, i) columns; coordinates are recomputed from them.
TruncatedSparseGrid read_grid_csv(const std::string& path);

struct Observations {
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::size_t> reps;
  bool from_replications = false;
};

/// Long format "point_id,rep_index,value" or summary format
/// "point_id,mean,variance,m", chosen by the header. point_id is the
/// 0-based design row.
Observations read_observations_csv(const std::string& path, std::size_t n);

// One point per row, d columns; a non-numeric first line is a header.
std::vector<std::vector<double>> read_points_csv(const std::string& path, std::size_t d);

void write_predictions_csv(const std::string& path, const std::vector<std::vector<double>>& xs,
                           const std::vector<Prediction>& preds);

void write_matrix_market(std::ostream& out, const SparseSymMatrix& m);
void write_matrix_market(const std::string& path, const SparseSymMatrix& m);

}  // namespace tmsk
