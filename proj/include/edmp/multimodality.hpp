#pragma once

// Batch diversity cost. C is the pairwise cosine similarity of flattened
// trajectories and the cost is the cross entropy between the row softmax of
// C / temperature and the identity:
//
//   J = sum_i -log softmax(C_i / temperature)_i
//
// Identical trajectories make every row uniform (large J); spread-out batches
// concentrate each row on its diagonal (small J).

#include "edmp/chain.hpp"

#include <span>
#include <vector>

namespace edmp::multimodality {

inline constexpr double kTemperature = 0.1;

// Diagonal is exactly 1. Pairs involving a zero-norm trajectory are 0.
Eigen::MatrixXd cosine_similarity(std::span<const Trajectory> batch);

// -sum_ij I_ij log C_ij, evaluated literally.
double literal_contrastive_loss(std::span<const Trajectory> batch);

struct Cost {
  double value = 0.0;
  std::vector<Trajectory> gradient;  // dJ/dx_i, one per trajectory
};

// Throws std::invalid_argument when the batch has fewer than two members or
// mixed shapes.
Cost multimodality_cost(std::span<const Trajectory> batch, double temperature = kTemperature);

}  // namespace edmp::multimodality
