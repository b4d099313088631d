#include "edmp/multimodality.hpp"

#include <cmath>
#include <stdexcept>

namespace edmp::multimodality {

namespace {

void check_batch(std::span<const Trajectory> batch) {
  if (batch.size() < 2) throw std::invalid_argument("multimodality: batch needs at least two trajectories");
  for (const Trajectory& x : batch)
    if (x.rows() != batch[0].rows() || x.cols() != batch[0].cols())
      throw std::invalid_argument("multimodality: trajectories differ in shape");
}

struct Unit {
  std::vector<Trajectory> u;
  std::vector<double> norm;
};

Unit unit_vectors(std::span<const Trajectory> batch) {
  Unit out;
  for (const Trajectory& x : batch) {
    const double n = x.norm();
    out.norm.push_back(n);
    out.u.push_back(n > 0.0 ? Trajectory(x / n) : Trajectory(Trajectory::Zero(x.rows(), x.cols())));
  }
  return out;
}

Eigen::MatrixXd similarity(const Unit& unit) {
  const auto b = static_cast<Eigen::Index>(unit.u.size());
  Eigen::MatrixXd c(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < b; ++j) {
      const double s = unit.u[i].cwiseProduct(unit.u[j]).sum();
      c(i, j) = c(j, i) = s;
    }
  }
  return c;
}

}  // namespace

Eigen::MatrixXd cosine_similarity(std::span<const Trajectory> batch) {
  check_batch(batch);
  return similarity(unit_vectors(batch));
}

double literal_contrastive_loss(std::span<const Trajectory> batch) {
  Eigen::MatrixXd c = cosine_similarity(batch);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) loss -= std::log(c(i, i));
  return loss;
}

Cost multimodality_cost(std::span<const Trajectory> batch, double temperature) {
  check_batch(batch);
  if (!(temperature > 0.0)) throw std::invalid_argument("multimodality: temperature must be positive");
  const Unit unit = unit_vectors(batch);
  const Eigen::MatrixXd c = similarity(unit);
  const Eigen::Index b = c.rows();

  Cost out;
  // dJ/dC = (P - I) / temperature, P the row softmax.
  Eigen::MatrixXd g(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    Eigen::VectorXd z = c.row(i).transpose() / temperature;
    const double zmax = z.maxCoeff();
    const Eigen::VectorXd e = (z.array() - zmax).exp().matrix();
    const double sum = e.sum();
    out.value += std::log(sum) + zmax - z(i);
    g.row(i) = (e / sum).transpose() / temperature;
    g(i, i) -= 1.0 / temperature;
  }

  out.gradient.reserve(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    Trajectory du = Trajectory::Zero(batch[0].rows(), batch[0].cols());
    if (unit.norm[i] > 0.0) {
      for (Eigen::Index j = 0; j < b; ++j)
        if (j != i) du += (g(i, j) + g(j, i)) * unit.u[j];
      const double radial = du.cwiseProduct(unit.u[i]).sum();
      du = (du - radial * unit.u[i]) / unit.norm[i];
    }
    out.gradient.push_back(std::move(du));
  }
  return out;
}

}  // namespace edmp::multimodality
