#include "hybreach/fixture.hpp"

#include "hybreach/error.hpp"
#include "hybreach/lp.hpp"
#include "hybreach/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace hybreach {

namespace {

// Portable draws: the standard distributions are not bit-identical across libraries.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

void certified_output_range(const FeedforwardNetwork& net, const HyperRect& region, int cells, Vector& lower,
                            Vector& upper) {
  if (cells < 1) throw Error(ErrorKind::InvalidArgument, "certify_cells must be >= 1");
  std::vector<int> counts(static_cast<std::size_t>(region.dim()), cells);
  lower = Vector::Constant(net.output_dim(), kInfinity);
  upper = Vector::Constant(net.output_dim(), -kInfinity);
  for (const auto& cell : uniform_partition(region, counts)) {
    const auto b = crown_bounds(net, cell);
    lower = lower.cwiseMin(b.output_lower);
    upper = upper.cwiseMax(b.output_upper);
  }
}

FeedforwardNetwork make_fixture_policy(const PolicyRecipe& recipe) {
  const auto nx = recipe.state_region.dim();
  const auto nu = recipe.control_region.dim();
  if (recipe.gain.rows() != nu || recipe.gain.cols() != nx) {
    throw Error(ErrorKind::DimensionMismatch, "policy gain must be n_u x n_x");
  }
  if (recipe.hidden.empty()) throw Error(ErrorKind::InvalidArgument, "fixture policy needs a hidden layer");
  if (((recipe.control_region.lower().array() >= 0.0) || (recipe.control_region.upper().array() <= 0.0)).any()) {
    throw Error(ErrorKind::InvalidArgument, "control limits must contain 0 in their interior");
  }

  Draws draws(recipe.seed);
  std::vector<Layer> layers;
  Eigen::Index prev = nx;
  for (std::size_t k = 0; k < recipe.hidden.size(); ++k) {
    const auto width = recipe.hidden[k];
    const double w_scale = k == 0 ? recipe.first_layer_scale : 1.0 / std::sqrt(static_cast<double>(prev));
    const double b_scale = k == 0 ? recipe.first_bias_scale : 0.5;
    Layer layer{Matrix(width, prev), Vector(width), Activation::ReLU};
    for (Eigen::Index i = 0; i < width; ++i) {
      for (Eigen::Index j = 0; j < prev; ++j) layer.weights(i, j) = draws.normal() * w_scale;
      layer.bias[i] = draws.normal() * b_scale;
    }
    layers.push_back(std::move(layer));
    prev = width;
  }

  // Least-squares output layer on [features, 1].
  const int n = recipe.fit_samples;
  Matrix features(n, prev + 1);
  Matrix targets(n, nu);
  const Vector lo = recipe.state_region.lower();
  const Vector width = recipe.state_region.widths();
  for (int s = 0; s < n; ++s) {
    Vector x(nx);
    for (Eigen::Index k = 0; k < nx; ++k) x[k] = lo[k] + draws.uniform() * width[k];
    Vector a = x;
    for (const auto& layer : layers) a = (layer.weights * a + layer.bias).cwiseMax(0.0);
    features.row(s).head(prev) = a.transpose();
    features(s, prev) = 1.0;
    const Vector u = (recipe.gain * x)
                         .cwiseMax(recipe.control_region.lower())
                         .cwiseMin(recipe.control_region.upper());
    targets.row(s) = u.transpose();
  }
  const Matrix gram = features.transpose() * features + 1e-8 * Matrix::Identity(prev + 1, prev + 1);
  const Matrix fit = gram.ldlt().solve(features.transpose() * targets);  // (prev+1) x nu
  layers.push_back({fit.topRows(prev).transpose(), fit.row(prev).transpose(), Activation::Identity});
  FeedforwardNetwork net(layers);

  Vector out_lo, out_hi;
  certified_output_range(net, recipe.state_region, recipe.certify_cells, out_lo, out_hi);
  double scale = 1.0;
  for (Eigen::Index j = 0; j < nu; ++j) {
    if (out_hi[j] > recipe.control_region.upper()[j]) scale = std::min(scale, recipe.control_region.upper()[j] / out_hi[j]);
    if (out_lo[j] < recipe.control_region.lower()[j]) scale = std::min(scale, recipe.control_region.lower()[j] / out_lo[j]);
  }
  if (scale < 1.0) {
    layers.back().weights *= scale;
    layers.back().bias *= scale;
  }
  return FeedforwardNetwork(std::move(layers));
}

}  // namespace hybreach
