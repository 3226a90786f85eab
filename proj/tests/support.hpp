#pragma once

#include "hybreach/dynamics.hpp"
#include "hybreach/geometry.hpp"
#include "hybreach/network.hpp"

#include <filesystem>
#include <random>

namespace hytest {

using hybreach::HyperRect;
using hybreach::Matrix;
using hybreach::Vector;

inline std::filesystem::path data_dir() { return HYBREACH_DATA_DIR; }
inline std::filesystem::path config_dir() { return HYBREACH_CONFIG_DIR; }

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline HyperRect box(std::initializer_list<double> lo, std::initializer_list<double> hi) { return {vec(lo), vec(hi)}; }

// Operating region and control limits of the shipped double-integrator setup.
inline hybreach::LtiSystem fixture_system() {
  return hybreach::double_integrator(box({-10, -10}, {10, 10}), box({-1}, {1}));
}

inline hybreach::FeedforwardNetwork fixture_policy() {
  return hybreach::load_network(data_dir() / "double_integrator_policy.json");
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector sample_in(std::mt19937_64& rng, const HyperRect& r) {
  Vector x(r.dim());
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = uniform(rng, r.lower()[k], r.upper()[k]);
  return x;
}

// Random ReLU net with `layers` affine maps (the last one affine), widths in [1, max_width].
inline hybreach::FeedforwardNetwork random_net(std::mt19937_64& rng, Eigen::Index in, Eigen::Index out, int layers,
                                               int max_width, bool all_identity = false) {
  std::vector<hybreach::Layer> ls;
  Eigen::Index prev = in;
  for (int l = 0; l < layers; ++l) {
    const bool last = l == layers - 1;
    const Eigen::Index width = last ? out : std::uniform_int_distribution<Eigen::Index>(1, max_width)(rng);
    hybreach::Layer layer;
    layer.weights = Matrix(width, prev);
    layer.bias = Vector(width);
    for (Eigen::Index r = 0; r < width; ++r) {
      for (Eigen::Index c = 0; c < prev; ++c) layer.weights(r, c) = uniform(rng, -1.5, 1.5);
      layer.bias[r] = uniform(rng, -1.0, 1.0);
    }
    layer.activation = (last || all_identity) ? hybreach::Activation::Identity : hybreach::Activation::ReLU;
    ls.push_back(std::move(layer));
    prev = width;
  }
  return hybreach::FeedforwardNetwork(std::move(ls));
}

}  // namespace hytest
