#include "hybreach/relaxation.hpp"

#include "hybreach/error.hpp"

#include <cmath>

namespace hybreach {

namespace {

void require_domain(const FeedforwardNetwork& net, const HyperRect& domain) {
  if (domain.dim() != net.input_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "relaxation domain has dimension " + std::to_string(domain.dim()) +
                                                  ", network expects " + std::to_string(net.input_dim()));
  }
}

// Linear planes bounding the pre-activation of layer `target` as a function of the input.
struct Planes {
  Matrix upper_weights;
  Vector upper_bias;
  Matrix lower_weights;
  Vector lower_bias;
};

// Substitutes a ReLU layer by its relaxation lines, picking the line for each
// coefficient by its sign (upper line for positive coefficients of an upper plane).
void absorb_relu(Matrix& coef, Vector& bias, const std::vector<ReluLines>& lines, bool upper_plane) {
  for (Eigen::Index j = 0; j < coef.cols(); ++j) {
    const auto& line = lines[static_cast<std::size_t>(j)];
    for (Eigen::Index r = 0; r < coef.rows(); ++r) {
      const double lambda = coef(r, j);
      const bool use_upper = (lambda >= 0.0) == upper_plane;
      const double slope = use_upper ? line.upper_slope : line.lower_slope;
      const double intercept = use_upper ? line.upper_intercept : line.lower_intercept;
      bias[r] += lambda * intercept;
      coef(r, j) = lambda * slope;
    }
  }
}

Planes backward_pass(const FeedforwardNetwork& net, std::size_t target,
                     const std::vector<std::vector<ReluLines>>& lines) {
  const auto& layers = net.layers();
  Planes p{layers[target].weights, layers[target].bias, layers[target].weights, layers[target].bias};
  for (std::size_t i = target; i-- > 0;) {
    const auto& layer = layers[i];
    if (layer.activation == Activation::ReLU) {
      absorb_relu(p.upper_weights, p.upper_bias, lines[i], true);
      absorb_relu(p.lower_weights, p.lower_bias, lines[i], false);
    }
    p.upper_bias += p.upper_weights * layer.bias;
    p.upper_weights = p.upper_weights * layer.weights;
    p.lower_bias += p.lower_weights * layer.bias;
    p.lower_weights = p.lower_weights * layer.weights;
  }
  return p;
}

}  // namespace

ReluLines relu_relaxation(double l, double u) {
  if (!(l <= u)) {
    throw Error(ErrorKind::InvalidArgument, "relu_relaxation needs l <= u, got l=" + std::to_string(l) +
                                                " u=" + std::to_string(u));
  }
  if (l >= 0.0) return {1.0, 0.0, 1.0, 0.0};
  if (u <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  const double slope = u / (u - l);
  ReluLines lines;
  lines.upper_slope = slope;
  lines.upper_intercept = -l * slope;
  lines.lower_slope = u >= -l ? 1.0 : 0.0;
  lines.lower_intercept = 0.0;
  return lines;
}

void concretize(const Matrix& weights, const Vector& bias, const HyperRect& box, Vector& lower, Vector& upper) {
  const Matrix pos = weights.cwiseMax(0.0);
  const Matrix neg = weights.cwiseMin(0.0);
  upper = pos * box.upper() + neg * box.lower() + bias;
  lower = pos * box.lower() + neg * box.upper() + bias;
}

PreActBounds interval_propagate(const FeedforwardNetwork& net, const HyperRect& domain) {
  require_domain(net, domain);
  PreActBounds out;
  Vector lo = domain.lower();
  Vector hi = domain.upper();
  for (const auto& layer : net.layers()) {
    Vector zl, zu;
    concretize(layer.weights, layer.bias, HyperRect(lo, hi), zl, zu);
    out.lower.push_back(zl);
    out.upper.push_back(zu);
    if (layer.activation == Activation::ReLU) {
      lo = zl.cwiseMax(0.0);
      hi = zu.cwiseMax(0.0);
    } else {
      lo = std::move(zl);
      hi = std::move(zu);
    }
  }
  return out;
}

AffineBounds crown_bounds(const FeedforwardNetwork& net, const HyperRect& domain, PreActBounds& preact) {
  require_domain(net, domain);
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();

  preact.lower.clear();
  preact.upper.clear();
  std::vector<std::vector<ReluLines>> lines(depth);

  Planes planes;
  for (std::size_t k = 0; k < depth; ++k) {
    planes = backward_pass(net, k, lines);
    Vector lo, hi, unused;
    concretize(planes.upper_weights, planes.upper_bias, domain, unused, hi);
    concretize(planes.lower_weights, planes.lower_bias, domain, lo, unused);
    // Rounding can leave lo a hair above hi on exactly-determined neurons.
    lo = lo.cwiseMin(hi);
    if (layers[k].activation == Activation::ReLU) {
      auto& layer_lines = lines[k];
      layer_lines.reserve(static_cast<std::size_t>(lo.size()));
      for (Eigen::Index j = 0; j < lo.size(); ++j) layer_lines.push_back(relu_relaxation(lo[j], hi[j]));
    }
    preact.lower.push_back(std::move(lo));
    preact.upper.push_back(std::move(hi));
  }

  // The concrete output range also respects interval arithmetic, which is occasionally tighter.
  const PreActBounds ibp = interval_propagate(net, domain);
  Vector out_lo = preact.lower.back().cwiseMax(ibp.lower.back());
  Vector out_hi = preact.upper.back().cwiseMin(ibp.upper.back());
  out_lo = out_lo.cwiseMin(out_hi);
  AffineBounds out{planes.upper_weights, planes.upper_bias, planes.lower_weights, planes.lower_bias,
                   domain, std::move(out_lo), std::move(out_hi)};
  if (!out.upper_weights.allFinite() || !out.lower_weights.allFinite() || !out.upper_bias.allFinite() ||
      !out.lower_bias.allFinite()) {
    throw Error(ErrorKind::Numerical, "relaxation produced non-finite coefficients");
  }
  return out;
}

AffineBounds crown_bounds(const FeedforwardNetwork& net, const HyperRect& domain) {
  PreActBounds preact;
  return crown_bounds(net, domain, preact);
}

}  // namespace hybreach
