#pragma once

#include "hybreach/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace hybreach {

enum class Activation { ReLU, Identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// One affine map followed by a coordinate-wise activation.
struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::Identity;
};

/// Feedforward control policy. The last layer is affine (Identity activation).
class FeedforwardNetwork {
 public:
  explicit FeedforwardNetwork(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  Eigen::Index input_dim() const { return layers_.front().weights.cols(); }
  Eigen::Index output_dim() const { return layers_.back().weights.rows(); }

  /// Widths of all layers but the output layer.
  std::vector<Eigen::Index> hidden_widths() const;

  Vector eval(const Vector& x) const;

  friend bool operator==(const FeedforwardNetwork& a, const FeedforwardNetwork& b);

 private:
  std::vector<Layer> layers_;
};

nlohmann::json to_json(const FeedforwardNetwork& net);
FeedforwardNetwork network_from_json(const nlohmann::json& doc);

FeedforwardNetwork load_network(const std::filesystem::path& path);
void save_network(const FeedforwardNetwork& net, const std::filesystem::path& path);

/// Network computing pi(x) = 0 with the given hidden widths.
FeedforwardNetwork zero_network(Eigen::Index input_dim, Eigen::Index output_dim,
                                const std::vector<Eigen::Index>& hidden = {});

/// Single affine layer pi(x) = gain * x + offset.
FeedforwardNetwork affine_network(const Matrix& gain, const Vector& offset);

}  // namespace hybreach
