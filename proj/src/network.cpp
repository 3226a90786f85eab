#include "hybreach/network.hpp"

#include "hybreach/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hybreach {

std::string_view to_string(Activation a) {
  return a == Activation::ReLU ? "relu" : "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "identity") return Activation::Identity;
  throw Error(ErrorKind::Parse, "unknown activation '" + std::string(name) + "'");
}

FeedforwardNetwork::FeedforwardNetwork(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorKind::EmptyNetwork, "network has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    if (layer.weights.rows() < 1 || layer.weights.cols() < 1) {
      throw Error(ErrorKind::DimensionChain, "layer " + std::to_string(k) + " has an empty weight matrix");
    }
    if (layer.bias.size() != layer.weights.rows()) {
      throw Error(ErrorKind::DimensionChain, "layer " + std::to_string(k) + " bias length " +
                                                 std::to_string(layer.bias.size()) + " != rows " +
                                                 std::to_string(layer.weights.rows()));
    }
    if (k > 0 && layer.weights.cols() != layers_[k - 1].weights.rows()) {
      throw Error(ErrorKind::DimensionChain, "layer " + std::to_string(k) + " expects " +
                                                 std::to_string(layer.weights.cols()) + " inputs, previous layer has " +
                                                 std::to_string(layers_[k - 1].weights.rows()) + " outputs");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw Error(ErrorKind::NonFinite, "layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
  if (layers_.back().activation != Activation::Identity) {
    throw Error(ErrorKind::InvalidArgument, "output layer must use the identity activation");
  }
}

std::vector<Eigen::Index> FeedforwardNetwork::hidden_widths() const {
  std::vector<Eigen::Index> widths;
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) widths.push_back(layers_[k].weights.rows());
  return widths;
}

Vector FeedforwardNetwork::eval(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "network input has dimension " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(input_dim()));
  }
  Vector a = x;
  for (const auto& layer : layers_) {
    Vector z = layer.weights * a + layer.bias;
    if (layer.activation == Activation::ReLU) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

bool operator==(const FeedforwardNetwork& a, const FeedforwardNetwork& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t k = 0; k < a.layers_.size(); ++k) {
    const auto& la = a.layers_[k];
    const auto& lb = b.layers_[k];
    if (la.activation != lb.activation || la.weights.rows() != lb.weights.rows() ||
        la.weights.cols() != lb.weights.cols() || la.weights != lb.weights || la.bias != lb.bias) {
      return false;
    }
  }
  return true;
}

nlohmann::json to_json(const FeedforwardNetwork& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) row.push_back(layer.weights(i, j));
      rows.push_back(std::move(row));
    }
    layers.push_back({{"weights", std::move(rows)},
                      {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())},
                      {"activation", to_string(layer.activation)}});
  }
  return {{"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

FeedforwardNetwork network_from_json(const nlohmann::json& doc) {
  try {
    const auto input_dim = doc.at("input_dim").get<Eigen::Index>();
    const auto& layer_docs = doc.at("layers");
    if (!layer_docs.is_array()) throw Error(ErrorKind::Parse, "'layers' must be an array");
    if (layer_docs.empty()) throw Error(ErrorKind::EmptyNetwork, "network has no layers");

    std::vector<Layer> layers;
    for (const auto& ld : layer_docs) {
      const auto rows = ld.at("weights").get<std::vector<std::vector<double>>>();
      const auto bias = ld.at("bias").get<std::vector<double>>();
      Layer layer;
      const auto n_rows = static_cast<Eigen::Index>(rows.size());
      const auto n_cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
      layer.weights.resize(n_rows, n_cols);
      for (Eigen::Index i = 0; i < n_rows; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n_cols) {
          throw Error(ErrorKind::DimensionChain, "ragged weight matrix");
        }
        for (Eigen::Index j = 0; j < n_cols; ++j) layer.weights(i, j) = row[static_cast<std::size_t>(j)];
      }
      layer.bias = Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size()));
      layer.activation = activation_from_string(ld.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    if (layers.front().weights.cols() != input_dim) {
      throw Error(ErrorKind::DimensionChain, "first layer has " + std::to_string(layers.front().weights.cols()) +
                                                 " inputs but input_dim is " + std::to_string(input_dim));
    }
    return FeedforwardNetwork(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

FeedforwardNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open network file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return network_from_json(doc);
}

void save_network(const FeedforwardNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Parse, "cannot write network file " + path.string());
  out << to_json(net).dump(2) << '\n';
}

FeedforwardNetwork zero_network(Eigen::Index input_dim, Eigen::Index output_dim,
                                const std::vector<Eigen::Index>& hidden) {
  std::vector<Layer> layers;
  Eigen::Index prev = input_dim;
  for (auto w : hidden) {
    layers.push_back({Matrix::Zero(w, prev), Vector::Zero(w), Activation::ReLU});
    prev = w;
  }
  layers.push_back({Matrix::Zero(output_dim, prev), Vector::Zero(output_dim), Activation::Identity});
  return FeedforwardNetwork(std::move(layers));
}

FeedforwardNetwork affine_network(const Matrix& gain, const Vector& offset) {
  return FeedforwardNetwork({Layer{gain, offset, Activation::Identity}});
}

}  // namespace hybreach
