#include "mta/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "mta/errors.hpp"

namespace mta {

Layer Layer::linear(Mat w, Vec b) {
  if (w.rows != b.size())
    throw InvalidInput("linear layer: bias length does not match weight rows");
  if (w.rows == 0 || w.cols == 0)
    throw InvalidInput("linear layer: empty weight matrix");
  if (!all_finite(b)) throw InvalidInput("linear layer: non-finite bias");
  return Layer{LayerKind::Linear, std::move(w), std::move(b)};
}

Model::Model(std::size_t input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ == 0) throw InvalidInput("model: input_dim must be >= 1");
  if (layers_.empty()) throw InvalidInput("model: at least one layer required");
  std::size_t width = input_dim_;
  std::size_t linear_count = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.kind == LayerKind::Linear) {
      if (l.weights.cols != width) {
        std::ostringstream msg;
        msg << "model: layer " << i << " expects input width "
            << l.weights.cols << " but receives " << width;
        throw InvalidInput(msg.str());
      }
      width = l.weights.rows;
      ++linear_count;
    }
  }
  if (width < 2) throw InvalidInput("model: final width must be >= 2 classes");
  num_classes_ = width;
  globally_linear_ = (layers_.size() == 1 && linear_count == 1);
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec apply_layer(const Layer& l, const Vec& in) {
  switch (l.kind) {
    case LayerKind::Linear: {
      Vec out(l.weights.rows);
      for (std::size_t i = 0; i < l.weights.rows; ++i) {
        double s = l.bias[i];
        for (std::size_t j = 0; j < l.weights.cols; ++j)
          s += l.weights.at(i, j) * in[j];
        out[i] = s;
      }
      return out;
    }
    case LayerKind::Relu: {
      Vec out(in.size());
      for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
      return out;
    }
    case LayerKind::Sigmoid: {
      Vec out(in.size());
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = sigmoid(in[i]);
      return out;
    }
    case LayerKind::Tanh: {
      Vec out(in.size());
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
      return out;
    }
  }
  throw InvalidInput("model: unknown layer kind");
}

}  // namespace

Vec Model::forward(const Vec& input) const {
  if (input.size() != input_dim_)
    throw InvalidInput("forward: input dimension mismatch");
  Vec cur = input;
  for (const Layer& l : layers_) cur = apply_layer(l, cur);
  return cur;
}

Vec Model::input_gradient(const Vec& input, const Vec& logit_cotangent) const {
  if (input.size() != input_dim_)
    throw InvalidInput("input_gradient: input dimension mismatch");
  if (logit_cotangent.size() != num_classes_)
    throw InvalidInput("input_gradient: cotangent length mismatch");

  // Forward pass, keeping each layer's input for the backward rules.
  std::vector<Vec> inputs;
  inputs.reserve(layers_.size());
  Vec cur = input;
  for (const Layer& l : layers_) {
    inputs.push_back(cur);
    cur = apply_layer(l, cur);
  }

  Vec grad = logit_cotangent;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    const Vec& in = inputs[li];
    switch (l.kind) {
      case LayerKind::Linear: {
        Vec next(l.weights.cols, 0.0);
        for (std::size_t i = 0; i < l.weights.rows; ++i)
          for (std::size_t j = 0; j < l.weights.cols; ++j)
            next[j] += l.weights.at(i, j) * grad[i];
        grad = std::move(next);
        break;
      }
      case LayerKind::Relu:
        // Subgradient at 0 is fixed to 0 so repeated calls are bit-identical.
        for (std::size_t i = 0; i < in.size(); ++i)
          if (in[i] <= 0.0) grad[i] = 0.0;
        break;
      case LayerKind::Sigmoid:
        for (std::size_t i = 0; i < in.size(); ++i) {
          const double s = sigmoid(in[i]);
          grad[i] *= s * (1.0 - s);
        }
        break;
      case LayerKind::Tanh:
        for (std::size_t i = 0; i < in.size(); ++i) {
          const double t = std::tanh(in[i]);
          grad[i] *= 1.0 - t * t;
        }
        break;
    }
  }
  return grad;
}

namespace {

using nlohmann::json;

Layer layer_from_json(const json& j, std::size_t index) {
  std::ostringstream where;
  where << "layer " << index;
  if (!j.is_object() || !j.contains("type"))
    throw ParseError(where.str() + ": missing \"type\"");
  const std::string type = j.at("type").get<std::string>();
  if (type == "relu") return Layer::relu();
  if (type == "sigmoid") return Layer::sigmoid();
  if (type == "tanh") return Layer::tanh();
  if (type != "linear")
    throw ParseError(where.str() + ": unknown type \"" + type + "\"");

  if (!j.contains("weights") || !j.contains("bias"))
    throw ParseError(where.str() + ": linear layer needs weights and bias");
  const json& w = j.at("weights");
  if (!w.is_array() || w.empty())
    throw ParseError(where.str() + ": weights must be a non-empty array");
  const std::size_t rows = w.size();
  const std::size_t cols = w.at(0).size();
  Mat weights(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = w.at(i);
    if (!row.is_array() || row.size() != cols)
      throw ParseError(where.str() + ": ragged weight rows");
    for (std::size_t jj = 0; jj < cols; ++jj)
      weights.at(i, jj) = row.at(jj).get<double>();
  }
  Vec bias = j.at("bias").get<Vec>();
  if (bias.size() != rows)
    throw ParseError(where.str() + ": bias length " +
                     std::to_string(bias.size()) + " does not match " +
                     std::to_string(rows) + " output units");
  return Layer::linear(std::move(weights), std::move(bias));
}

}  // namespace

Model model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  if (!j.contains("input_dim") || !j.contains("layers"))
    throw ParseError("model file: missing input_dim or layers");
  const std::size_t input_dim = j.at("input_dim").get<std::size_t>();
  std::vector<Layer> layers;
  const json& jl = j.at("layers");
  for (std::size_t i = 0; i < jl.size(); ++i)
    layers.push_back(layer_from_json(jl.at(i), i));
  try {
    return Model(input_dim, std::move(layers));
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
}

std::string model_to_json_text(const Model& model) {
  json j;
  j["input_dim"] = model.input_dim();
  j["layers"] = json::array();
  for (const Layer& l : model.layers()) {
    json jl;
    switch (l.kind) {
      case LayerKind::Linear: {
        jl["type"] = "linear";
        json rows = json::array();
        for (std::size_t i = 0; i < l.weights.rows; ++i)
          rows.push_back(l.weights.row(i));
        jl["weights"] = std::move(rows);
        jl["bias"] = l.bias;
        break;
      }
      case LayerKind::Relu:
        jl["type"] = "relu";
        break;
      case LayerKind::Sigmoid:
        jl["type"] = "sigmoid";
        break;
      case LayerKind::Tanh:
        jl["type"] = "tanh";
        break;
    }
    j["layers"].push_back(std::move(jl));
  }
  return j.dump(2);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << model_to_json_text(model) << '\n';
}

}  // namespace mta
