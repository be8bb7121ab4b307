#ifndef MTA_MODEL_HPP
#define MTA_MODEL_HPP

#include <string>
#include <vector>

#include "mta/numerics.hpp"

namespace mta {

enum class LayerKind { Linear, Relu, Sigmoid, Tanh };

struct Layer {
  LayerKind kind;
  Mat weights;  // linear only, C_out x C_in
  Vec bias;     // linear only, C_out

  static Layer linear(Mat w, Vec b);
  static Layer relu() { return Layer{LayerKind::Relu, {}, {}}; }
  static Layer sigmoid() { return Layer{LayerKind::Sigmoid, {}, {}}; }
  static Layer tanh() { return Layer{LayerKind::Tanh, {}, {}}; }
};

// Small feedforward classifier. Immutable after construction; forward and
// input_gradient are re-entrant on shared instances.
class Model {
 public:
  Model(std::size_t input_dim, std::vector<Layer> layers);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // True iff the model is exactly one linear layer and nothing else.
  // Structural predicate, never inferred numerically.
  bool globally_linear() const { return globally_linear_; }

  Vec forward(const Vec& input) const;

  // Reverse accumulation of J^T c for a logit cotangent c. Any surrogate
  // loss composes on top by supplying its own logit gradient.
  Vec input_gradient(const Vec& input, const Vec& logit_cotangent) const;

 private:
  std::size_t input_dim_;
  std::size_t num_classes_;
  std::vector<Layer> layers_;
  bool globally_linear_;
};

Model load_model(const std::string& path);
void save_model(const Model& model, const std::string& path);

Model model_from_json_text(const std::string& text);
std::string model_to_json_text(const Model& model);

}  // namespace mta

#endif  // MTA_MODEL_HPP
