#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "cls/dataset.hpp"
#include "cls/zones.hpp"

namespace cls {

struct EncoderConfig {
  std::vector<int> widths = {32, 16};
  int epochs = 100;
  double step_size = 0.01;
  int batch_size = 32;
  int folds = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// ReLU multilayer perceptron; the embedding is the last hidden layer.
class Mlp {
 public:
  struct Layer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
  };

  Mlp(int input_dim, const std::vector<int>& widths, std::uint64_t seed);

  [[nodiscard]] Eigen::MatrixXd embed(const Eigen::MatrixXd& x) const;
  [[nodiscard]] int input_dim() const { return input_dim_; }
  [[nodiscard]] int output_dim() const;
  [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }

  /// All weights and biases, layer by layer (weights column-major, then bias).
  [[nodiscard]] Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

 private:
  int input_dim_;
  std::vector<Layer> layers_;
};

/// Softmax layer on top of the encoder, used as the temporary joint head.
struct SoftmaxLayer {
  Eigen::MatrixXd weight;  // K x d
  Eigen::VectorXd bias;
};

/// Mean cross-entropy of head(encoder(x)) and, when requested, its gradient
/// with respect to the encoder parameters (Mlp::parameters order) followed by
/// the head weights and bias.
double joint_loss(const Mlp& encoder, const SoftmaxLayer& head, const Eigen::MatrixXd& x,
                  const Eigen::VectorXd& labels, Eigen::VectorXd* gradient = nullptr);

/// Immutable, shareable embedding map R^p -> R^{last width}.
class Embedding {
 public:
  explicit Embedding(std::shared_ptr<const Mlp> encoder) : encoder_(std::move(encoder)) {}
  [[nodiscard]] Eigen::MatrixXd operator()(const Eigen::MatrixXd& x) const { return encoder_->embed(x); }
  [[nodiscard]] Dataset embed(const Dataset& data) const;
  [[nodiscard]] const Mlp& encoder() const { return *encoder_; }

 private:
  std::shared_ptr<const Mlp> encoder_;
};

struct EncoderTraining {
  Embedding embedding;
  /// Mean training loss per epoch.
  std::vector<double> epoch_losses;
};

/// Trains the encoder jointly on target_train + source_train with a temporary
/// softmax head that is discarded afterwards.
EncoderTraining train_joint_encoder(const EncoderConfig& config, const Dataset& target_train,
                                    const Dataset& source_train);

struct EncHeadResult {
  double cls = 0.0;
  /// Source head on target test embeddings.
  double e_t = 0.0;
  /// Target head on source test embeddings.
  double e_s = 0.0;
  /// Target head on target test embeddings.
  double e0 = 0.0;
  /// k-fold CV standard error of the target head on target-train embeddings.
  double se_e0 = 0.0;
  ZoneThresholds thresholds;
  Zone zone = Zone::Ambiguous;
  std::vector<double> epoch_losses;
};

EncHeadResult cls_enc_head(const EncoderConfig& config, const Dataset& target_train, const Dataset& target_test,
                           const Dataset& source_train, const Dataset& source_test, double gamma1 = 1.0,
                           double gamma2 = 5.0);

}  // namespace cls
