#include "cls/enchead.hpp"

#include <cmath>
#include <numeric>

#include "cls/error.hpp"
#include "cls/models.hpp"
#include "cls/rng.hpp"

namespace cls {
namespace {

struct Forward {
  std::vector<Eigen::MatrixXd> pre;   // z_l
  std::vector<Eigen::MatrixXd> post;  // a_l, post[0] = input
};

Forward run_forward(const Mlp& mlp, const Eigen::MatrixXd& x) {
  Forward f;
  f.post.push_back(x);
  for (const auto& layer : mlp.layers()) {
    Eigen::MatrixXd z = f.post.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    f.post.push_back(z.cwiseMax(0.0));
    f.pre.push_back(std::move(z));
  }
  return f;
}

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    s.row(i).array() -= s.row(i).maxCoeff();
    s.row(i) = s.row(i).array().exp();
    s.row(i) /= s.row(i).sum();
  }
  return s;
}

Eigen::Index head_size(const SoftmaxLayer& head) { return head.weight.size() + head.bias.size(); }

ModelSpec head_spec(const TaskKind& task) {
  return ModelSpec{task.type() == TaskType::Binary ? Algorithm::LogReg : Algorithm::MultinomLogReg, {}};
}

void require_all_classes(const Dataset& data, const char* name) {
  const auto counts = data.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    require(counts[c] > 0, std::string("encoder-head: class ") + std::to_string(c) + " is missing from " + name);
  }
}

}  // namespace

void EncoderConfig::validate() const {
  require(!widths.empty(), "encoder: at least one hidden layer is required");
  for (int w : widths) require(w >= 1, "encoder: layer widths must be >= 1");
  require(epochs >= 1, "encoder: epochs must be >= 1");
  require(step_size > 0 && std::isfinite(step_size), "encoder: step size must be positive");
  require(batch_size >= 1, "encoder: batch size must be >= 1");
  require(folds >= 2, "encoder: baseline needs at least two folds");
}

Mlp::Mlp(int input_dim, const std::vector<int>& widths, std::uint64_t seed) : input_dim_(input_dim) {
  require(input_dim >= 1, "encoder: input dimension must be >= 1");
  Rng rng(seed, 0x3E7);
  int fan_in = input_dim;
  for (int width : widths) {
    require(width >= 1, "encoder: layer widths must be >= 1");
    Layer layer{Eigen::MatrixXd(width, fan_in), Eigen::VectorXd::Zero(width)};
    const double sd = std::sqrt(2.0 / fan_in);  // He initialization for ReLU
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = rng.normal(0.0, sd);
    }
    layers_.push_back(std::move(layer));
    fan_in = width;
  }
}

int Mlp::output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }

Eigen::MatrixXd Mlp::embed(const Eigen::MatrixXd& x) const {
  require(x.cols() == input_dim_, "encoder: expected " + std::to_string(input_dim_) + " features, got " +
                                      std::to_string(x.cols()));
  return run_forward(*this, x).post.back();
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::Index total = 0;
  for (const auto& l : layers_) total += l.weight.size() + l.bias.size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (const auto& l : layers_) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  for (auto& l : layers_) {
    require(at + l.weight.size() + l.bias.size() <= flat.size(), "encoder: parameter vector too short");
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
  require(at == flat.size(), "encoder: parameter vector has the wrong length");
}

double joint_loss(const Mlp& encoder, const SoftmaxLayer& head, const Eigen::MatrixXd& x,
                  const Eigen::VectorXd& labels, Eigen::VectorXd* gradient) {
  require(x.rows() == labels.size() && x.rows() > 0, "joint_loss: rows and labels disagree");
  const Forward f = run_forward(encoder, x);
  const Eigen::MatrixXd& emb = f.post.back();
  Eigen::MatrixXd scores = emb * head.weight.transpose();
  scores.rowwise() += head.bias.transpose();
  const Eigen::MatrixXd prob = softmax_rows(scores);
  const auto n = static_cast<double>(x.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    loss -= std::log(std::max(prob(i, static_cast<Eigen::Index>(labels[i])), 1e-300));
  }
  loss /= n;
  if (gradient == nullptr) return loss;

  Eigen::MatrixXd ds = prob;
  for (Eigen::Index i = 0; i < x.rows(); ++i) ds(i, static_cast<Eigen::Index>(labels[i])) -= 1.0;
  ds /= n;
  const Eigen::MatrixXd dhead = ds.transpose() * emb;
  const Eigen::VectorXd dbias = ds.colwise().sum().transpose();
  Eigen::MatrixXd da = ds * head.weight;

  const auto& layers = encoder.layers();
  std::vector<Eigen::MatrixXd> dw(layers.size());
  std::vector<Eigen::VectorXd> db(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Eigen::MatrixXd dz = da.cwiseProduct((f.pre[l].array() > 0.0).cast<double>().matrix());
    dw[l] = dz.transpose() * f.post[l];
    db[l] = dz.colwise().sum().transpose();
    if (l > 0) da = dz * layers[l].weight;
  }
  const Eigen::VectorXd enc = encoder.parameters();
  gradient->resize(enc.size() + head_size(head));
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    gradient->segment(at, dw[l].size()) = dw[l].reshaped();
    at += dw[l].size();
    gradient->segment(at, db[l].size()) = db[l];
    at += db[l].size();
  }
  gradient->segment(at, dhead.size()) = dhead.reshaped();
  at += dhead.size();
  gradient->segment(at, dbias.size()) = dbias;
  return loss;
}

Dataset Embedding::embed(const Dataset& data) const { return {(*this)(data.features()), data.labels(), data.task()}; }

EncoderTraining train_joint_encoder(const EncoderConfig& config, const Dataset& target_train,
                                    const Dataset& source_train) {
  config.validate();
  require(target_train.task() == source_train.task(), "encoder: target and source must share a label space");
  require(target_train.task().is_classification(), "encoder: encoder-head CLS needs a classification task",
          ErrorKind::UnsupportedTask);
  require(target_train.cols() == source_train.cols(), "encoder: target and source feature dimensions differ");
  const Dataset all = concat(target_train, source_train);
  const int k = all.task().num_classes();

  auto encoder = std::make_shared<Mlp>(all.cols(), config.widths, config.seed);
  Rng rng(config.seed, 0xEC0);
  SoftmaxLayer head{Eigen::MatrixXd(k, encoder->output_dim()), Eigen::VectorXd::Zero(k)};
  const double sd = std::sqrt(1.0 / encoder->output_dim());
  for (Eigen::Index c = 0; c < head.weight.cols(); ++c) {
    for (Eigen::Index r = 0; r < head.weight.rows(); ++r) head.weight(r, c) = rng.normal(0.0, sd);
  }

  EncoderTraining out{Embedding(encoder), {}};
  std::vector<std::size_t> order(all.rows());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const Eigen::Index enc_size = encoder->parameters().size();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(stop - start), all.cols());
      Eigen::VectorXd yb(static_cast<Eigen::Index>(stop - start));
      for (std::size_t r = start; r < stop; ++r) {
        xb.row(static_cast<Eigen::Index>(r - start)) = all.features().row(static_cast<Eigen::Index>(order[r]));
        yb[static_cast<Eigen::Index>(r - start)] = all.labels()[static_cast<Eigen::Index>(order[r])];
      }
      Eigen::VectorXd grad;
      const double loss = joint_loss(*encoder, head, xb, yb, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        fail(ErrorKind::Numeric, "encoder: training diverged at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss * static_cast<double>(stop - start);
      encoder->set_parameters(encoder->parameters() - config.step_size * grad.head(enc_size));
      Eigen::Index at = enc_size;
      head.weight.reshaped() -= config.step_size * grad.segment(at, head.weight.size());
      at += head.weight.size();
      head.bias -= config.step_size * grad.segment(at, head.bias.size());
    }
    out.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  // The temporary head goes out of scope here; only the encoder is kept.
  return out;
}

EncHeadResult cls_enc_head(const EncoderConfig& config, const Dataset& target_train, const Dataset& target_test,
                           const Dataset& source_train, const Dataset& source_test, double gamma1, double gamma2) {
  require(target_test.task() == target_train.task() && source_test.task() == source_train.task(),
          "encoder-head: train and test splits must share a task");
  require_all_classes(target_train, "the target training split");
  require_all_classes(source_train, "the source training split");
  const EncoderTraining training = train_joint_encoder(config, target_train, source_train);
  const Embedding& emb = training.embedding;

  const ModelSpec spec = head_spec(target_train.task());
  const Dataset et_train = emb.embed(target_train);
  const Dataset es_train = emb.embed(source_train);
  const FittedModel head_t = fit(spec, et_train);
  const FittedModel head_s = fit(spec, es_train);

  EncHeadResult out;
  out.epoch_losses = training.epoch_losses;
  out.e_t = mean_loss(predict(head_s, emb(target_test.features())), target_test.labels(), LossKind::ZeroOne);
  out.e_s = mean_loss(predict(head_t, emb(source_test.features())), source_test.labels(), LossKind::ZeroOne);
  out.cls = 0.5 * (out.e_t + out.e_s);

  // e0 is the target head on held-out target rows; the encoder has seen target-train, so CV there is optimistic.
  // Only SE(e0) comes from k-fold CV of the head on frozen target-train embeddings.
  out.e0 = mean_loss(predict(head_t, emb(target_test.features())), target_test.labels(), LossKind::ZeroOne);
  const FoldPlan folds = make_folds(et_train, config.folds, derive_seed(config.seed, 0xF0));
  out.se_e0 = cv_error(spec, et_train, folds, LossKind::ZeroOne).se;
  out.thresholds = thresholds(out.e0, out.se_e0, gamma1, gamma2);
  out.zone = classify(out.cls, out.thresholds);
  return out;
}

}  // namespace cls
