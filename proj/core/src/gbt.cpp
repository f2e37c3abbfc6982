// Newton-boosted regression trees on logistic (binary) or squared loss.
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cls/error.hpp"
#include "models_internal.hpp"

namespace cls::detail {
namespace {

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

using Tree = std::vector<Node>;

double tree_value(const Tree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  int at = 0;
  while (tree[static_cast<std::size_t>(at)].feature >= 0) {
    const Node& node = tree[static_cast<std::size_t>(at)];
    at = x[node.feature] < node.threshold ? node.left : node.right;
  }
  return tree[static_cast<std::size_t>(at)].value;
}

class Ensemble : public Scorer {
 public:
  Ensemble(double base, std::vector<Tree> trees, bool classify)
      : base_(base), trees_(std::move(trees)), classify_(classify) {}

  [[nodiscard]] Eigen::VectorXd decision(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), base_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (const Tree& tree : trees_) out[i] += tree_value(tree, x.row(i));
    }
    return out;
  }
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd d = decision(x);
    if (!classify_) return d;
    return (d.array() > 0.0).cast<double>();
  }

 private:
  double base_;
  std::vector<Tree> trees_;
  bool classify_;
};

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double point_loss(double margin, double y, bool classify) {
  if (!classify) return 0.5 * (margin - y) * (margin - y);
  const double softplus = margin > 0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  return softplus - y * margin;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, int max_depth) : x_(x), max_depth_(max_depth) {
    const auto n = static_cast<std::size_t>(x.rows());
    order_.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      auto& idx = order_[static_cast<std::size_t>(f)];
      idx.resize(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
      });
    }
  }

  // Grows one tree on gradients g / hessians h; leaf values are -G/H, and
  // `leaf_of` receives each row's leaf index.
  Tree build(const std::vector<double>& g, const std::vector<double>& h, std::vector<int>& leaf_of) {
    Tree tree;
    leaf_of.assign(g.size(), 0);
    tree.push_back(Node{});
    grow(tree, 0, 0, g, h, leaf_of);
    return tree;
  }

 private:
  void grow(Tree& tree, int node, int depth, const std::vector<double>& g, const std::vector<double>& h,
            std::vector<int>& leaf_of) {
    double gsum = 0.0;
    double hsum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (leaf_of[i] == node) gsum += g[i], hsum += h[i];
    }
    tree[static_cast<std::size_t>(node)].value = hsum > 0 ? -gsum / hsum : 0.0;
    if (depth >= max_depth_ || hsum <= 0) return;

    const double parent = gsum * gsum / hsum;
    double best_gain = 1e-12 * std::max(1.0, parent);
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t f = 0; f < order_.size(); ++f) {
      double gl = 0.0;
      double hl = 0.0;
      std::size_t prev = g.size();
      for (std::size_t i : order_[f]) {
        if (leaf_of[i] != node) continue;
        if (prev != g.size()) {
          const double xa = x_(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(f));
          const double xb = x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
          const double hr = hsum - hl;
          if (xb > xa && hl > kMinHessian && hr > kMinHessian) {
            const double gr = gsum - gl;
            const double gain = gl * gl / hl + gr * gr / hr - parent;
            if (gain > best_gain) {
              best_gain = gain;
              best_feature = static_cast<int>(f);
              best_threshold = 0.5 * (xa + xb);
            }
          }
        }
        gl += g[i];
        hl += h[i];
        prev = i;
      }
    }
    if (best_feature < 0) return;

    const int left = static_cast<int>(tree.size());
    const int right = left + 1;
    tree.push_back(Node{});
    tree.push_back(Node{});
    Node& parent_node = tree[static_cast<std::size_t>(node)];
    parent_node.feature = best_feature;
    parent_node.threshold = best_threshold;
    parent_node.left = left;
    parent_node.right = right;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (leaf_of[i] != node) continue;
      leaf_of[i] = x_(static_cast<Eigen::Index>(i), best_feature) < best_threshold ? left : right;
    }
    grow(tree, left, depth + 1, g, h, leaf_of);
    grow(tree, right, depth + 1, g, h, leaf_of);
  }

  static constexpr double kMinHessian = 1e-10;
  const Eigen::MatrixXd& x_;
  int max_depth_;
  std::vector<std::vector<std::size_t>> order_;
};

FitResult fit_gbt_single(const TrainingData& data, const Hyperparameters& hp, bool classify) {
  const auto n = static_cast<std::size_t>(data.x.rows());
  const double wsum = data.w.sum();
  auto wy = [&](std::size_t i) { return data.w[static_cast<Eigen::Index>(i)]; };
  auto yy = [&](std::size_t i) { return data.y[static_cast<Eigen::Index>(i)]; };

  double base = 0.0;
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += wy(i) * yy(i);
    const double m = acc / wsum;
    if (!classify) {
      base = m;
    } else {
      const double clamped = std::clamp(m, 1e-6, 1.0 - 1e-6);
      base = std::log(clamped / (1.0 - clamped));
    }
  }
  std::vector<double> margin(n, base);
  auto total_loss = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += wy(i) * point_loss(margin[i], yy(i), classify);
    return acc / wsum;
  };

  TrainingSummary summary;
  summary.objective_trace.push_back(total_loss());
  TreeBuilder builder(data.x, hp.depth);
  std::vector<Tree> trees;
  std::vector<double> g(n), h(n);
  std::vector<int> leaf_of;
  for (int round = 0; round < hp.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (classify) {
        const double prob = sigmoid(margin[i]);
        g[i] = wy(i) * (prob - yy(i));
        h[i] = wy(i) * prob * (1.0 - prob);
      } else {
        g[i] = wy(i) * (margin[i] - yy(i));
        h[i] = wy(i);
      }
    }
    Tree tree = builder.build(g, h, leaf_of);
    // Shrink each leaf, halving it further if it would raise that leaf's loss.
    for (std::size_t leaf = 0; leaf < tree.size(); ++leaf) {
      Node& node = tree[leaf];
      if (node.feature >= 0) continue;
      double step = hp.learning_rate * node.value;
      double before = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (leaf_of[i] == static_cast<int>(leaf)) before += wy(i) * point_loss(margin[i], yy(i), classify);
      }
      for (int halving = 0; halving < 40; ++halving) {
        double after = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (leaf_of[i] == static_cast<int>(leaf)) after += wy(i) * point_loss(margin[i] + step, yy(i), classify);
        }
        if (after <= before) break;
        step *= 0.5;
        if (halving == 39) step = 0.0;
      }
      node.value = step;
      for (std::size_t i = 0; i < n; ++i) {
        if (leaf_of[i] == static_cast<int>(leaf)) margin[i] += step;
      }
    }
    trees.push_back(std::move(tree));
    summary.objective_trace.push_back(total_loss());
    summary.iterations = round + 1;
  }
  summary.final_objective = summary.objective_trace.back();
  return {std::make_shared<Ensemble>(base, std::move(trees), classify), summary};
}

}  // namespace

FitResult fit_gbt(const TrainingData& data, const Hyperparameters& hp) {
  if (data.classes == 0) return fit_gbt_single(data, hp, false);
  if (data.classes == 2) return fit_gbt_single(data, hp, true);
  return fit_one_vs_rest(data, [&](const TrainingData& sub) { return fit_gbt_single(sub, hp, true); });
}

}  // namespace cls::detail
