#include <cmath>
#include <limits>

#include "cobb/error.hpp"
#include "cobb/regressors.hpp"
#include "cobb/rng.hpp"

namespace cobb {

namespace {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Forward {
  Matrix hidden;  // n x h activations
  Vector output;  // n
};

Forward forward_pass(const Matrix& X, const MlpState& p) {
  Forward f;
  f.hidden = ((X * p.w1.transpose()).rowwise() + p.b1.transpose())
                 .unaryExpr([](double v) { return logistic(v); });
  f.output = (f.hidden * p.w2).array() + p.b2;
  return f;
}

}  // namespace

namespace detail {

MlpGradient mlp_loss_gradient(const Matrix& X, const Vector& y,
                              const MlpState& p, double l2_alpha) {
  const double n = static_cast<double>(X.rows());
  const Forward f = forward_pass(X, p);
  const Vector err = f.output - y;

  MlpGradient g;
  g.loss = err.squaredNorm() / (2.0 * n) +
           l2_alpha * (p.w1.squaredNorm() + p.w2.squaredNorm()) / (2.0 * n);

  const Vector delta_out = err / n;                       // dL/d(output_i)
  g.gw2 = f.hidden.transpose() * delta_out + (l2_alpha / n) * p.w2;
  g.gb2 = delta_out.sum();

  // n x h back-propagated error through the logistic derivative a(1-a).
  const Matrix delta_hidden =
      (delta_out * p.w2.transpose()).cwiseProduct(
          f.hidden.cwiseProduct(Matrix::Ones(f.hidden.rows(), f.hidden.cols()) -
                                f.hidden));
  g.gw1 = delta_hidden.transpose() * X + (l2_alpha / n) * p.w1;
  g.gb1 = delta_hidden.colwise().sum().transpose();
  return g;
}

}  // namespace detail

TrainedModel fit_mlp(const Matrix& X, const Vector& y,
                     const RegressorSpec& spec, std::uint64_t seed) {
  if (X.rows() != y.size()) {
    throw Error(errc::width, "fit_mlp: X rows != y length");
  }
  if (X.rows() == 0) {
    throw Error(errc::schema, "fit_mlp: empty training set");
  }
  const MlpParams& hp = spec.mlp;
  const Eigen::Index d = X.cols();
  const int h = hp.hidden;

  // Glorot-uniform weights drawn row-major from the model seed, biases zero.
  Rng rng(seed);
  MlpState p;
  p.w1.resize(h, d);
  const double bound1 = std::sqrt(6.0 / static_cast<double>(d + h));
  for (int i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      p.w1(i, j) = (2.0 * rng.next_uniform() - 1.0) * bound1;
    }
  }
  p.w2.resize(h);
  const double bound2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  for (int i = 0; i < h; ++i) {
    p.w2(i) = (2.0 * rng.next_uniform() - 1.0) * bound2;
  }
  p.b1 = Vector::Zero(h);
  p.b2 = 0.0;

  // Full-batch Adam, constant step, bias-corrected moments.
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Matrix m_w1 = Matrix::Zero(h, d), v_w1 = Matrix::Zero(h, d);
  Vector m_b1 = Vector::Zero(h), v_b1 = Vector::Zero(h);
  Vector m_w2 = Vector::Zero(h), v_w2 = Vector::Zero(h);
  double m_b2 = 0.0, v_b2 = 0.0;

  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;
  int epoch = 0;
  double loss = 0.0;

  for (; epoch < hp.max_iter; ++epoch) {
    const detail::MlpGradient g = detail::mlp_loss_gradient(X, y, p, hp.l2_alpha);
    loss = g.loss;
    if (!std::isfinite(loss)) {
      throw Error(errc::fit, "fit_mlp: loss diverged to non-finite");
    }

    if (loss > best_loss - hp.improvement_tol) {
      if (++stall >= hp.n_iter_no_change) break;
    } else {
      stall = 0;
    }
    best_loss = std::min(best_loss, loss);

    const double t = static_cast<double>(epoch + 1);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    auto adam = [&](auto& theta, auto& m, auto& v, const auto& grad) {
      m = beta1 * m + (1.0 - beta1) * grad;
      v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
      theta.array() -=
          hp.learning_rate_init * (m.array() / bc1) /
          ((v.array() / bc2).sqrt() + eps);
    };
    adam(p.w1, m_w1, v_w1, g.gw1);
    adam(p.b1, m_b1, v_b1, g.gb1);
    adam(p.w2, m_w2, v_w2, g.gw2);
    m_b2 = beta1 * m_b2 + (1.0 - beta1) * g.gb2;
    v_b2 = beta2 * v_b2 + (1.0 - beta2) * g.gb2 * g.gb2;
    p.b2 -= hp.learning_rate_init * (m_b2 / bc1) /
            (std::sqrt(v_b2 / bc2) + eps);
  }

  p.epochs_run = epoch;
  p.final_loss = loss;

  TrainedModel m;
  m.spec = spec;
  m.seed = seed;
  m.n_features = static_cast<int>(d);
  m.state = std::move(p);
  return m;
}

}  // namespace cobb
