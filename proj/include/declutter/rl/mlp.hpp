#pragma once

#include <Eigen/Core>

#include <vector>

namespace declutter::rl {

using Matrix = Eigen::MatrixXd;  // features x batch
using Vector = Eigen::VectorXd;

// Fully connected tanh network with a linear output layer. Parameters live in
// an external flat vector: per layer, W (out x in, column major) then b.
struct MlpShape {
  std::vector<int> sizes;  // input, hidden..., output

  int input() const { return sizes.front(); }
  int output() const { return sizes.back(); }
  std::size_t layers() const { return sizes.size() - 1; }
  std::size_t parameter_count() const;
  bool operator==(const MlpShape&) const = default;
};

struct MlpCache {
  std::vector<Matrix> activations;  // activations[0] = input, back() = output
};

// Writes Xavier-uniform weights and zero biases into params[0, parameter_count).
template <class Rng>
void init_mlp(const MlpShape& shape, double* params, Rng& rng, double output_scale = 1.0);

Matrix mlp_forward(const MlpShape& shape, const double* params, const Matrix& x,
                   MlpCache* cache = nullptr);

// Accumulates dL/dparams into grad given dL/doutput; returns dL/dinput.
Matrix mlp_backward(const MlpShape& shape, const double* params, const MlpCache& cache,
                    const Matrix& grad_output, double* grad);

}  // namespace declutter::rl

#include <cmath>
#include <random>

namespace declutter::rl {

template <class Rng>
void init_mlp(const MlpShape& shape, double* params, Rng& rng, double output_scale) {
  std::size_t off = 0;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const int in = shape.sizes[l], out = shape.sizes[l + 1];
    double limit = std::sqrt(6.0 / (in + out));
    if (l + 1 == shape.layers()) limit *= output_scale;
    std::uniform_real_distribution<double> u(-limit, limit);
    for (int i = 0; i < in * out; ++i) params[off++] = u(rng);
    for (int i = 0; i < out; ++i) params[off++] = 0.0;
  }
}

}  // namespace declutter::rl
