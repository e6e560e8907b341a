#include "declutter/rl/mlp.hpp"

#include "declutter/error.hpp"

namespace declutter::rl {

std::size_t MlpShape::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
  return n;
}

Matrix mlp_forward(const MlpShape& shape, const double* params, const Matrix& x, MlpCache* cache) {
  if (x.rows() != shape.input()) throw ContractError("mlp_forward: input width mismatch");
  if (cache) {
    cache->activations.resize(shape.layers() + 1);
    cache->activations[0] = x;
  }
  Matrix h = x;
  std::size_t off = 0;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const int in = shape.sizes[l], out = shape.sizes[l + 1];
    Eigen::Map<const Matrix> w(params + off, out, in);
    off += static_cast<std::size_t>(in) * out;
    Eigen::Map<const Vector> b(params + off, out);
    off += out;
    Matrix z = w * h;
    z.colwise() += b;
    if (l + 1 < shape.layers()) z = z.array().tanh().matrix();
    h = std::move(z);
    if (cache) cache->activations[l + 1] = h;
  }
  return h;
}

Matrix mlp_backward(const MlpShape& shape, const double* params, const MlpCache& cache,
                    const Matrix& grad_output, double* grad) {
  if (cache.activations.size() != shape.layers() + 1)
    throw ContractError("mlp_backward: cache does not match the network");
  std::vector<std::size_t> offsets(shape.layers());
  std::size_t off = 0;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(shape.sizes[l]) * shape.sizes[l + 1] + shape.sizes[l + 1];
  }
  Matrix g = grad_output;  // dL/dz of the current layer
  for (std::size_t li = shape.layers(); li-- > 0;) {
    const int in = shape.sizes[li], out = shape.sizes[li + 1];
    const std::size_t o = offsets[li];
    Eigen::Map<const Matrix> w(params + o, out, in);
    Eigen::Map<Matrix> gw(grad + o, out, in);
    Eigen::Map<Vector> gb(grad + o + static_cast<std::size_t>(in) * out, out);
    const Matrix& input = cache.activations[li];
    gw.noalias() += g * input.transpose();
    gb += g.rowwise().sum();
    Matrix gin = w.transpose() * g;
    if (li > 0) gin.array() *= 1.0 - input.array().square();
    g = std::move(gin);
  }
  return g;
}

}  // namespace declutter::rl
