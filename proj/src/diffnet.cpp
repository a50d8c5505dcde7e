#include "fbpinn/diffnet.hpp"

#include <algorithm>
#include <cstring>
#include <random>
#include <stdexcept>

#include <Eigen/Core>

#if defined(FBPINN_HAVE_LIBMVEC)
#include <emmintrin.h>
extern "C" __m128d _ZGVbN2v_tanh(__m128d); // glibc libmvec, SSE2 variant
#endif

namespace fbpinn::diffnet {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;

void tanh_inplace(double* a, std::size_t n) {
  std::size_t q = 0;
#if defined(FBPINN_HAVE_LIBMVEC)
  for (; q + 2 <= n; q += 2) _mm_storeu_pd(a + q, _ZGVbN2v_tanh(_mm_loadu_pd(a + q)));
#endif
  for (; q < n; ++q) a[q] = std::tanh(a[q]);
}

} // namespace

MlpParams::MlpParams(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("network needs at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    LayerShape shape;
    shape.in = sizes_[l];
    shape.out = sizes_[l + 1];
    shape.weight_offset = offset;
    offset += static_cast<std::size_t>(shape.in) * shape.out;
    shape.bias_offset = offset;
    offset += shape.out;
    layers_.push_back(shape);
  }
  values_.assign(offset, 0.0);
}

std::span<double> MlpParams::weights(std::size_t layer) {
  const auto& s = layers_.at(layer);
  return std::span<double>(values_).subspan(s.weight_offset, std::size_t(s.in) * s.out);
}
std::span<const double> MlpParams::weights(std::size_t layer) const {
  const auto& s = layers_.at(layer);
  return std::span<const double>(values_).subspan(s.weight_offset, std::size_t(s.in) * s.out);
}
std::span<double> MlpParams::bias(std::size_t layer) {
  const auto& s = layers_.at(layer);
  return std::span<double>(values_).subspan(s.bias_offset, s.out);
}
std::span<const double> MlpParams::bias(std::size_t layer) const {
  const auto& s = layers_.at(layer);
  return std::span<const double>(values_).subspan(s.bias_offset, s.out);
}

bool MlpParams::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool bitwise_equal(const MlpParams& a, const MlpParams& b) noexcept {
  if (!a.same_shape(b)) return false;
  const auto va = a.values();
  const auto vb = b.values();
  return std::memcmp(va.data(), vb.data(), va.size_bytes()) == 0;
}

std::vector<int> mlp_layer_sizes(int hidden_layers, int hidden_width) {
  if (hidden_layers < 1 || hidden_width < 1)
    throw std::invalid_argument("hidden_layers and hidden_width must be positive");
  std::vector<int> sizes{1};
  sizes.insert(sizes.end(), hidden_layers, hidden_width);
  sizes.push_back(1);
  return sizes;
}

MlpParams init_params(const std::vector<int>& layer_sizes, unsigned long long seed) {
  if (layer_sizes.empty()) throw std::invalid_argument("empty layer_sizes");
  if (layer_sizes.front() != 1 || layer_sizes.back() != 1)
    throw std::invalid_argument("networks map R -> R: layer_sizes must start and end with 1");
  MlpParams params(layer_sizes);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < params.layers().size(); ++l) {
    const auto& s = params.layers()[l];
    const double limit = std::sqrt(6.0 / double(s.in + s.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : params.weights(l)) w = dist(rng);
  }
  return params;
}

void zero(ParamGradient& grad) {
  std::fill(grad.values().begin(), grad.values().end(), 0.0);
}

void Workspace::reserve(const MlpParams& params, std::size_t n) {
  points = n;
  const auto& layers = params.layers();
  state.resize(layers.size());
  pre_tangent.resize(layers.size());
  std::size_t widest = 1;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    state[l].resize(std::size_t(layers[l].out) * 2 * n);
    pre_tangent[l].resize(std::size_t(layers[l].out) * n);
    widest = std::max<std::size_t>({widest, std::size_t(layers[l].out), std::size_t(layers[l].in)});
  }
  adjoint.resize(widest * 2 * n);
  adjoint_prev.resize(widest * 2 * n);
  seed_value.resize(n);
  seed_dvalue.resize(n);
}

// Each layer acts on the stacked block [values | input tangents] (units x 2n),
// so one matrix product carries both the forward pass and its x-derivative.
void forward_batch(const MlpParams& params, std::span<const double> x_hat, Workspace& ws) {
  const std::size_t n = x_hat.size();
  const auto ni = static_cast<Eigen::Index>(n);
  ws.reserve(params, n);
  const auto& layers = params.layers();
  const std::size_t last = layers.size() - 1;

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const int in = layers[l].in;
    const int out = layers[l].out;
    const auto w = params.weights(l);
    const auto b = params.bias(l);
    RowMatrixMap s(ws.state[l].data(), out, 2 * ni);

    if (l == 0) {
      // Input row is [x_hat | 1].
      for (int o = 0; o < out; ++o) {
        const double wk = w[std::size_t(o)];
        double* row = s.row(o).data();
        for (std::size_t p = 0; p < n; ++p) {
          row[p] = b[o] + wk * x_hat[p];
          row[n + p] = wk;
        }
      }
    } else {
      ConstRowMatrixMap wm(w.data(), out, in);
      ConstRowMatrixMap prev(ws.state[l - 1].data(), in, 2 * ni);
      s.noalias() = wm * prev;
      for (int o = 0; o < out; ++o) s.row(o).head(ni).array() += b[o];
    }

    if (l == last) continue;
    for (int o = 0; o < out; ++o) {
      double* a = s.row(o).data();
      double* t = a + n;
      double* ta = ws.pre_tangent[l].data() + std::size_t(o) * n;
      std::copy(t, t + n, ta);
      tanh_inplace(a, n);
      for (std::size_t p = 0; p < n; ++p) t[p] = (1.0 - a[p] * a[p]) * ta[p];
    }
  }
}

void backward_batch(const MlpParams& params, std::span<const double> x_hat, Workspace& ws,
                    ParamGradient& grad) {
  const std::size_t n = x_hat.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const auto& layers = params.layers();
  const std::size_t last = layers.size() - 1;

  std::copy(ws.seed_value.begin(), ws.seed_value.begin() + n, ws.adjoint.begin());
  std::copy(ws.seed_dvalue.begin(), ws.seed_dvalue.begin() + n, ws.adjoint.begin() + n);

  for (std::size_t l = layers.size(); l-- > 0;) {
    const int in = layers[l].in;
    const int out = layers[l].out;
    RowMatrixMap adj(ws.adjoint.data(), out, 2 * ni);

    if (l != last) {
      // z = tanh(a), t = (1 - z^2) ta: map [bar z | bar t] to [bar a | bar ta].
      for (int o = 0; o < out; ++o) {
        double* bz = adj.row(o).data();
        double* bt = bz + n;
        const double* z = ws.state[l].data() + std::size_t(o) * 2 * n;
        const double* ta = ws.pre_tangent[l].data() + std::size_t(o) * n;
        for (std::size_t p = 0; p < n; ++p) {
          const double g = 1.0 - z[p] * z[p];
          const double t_bar = bt[p];
          bt[p] = t_bar * g;
          bz[p] = (bz[p] - 2.0 * z[p] * ta[p] * t_bar) * g;
        }
      }
    }

    auto gw = grad.weights(l);
    auto gb = grad.bias(l);
    for (int o = 0; o < out; ++o) gb[o] += adj.row(o).head(ni).sum();

    if (l == 0) {
      for (int o = 0; o < out; ++o) {
        const double* ba = adj.row(o).data();
        double sw = 0.0;
        for (std::size_t p = 0; p < n; ++p) sw += ba[p] * x_hat[p] + ba[n + p];
        gw[std::size_t(o)] += sw;
      }
      break;
    }

    ConstRowMatrixMap prev(ws.state[l - 1].data(), in, 2 * ni);
    RowMatrixMap gwm(gw.data(), out, in);
    gwm.noalias() += adj * prev.transpose();

    ConstRowMatrixMap wm(params.weights(l).data(), out, in);
    RowMatrixMap adj_prev(ws.adjoint_prev.data(), in, 2 * ni);
    adj_prev.noalias() = wm.transpose() * adj;
    std::swap(ws.adjoint, ws.adjoint_prev);
  }
}

void eval_batch(const MlpParams& params, std::span<const double> x_hat, std::span<double> value,
                std::span<double> dvalue_dx, Workspace& ws) {
  if (value.size() != x_hat.size() || dvalue_dx.size() != x_hat.size())
    throw std::invalid_argument("eval_batch: output spans must match input size");
  forward_batch(params, x_hat, ws);
  const auto& out = ws.state.back();
  const std::size_t n = x_hat.size();
  std::copy(out.begin(), out.begin() + n, value.begin());
  std::copy(out.begin() + n, out.begin() + 2 * n, dvalue_dx.begin());
}

EvalResult eval_with_input_derivative(const MlpParams& params, double x_hat) {
  Workspace ws;
  const double x[1] = {x_hat};
  forward_batch(params, x, ws);
  return forward_output(ws, 0);
}

} // namespace fbpinn::diffnet
