#include "stance/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stance/error.hpp"

namespace stance {

namespace {

using detail::Node;

std::size_t normalize_axis(std::ptrdiff_t axis, std::size_t rank, const char* op) {
  const auto r = static_cast<std::ptrdiff_t>(rank);
  const std::ptrdiff_t a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for rank " + std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

// outer × axis × inner decomposition of a shape.
struct AxisView {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

// Returns the repeat count of `b` over `a`: 1 for equal shapes, or the
// leading-dim product when b's shape is a suffix of a's.
std::size_t broadcast_reps(const Shape& a, const Shape& b, const char* op) {
  if (a == b) return 1;
  if (b.size() < a.size() && std::equal(b.begin(), b.end(), a.end() - b.size())) {
    return numel(a) / numel(b);
  }
  throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(b) + " onto " +
                   to_string(a));
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) {
    throw ShapeError("matmul: operands must have rank >= 2, got " + to_string(a.shape()) +
                     " and " + to_string(b.shape()));
  }
  const std::size_t m = a.dim(-2), n = a.dim(-1), p = b.dim(-1);
  if (b.dim(-2) != n) {
    throw ShapeError("matmul: cannot contract " + to_string(a.shape()) + " with " +
                     to_string(b.shape()));
  }
  const Shape a_batch(a.shape().begin(), a.shape().end() - 2);
  const Shape b_batch(b.shape().begin(), b.shape().end() - 2);
  Shape out_batch;
  std::size_t a_stride = m * n, b_stride = n * p;
  if (a_batch == b_batch) {
    out_batch = a_batch;
  } else if (b_batch.empty()) {
    out_batch = a_batch;
    b_stride = 0;
  } else if (a_batch.empty()) {
    out_batch = b_batch;
    a_stride = 0;
  } else {
    throw ShapeError("matmul: batch dims differ between " + to_string(a.shape()) + " and " +
                     to_string(b.shape()));
  }
  const std::size_t batch = numel(out_batch);
  Shape out_shape = out_batch;
  out_shape.push_back(m);
  out_shape.push_back(p);

  std::vector<double> out(batch * m * p, 0.0);
  const auto A = a.data();
  const auto B = b.data();
  for (std::size_t t = 0; t < batch; ++t) {
    const double* pa = A.data() + t * a_stride;
    const double* pb = B.data() + t * b_stride;
    double* pc = out.data() + t * m * p;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double aik = pa[i * n + k];
        for (std::size_t j = 0; j < p; ++j) pc[i * p + j] += aik * pb[k * p + j];
      }
    }
  }

  auto grad_fn = [batch, m, n, p, a_stride, b_stride](Node& self) {
    Node& na = parent(self, 0);
    Node& nb = parent(self, 1);
    const double* dc = self.grad.data();
    if (na.requires_grad) {
      auto& da = na.ensure_grad();
      for (std::size_t t = 0; t < batch; ++t) {
        const double* pb = nb.value.data() + t * b_stride;
        double* pda = da.data() + t * a_stride;
        const double* pdc = dc + t * m * p;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < p; ++j) acc += pdc[i * p + j] * pb[k * p + j];
            pda[i * n + k] += acc;
          }
      }
    }
    if (nb.requires_grad) {
      auto& db = nb.ensure_grad();
      for (std::size_t t = 0; t < batch; ++t) {
        const double* pa = na.value.data() + t * a_stride;
        double* pdb = db.data() + t * b_stride;
        const double* pdc = dc + t * m * p;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t k = 0; k < n; ++k) {
            const double aik = pa[i * n + k];
            for (std::size_t j = 0; j < p; ++j) pdb[k * p + j] += aik * pdc[i * p + j];
          }
      }
    }
  };
  return Tensor::make_result(std::move(out_shape), std::move(out), {a, b}, grad_fn, "matmul");
}

Tensor transpose(const Tensor& x) {
  if (x.rank() < 2) throw ShapeError("transpose: rank must be >= 2, got " + to_string(x.shape()));
  const std::size_t r = x.dim(-2), c = x.dim(-1);
  const std::size_t batch = x.size() / (r * c);
  Shape out_shape = x.shape();
  std::swap(out_shape[out_shape.size() - 1], out_shape[out_shape.size() - 2]);
  std::vector<double> out(x.size());
  const auto X = x.data();
  for (std::size_t t = 0; t < batch; ++t)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) out[t * r * c + j * r + i] = X[t * r * c + i * c + j];
  auto grad_fn = [batch, r, c](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t t = 0; t < batch; ++t)
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          dx[t * r * c + i * c + j] += self.grad[t * r * c + j * r + i];
  };
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, grad_fn, "transpose");
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: " + to_string(x.shape()) + " -> " + to_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  auto grad_fn = [](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i];
  };
  return Tensor::make_result(std::move(shape), std::move(out), {x}, grad_fn, "reshape");
}

namespace {

// Shared driver for broadcasting binary ops. `f` computes the value, `da`
// and `db` the partial derivatives at (x, y).
template <typename F, typename DA, typename DB>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, F f, DA da_fn, DB db_fn) {
  const std::size_t reps = broadcast_reps(a.shape(), b.shape(), name);
  const std::size_t nb = b.size();
  const auto A = a.data();
  const auto B = b.data();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(A[i], B[i % nb]);
  auto grad_fn = [nb, reps, da_fn, db_fn](Node& self) {
    Node& na = parent(self, 0);
    Node& nb_node = parent(self, 1);
    const std::size_t n = self.grad.size();
    if (na.requires_grad) {
      auto& da = na.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        da[i] += self.grad[i] * da_fn(na.value[i], nb_node.value[i % nb]);
    }
    if (nb_node.requires_grad) {
      auto& db = nb_node.ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        db[i % nb] += self.grad[i] * db_fn(na.value[i], nb_node.value[i % nb]);
    }
    (void)reps;
  };
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, grad_fn, name);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor abs_diff(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "abs_diff", [](double x, double y) { return std::abs(x - y); },
      [](double x, double y) { return sign(x - y); },
      [](double x, double y) { return -sign(x - y); });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  auto grad_fn = [factor](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * self.grad[i];
  };
  return Tensor::make_result(x.shape(), std::move(out), {x}, grad_fn, "scale");
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.size());
  const auto X = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(X[i]);
  auto grad_fn = [](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double y = self.value[i];
      dx[i] += self.grad[i] * (1.0 - y * y);
    }
  };
  return Tensor::make_result(x.shape(), std::move(out), {x}, grad_fn, "tanh");
}

Tensor softmax(const Tensor& x, std::ptrdiff_t axis, std::span<const std::uint8_t> mask) {
  const std::size_t ax = normalize_axis(axis, x.rank(), "softmax");
  if (!mask.empty() && mask.size() != x.size()) {
    throw ShapeError("softmax: mask has " + std::to_string(mask.size()) +
                     " entries for input " + to_string(x.shape()));
  }
  const AxisView v = axis_view(x.shape(), ax);
  const auto X = x.data();
  std::vector<double> out(x.size(), 0.0);
  auto at = [&v](std::size_t o, std::size_t i, std::size_t in) {
    return (o * v.len + i) * v.inner + in;
  };
  auto keep = [&mask](std::size_t idx) { return mask.empty() || mask[idx] != 0; };
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t in = 0; in < v.inner; ++in) {
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < v.len; ++i) {
        const std::size_t idx = at(o, i, in);
        if (keep(idx)) max_logit = std::max(max_logit, X[idx]);
      }
      if (max_logit == -std::numeric_limits<double>::infinity()) continue;  // fully masked
      double total = 0.0;
      for (std::size_t i = 0; i < v.len; ++i) {
        const std::size_t idx = at(o, i, in);
        if (!keep(idx)) continue;
        out[idx] = std::exp(X[idx] - max_logit);
        total += out[idx];
      }
      for (std::size_t i = 0; i < v.len; ++i) out[at(o, i, in)] /= total;
    }
  }
  auto grad_fn = [v](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t in = 0; in < v.inner; ++in) {
        double dot = 0.0;
        for (std::size_t i = 0; i < v.len; ++i) {
          const std::size_t idx = (o * v.len + i) * v.inner + in;
          dot += self.value[idx] * self.grad[idx];
        }
        for (std::size_t i = 0; i < v.len; ++i) {
          const std::size_t idx = (o * v.len + i) * v.inner + in;
          dx[idx] += self.value[idx] * (self.grad[idx] - dot);
        }
      }
    }
  };
  return Tensor::make_result(x.shape(), std::move(out), {x}, grad_fn, "softmax");
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  auto grad_fn = [](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (double& g : dx) g += self.grad[0];
  };
  return Tensor::make_result({1}, {total}, {x}, grad_fn, "sum");
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor mean_pool(const Tensor& x, std::ptrdiff_t axis) {
  const std::size_t ax = normalize_axis(axis, x.rank(), "mean_pool");
  const AxisView v = axis_view(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  if (out_shape.empty()) out_shape.push_back(1);
  const auto X = x.data();
  std::vector<double> out(v.outer * v.inner, 0.0);
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t i = 0; i < v.len; ++i)
      for (std::size_t in = 0; in < v.inner; ++in)
        out[o * v.inner + in] += X[(o * v.len + i) * v.inner + in];
  const double inv = 1.0 / static_cast<double>(v.len);
  for (double& val : out) val *= inv;
  auto grad_fn = [v, inv](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t i = 0; i < v.len; ++i)
        for (std::size_t in = 0; in < v.inner; ++in)
          dx[(o * v.len + i) * v.inner + in] += inv * self.grad[o * v.inner + in];
  };
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, grad_fn, "mean_pool");
}

Tensor l2_normalize(const Tensor& x) {
  const std::size_t width = x.dim(-1);
  const std::size_t lanes = x.size() / width;
  const auto X = x.data();
  std::vector<double> out(x.size(), 0.0);
  std::vector<double> norms(lanes, 0.0);
  for (std::size_t l = 0; l < lanes; ++l) {
    double sq = 0.0;
    for (std::size_t j = 0; j < width; ++j) sq += X[l * width + j] * X[l * width + j];
    norms[l] = std::sqrt(sq);
    if (norms[l] < kNormEpsilon) continue;
    for (std::size_t j = 0; j < width; ++j) out[l * width + j] = X[l * width + j] / norms[l];
  }
  auto grad_fn = [width, lanes, norms](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t l = 0; l < lanes; ++l) {
      if (norms[l] < kNormEpsilon) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j)
        dot += self.value[l * width + j] * self.grad[l * width + j];
      for (std::size_t j = 0; j < width; ++j) {
        const std::size_t idx = l * width + j;
        dx[idx] += (self.grad[idx] - self.value[idx] * dot) / norms[l];
      }
    }
  };
  return Tensor::make_result(x.shape(), std::move(out), {x}, grad_fn, "l2_normalize");
}

Tensor concat(std::span<const Tensor> parts, std::ptrdiff_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  const std::size_t ax = normalize_axis(axis, first.size(), "concat");
  Shape out_shape = first;
  out_shape[ax] = 0;
  std::vector<std::size_t> lens;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == ax || s[i] == first[i];
    if (!ok) {
      throw ShapeError("concat: shape " + to_string(s) + " incompatible with " +
                       to_string(first) + " along axis " + std::to_string(axis));
    }
    lens.push_back(s[ax]);
    out_shape[ax] += s[ax];
  }
  const AxisView v = axis_view(out_shape, ax);
  std::vector<double> out(numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto P = parts[k].data();
    const std::size_t chunk = lens[k] * v.inner;
    for (std::size_t o = 0; o < v.outer; ++o)
      std::copy_n(P.begin() + static_cast<std::ptrdiff_t>(o * chunk), chunk,
                  out.begin() + static_cast<std::ptrdiff_t>(o * v.len * v.inner + offset));
    offset += chunk;
  }
  auto grad_fn = [v, lens](Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < lens.size(); ++k) {
      Node& np = parent(self, k);
      const std::size_t chunk = lens[k] * v.inner;
      if (np.requires_grad) {
        auto& dp = np.ensure_grad();
        for (std::size_t o = 0; o < v.outer; ++o)
          for (std::size_t i = 0; i < chunk; ++i)
            dp[o * chunk + i] += self.grad[o * v.len * v.inner + off + i];
      }
      off += chunk;
    }
  };
  return Tensor::make_result(std::move(out_shape), std::move(out),
                             std::vector<Tensor>(parts.begin(), parts.end()), grad_fn, "concat");
}

Tensor concat(std::initializer_list<Tensor> parts, std::ptrdiff_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice(const Tensor& x, std::ptrdiff_t axis, std::size_t start, std::size_t length) {
  const std::size_t ax = normalize_axis(axis, x.rank(), "slice");
  if (length == 0 || start + length > x.shape()[ax]) {
    throw ShapeError("slice: [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") out of range for " +
                     to_string(x.shape()) + " axis " + std::to_string(axis));
  }
  const AxisView v = axis_view(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape[ax] = length;
  const auto X = x.data();
  std::vector<double> out(numel(out_shape));
  const std::size_t chunk = length * v.inner;
  for (std::size_t o = 0; o < v.outer; ++o)
    std::copy_n(X.begin() + static_cast<std::ptrdiff_t>((o * v.len + start) * v.inner), chunk,
                out.begin() + static_cast<std::ptrdiff_t>(o * chunk));
  auto grad_fn = [v, start, chunk](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t i = 0; i < chunk; ++i)
        dx[(o * v.len + start) * v.inner + i] += self.grad[o * chunk + i];
  };
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, grad_fn, "slice");
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 2) throw ShapeError("linear: weight must be rank 2, got " + to_string(weight.shape()));
  if (x.rank() == 1) {
    const Tensor y = linear(reshape(x, {1, x.size()}), weight, bias);
    return reshape(y, {y.size()});
  }
  return add(matmul(x, weight), bias);
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ShapeError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factors(x.size());
  for (double& f : factors) f = rng.uniform() < rate ? 0.0 : keep_scale;
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
  auto grad_fn = [factors = std::move(factors)](Node& self) {
    auto& dx = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factors[i] * self.grad[i];
  };
  return Tensor::make_result(x.shape(), std::move(out), {x}, grad_fn, "dropout");
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows) {
  if (table.rank() != 2) throw ShapeError("gather_rows: table must be rank 2");
  const std::size_t n_rows = table.dim(0), width = table.dim(1);
  for (std::size_t r : rows) {
    if (r != kNoRow && r >= n_rows) {
      throw ShapeError("gather_rows: row " + std::to_string(r) + " out of range for " +
                       to_string(table.shape()));
    }
  }
  const auto T = table.data();
  std::vector<double> out(rows.size() * width, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] == kNoRow) continue;
    std::copy_n(T.begin() + static_cast<std::ptrdiff_t>(rows[i] * width), width,
                out.begin() + static_cast<std::ptrdiff_t>(i * width));
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  auto grad_fn = [idx = std::move(idx), width](Node& self) {
    auto& dt = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] == kNoRow) continue;
      for (std::size_t j = 0; j < width; ++j) dt[idx[i] * width + j] += self.grad[i * width + j];
    }
  };
  return Tensor::make_result({rows.size(), width}, std::move(out), {table}, grad_fn,
                             "gather_rows");
}

Tensor gather_mean(const Tensor& table, const std::vector<std::vector<std::size_t>>& groups) {
  if (table.rank() != 2) throw ShapeError("gather_mean: table must be rank 2");
  if (groups.empty()) throw ShapeError("gather_mean: no groups");
  const std::size_t n_rows = table.dim(0), width = table.dim(1);
  const auto T = table.data();
  std::vector<double> out(groups.size() * width, 0.0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    for (std::size_t r : groups[g]) {
      if (r >= n_rows) {
        throw ShapeError("gather_mean: row " + std::to_string(r) + " out of range for " +
                         to_string(table.shape()));
      }
      for (std::size_t j = 0; j < width; ++j) out[g * width + j] += T[r * width + j];
    }
    const double inv = 1.0 / static_cast<double>(groups[g].size());
    for (std::size_t j = 0; j < width; ++j) out[g * width + j] *= inv;
  }
  auto grad_fn = [groups, width](Node& self) {
    auto& dt = parent(self, 0).ensure_grad();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].empty()) continue;
      const double inv = 1.0 / static_cast<double>(groups[g].size());
      for (std::size_t r : groups[g])
        for (std::size_t j = 0; j < width; ++j) dt[r * width + j] += inv * self.grad[g * width + j];
    }
  };
  return Tensor::make_result({groups.size(), width}, std::move(out), {table}, grad_fn,
                             "gather_mean");
}

Tensor weighted_nll(const Tensor& probabilities, std::span<const std::size_t> labels,
                    std::span<const double> class_weights) {
  if (probabilities.rank() != 2 || probabilities.dim(0) != labels.size()) {
    throw ShapeError("weighted_nll: expected " + std::to_string(labels.size()) +
                     "xL probabilities, got " + to_string(probabilities.shape()));
  }
  const std::size_t batch = labels.size(), width = probabilities.dim(1);
  if (!class_weights.empty() && class_weights.size() != width) {
    throw ShapeError("weighted_nll: " + std::to_string(class_weights.size()) +
                     " class weights for " + std::to_string(width) + " classes");
  }
  std::vector<double> coeff(batch);
  const auto P = probabilities.data();
  double total = 0.0;
  for (std::size_t c = 0; c < batch; ++c) {
    if (labels[c] >= width) {
      throw ShapeError("weighted_nll: label " + std::to_string(labels[c]) + " >= " +
                       std::to_string(width));
    }
    coeff[c] = class_weights.empty() ? 1.0 : class_weights[labels[c]];
    total += -coeff[c] * std::log(std::max(P[c * width + labels[c]], kProbabilityFloor));
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  auto grad_fn = [lab = std::move(lab), coeff, width, inv_batch](Node& self) {
    Node& np = parent(self, 0);
    auto& dp = np.ensure_grad();
    for (std::size_t c = 0; c < lab.size(); ++c) {
      const std::size_t idx = c * width + lab[c];
      const double p = np.value[idx];
      if (p > kProbabilityFloor) dp[idx] += -self.grad[0] * coeff[c] * inv_batch / p;
    }
  };
  return Tensor::make_result({1}, {total * inv_batch}, {probabilities}, grad_fn, "weighted_nll");
}

}  // namespace stance
