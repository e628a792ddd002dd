#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "stance/random.hpp"
#include "stance/tensor.hpp"

namespace stance {

// Batched matrix product over the trailing two dims. Leading (batch) dims must
// be equal, or one operand must be a plain matrix that is broadcast.
Tensor matmul(const Tensor& a, const Tensor& b);

// Swaps the trailing two dims.
Tensor transpose(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);

// Elementwise arithmetic. `b` may have the same shape as `a` or match its
// trailing dims, in which case it is broadcast over the leading ones.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor abs_diff(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor tanh(const Tensor& x);

// Numerically stable softmax along `axis`. When `mask` is non-empty it must
// have x.size() entries; zero entries are excluded (logit -inf) and a fully
// masked lane produces all zeros.
Tensor softmax(const Tensor& x, std::ptrdiff_t axis, std::span<const std::uint8_t> mask = {});

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Arithmetic mean over `axis`; the axis is removed.
Tensor mean_pool(const Tensor& x, std::ptrdiff_t axis);

inline constexpr double kNormEpsilon = 1e-12;
// Unit-normalizes each lane of the last axis. Lanes with norm below
// kNormEpsilon map to zeros.
Tensor l2_normalize(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::ptrdiff_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::ptrdiff_t axis);
Tensor slice(const Tensor& x, std::ptrdiff_t axis, std::size_t start, std::size_t length);

// x·W + b with W stored in×out. Accepts rank-1 x.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Inverted dropout; identity when !training or rate == 0.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

inline constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();
// Row lookup into a rank-2 table; kNoRow yields a zero row.
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> rows);
// One output row per group: the mean of the listed table rows, or zeros for
// an empty group.
Tensor gather_mean(const Tensor& table, const std::vector<std::vector<std::size_t>>& groups);

inline constexpr double kProbabilityFloor = 1e-12;
// Mean over the batch of -w[label] * log(max(p[label], floor)) for a C×L
// probability matrix. Empty `class_weights` means unit weights.
Tensor weighted_nll(const Tensor& probabilities, std::span<const std::size_t> labels,
                    std::span<const double> class_weights = {});

}  // namespace stance
