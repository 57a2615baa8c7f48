#include "gatehub/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gatehub/errors.hpp"
#include "gatehub/tape.hpp"

namespace gatehub {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;

bool wants_grad(const Tensor& t) { return t.defined() && t.requires_grad(); }

Tensor finish(const char* op, Tensor out, std::vector<Tensor> inputs, Tape::BackwardRule rule) {
  if (finite_checks_enabled() && !all_finite(out.data())) {
    throw NumericError(std::string(op) + ": produced a non-finite value");
  }
  Tape* tape = Tape::active();
  if (tape == nullptr) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(), wants_grad);
  if (!any) return out;
  out.set_requires_grad(true);
  tape->record(Tape::Entry{op, std::move(inputs), out, std::move(rule)});
  return out;
}

enum class Broadcast { kSame, kRow, kColumn, kScalar };

bool is_row_vector_for(const Shape& s, std::size_t cols) {
  return (s.rank() == 1 && s[0] == cols) || (s.rank() == 2 && s[0] == 1 && s[1] == cols);
}

Broadcast classify(const Shape& a, const Shape& b, const char* op, bool allow_column = false) {
  if (a == b) return Broadcast::kSame;
  if (b.numel() == 1) return Broadcast::kScalar;
  if (is_row_vector_for(b, a.cols())) return Broadcast::kRow;
  if (allow_column && b.rank() == 2 && b[1] == 1 && b[0] == a.rows()) return Broadcast::kColumn;
  throw ShapeError(std::string(op) + ": cannot broadcast " + b.str() + " onto " + a.str());
}

std::size_t broadcast_index(Broadcast kind, std::size_t row, std::size_t col, std::size_t cols) {
  switch (kind) {
    case Broadcast::kSame:
      return row * cols + col;
    case Broadcast::kRow:
      return col;
    case Broadcast::kColumn:
      return row;
    case Broadcast::kScalar:
      return 0;
  }
  return 0;
}

template <typename Fn, typename Deriv>
Tensor unary(const char* op, const Tensor& x, Fn fn, Deriv deriv) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
  Tensor result(x.shape(), std::move(out));
  return finish(op, result, {x}, [deriv](const Tensor& y, std::vector<Tensor>& ins) {
    Tensor& input = ins[0];
    if (!input.requires_grad()) return;
    const auto g = y.grad();
    const auto xv = input.data();
    const auto yv = y.data();
    auto gx = input.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xv[i], yv[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (b.rank() != 2) throw ShapeError("matmul: right operand must be rank 2, got " + b.shape().str());
  if (a.rank() == 0) throw ShapeError("matmul: left operand must have rank >= 1");
  const std::size_t k = a.cols();
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner extents differ, " + a.shape().str() + " x " + b.shape().str());
  }
  const std::size_t m = a.rows();
  const std::size_t n = b.shape()[1];

  std::vector<std::size_t> extents(a.shape().extents().begin(), a.shape().extents().end());
  extents.back() = n;
  std::vector<double> out(m * n);
  MatrixMap(out.data(), m, n).noalias() =
      ConstMatrixMap(a.data().data(), m, k) * ConstMatrixMap(b.data().data(), k, n);

  Tensor result(Shape(std::span<const std::size_t>(extents)), std::move(out));
  return finish("matmul", result, {a, b}, [m, k, n](const Tensor& y, std::vector<Tensor>& ins) {
    ConstMatrixMap g(y.grad().data(), m, n);
    Tensor& lhs = ins[0];
    Tensor& rhs = ins[1];
    if (lhs.requires_grad()) {
      MatrixMap(lhs.mutable_grad().data(), m, k).noalias() +=
          g * ConstMatrixMap(rhs.data().data(), k, n).transpose();
    }
    if (rhs.requires_grad()) {
      MatrixMap(rhs.mutable_grad().data(), k, n).noalias() +=
          ConstMatrixMap(lhs.data().data(), m, k).transpose() * g;
    }
  });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("transpose: expected rank 2, got " + x.shape().str());
  const std::size_t r = x.shape()[0];
  const std::size_t c = x.shape()[1];
  const auto in = x.data();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  }
  Tensor result(Shape{c, r}, std::move(out));
  return finish("transpose", result, {x}, [r, c](const Tensor& y, std::vector<Tensor>& ins) {
    if (!ins[0].requires_grad()) return;
    const auto g = y.grad();
    auto gx = ins[0].mutable_grad();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
    }
  });
}

namespace {

Tensor add_or_sub(const char* op, const Tensor& a, const Tensor& b, double sign) {
  const Broadcast kind = classify(a.shape(), b.shape(), op);
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      out[i] = av[i] + sign * bv[broadcast_index(kind, r, c, cols)];
    }
  }
  Tensor result(a.shape(), std::move(out));
  return finish(op, result, {a, b}, [kind, rows, cols, sign](const Tensor& y, std::vector<Tensor>& ins) {
    const auto g = y.grad();
    if (ins[0].requires_grad()) {
      auto ga = ins[0].mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (ins[1].requires_grad()) {
      auto gb = ins[1].mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          gb[broadcast_index(kind, r, c, cols)] += sign * g[r * cols + c];
        }
      }
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_or_sub("add", a, b, 1.0); }

Tensor sub(const Tensor& a, const Tensor& b) { return add_or_sub("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const Broadcast kind = classify(a.shape(), b.shape(), "mul");
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      out[i] = av[i] * bv[broadcast_index(kind, r, c, cols)];
    }
  }
  Tensor result(a.shape(), std::move(out));
  return finish("mul", result, {a, b}, [kind, rows, cols](const Tensor& y, std::vector<Tensor>& ins) {
    const auto g = y.grad();
    const auto av = ins[0].data();
    const auto bv = ins[1].data();
    if (ins[0].requires_grad()) {
      auto ga = ins[0].mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          ga[r * cols + c] += g[r * cols + c] * bv[broadcast_index(kind, r, c, cols)];
        }
      }
    }
    if (ins[1].requires_grad()) {
      auto gb = ins[1].mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          gb[broadcast_index(kind, r, c, cols)] += g[r * cols + c] * av[r * cols + c];
        }
      }
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0)) throw DomainError("log: input must be strictly positive, got " + std::to_string(v));
  }
  return unary(
      "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor log_sigmoid(const Tensor& x) {
  return unary(
      "log_sigmoid", x,
      [](double v) { return v < 0 ? v - std::log1p(std::exp(v)) : -std::log1p(std::exp(-v)); },
      [](double v, double) {
        // d/dv log(sigmoid(v)) = sigmoid(-v)
        if (v <= 0) return 1.0 / (1.0 + std::exp(v));
        const double e = std::exp(-v);
        return e / (1.0 + e);
      });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor gelu(const Tensor& x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  constexpr double kA = 0.044715;
  return unary(
      "gelu", x,
      [](double v) { return 0.5 * v * (1.0 + std::tanh(kC * (v + kA * v * v * v))); },
      [](double v, double) {
        const double t = std::tanh(kC * (v + kA * v * v * v));
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kC * (1.0 + 3.0 * kA * v * v);
      });
}

Tensor clamp_min(const Tensor& x, double floor) {
  return unary(
      "clamp_min", x, [floor](double v) { return v < floor ? floor : v; },
      [floor](double v, double) { return v < floor ? 0.0 : 1.0; });
}

Tensor softmax_rows(const Tensor& x, const Tensor& bias, std::span<const std::uint8_t> mask) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  Broadcast kind = Broadcast::kSame;
  if (bias.defined()) kind = classify(x.shape(), bias.shape(), "softmax_rows", true);
  if (!mask.empty() && mask.size() != rows * cols) {
    throw ShapeError("softmax_rows: mask has " + std::to_string(mask.size()) + " entries, expected " +
                     std::to_string(rows * cols));
  }
  const auto xv = x.data();
  const std::span<const double> bv = bias.defined() ? bias.data() : std::span<const double>{};
  std::vector<double> out(rows * cols, 0.0);
  std::vector<double> logits(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double max_logit = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (!mask.empty() && mask[i]) continue;
      double v = xv[i];
      if (!bv.empty()) v += bv[broadcast_index(kind, r, c, cols)];
      logits[c] = v;
      max_logit = std::max(max_logit, v);
      any = true;
    }
    if (!any) throw ContractError("softmax_rows: row " + std::to_string(r) + " is fully masked");
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (!mask.empty() && mask[i]) continue;
      out[i] = std::exp(logits[c] - max_logit);
      total += out[i];
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= total;
  }

  Tensor result(x.shape(), std::move(out));
  return finish("softmax_rows", result, {x, bias}, [kind, rows, cols](const Tensor& y, std::vector<Tensor>& ins) {
    const auto g = y.grad();
    const auto yv = y.data();
    std::vector<double> dlogits(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += yv[r * cols + c] * g[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t i = r * cols + c;
        dlogits[i] = yv[i] * (g[i] - dot);
      }
    }
    if (ins[0].requires_grad()) {
      auto gx = ins[0].mutable_grad();
      for (std::size_t i = 0; i < dlogits.size(); ++i) gx[i] += dlogits[i];
    }
    if (wants_grad(ins[1])) {
      auto gb = ins[1].mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[broadcast_index(kind, r, c, cols)] += dlogits[r * cols + c];
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (gamma.defined() && gamma.numel() != cols) throw ShapeError("layer_norm: gamma must have " + std::to_string(cols) + " entries");
  if (beta.defined() && beta.numel() != cols) throw ShapeError("layer_norm: beta must have " + std::to_string(cols) + " entries");
  const auto xv = x.data();
  std::vector<double> normalized(rows * cols);
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += xv[r * cols + c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = xv[r * cols + c] - mu;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) normalized[r * cols + c] = (xv[r * cols + c] - mu) * inv_std[r];
  }
  std::vector<double> out = normalized;
  if (gamma.defined() || beta.defined()) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        double v = normalized[r * cols + c];
        if (gamma.defined()) v *= gamma.data()[c];
        if (beta.defined()) v += beta.data()[c];
        out[r * cols + c] = v;
      }
    }
  }
  Tensor result(x.shape(), std::move(out));
  return finish("layer_norm", result, {x, gamma, beta},
                [rows, cols, normalized = std::move(normalized), inv_std = std::move(inv_std)](
                    const Tensor& y, std::vector<Tensor>& ins) {
                  const auto g = y.grad();
                  const Tensor& gamma = ins[1];
                  if (wants_grad(ins[1])) {
                    auto gg = ins[1].mutable_grad();
                    for (std::size_t i = 0; i < g.size(); ++i) gg[i % cols] += g[i] * normalized[i];
                  }
                  if (wants_grad(ins[2])) {
                    auto gb = ins[2].mutable_grad();
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i % cols] += g[i];
                  }
                  if (!ins[0].requires_grad()) return;
                  auto gx = ins[0].mutable_grad();
                  std::vector<double> dn(cols);
                  for (std::size_t r = 0; r < rows; ++r) {
                    double mean_dn = 0.0;
                    double mean_dn_n = 0.0;
                    for (std::size_t c = 0; c < cols; ++c) {
                      const std::size_t i = r * cols + c;
                      dn[c] = g[i] * (gamma.defined() ? gamma.data()[c] : 1.0);
                      mean_dn += dn[c];
                      mean_dn_n += dn[c] * normalized[i];
                    }
                    mean_dn /= static_cast<double>(cols);
                    mean_dn_n /= static_cast<double>(cols);
                    for (std::size_t c = 0; c < cols; ++c) {
                      const std::size_t i = r * cols + c;
                      gx[i] += inv_std[r] * (dn[c] - mean_dn - normalized[i] * mean_dn_n);
                    }
                  }
                });
}

Tensor concat_lastdim(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_lastdim: no inputs");
  const std::size_t rows = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() > 2 || p.rows() != rows) throw ShapeError("concat_lastdim: row counts differ");
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto pv = p.data();
    const std::size_t w = p.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(r * w), w,
                  out.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
    }
    offset += w;
  }
  const Shape shape = parts[0].rank() == 1 ? Shape{total} : Shape{rows, total};
  Tensor result(shape, std::move(out));
  return finish("concat_lastdim", result, std::vector<Tensor>(parts.begin(), parts.end()),
                [rows, total, widths](const Tensor& y, std::vector<Tensor>& ins) {
                  const auto g = y.grad();
                  std::size_t off = 0;
                  for (std::size_t p = 0; p < ins.size(); ++p) {
                    const std::size_t w = widths[p];
                    if (ins[p].requires_grad()) {
                      auto gp = ins[p].mutable_grad();
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < w; ++c) gp[r * w + c] += g[r * total + off + c];
                      }
                    }
                    off += w;
                  }
                });
}

Tensor slice_lastdim(const Tensor& x, std::size_t start, std::size_t count) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (count == 0 || start + count > cols) {
    throw ShapeError("slice_lastdim: columns [" + std::to_string(start) + ", " + std::to_string(start + count) +
                     ") out of range for " + x.shape().str());
  }
  const auto xv = x.data();
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < count; ++c) out[r * count + c] = xv[r * cols + start + c];
  }
  std::vector<std::size_t> extents(x.shape().extents().begin(), x.shape().extents().end());
  extents.back() = count;
  Tensor result(Shape(std::span<const std::size_t>(extents)), std::move(out));
  return finish("slice_lastdim", result, {x}, [rows, cols, start, count](const Tensor& y, std::vector<Tensor>& ins) {
    if (!ins[0].requires_grad()) return;
    const auto g = y.grad();
    auto gx = ins[0].mutable_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < count; ++c) gx[r * cols + start + c] += g[r * count + c];
    }
  });
}

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
  if (x.rank() != 2) throw ShapeError("slice_rows: expected rank 2, got " + x.shape().str());
  const std::size_t rows = x.shape()[0];
  const std::size_t cols = x.shape()[1];
  if (count == 0 || start + count > rows) {
    throw ShapeError("slice_rows: rows [" + std::to_string(start) + ", " + std::to_string(start + count) +
                     ") out of range for " + x.shape().str());
  }
  const auto xv = x.data();
  std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(start * cols),
                          xv.begin() + static_cast<std::ptrdiff_t>((start + count) * cols));
  Tensor result(Shape{count, cols}, std::move(out));
  return finish("slice_rows", result, {x}, [cols, start](const Tensor& y, std::vector<Tensor>& ins) {
    if (!ins[0].requires_grad()) return;
    const auto g = y.grad();
    auto gx = ins[0].mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[start * cols + i] += g[i];
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.cols() != cols) throw ShapeError("concat_rows: column counts differ");
    rows += p.rows();
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  Tensor result(Shape{rows, cols}, std::move(out));
  return finish("concat_rows", result, std::vector<Tensor>(parts.begin(), parts.end()),
                [](const Tensor& y, std::vector<Tensor>& ins) {
                  const auto g = y.grad();
                  std::size_t offset = 0;
                  for (auto& in : ins) {
                    const std::size_t n = in.numel();
                    if (in.requires_grad()) {
                      auto gi = in.mutable_grad();
                      for (std::size_t i = 0; i < n; ++i) gi[i] += g[offset + i];
                    }
                    offset += n;
                  }
                });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor result = Tensor::scalar(total);
  return finish("sum", result, {x}, [](const Tensor& y, std::vector<Tensor>& ins) {
    if (!ins[0].requires_grad()) return;
    const double g = y.grad()[0];
    for (double& v : ins[0].mutable_grad()) v += g;
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor result = Tensor::scalar(total / n);
  return finish("mean", result, {x}, [n](const Tensor& y, std::vector<Tensor>& ins) {
    if (!ins[0].requires_grad()) return;
    const double g = y.grad()[0] / n;
    for (double& v : ins[0].mutable_grad()) v += g;
  });
}

}  // namespace gatehub
