#include "gatehub/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gatehub/attention.hpp"
#include "gatehub/errors.hpp"
#include "gatehub/init.hpp"
#include "gatehub/model.hpp"
#include "gatehub/objective.hpp"
#include "gatehub/ops.hpp"
#include "gatehub/tape.hpp"

namespace gatehub {

double gradient_relative_error(const std::function<Tensor()>& loss_fn, std::span<Tensor> inputs, double h) {
  for (Tensor& x : inputs) x.zero_grad();
  {
    Tape tape;
    Tape::Scope scope(tape);
    const Tensor loss = loss_fn();
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (const Tensor& x : inputs) {
    const auto g = x.grad();
    analytic.emplace_back(g.empty() ? std::vector<double>(x.numel(), 0.0) : std::vector<double>(g.begin(), g.end()));
  }

  Tape::Pause no_recording;
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].mutable_data();
    double diff_sq = 0.0;
    double a_sq = 0.0;
    double n_sq = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double original = values[k];
      values[k] = original + h;
      const double up = loss_fn().item();
      values[k] = original - h;
      const double down = loss_fn().item();
      values[k] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i][k];
      diff_sq += (a - numeric) * (a - numeric);
      a_sq += a * a;
      n_sq += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(a_sq), std::sqrt(n_sq), 1e-12});
    worst = std::max(worst, std::sqrt(diff_sq) / denom);
  }
  return worst;
}

namespace {

using Clock = std::chrono::steady_clock;

// One randomized case: fresh inputs plus the loss to differentiate.
struct Case {
  std::vector<Tensor> inputs;
  std::function<Tensor()> loss;
};

GradcheckResult run_check(const std::string& name, int trials, Rng& rng,
                          const std::function<Case(Rng&)>& make_case) {
  const auto start = Clock::now();
  GradcheckResult r{name, trials, 0.0, 0.0};
  for (int t = 0; t < trials; ++t) {
    Case c = make_case(rng);
    r.max_relative_error = std::max(r.max_relative_error, gradient_relative_error(c.loss, c.inputs));
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

Tensor param(Shape s, Rng& rng, double std = 1.0) { return random_normal(s, rng, std, true); }

// Weighted sum of the op output with fixed random weights, so every output
// entry influences the loss differently.
Tensor probe_loss(const Tensor& y, const Tensor& weights) { return sum(mul(y, weights)); }

std::function<Case(Rng&)> unary(std::function<Tensor(const Tensor&)> op, double lo = -2.0, double hi = 2.0,
                                Shape out_shape = {3, 4}) {
  return [op, lo, hi, out_shape](Rng& rng) {
    Tensor x = random_uniform(Shape{3, 4}, rng, lo, hi, true);
    const Tensor w = random_normal(out_shape, rng);
    return Case{{x}, [op, x, w] { return probe_loss(op(x), w); }};
  };
}

std::function<Case(Rng&)> binary(std::function<Tensor(const Tensor&, const Tensor&)> op, Shape a_shape,
                                 Shape b_shape, Shape out_shape) {
  return [=](Rng& rng) {
    Tensor a = param(a_shape, rng);
    Tensor b = param(b_shape, rng);
    const Tensor w = random_normal(out_shape, rng);
    return Case{{a, b}, [op, a, b, w] { return probe_loss(op(a, b), w); }};
  };
}

}  // namespace

std::vector<GradcheckResult> run_op_gradchecks(std::uint64_t seed, int trials) {
  Rng rng(seed);
  std::vector<GradcheckResult> out;
  auto add_check = [&](const std::string& name, const std::function<Case(Rng&)>& make) {
    out.push_back(run_check(name, trials, rng, make));
  };

  add_check("matmul", binary([](const Tensor& a, const Tensor& b) { return matmul(a, b); }, {3, 4}, {4, 5}, {3, 5}));
  add_check("matmul_batched",
            binary([](const Tensor& a, const Tensor& b) { return matmul(a, b); }, {2, 3, 4}, {4, 2}, {2, 3, 2}));
  add_check("transpose", unary([](const Tensor& x) { return transpose(mul(transpose(x), transpose(x))); }));
  add_check("add", binary([](const Tensor& a, const Tensor& b) { return add(a, b); }, {3, 4}, {3, 4}, {3, 4}));
  add_check("add_row_broadcast",
            binary([](const Tensor& a, const Tensor& b) { return add(a, b); }, {3, 4}, {4}, {3, 4}));
  add_check("add_scalar_broadcast",
            binary([](const Tensor& a, const Tensor& b) { return add(a, b); }, {3, 4}, {1}, {3, 4}));
  add_check("sub", binary([](const Tensor& a, const Tensor& b) { return sub(a, b); }, {3, 4}, {3, 4}, {3, 4}));
  add_check("sub_row_broadcast",
            binary([](const Tensor& a, const Tensor& b) { return sub(a, b); }, {3, 4}, {1, 4}, {3, 4}));
  add_check("mul", binary([](const Tensor& a, const Tensor& b) { return mul(a, b); }, {3, 4}, {3, 4}, {3, 4}));
  add_check("mul_row_broadcast",
            binary([](const Tensor& a, const Tensor& b) { return mul(a, b); }, {3, 4}, {4}, {3, 4}));
  add_check("scale", unary([](const Tensor& x) { return scale(x, -1.7); }));
  add_check("sigmoid", unary([](const Tensor& x) { return sigmoid(x); }, -4.0, 4.0));
  add_check("log", unary([](const Tensor& x) { return log(x); }, 0.3, 3.0));
  add_check("log_sigmoid", unary([](const Tensor& x) { return log_sigmoid(x); }, -6.0, 6.0));
  add_check("exp", unary([](const Tensor& x) { return exp(x); }));
  add_check("gelu", unary([](const Tensor& x) { return gelu(x); }, -3.0, 3.0));
  add_check("clamp_min", [](Rng& rng) {
    // Entries sit at least 0.1 from the floor so central differences never straddle it.
    Tensor x = random_uniform(Shape{3, 4}, rng, 0.1, 1.0, true);
    auto v = x.mutable_data();
    for (std::size_t i = 0; i < v.size(); i += 2) v[i] = -v[i];
    const Tensor w = random_normal(Shape{3, 4}, rng);
    return Case{{x}, [x, w] { return probe_loss(clamp_min(x, 0.0), w); }};
  });
  add_check("softmax_rows", unary([](const Tensor& x) { return softmax_rows(x); }, -3.0, 3.0));
  add_check("softmax_rows_bias_full",
            binary([](const Tensor& a, const Tensor& b) { return softmax_rows(a, b); }, {3, 4}, {3, 4}, {3, 4}));
  add_check("softmax_rows_bias_row",
            binary([](const Tensor& a, const Tensor& b) { return softmax_rows(a, b); }, {3, 4}, {4}, {3, 4}));
  add_check("softmax_rows_bias_column", [](Rng& rng) {
    // A per-row constant leaves each row's softmax unchanged, so its true
    // gradient is zero and only the logits are compared.
    Tensor x = param({3, 4}, rng);
    const Tensor b = random_normal(Shape{3, 1}, rng, 1.0, true);
    const Tensor w = random_normal(Shape{3, 4}, rng);
    return Case{{x}, [x, b, w] { return probe_loss(softmax_rows(x, b), w); }};
  });
  add_check("softmax_rows_masked", [](Rng& rng) {
    Tensor x = param({3, 4}, rng);
    const Tensor w = random_normal(Shape{3, 4}, rng);
    const std::vector<std::uint8_t> mask = {0, 1, 1, 1, 0, 0, 1, 1, 0, 0, 0, 1};
    return Case{{x}, [x, w, mask] { return probe_loss(softmax_rows(x, {}, mask), w); }};
  });
  add_check("layer_norm", [](Rng& rng) {
    Tensor x = param({3, 5}, rng);
    Tensor g = param({5}, rng);
    Tensor b = param({5}, rng);
    const Tensor w = random_normal(Shape{3, 5}, rng);
    return Case{{x, g, b}, [x, g, b, w] { return probe_loss(layer_norm(x, g, b), w); }};
  });
  add_check("concat_lastdim", binary(
                                  [](const Tensor& a, const Tensor& b) {
                                    const Tensor parts[] = {a, b, a};
                                    return concat_lastdim(parts);
                                  },
                                  {3, 2}, {3, 3}, {3, 7}));
  add_check("slice_lastdim", unary([](const Tensor& x) { return slice_lastdim(x, 1, 2); }, -2.0, 2.0, {3, 2}));
  add_check("slice_rows", unary([](const Tensor& x) { return slice_rows(x, 1, 2); }, -2.0, 2.0, {2, 4}));
  add_check("concat_rows", binary(
                               [](const Tensor& a, const Tensor& b) {
                                 const Tensor parts[] = {a, b};
                                 return concat_rows(parts);
                               },
                               {2, 4}, {3, 4}, {5, 4}));
  add_check("sum", unary([](const Tensor& x) { return mul(sum(x), sum(x)); }, -2.0, 2.0, {1}));
  add_check("mean", unary([](const Tensor& x) { return mul(mean(x), mean(x)); }, -2.0, 2.0, {1}));
  return out;
}

std::vector<GradcheckResult> run_model_gradchecks(std::uint64_t seed, int trials) {
  Rng rng(seed);
  std::vector<GradcheckResult> out;
  constexpr std::size_t kDim = 8;
  constexpr std::size_t kHeads = 2;
  auto add_check = [&](const std::string& name, int n, const std::function<Case(Rng&)>& make) {
    out.push_back(run_check(name, n, rng, make));
  };

  for (GateMode mode : {GateMode::kFull, GateMode::kSuppressOnly, GateMode::kEnhanceOnly, GateMode::kPerHead}) {
    add_check("gates_" + std::string(to_string(mode)), trials * 10, [mode](Rng& r) {
      AttentionConfig cfg{kDim, kHeads, mode};
      Tensor z = param({6, kDim}, r);
      Tensor wg = param({kDim, cfg.gate_columns()}, r, 0.5);
      const Tensor w = random_normal(Shape{6, cfg.gate_columns()}, r);
      return Case{{z, wg}, [z, wg, w, cfg] { return probe_loss(compute_gates(z, wg, cfg).values, w); }};
    });
  }

  add_check("gated_cross_attention", trials * 5, [](Rng& r) {
    AttentionConfig cfg{kDim, kHeads, GateMode::kFull};
    MultiHeadParams p{param({kDim, kDim}, r, 0.4), param({kDim, kDim}, r, 0.4), param({kDim, kDim}, r, 0.4),
                      param({kDim, kDim}, r, 0.4)};
    Tensor q = param({3, kDim}, r);
    Tensor z = param({6, kDim}, r);
    Tensor wg = param({kDim, 1}, r, 0.5);
    const Tensor w = random_normal(Shape{3, kDim}, r);
    const std::vector<std::uint8_t> padding = {1, 0, 0, 0, 0, 0};
    return Case{{q, z, wg, p.w_q, p.w_k, p.w_v, p.w_o}, [=] {
                  const GateScores g = compute_gates(z, wg, cfg);
                  return probe_loss(gated_cross_attention(q, z, g, p, cfg, padding), w);
                }};
  });

  add_check("causal_self_attention_block", trials * 3, [](Rng& r) {
    AttentionConfig cfg{kDim, kHeads, GateMode::kDisabled, true};
    TransformerBlockParams block = TransformerBlockParams::init(kDim, r);
    for (Tensor* t : {&block.attn.w_q, &block.attn.w_k, &block.attn.w_v, &block.attn.w_o}) {
      *t = param(t->shape(), r, 0.4);
    }
    Tensor x = param({4, kDim}, r);
    const Tensor w = random_normal(Shape{4, kDim}, r);
    const std::vector<std::uint8_t> padding = {1, 0, 0, 0};
    return Case{{x, block.attn.w_q, block.attn.w_k, block.attn.w_v, block.attn.w_o, block.attn_norm.gamma,
                 block.attn_norm.beta, block.ffn.w1, block.ffn.b1, block.ffn.w2, block.ffn.b2},
                [=] { return probe_loss(self_attention(x, block, cfg, padding), w); }};
  });

  add_check("cross_attention_block", trials * 3, [](Rng& r) {
    TransformerBlockParams block = TransformerBlockParams::init(kDim, r);
    Tensor x = param({3, kDim}, r);
    Tensor memory = param({5, kDim}, r);
    const Tensor w = random_normal(Shape{3, kDim}, r);
    return Case{{x, memory, block.attn.w_q, block.attn.w_k, block.ffn.w1, block.ffn_norm.gamma},
                [=] { return probe_loss(cross_attention_block(x, memory, block, kHeads), w); }};
  });

  for (const auto& [name, loss_cfg] : {std::pair{"objective_background_suppression", LossConfig::training_default()},
                                       std::pair{"objective_cross_entropy", LossConfig::cross_entropy()},
                                       std::pair{"objective_standard_focal", LossConfig::standard_focal(2.0)}}) {
    add_check(name, trials * 10, [loss_cfg](Rng& r) {
      Tensor logits = param({6, 4}, r);
      const std::vector<int> targets = {0, 1, 3, -1, 0, 2};
      return Case{{logits}, [=] { return objective_loss(softmax_rows(logits), targets, loss_cfg); }};
    });
  }

  add_check("end_to_end_toy_model", trials, [](Rng& r) {
    ModelConfig cfg;
    cfg.history_len = 8;
    cfg.present_len = 2;
    cfg.latent_len = 4;
    cfg.model_dim = kDim;
    cfg.input_dim = 4;
    cfg.num_classes = 3;
    cfg.num_layers = 1;
    cfg.num_heads = kHeads;
    const ModelParams params = ModelParams::init(cfg, r());
    // Larger weights than the init scale so every path carries a visible gradient.
    for (Tensor t : params.tensors()) {
      for (double& v : t.mutable_data()) v += 0.3 * std::normal_distribution<double>(0.0, 1.0)(r);
    }
    const Tensor window = random_normal(Shape{8, 4}, r);
    const std::vector<std::uint8_t> padding = {1, 1, 0, 0, 0, 0, 0, 0};
    const std::vector<int> targets = {1, 0};
    return Case{params.tensors(), [=] {
                  const ForwardOutput f = forward(window, padding, params, cfg);
                  return objective_loss(f.probs, targets, LossConfig::training_default());
                }};
  });
  return out;
}

std::vector<GradcheckResult> run_gradcheck_suite(std::uint64_t seed, int op_trials, int model_trials) {
  auto out = run_op_gradchecks(seed, op_trials);
  auto model = run_model_gradchecks(seed + 1, model_trials);
  out.insert(out.end(), model.begin(), model.end());
  return out;
}

}  // namespace gatehub
