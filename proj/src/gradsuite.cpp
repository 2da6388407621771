#include "navlab/gradsuite.hpp"

#include <algorithm>
#include <functional>

#include "navlab/gradcheck.hpp"
#include "navlab/policy.hpp"
#include "navlab/training.hpp"

namespace navlab {

namespace {

using Builder = std::function<std::pair<std::function<Tensor()>, nn::ParameterList>(Rng&)>;

Tensor random_tensor(Rng& rng, Shape shape, double bound = 1.0) {
  return nn::uniform_parameter(rng, std::move(shape), bound);
}

std::size_t dim(Rng& rng, std::size_t lo = 1, std::size_t hi = 4) {
  return lo + uniform_index(rng, hi - lo + 1);
}

/// sum(x ⊙ R) for a fixed random R, so every output coordinate matters.
Tensor project(const Tensor& x, Rng& rng) {
  Tensor r(x.shape(), std::vector<double>(x.size()));
  for (auto& v : r.mutable_values()) v = uniform(rng, -1.0, 1.0);
  return ops::sum(ops::mul(x, r));
}

/// Wraps `op` in a scalar readout with its own fixed weights.
std::function<Tensor()> readout(std::function<Tensor()> op, Rng& rng) {
  const auto seed = rng();
  return [op = std::move(op), seed] {
    Rng r(seed);
    return project(op(), r);
  };
}

Mask random_row_mask(Rng& rng, std::size_t rows, std::size_t cols) {
  Mask m = Mask::all({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t keep = uniform_index(rng, cols);
    for (std::size_t j = 0; j < cols; ++j) {
      if (j != keep && uniform(rng, 0.0, 1.0) < 0.3) m.keep[i * cols + j] = 0;
    }
  }
  return m;
}

std::vector<std::pair<std::string, Builder>> primitives() {
  std::vector<std::pair<std::string, Builder>> out;
  auto binary = [](std::function<Tensor(const Tensor&, const Tensor&)> f, bool same_shape) {
    return [f, same_shape](Rng& rng) {
      const std::size_t n = dim(rng), k = dim(rng), m = dim(rng);
      Tensor a = random_tensor(rng, {n, k});
      Tensor b = same_shape ? random_tensor(rng, {n, k}) : random_tensor(rng, {k, m});
      return std::pair{readout([=] { return f(a, b); }, rng), nn::ParameterList{{"a", a}, {"b", b}}};
    };
  };
  out.emplace_back("matmul", binary(ops::matmul, false));
  out.emplace_back("add", binary(ops::add, true));
  out.emplace_back("sub", binary(ops::sub, true));
  out.emplace_back("mul", binary(ops::mul, true));
  out.emplace_back("transpose", [](Rng& rng) {
    Tensor a = random_tensor(rng, {dim(rng), dim(rng)});
    return std::pair{readout([=] { return ops::transpose(a); }, rng), nn::ParameterList{{"a", a}}};
  });
  out.emplace_back("add_row", [](Rng& rng) {
    const std::size_t n = dim(rng), m = dim(rng);
    Tensor a = random_tensor(rng, {n, m});
    Tensor r = random_tensor(rng, {m});
    return std::pair{readout([=] { return ops::add_row(a, r); }, rng), nn::ParameterList{{"a", a}, {"row", r}}};
  });
  out.emplace_back("scale", [](Rng& rng) {
    Tensor a = random_tensor(rng, {dim(rng), dim(rng)});
    const double s = uniform(rng, -2.0, 2.0);
    return std::pair{readout([=] { return ops::scale(a, s); }, rng), nn::ParameterList{{"a", a}}};
  });
  out.emplace_back("scalar_affine", [](Rng& rng) {
    Tensor x = random_tensor(rng, {dim(rng), dim(rng)}, 3.0);
    Tensor w = random_tensor(rng, {1});
    Tensor b = random_tensor(rng, {1});
    return std::pair{readout([=] { return ops::scalar_affine(x, w, b); }, rng),
                     nn::ParameterList{{"x", x}, {"w", w}, {"b", b}}};
  });
  out.emplace_back("gelu", [](Rng& rng) {
    Tensor a = random_tensor(rng, {dim(rng), dim(rng)}, 3.0);
    return std::pair{readout([=] { return ops::gelu(a); }, rng), nn::ParameterList{{"a", a}}};
  });
  out.emplace_back("linear", [](Rng& rng) {
    const std::size_t n = dim(rng), k = dim(rng), m = dim(rng);
    Tensor x = random_tensor(rng, {n, k});
    Tensor w = random_tensor(rng, {k, m});
    Tensor b = random_tensor(rng, {m});
    return std::pair{readout([=] { return ops::linear(x, w, b); }, rng),
                     nn::ParameterList{{"x", x}, {"weight", w}, {"bias", b}}};
  });
  out.emplace_back("softmax", [](Rng& rng) {
    const std::size_t n = dim(rng), m = dim(rng, 2, 5);
    Tensor x = random_tensor(rng, {n, m}, 3.0);
    auto mask = std::make_shared<Mask>(random_row_mask(rng, n, m));
    return std::pair{readout([=] { return ops::softmax(x, mask.get()); }, rng), nn::ParameterList{{"x", x}}};
  });
  out.emplace_back("layer_norm", [](Rng& rng) {
    const std::size_t n = dim(rng), m = dim(rng, 2, 6);
    Tensor x = random_tensor(rng, {n, m}, 2.0);
    Tensor g = random_tensor(rng, {m});
    Tensor s = random_tensor(rng, {m});
    return std::pair{readout([=] { return ops::layer_norm(x, g, s); }, rng),
                     nn::ParameterList{{"x", x}, {"gain", g}, {"shift", s}}};
  });
  out.emplace_back("scaled_dot_attention", [](Rng& rng) {
    const std::size_t n = dim(rng), m = dim(rng, 2, 5), d = dim(rng), dv = dim(rng);
    Tensor q = random_tensor(rng, {n, d});
    Tensor k = random_tensor(rng, {m, d});
    Tensor v = random_tensor(rng, {m, dv});
    Tensor bias = random_tensor(rng, {n, m});
    auto mask = std::make_shared<Mask>(random_row_mask(rng, n, m));
    return std::pair{readout([=] { return ops::scaled_dot_attention(q, k, v, bias, mask.get()); }, rng),
                     nn::ParameterList{{"q", q}, {"k", k}, {"v", v}, {"bias", bias}}};
  });
  out.emplace_back("mean_rows", [](Rng& rng) {
    Tensor a = random_tensor(rng, {dim(rng), dim(rng)});
    return std::pair{readout([=] { return ops::mean_rows(a); }, rng), nn::ParameterList{{"a", a}}};
  });
  out.emplace_back("sum", [](Rng& rng) {
    Tensor a = random_tensor(rng, {dim(rng), dim(rng)});
    return std::pair{std::function<Tensor()>([=] { return ops::sum(a); }), nn::ParameterList{{"a", a}}};
  });
  out.emplace_back("concat_slice_rows", [](Rng& rng) {
    const std::size_t m = dim(rng);
    Tensor a = random_tensor(rng, {dim(rng), m});
    Tensor b = random_tensor(rng, {dim(rng), m});
    return std::pair{readout([=] {
                       const Tensor parts[] = {a, b};
                       Tensor c = ops::concat_rows(parts);
                       return ops::slice_rows(c, 1, c.rows());
                     }, rng),
                     nn::ParameterList{{"a", a}, {"b", b}}};
  });
  out.emplace_back("concat_slice_cols", [](Rng& rng) {
    const std::size_t n = dim(rng);
    Tensor a = random_tensor(rng, {n, dim(rng)});
    Tensor b = random_tensor(rng, {n, dim(rng)});
    return std::pair{readout([=] {
                       const Tensor parts[] = {a, b};
                       Tensor c = ops::concat_cols(parts);
                       return ops::slice_cols(c, 1, c.cols());
                     }, rng),
                     nn::ParameterList{{"a", a}, {"b", b}}};
  });
  out.emplace_back("gather_rows", [](Rng& rng) {
    const std::size_t rows = dim(rng, 2, 5);
    Tensor table = random_tensor(rng, {rows, dim(rng)});
    std::vector<std::size_t> idx(dim(rng, 1, 6));
    for (auto& i : idx) i = uniform_index(rng, rows);
    return std::pair{readout([=] { return ops::gather_rows(table, idx); }, rng),
                     nn::ParameterList{{"table", table}}};
  });
  out.emplace_back("cross_entropy", [](Rng& rng) {
    const std::size_t n = dim(rng, 2, 6);
    Tensor logits = random_tensor(rng, {1, n}, 3.0);
    auto mask = std::make_shared<Mask>(random_row_mask(rng, 1, n));
    std::size_t label = 0;
    do label = uniform_index(rng, n); while (!(*mask)(label));
    return std::pair{std::function<Tensor()>([=] { return ops::cross_entropy(logits, *mask, label); }),
                     nn::ParameterList{{"logits", logits}}};
  });
  return out;
}

std::vector<std::pair<std::string, Builder>> modules() {
  std::vector<std::pair<std::string, Builder>> out;
  out.emplace_back("nn.linear", [](Rng& rng) {
    auto layer = std::make_shared<nn::Linear>(dim(rng), dim(rng), rng);
    Tensor x = random_tensor(rng, {dim(rng), layer->weight.rows()});
    nn::ParameterList params{{"x", x}};
    layer->collect("linear", params);
    return std::pair{readout([=] { return (*layer)(x); }, rng), params};
  });
  out.emplace_back("nn.feed_forward", [](Rng& rng) {
    const std::size_t d = dim(rng);
    auto ffn = std::make_shared<nn::FeedForward>(d, dim(rng), dim(rng), rng);
    Tensor x = random_tensor(rng, {dim(rng), d});
    nn::ParameterList params{{"x", x}};
    ffn->collect("ffn", params);
    return std::pair{readout([=] { return (*ffn)(x); }, rng), params};
  });
  out.emplace_back("nn.attention", [](Rng& rng) {
    const std::size_t heads = dim(rng, 1, 2);
    const std::size_t dq = dim(rng, 2, 4), dkv = dim(rng, 2, 4), inner = heads * dim(rng, 1, 2);
    auto attn = std::make_shared<nn::Attention>(dq, dkv, inner, dim(rng, 2, 4), heads, rng);
    Tensor q = random_tensor(rng, {dim(rng), dq});
    Tensor c = random_tensor(rng, {dim(rng, 2, 4), dkv});
    Tensor bias = random_tensor(rng, {q.rows(), c.rows()});
    nn::ParameterList params{{"query", q}, {"context", c}, {"bias", bias}};
    attn->collect("attn", params);
    return std::pair{readout([=] { return (*attn)(q, c, bias); }, rng), params};
  });
  out.emplace_back("nn.encoder_layer", [](Rng& rng) {
    const std::size_t d = dim(rng, 2, 4);
    auto layer = std::make_shared<nn::EncoderLayer>(d, dim(rng, 2, 6), 1, rng);
    const std::size_t n = dim(rng, 1, 4);
    Tensor x = random_tensor(rng, {n, d});
    auto mask = std::make_shared<Mask>(nn::causal_mask(n));
    nn::ParameterList params{{"x", x}};
    layer->collect("layer", params);
    return std::pair{readout([=] { return (*layer)(x, Tensor{}, mask.get()); }, rng), params};
  });
  out.emplace_back("policy.gasa_layer", [](Rng& rng) {
    PolicyConfig pc;
    pc.hidden = static_cast<int>(dim(rng, 2, 4));
    pc.ffn_hidden = 5;
    pc.node_encoder_depth = 0;
    pc.cross_modal_depth = 0;
    pc.gasa_layers = 1;
    pc.latent_dim = pc.hidden;
    auto model = std::make_shared<PolicyModel>(pc, rng());
    const std::size_t n = dim(rng, 1, 5);
    Tensor x = random_tensor(rng, {n, static_cast<std::size_t>(pc.hidden)});
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = uniform(rng, 0.5, 10.0);
    Tensor dist({n, n}, std::move(d));
    nn::ParameterList params = model->parameters();
    params.push_back({"x", x});
    return std::pair{readout([=] { return gasa_layer(x, dist, model->gasa_stack[0]); }, rng), params};
  });
  return out;
}

GradSuiteEntry run_entry(const std::string& name, const Builder& build, std::uint64_t seed, int trials) {
  GradSuiteEntry e;
  e.name = name;
  e.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_stream(seed, name, static_cast<std::uint64_t>(t));
    auto [f, params] = build(rng);
    const auto r = grad_check(f, params);
    e.coordinates += r.coordinates;
    if (r.max_rel_error >= e.max_rel_error) {
      e.max_rel_error = r.max_rel_error;
      e.worst = r.worst_parameter;
    }
  }
  return e;
}

}  // namespace

GradSuiteEntry rollout_grad_check(std::uint64_t seed) {
  const EnvGraph env("grad_world", {{{0.0, 0.0}, 0}, {{0.0, 4.0}, 1}, {{4.0, 4.0}, 2}}, {{0, 1}, {1, 2}});
  Episode ep;
  ep.id = "grad_world_ep0";
  ep.env_id = env.id();
  ep.gt_path = {0, 1, 2};
  ep.start = 0;
  ep.goal = 2;
  ep.instruction_tokens = describe_path(env, ep.gt_path);
  ep.instruction_text = instruction_text(ep.instruction_tokens);

  LatentConfig lc;
  lc.landmark_vocab = 3;
  lc.d_v = 4;
  lc.d_q = 4;
  lc.d_lm = 6;
  lc.num_queries = 2;
  lc.qformer_depth = 1;
  lc.encoder_depth = 1;
  lc.trainable = true;
  PolicyConfig pc;
  pc.hidden = 5;
  pc.ffn_hidden = 7;
  pc.node_encoder_depth = 1;
  pc.cross_modal_depth = 1;
  pc.gasa_layers = 1;
  pc.latent_dim = lc.d_lm;
  LatentProvider provider(lc, stream_seed(seed, "init-latent"));
  PolicyModel model(pc, stream_seed(seed, "init-policy"));
  LatentCache cache(provider);
  LossConfig loss;
  loss.max_steps = 4;
  const auto dagger_seed = stream_seed(seed, "dagger");
  auto f = [&] {
    Tensor bc = bc_loss(ep, env, model, cache);
    Tensor dag = dagger_loss(ep, env, model, cache, dagger_seed, loss);
    return ops::add(ops::scale(bc, loss.lambda), dag);
  };
  const auto r = grad_check(f, model_parameters(model, provider));
  return GradSuiteEntry{"rollout_loss", 1, r.coordinates, r.max_rel_error, r.worst_parameter};
}

std::vector<GradSuiteEntry> run_grad_suite(std::uint64_t seed, int trials) {
  std::vector<GradSuiteEntry> out;
  for (const auto& [name, build] : primitives()) out.push_back(run_entry(name, build, seed, trials));
  for (const auto& [name, build] : modules()) out.push_back(run_entry(name, build, seed, trials));
  out.push_back(rollout_grad_check(seed));
  return out;
}

}  // namespace navlab
