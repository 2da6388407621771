#include <cmath>
#include <limits>

#include "doctest.h"
#include "navlab/error.hpp"
#include "navlab/gradcheck.hpp"
#include "navlab/kernels.hpp"
#include "navlab/nn.hpp"
#include "navlab/ops.hpp"
#include "navlab/rng.hpp"

using namespace navlab;

namespace {

std::vector<double> randv(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("handle semantics and clone") {
  Tensor a = Tensor::row({1, 2, 3});
  Tensor b = a;
  b.mutable_values()[0] = 9;
  CHECK(a.at(0) == 9);
  Tensor c = a.clone();
  c.mutable_values()[1] = 7;
  CHECK(a.at(1) == 2);
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor::zeros({0, 3}), DimensionError);
}

TEST_CASE("matmul values and shape errors") {
  Tensor a = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::matrix(3, 2, {7, 8, 9, 10, 11, 12});
  Tensor c = ops::matmul(a, b);
  CHECK(c.at(0, 0) == 58);
  CHECK(c.at(0, 1) == 64);
  CHECK(c.at(1, 0) == 139);
  CHECK(c.at(1, 1) == 154);
  CHECK_THROWS_AS(ops::matmul(a, a), DimensionError);
  CHECK_THROWS_AS(ops::add(a, b), DimensionError);
}

TEST_CASE("softmax masking") {
  Tensor x = Tensor::matrix(2, 3, {1000, 1001, 1002, -5, 0, 5});
  Mask m{{2, 3}, {1, 0, 1, 1, 1, 1}};
  Tensor p = ops::softmax(x, &m);
  CHECK(p.at(0, 1) == 0.0);
  CHECK(p.at(0, 0) + p.at(0, 2) == doctest::Approx(1.0));
  CHECK(std::isfinite(p.at(0, 0)));
  CHECK(p.at(1, 0) + p.at(1, 1) + p.at(1, 2) == doctest::Approx(1.0));
  Mask none{{2, 3}, {0, 0, 0, 1, 1, 1}};
  CHECK_THROWS_AS(ops::softmax(x, &none), DegenerateMaskError);
}

TEST_CASE("cross entropy rejects masked labels") {
  Tensor z = Tensor::matrix(1, 3, {0.1, 0.2, 0.3});
  Mask m = Mask::row({true, false, true});
  CHECK_THROWS_AS(ops::cross_entropy(z, m, 1), LabelError);
  const double want = -std::log(std::exp(0.3) / (std::exp(0.1) + std::exp(0.3)));
  CHECK(ops::cross_entropy(z, m, 2).item() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("layer norm output is standardised") {
  Rng rng(3);
  Tensor x({4, 8}, randv(rng, 32));
  Tensor y = ops::layer_norm(x, Tensor::filled({8}, 1.0), Tensor::zeros({8}));
  for (std::size_t r = 0; r < 4; ++r) {
    double mean = 0, var = 0;
    for (std::size_t c = 0; c < 8; ++c) mean += y.at(r, c) / 8;
    for (std::size_t c = 0; c < 8; ++c) var += (y.at(r, c) - mean) * (y.at(r, c) - mean) / 8;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("backward accumulates across uses") {
  Tape tape;
  Tensor w = Tensor::parameter({1, 2}, {2.0, -3.0});
  {
    TapeScope scope(tape);
    Tensor y = ops::sum(ops::mul(w, w));  // Σ w²
    tape.backward(y);
  }
  CHECK(w.grad()[0] == doctest::Approx(4.0));
  CHECK(w.grad()[1] == doctest::Approx(-6.0));
  CHECK(tape.size() == 0);
}

TEST_CASE("no-grad scope records nothing") {
  Tape tape;
  Tensor w = Tensor::parameter({1, 2}, {1.0, 1.0});
  TapeScope scope(tape);
  {
    NoGradScope ng;
    ops::sum(ops::mul(w, w));
  }
  CHECK(tape.size() == 0);
  ops::sum(w);
  CHECK(tape.size() == 1);
}

TEST_CASE("finite differences agree for a small network") {
  Rng rng(11);
  nn::EncoderLayer layer(6, 12, 2, rng);
  nn::ParameterList params;
  layer.collect("l", params);
  Tensor x({3, 6}, randv(rng, 18));
  Tensor target({3, 6}, randv(rng, 18));
  auto f = [&] { return ops::sum(ops::mul(layer(x), target)); };
  const auto r = grad_check(f, params);
  CHECK(r.coordinates == nn::parameter_count(params));
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("grad check reports non-finite evaluations") {
  Tensor w = Tensor::parameter({1}, {0.0});
  auto f = [&] { return ops::scale(w, std::numeric_limits<double>::quiet_NaN()); };
  CHECK_THROWS_AS(grad_check(f, {{"w", w}}), EvaluationError);
}

TEST_CASE("causal mask and positions") {
  Mask m = nn::causal_mask(3);
  CHECK(m(0 * 3 + 1) == false);
  CHECK(m(2 * 3 + 1) == true);
  Tensor p = nn::sinusoidal_positions(4, 6);
  CHECK(p.at(0, 0) == 0.0);
  CHECK(p.at(0, 1) == 1.0);
}

TEST_CASE("OpenMP kernels are bit-identical to the serial reference") {
  Rng rng(5);
  for (auto [n, k, m] : {std::tuple{1, 1, 1}, {7, 13, 5}, {64, 48, 80}, {129, 3, 257}}) {
    const auto a = randv(rng, n * k), b_nn = randv(rng, k * m), b_nt = randv(rng, m * k);
    const auto a_tn = randv(rng, k * n);
    std::vector<double> s(n * m, 0.5), p(n * m, 0.5);
    kernels::gemm_nn_serial(a, b_nn, s, n, k, m);
    kernels::gemm_nn_omp(a, b_nn, p, n, k, m);
    CHECK(s == p);
    kernels::gemm_nt_serial(a, b_nt, s, n, k, m);
    kernels::gemm_nt_omp(a, b_nt, p, n, k, m);
    CHECK(s == p);
    kernels::gemm_tn_serial(a_tn, b_nn, s, n, k, m);
    kernels::gemm_tn_omp(a_tn, b_nn, p, n, k, m);
    CHECK(s == p);
  }
}

TEST_CASE("matmul gives the same bits with and without the parallel path") {
  Rng rng(8);
  Tensor a({40, 30}, randv(rng, 1200)), b({30, 50}, randv(rng, 1500));
  const auto saved = kernels::parallel_threshold();
  kernels::set_parallel_threshold(std::numeric_limits<std::size_t>::max());
  Tensor serial = ops::matmul(a, b);
  kernels::set_parallel_threshold(1);
  Tensor parallel = ops::matmul(a, b);
  kernels::set_parallel_threshold(saved);
  CHECK(std::vector<double>(serial.values().begin(), serial.values().end()) ==
        std::vector<double>(parallel.values().begin(), parallel.values().end()));
}

TEST_CASE("named RNG streams are independent and stable") {
  CHECK(stream_seed(1, "a") == stream_seed(1, "a"));
  CHECK(stream_seed(1, "a") != stream_seed(1, "b"));
  CHECK(stream_seed(1, "a", 0) != stream_seed(1, "a", 1));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}
