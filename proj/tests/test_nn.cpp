#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "wad/nn/adam.hpp"
#include "wad/nn/checkpoint.hpp"
#include "wad/nn/grad_check.hpp"
#include "wad/nn/network.hpp"

using namespace wad;
using nn::Act;
using nn::Network;

namespace {

template <typename T>
Tensor<T> row(std::vector<T> v) {
  const int n = int(v.size());
  return Tensor<T>({1, n}, std::move(v));
}

}  // namespace

TEST_CASE("dense identity with relu clamps negatives") {
  Network<float> net("t");
  auto x = net.input("x", {2});
  auto y = net.dense("d", x, 2, Act::relu);
  net.output("y", y);
  auto& W = net.param("d.W").value;
  W[0] = 1;
  W[1] = 0;
  W[2] = 0;
  W[3] = 1;
  auto out = net.forward({{"x", row<float>({-1.f, 2.f})}});
  REQUIRE(out["y"][0] == 0.f);
  REQUIRE(out["y"][1] == 2.f);
}

TEST_CASE("conv2d all-ones 3x3 filter sums the window") {
  Network<float> net("t");
  auto x = net.input("x", {1, 3, 3});
  auto y = net.conv2d("c", x, 1, 3, 2, Act::linear);
  net.output("y", y);
  net.param("c.W").value.fill(1.f);
  Tensor<float> in({1, 1, 3, 3});
  in.fill(1.f);
  auto out = net.forward({{"x", in}});
  REQUIRE(out["y"].size() == 1);
  REQUIRE(out["y"][0] == 9.0f);
}

TEST_CASE("sigmoid head at logit zero is one half") {
  Network<float> net("t");
  auto x = net.input("x", {1});
  auto y = net.dense("d", x, 1, Act::sigmoid);
  net.output("y", y);
  net.param("d.W").value[0] = 1.f;
  auto out = net.forward({{"x", row<float>({0.f})}});
  REQUIRE(out["y"][0] == 0.5f);
}

TEST_CASE("scalar dense chain rule and weight decay") {
  for (double lambda : {0.0, 0.1}) {
    Network<double> net("t");
    auto x = net.input("x", {1});
    auto y = net.dense("d", x, 1, Act::linear, lambda);
    net.output("y", y);
    net.param("d.W").value[0] = 2.0;
    net.forward({{"x", row<double>({3.0})}});
    net.zero_grads();
    net.backward({{"y", row<double>({1.0})}});
    const double expect = 3.0 + lambda * 2.0;
    REQUIRE(net.param("d.W").grad[0] == expect);
  }
}

TEST_CASE("tanh local gradient at zero is one") {
  Network<double> net("t");
  auto x = net.input("x", {1});
  auto y = net.dense("d", x, 1, Act::tanh);
  net.output("y", y);
  net.param("d.W").value[0] = 1.0;
  net.forward({{"x", row<double>({0.0})}});
  net.zero_grads();
  auto in_grads = net.backward({{"y", row<double>({1.0})}});
  REQUIRE(in_grads["x"][0] == 1.0);
}

TEST_CASE("adam first steps match the closed form") {
  Network<double> net("t");
  auto x = net.input("x", {1});
  net.output("y", net.dense("d", x, 1, Act::linear));
  auto& W = net.param("d.W");
  W.value[0] = 0.0;
  nn::AdamState<double> st(0.001);
  st.attach(net);

  W.grad[0] = 1.0;
  nn::adam_step(net, st);
  REQUIRE(st.t == 1);
  REQUIRE_THAT(W.value[0], Catch::Matchers::WithinAbs(-0.0009999999, 1e-9));

  // hand-evaluated second step of the recursion
  double m = 0.1, v = 0.001, w = -0.001 / (1.0 + 1e-8);
  m = 0.9 * m + 0.1 * 1.0;
  v = 0.999 * v + 0.001 * 1.0;
  const double mhat = m / (1 - 0.9 * 0.9), vhat = v / (1 - 0.999 * 0.999);
  w -= 0.001 * mhat / (std::sqrt(vhat) + 1e-8);

  W.grad[0] = 1.0;
  nn::adam_step(net, st);
  REQUIRE_THAT(W.value[0], Catch::Matchers::WithinAbs(w, 1e-12));
  REQUIRE_THAT(W.value[0], Catch::Matchers::WithinAbs(-0.002, 1e-6));

  // zero gradient leaves the weight alone but still counts the step
  W.grad[0] = 0.0;
  const double before = W.value[0];
  nn::adam_step(net, st);
  REQUIRE(st.t == 3);
  REQUIRE(W.value[0] == before);
}

TEST_CASE("adam refuses non-finite gradients without partial updates") {
  Network<double> net("t");
  auto x = net.input("x", {2});
  net.output("y", net.dense("d", x, 2, Act::linear));
  nn::AdamState<double> st(0.01);
  st.attach(net);
  net.param("d.W").value.fill(1.0);
  net.param("d.W").grad[0] = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(nn::adam_step(net, st), Error);
  REQUIRE(net.param("d.W").value[0] == 1.0);
  REQUIRE(st.t == 0);
}

static double sq_loss(const std::map<std::string, Tensor<double>>& outs,
                      std::map<std::string, Tensor<double>>& head_grads) {
  double l = 0;
  for (const auto& [name, t] : outs) {
    Tensor<double> g(t.shape);
    for (long i = 0; i < t.size(); ++i) {
      l += 0.5 * t[i] * t[i];
      g[i] = t[i];
    }
    head_grads[name] = std::move(g);
  }
  return l;
}

TEST_CASE("grad check: dense tanh net under squared error") {
  Network<double> net("t");
  auto x = net.input("x", {3});
  auto h = net.dense("h", x, 4, Act::tanh, 0.01);
  net.output("y", net.dense("o", h, 2, Act::tanh));
  net.init_params(7);
  Tensor<double> in({2, 3});
  Rng rng(3);
  for (auto& v : in.data) v = rng.uniform(-1, 1);
  auto res = nn::grad_check<double>(net, {{"x", in}}, sq_loss);
  INFO(res.worst_param);
  REQUIRE(res.max_rel_err < 1e-4);
}

TEST_CASE("grad check: conv, conv transpose and every activation") {
  Network<double> net("t");
  auto x = net.input("x", {2, 6, 6});
  auto c1 = net.conv2d("c1", x, 3, 3, 2, Act::relu, 0.01);
  auto c2 = net.conv2d_transpose("c2", c1, 2, 3, 2, 1, Act::sigmoid, 0.01);
  auto f = net.flatten(c2);
  auto d1 = net.dense("d1", f, 5, Act::tanh);
  net.output("y", net.dense("o", d1, 2, Act::linear));
  net.init_params(11);
  Tensor<double> in({2, 2, 6, 6});
  Rng rng(5);
  for (auto& v : in.data) v = rng.uniform(-1, 1);
  auto res = nn::grad_check<double>(net, {{"x", in}}, sq_loss);
  INFO(res.worst_param);
  REQUIRE(res.max_rel_err < 1e-4);
}

TEST_CASE("grad check on a parameterless network is vacuous") {
  Network<double> net("t");
  auto x = net.input("x", {2});
  net.output("y", net.concat({x}));
  Tensor<double> in({1, 2}, {0.3, -0.2});
  auto res = nn::grad_check<double>(net, {{"x", in}}, sq_loss);
  REQUIRE(res.max_rel_err == 0.0);
}

TEST_CASE("concat routes gradients back to branches") {
  Network<double> net("t");
  auto a = net.input("a", {2});
  auto b = net.input("b", {1});
  net.output("y", net.concat({a, b}));
  net.forward({{"a", row<double>({1.0, 2.0})}, {"b", row<double>({3.0})}});
  auto gi = net.backward({{"y", row<double>({10.0, 20.0, 30.0})}});
  REQUIRE(gi["a"][0] == 10.0);
  REQUIRE(gi["a"][1] == 20.0);
  REQUIRE(gi["b"][0] == 30.0);
}

TEST_CASE("bounded heads stay in range for random inputs") {
  Network<float> net("t");
  auto x = net.input("x", {4});
  auto h = net.dense("h", x, 8, Act::relu);
  net.output("t", net.dense("ot", h, 2, Act::tanh));
  net.output("s", net.dense("os", h, 2, Act::sigmoid));
  net.init_params(13);
  Rng rng(17);
  for (int it = 0; it < 200; ++it) {
    Tensor<float> in({1, 4});
    for (auto& v : in.data) v = float(rng.uniform(-50, 50));
    auto out = net.forward({{"x", in}});
    for (long i = 0; i < out["t"].size(); ++i) {
      REQUIRE(out["t"][i] >= -1.f);
      REQUIRE(out["t"][i] <= 1.f);
    }
    for (long i = 0; i < out["s"].size(); ++i) {
      REQUIRE(out["s"][i] >= 0.f);
      REQUIRE(out["s"][i] <= 1.f);
    }
  }
}

TEST_CASE("forward is bitwise deterministic") {
  Network<float> net("t");
  auto x = net.input("x", {3, 8, 8});
  auto c = net.conv2d("c", x, 4, 3, 2, Act::relu);
  net.output("y", net.dense("d", net.flatten(c), 5, Act::tanh));
  net.init_params(23);
  Tensor<float> in({2, 3, 8, 8});
  Rng rng(29);
  for (auto& v : in.data) v = float(rng.uniform(-1, 1));
  auto o1 = net.forward({{"x", in}});
  auto o2 = net.forward({{"x", in}});
  REQUIRE(std::memcmp(o1["y"].ptr(), o2["y"].ptr(), o1["y"].size() * sizeof(float)) == 0);
}

TEST_CASE("structured errors: dims, ports, missing cache") {
  Network<float> net("t");
  auto x = net.input("x", {3});
  net.output("y", net.dense("d", x, 2, Act::linear));
  REQUIRE_THROWS_AS(net.forward({{"x", row<float>({1.f, 2.f})}}), Error);
  REQUIRE_THROWS_AS(net.forward({}), Error);
  Network<float> fresh("t");
  auto x2 = fresh.input("x", {1});
  fresh.output("y", fresh.dense("d", x2, 1, Act::linear));
  REQUIRE_THROWS_AS(fresh.backward({{"y", row<float>({1.f})}}), Error);
}

TEST_CASE("checkpoint round trip is bit exact and errors are typed") {
  Network<float> net("actor");
  auto x = net.input("x", {3});
  auto h = net.dense("h", x, 4, Act::relu);
  net.output("y", net.dense("o", h, 2, Act::tanh));
  net.init_params(31);

  const std::string path = "ckpt_test.bin";
  nn::save_checkpoint({&net}, path, {{"kind", "test"}});

  Network<float> other("actor");
  auto x2 = other.input("x", {3});
  auto h2 = other.dense("h", x2, 4, Act::relu);
  other.output("y", other.dense("o", h2, 2, Act::tanh));

  auto bag = nn::load_checkpoint(path);
  REQUIRE(bag.meta.at("kind") == "test");
  nn::load_params(other, bag);
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    const auto& a = net.params()[i].value;
    const auto& b = other.params()[i].value;
    REQUIRE(std::memcmp(a.ptr(), b.ptr(), a.size() * sizeof(float)) == 0);
  }
  REQUIRE(nn::params_hash({&net}) == nn::params_hash({&other}));

  {
    std::ofstream os("ckpt_badmagic.bin", std::ios::binary);
    os << "NOTMAGIC" << "payload 0\n";
  }
  try {
    nn::load_checkpoint("ckpt_badmagic.bin");
    FAIL("expected version error");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::checkpoint_version);
  }

  {
    std::ofstream os("ckpt_badshape.bin", std::ios::binary);
    os.write(nn::kCheckpointMagic, 8);
    os << "param w 1 4 3 0\n";  // shape [4] but count 3
    os << "payload 4\n";
    const float z[4] = {0, 0, 0, 0};
    os.write(reinterpret_cast<const char*>(z), 16);
  }
  try {
    nn::load_checkpoint("ckpt_badshape.bin");
    FAIL("expected corruption error");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::checkpoint_corrupt);
  }

  {
    std::ofstream os("ckpt_trunc.bin", std::ios::binary);
    os.write(nn::kCheckpointMagic, 8);
    os << "param w 1 4 4 0\n";
    os << "payload 4\n";
    const float z[2] = {0, 0};
    os.write(reinterpret_cast<const char*>(z), 8);
  }
  try {
    nn::load_checkpoint("ckpt_trunc.bin");
    FAIL("expected corruption error");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::checkpoint_corrupt);
  }

  std::remove(path.c_str());
  std::remove("ckpt_badmagic.bin");
  std::remove("ckpt_badshape.bin");
  std::remove("ckpt_trunc.bin");
}

TEST_CASE("unknown parameter on load raises") {
  Network<float> net("a");
  auto x = net.input("x", {2});
  net.output("y", net.dense("d", x, 1, Act::linear));
  nn::save_checkpoint({&net}, "ckpt_other.bin");
  Network<float> mismatched("b");
  auto x2 = mismatched.input("x", {2});
  mismatched.output("y", mismatched.dense("d", x2, 1, Act::linear));
  auto bag = nn::load_checkpoint("ckpt_other.bin");
  try {
    nn::load_params(mismatched, bag);
    FAIL("expected unknown parameter");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::unknown_parameter);
  }
  std::remove("ckpt_other.bin");
}

TEST_CASE("polyak update lags toward the online network") {
  Network<double> src("n"), dst("n");
  for (auto* n : {&src, &dst}) {
    auto x = n->input("x", {1});
    n->output("y", n->dense("d", x, 1, Act::linear));
  }
  src.param("d.W").value[0] = 1.0;
  dst.param("d.W").value[0] = 0.0;
  nn::polyak_update(src, dst, 0.005);
  REQUIRE(dst.param("d.W").value[0] == 0.005);
}
