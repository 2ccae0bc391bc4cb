#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "quantgan/generators.hpp"
#include "quantgan/stats.hpp"

using namespace quantgan;
using ad::Tensor;

namespace {

Generator small(GeneratorKind kind, std::uint64_t seed, std::size_t hidden = 4, std::size_t levels = 2) {
  Rng rng(seed);
  return Generator::create(kind, TcnSkipSpec::dilated(3, hidden, kind == GeneratorKind::PureTcn ? 1 : 2, levels),
                           rng);
}

// Wasserstein-1 of two equal-size samples: mean absolute difference of order statistics.
double emd_equal(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST_CASE("noise prior is reproducible and standard normal") {
  auto a = sample_noise({3, 42}, 100);
  auto b = sample_noise({3, 42}, 100);
  CHECK(a.shape() == ad::Shape{3, 100});
  CHECK(values(a) == values(b));
  CHECK(values(sample_noise({3, 43}, 100)) != values(a));

  auto big = sample_noise({1, 7}, 1000000);
  CHECK(std::fabs(stats::mean(big.data())) < 0.005);
  const double v = stats::variance(big.data());
  CHECK(v > 0.99);
  CHECK(v < 1.01);
  CHECK(testing::ks_pvalue(values(sample_noise({1, 8}, 10000)), testing::normal_cdf) > 0.01);
}

TEST_CASE("reference generators") {
  Rng rng(1);
  auto pure = Generator::reference(GeneratorKind::PureTcn, rng);
  CHECK(pure.receptive_field() == 127);
  CHECK(pure.noise_dim() == 3);
  CHECK(pure.noise_length(10) == 136);
  auto svnn = Generator::reference(GeneratorKind::ConstrainedSvnn, rng);
  CHECK(svnn.tcn.blocks[1].hidden_channels == 50);
  CHECK(svnn.tcn.output_channels == 2);
  CHECK(svnn.noise_length(10) == 137);
  CHECK_THROWS(Generator::create(GeneratorKind::PureTcn, TcnSkipSpec::dilated(3, 4, 2, 1), rng));
}

TEST_CASE("pure tcn path of length one equals one network evaluation") {
  auto g = small(GeneratorKind::PureTcn, 2);
  auto path = generate_path(g, 1, 99);
  Rng rng(99);
  auto Z = sample_noise(3, g.receptive_field(), rng);
  auto y = tcn_skip_forward(g.tcn, g.params, Z);
  REQUIRE(path.returns.size() == 1);
  CHECK(path.returns[0] == y.item());
}

TEST_CASE("one pass over a long noise sequence equals sliding per-window evaluation") {
  auto g = small(GeneratorKind::PureTcn, 3);
  const std::size_t T = 30, rfs = g.receptive_field();
  Rng rng(5);
  auto Z = sample_noise(3, g.noise_length(T), rng);
  auto all = g.returns(Z);
  REQUIRE(all.numel() == T);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> w;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < rfs; ++k) w.push_back(Z[c * Z.extent(1) + t + k]);
    CHECK(tcn_skip_forward(g.tcn, g.params, Tensor::from({3, rfs}, w)).item() == all[t]);
  }
}

TEST_CASE("batched noise gives the same returns as per-path noise") {
  auto g = small(GeneratorKind::ConstrainedSvnn, 4);
  const std::size_t T = 12, L = g.noise_length(T);
  Rng rng(6);
  auto n = rng.normals(5 * 3 * L);
  auto batch = g.returns(Tensor::from({5, 3, L}, n));
  for (std::size_t b = 0; b < 5; ++b) {
    std::vector<double> one(n.begin() + static_cast<std::ptrdiff_t>(b * 3 * L),
                            n.begin() + static_cast<std::ptrdiff_t>((b + 1) * 3 * L));
    auto r = g.returns(Tensor::from({3, L}, one));
    for (std::size_t t = 0; t < T; ++t) CHECK(r[t] == batch[b * T + t]);
  }
}

TEST_CASE("returns separated by more than the receptive field are uncorrelated") {
  auto g = small(GeneratorKind::PureTcn, 7);
  const std::size_t rfs = g.receptive_field(), paths = 2000;
  std::vector<double> a, b;
  for (std::size_t p = 0; p < paths; ++p) {
    auto path = generate_path(g, rfs + 2, 1000 + p);
    a.push_back(path.returns.front());
    b.push_back(path.returns.back());
  }
  CHECK(std::fabs(stats::correlation(a, b)) < 0.05);
}

TEST_CASE("svnn with zero network weights has constant volatility and drift") {
  auto g = small(GeneratorKind::ConstrainedSvnn, 8);
  for (const auto& e : g.params.entries()) {
    Tensor t = e.tensor;
    for (auto& v : t.mutable_data()) v = 0.0;
  }
  auto bias = g.params.get("output.bias").mutable_data();
  bias[0] = -0.3;
  bias[1] = 0.05;
  Rng rng(9);
  auto Z = sample_noise(3, g.noise_length(20), rng);
  auto out = svnn_forward(g, Z);
  for (std::size_t t = 0; t < 20; ++t) {
    CHECK(out.sigma[t] == 0.3);
    CHECK(out.mu[t] == 0.05);
    CHECK(out.epsilon[t] == Z[t + g.receptive_field()]);
    CHECK(out.returns[t] == doctest::Approx(0.3 * Z[t + g.receptive_field()] + 0.05).epsilon(1e-15));
  }
  CHECK_THROWS_AS(svnn_forward(g, sample_noise(3, g.receptive_field(), rng)), ad::ShapeError);
}

TEST_CASE("svnn volatility window ends strictly before the innovation") {
  auto g = small(GeneratorKind::ConstrainedSvnn, 10);
  const std::size_t T = 15, rfs = g.receptive_field(), L = g.noise_length(T);
  Rng rng(11);
  auto Z = sample_noise(3, L, rng);
  auto base = svnn_forward(g, Z);
  for (std::size_t col = 0; col < L; ++col) {
    auto zv = values(Z);
    for (std::size_t c = 0; c < 3; ++c) zv[c * L + col] += 0.7;
    auto out = svnn_forward(g, Tensor::from({3, L}, zv));
    for (std::size_t t = 0; t < T; ++t) {
      // sigma_t and mu_t read columns t .. t+rfs-1; epsilon_t reads column t+rfs
      if (col < t || col >= t + rfs) {
        CHECK(out.sigma[t] == base.sigma[t]);
        CHECK(out.mu[t] == base.mu[t]);
      }
      if (col != t + rfs) CHECK(out.epsilon[t] == base.epsilon[t]);
    }
  }
}

TEST_CASE("svnn volatility is nonnegative and independent of the innovation") {
  std::size_t checked = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto g = small(GeneratorKind::ConstrainedSvnn, 100 + s);
    auto path = generate_path(g, 1000, 200 + s);
    for (double v : path.sigma) checked += v >= 0.0;
  }
  CHECK(checked == 100000);

  auto g = small(GeneratorKind::ConstrainedSvnn, 12);
  auto path = generate_path(g, 10000, 13);
  CHECK(std::fabs(stats::correlation(path.epsilon, path.sigma)) < 0.05);
}

TEST_CASE("risk-neutral correction") {
  const std::vector<double> zero(3, 0.0), R{0.1, -0.2, 0.3};
  auto c = risk_neutral_correct(zero, zero, zero, 0.01, RiskNeutralMode::ClosedForm);
  for (double v : c) CHECK(v == 0.01);

  const std::vector<double> sig{0.1}, mu0{0.0}, r0{0.0};
  auto c2 = risk_neutral_correct(r0, sig, mu0, 0.0, RiskNeutralMode::ClosedForm);
  CHECK(-c2[0] == doctest::Approx(0.005).epsilon(1e-14));

  CHECK_THROWS_AS(risk_neutral_correct(r0, sig, mu0, 0.0, RiskNeutralMode::MonteCarlo, 0),
                  std::invalid_argument);
  Rng rng(14);
  CHECK_THROWS_AS(monte_carlo_log_h(0.1, 0.0, 0, rng), std::invalid_argument);

  for (double s : {0.05, 0.3, 1.0}) {
    const double mu = 0.02;
    auto mc = monte_carlo_log_h(s, mu, 1000000, rng);
    const double exact = mu + 0.5 * s * s;
    INFO("sigma " << s << " mc " << mc.log_h << " se " << mc.stderr_log_h);
    CHECK(std::fabs(mc.log_h - exact) < 3 * mc.stderr_log_h + 1e-15);
  }

  const std::vector<double> s3{0.2, 0.1, 0.4}, m3{0.01, -0.02, 0.0};
  auto cf = risk_neutral_correct(R, s3, m3, 0.001, RiskNeutralMode::ClosedForm);
  auto mc = risk_neutral_correct(R, s3, m3, 0.001, RiskNeutralMode::MonteCarlo, 1000000, 15);
  for (std::size_t t = 0; t < 3; ++t) CHECK(mc[t] == doctest::Approx(cf[t]).epsilon(1e-3));
}

TEST_CASE("spot paths") {
  const std::vector<double> zeros(5, 0.0);
  auto s = spot_path(zeros, {3.0, 0.0}, false);
  REQUIRE(s.size() == 6);
  for (double v : s) CHECK(v == 3.0);

  const std::vector<double> l2{std::log(2.0)};
  auto s2 = spot_path(l2, {1.0, 0.0}, false);
  CHECK(s2[1] == doctest::Approx(2.0).epsilon(1e-15));

  auto d = spot_path(zeros, {1.0, 0.1}, true);
  CHECK(d[5] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK_THROWS(spot_path(zeros, {0.0, 0.0}, false));
}

TEST_CASE("discounted risk-neutral svnn spot price is a martingale") {
  auto g = small(GeneratorKind::ConstrainedSvnn, 16);
  // scale the heads down so daily volatility is realistic
  for (auto name : {"output.weight", "output.bias"}) {
    for (auto& v : g.params.get(name).mutable_data()) v *= 0.05;
  }
  const std::size_t paths = 10000, T = 50;
  const SpotPathConfig cfg{100.0, 0.0002};
  std::vector<double> terminal;
  for (std::size_t p = 0; p < paths; ++p) {
    auto path = generate_path(g, T, 5000 + p);
    auto rn = risk_neutral_correct(path.returns, path.sigma, path.mu, cfg.rate, RiskNeutralMode::ClosedForm);
    terminal.push_back(spot_path(rn, cfg, true).back());
  }
  const double m = stats::mean(terminal);
  const double se = stats::stddev(terminal) / std::sqrt(static_cast<double>(paths));
  CHECK(std::fabs(m / cfg.s0 - 1.0) < 3 * se / cfg.s0);
}

TEST_CASE("generated returns are stationary and have stable finite kurtosis") {
  auto g = small(GeneratorKind::PureTcn, 17);
  std::vector<double> early, late;
  for (std::size_t p = 0; p < 10000; ++p) {
    auto path = generate_path(g, 40, 9000 + p);
    early.push_back(path.returns[0]);
    late.push_back(path.returns[39]);
  }
  const double sd = stats::stddev(early);
  INFO("sd " << sd);
  CHECK(emd_equal(early, late) < 0.01);
  CHECK(emd_equal(early, late) < 0.05 * sd);

  auto svnn = small(GeneratorKind::ConstrainedSvnn, 18);
  std::vector<double> kurt;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto path = generate_path(svnn, 1000000, 77 + seed);
    const double k = stats::excess_kurtosis(path.returns) + 3.0;
    CHECK(std::isfinite(k));
    kurt.push_back(k);
  }
  const auto [lo, hi] = std::minmax_element(kurt.begin(), kurt.end());
  CHECK((*hi - *lo) / *lo < 0.2);
}

TEST_CASE("path generation is deterministic and independent of thread count") {
  auto g = small(GeneratorKind::ConstrainedSvnn, 19);
  auto a = generate_paths(g, 7, 25, 123, 1);
  auto b = generate_paths(g, 7, 25, 123, 3);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(a[i].returns == b[i].returns);
    CHECK(a[i].sigma == b[i].sigma);
    CHECK(a[i].returns == generate_path(g, 25, 123 + i).returns);
  }
  CHECK(generate_paths(g, 0, 25, 1).empty());
}

TEST_CASE("paths export to csv") {
  auto g = small(GeneratorKind::ConstrainedSvnn, 20);
  auto paths = generate_paths(g, 2, 3, 1);
  std::ostringstream plain, diag;
  write_paths_csv(plain, paths, false);
  write_paths_csv(diag, paths, true);
  std::istringstream in(plain.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "path_id,t,log_return");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  CHECK(diag.str().rfind("path_id,t,log_return,sigma,mu,epsilon\n", 0) == 0);
  CHECK(plain.str().find("1,3,") != std::string::npos);

  std::ostringstream empty;
  write_paths_csv(empty, {}, false);
  CHECK(empty.str() == "path_id,t,log_return\n");
}

TEST_CASE("generator architecture json round trip") {
  auto g = small(GeneratorKind::ConstrainedSvnn, 21);
  Rng rng(0);
  auto back = generator_from_json(nlohmann::json::parse(to_json(g).dump()), rng);
  CHECK(back.kind == g.kind);
  CHECK(back.tcn == g.tcn);
}
