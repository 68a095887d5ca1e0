#include "sparse_anova/risk.hpp"
#include "sparse_anova/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cmath>
#include <vector>

using namespace sparse_anova;

namespace {

SimulationOptions with(Sampler s, int threads = 1)
{
  SimulationOptions o;
  o.sampler = s;
  o.threads = threads;
  return o;
}

ModelInstance empty_instance(int d, int k, double eps)
{
  ModelInstance m;
  m.d = d;
  m.k_min = m.k_max = k;
  m.epsilon = eps;
  return m;
}

} // namespace

TEST_CASE("hamming distance")
{
  const std::vector<std::uint8_t> a{1, 0, 1}, b{0, 0, 1};
  CHECK(hamming(a, a) == 0);
  CHECK(hamming(a, b) == 1);
  std::vector<std::uint8_t> x(17), y(17);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = i % 3 == 0;
    y[i] = !x[i];
  }
  CHECK(hamming(x, y) == 17);
  const std::vector<std::uint8_t> shorter{1, 0};
  CHECK(test::error_code([&] { hamming(a, shorter); }) == ErrorCode::index_mismatch);
}

TEST_CASE("risk decomposes into normalised false positives and negatives")
{
  const ModelInstance m = design_instance(2, 10, 1.0, 1e-4);
  const auto report =
    estimate_risk_sweep(m, design_scaled_subset(2), {0.01, 0.05, 1.0}, SelectorConfig{}, 8, 3, with(Sampler::shell));
  REQUIRE(report.rows.size() == 3);
  const double norm = std::pow(45.0, m.beta(2) - 1.0);
  for (const auto& r : report.rows) {
    CAPTURE(r.alpha);
    CHECK(r.err >= 0.0);
    CHECK(std::abs(r.err - norm * (r.false_pos + r.false_neg)) <= 1e-12);
    CHECK(r.beta == doctest::Approx(m.beta(2)).epsilon(1e-15));
    CHECK(r.m_hat.size() == 8);
    CHECK(r.J == 8);
    CHECK(r.seed == 3);
  }
}

TEST_CASE("risk is zero exactly when every replicate recovers the actives")
{
  ModelInstance m = design_instance(2, 10, 1.0, 1e-4);
  m.noise_scale = 0.0;
  for (Sampler s : {Sampler::shell, Sampler::gaussian, Sampler::frequency}) {
    CAPTURE(to_string(s));
    const auto report = estimate_risk(m, SelectorConfig{}, 3, 5, with(s));
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].err == 0.0);
    CHECK(report.rows[0].false_pos == 0.0);
    CHECK(report.rows[0].false_neg == 0.0);
    CHECK(report.rows[0].err_sd == 0.0);
  }
}

TEST_CASE("six-component design at d = 10, k = 2, alpha = 1 has zero risk" * doctest::should_fail())
{
  const auto report = estimate_risk(design_instance(2, 10), SelectorConfig{}, 20, 7);
  CHECK(report.rows[0].err == 0.0);
}

TEST_CASE("six-component design at d = 10, k = 2, alpha = 1 only errs by false positives")
{
  const auto report = estimate_risk(design_instance(2, 10), SelectorConfig{}, 20, 7);
  CHECK(report.rows[0].false_neg == 0.0);
  CHECK(report.rows[0].err <= 0.10);
}

TEST_CASE("six-component design at d = 50, k = 3, alpha = 0.07")
{
  const auto report =
    estimate_risk_sweep(design_instance(3, 50), design_scaled_subset(3), {0.07}, SelectorConfig{}, 20, 7);
  CHECK(std::abs(report.rows[0].err - 0.092) <= 0.10);
}

TEST_CASE("frequency sampler matches the selector on sampled data")
{
  const ModelInstance m = design_instance(2, 10, 1.0, 1e-2);
  SelectorConfig config;
  const auto report = estimate_risk(m, config, 4, 17, with(Sampler::frequency));
  const NodeGrid g = thresholds_and_radii(10, 2, 1.0, 1e-2, config, m.window(2));
  ObservationSet obs;
  obs.noise = m.epsilon;
  obs.lattice = g.nodes.front().profile.support();
  std::map<SubsetId, Lattice> supports;
  for (const SubsetId& u : enumerate_subsets(10, 2))
    supports.emplace(u, obs.lattice);
  for (int j = 0; j < 4; ++j) {
    obs.values = sample_data(m, supports, replicate_seed(17, static_cast<std::uint64_t>(j)));
    const auto out = select_adaptive(obs, g, config);
    CHECK(out.m_hat == report.rows[0].m_hat[static_cast<std::size_t>(j)]);
  }
}

TEST_CASE("shell and frequency samplers agree in distribution")
{
  const ModelInstance m = empty_instance(10, 2, 1e-2);
  SelectorConfig config;
  config.scan = LepskiScan::maximal;
  const int J = 300;
  const auto a = estimate_risk(m, config, J, 1, with(Sampler::shell)).rows[0];
  const auto b = estimate_risk(m, config, J, 2, with(Sampler::frequency)).rows[0];
  const double se = std::sqrt((a.err_sd * a.err_sd + b.err_sd * b.err_sd) / J);
  CHECK(std::abs(a.err - b.err) <= 4.0 * se + 1e-12);
}

TEST_CASE("reports are identical across thread counts")
{
  const ModelInstance m = design_instance(3, 10, 1.0, 1e-4);
  const std::vector<double> alphas{0.03, 0.1, 1.0};
  for (Sampler s : {Sampler::shell, Sampler::gaussian}) {
    CAPTURE(to_string(s));
    const auto one = estimate_risk_sweep(m, design_scaled_subset(3), alphas, SelectorConfig{}, 6, 11, with(s, 1));
    const auto three = estimate_risk_sweep(m, design_scaled_subset(3), alphas, SelectorConfig{}, 6, 11, with(s, 3));
    CHECK(one.to_json() == three.to_json());
    CHECK(one.table2_csv() == three.table2_csv());
    CHECK(one.rows_csv() == three.rows_csv());
  }
  const ModelInstance small = design_instance(2, 10, 1.0, 1e-2);
  const auto f1 = estimate_risk(small, SelectorConfig{}, 5, 2, with(Sampler::frequency, 1));
  const auto f4 = estimate_risk(small, SelectorConfig{}, 5, 2, with(Sampler::frequency, 4));
  CHECK(f1.to_json() == f4.to_json());
}

TEST_CASE("reports leave out timings unless asked")
{
  const auto r = estimate_risk(design_instance(2, 10), SelectorConfig{}, 2, 1);
  CHECK(r.to_json().find("wall_time") == std::string::npos);
  CHECK(r.to_json(true).find("wall_time") != std::string::npos);
}

TEST_CASE("risk is nonincreasing in alpha")
{
  const ModelInstance m = design_instance(3, 10);
  const std::vector<double> alphas{0.01, 0.015, 0.03, 0.05, 0.07, 0.1, 0.25, 0.5, 1.0};
  const auto report = estimate_risk_sweep(m, design_scaled_subset(3), alphas, SelectorConfig{}, 20, 7);
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    CHECK(report.rows[i].err <= report.rows[i - 1].err + 0.05);
}

TEST_CASE("risk estimation rejects bad inputs")
{
  const ModelInstance m = design_instance(2, 10);
  CHECK(test::error_code([&] { estimate_risk(m, SelectorConfig{}, 0, 1); }) == ErrorCode::invalid_argument);
  CHECK(test::error_code([&] { estimate_risk_sweep(m, SubsetId{2, 3}, {1.0}, SelectorConfig{}, 1, 1); }) ==
        ErrorCode::unknown_subset);
  CHECK(test::error_code([&] { estimate_risk_sweep(m, SubsetId{1, 2}, {-1.0}, SelectorConfig{}, 1, 1); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("aggregate risk sums the normalised Hamming losses of each order")
{
  const ModelInstance m = design_aggregate_instance(2, 10);
  const auto agg = estimate_risk(m, SelectorConfig{}, 6, 4, with(Sampler::shell));
  REQUIRE(agg.rows.size() == 1);
  CHECK(agg.rows[0].aggregate);
  CHECK(agg.rows[0].k == 2);
  CHECK(agg.rows[0].err >= 0.0);
  CHECK(agg.rows[0].err <= (agg.rows[0].false_pos + agg.rows[0].false_neg) + 1e-12);
}

TEST_CASE("phase classification examples")
{
  CHECK(phase_classify(0.5, 0.3) == Phase::none);
  CHECK(phase_classify(0.5, 3.0) == Phase::exact);
  CHECK(phase_classify(0.5, 1.0) == Phase::almost_full);
  CHECK(phase_classify(0.75, 2.25) == Phase::boundary);
  CHECK(phase_classify(0.5, 0.5) == Phase::boundary);
  for (double b : {0.01, 0.3, 0.6, 0.99})
    for (double g : {4.0001, 5.0, 100.0})
      CHECK(phase_classify(b, g) == Phase::exact);
  CHECK(test::error_code([] { phase_classify(0.0, 1.0); }) == ErrorCode::domain_error);
  CHECK(test::error_code([] { phase_classify(1.0, 1.0); }) == ErrorCode::domain_error);
  CHECK(test::error_code([] { phase_classify(0.5, 0.0); }) == ErrorCode::domain_error);
}

TEST_CASE("phase classification partitions the unit strip")
{
  boost::random::mt19937_64 rng(3);
  boost::random::uniform_real_distribution<double> ub(0.0, 1.0), ug(0.0, 4.0);
  for (int i = 0; i < 10000; ++i) {
    double b = ub(rng), g = ug(rng);
    if (b == 0.0 || g == 0.0)
      continue;
    const auto curve = boundary_curves(std::vector<double>{b}).front();
    const Phase p = phase_classify(b, g);
    const int regions = (g > curve.gamma_exact) + (g > curve.gamma_almost_full && g < curve.gamma_exact) +
                        (g < curve.gamma_almost_full);
    REQUIRE(regions == 1);
    if (g > curve.gamma_exact)
      CHECK(p == Phase::exact);
    else if (g > curve.gamma_almost_full)
      CHECK(p == Phase::almost_full);
    else
      CHECK(p == Phase::none);
  }
}

TEST_CASE("boundary curves")
{
  std::vector<double> betas;
  for (int i = 1; i < 1000; ++i)
    betas.push_back(i / 1000.0);
  const auto c = boundary_curves(betas);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].gamma_almost_full == c[i].beta);
    CHECK(c[i].gamma_exact > c[i].gamma_almost_full);
    if (i > 0)
      CHECK(c[i].gamma_exact < c[i - 1].gamma_exact);
  }
  CHECK(boundary_curves(std::vector<double>{0.75}).front().gamma_exact == doctest::Approx(2.25).epsilon(1e-15));
  const auto near1 = boundary_curves(std::vector<double>{1.0 - 1e-12}).front();
  CHECK(near1.gamma_exact == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(near1.gamma_almost_full == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(test::error_code([] { boundary_curves(std::vector<double>{1.0}); }) == ErrorCode::domain_error);
}

TEST_CASE("dichotomy instance")
{
  CHECK(dichotomy_active_count(30, 1, 0.5) == 5);
  CHECK(dichotomy_active_count(10, 2, 0.999) == 1);
  const ModelInstance m = dichotomy_instance(1, 1.0, 1e-3, 30, 0.5, 0.3);
  CHECK(m.active_count(1) == 5);
  for (int j = 1; j <= 5; ++j)
    CHECK(m.is_active(SubsetId{j}));
  CHECK(test::error_code([] { dichotomy_instance(1, 1.0, 1e-3, 30, 0.5, 0.0); }) == ErrorCode::invalid_argument);
  CHECK(test::error_code([] { dichotomy_instance(1, 1.0, 1e-3, 30, 0.5, 0.6); }) == ErrorCode::invalid_argument);
}

TEST_CASE("dichotomy below the boundary keeps the risk away from zero")
{
  const auto r = boundary_dichotomy_experiment(1, 1.0, 1e-3, 30, 0.5, -0.3, 50, 7);
  CHECK(r.rows[0].label == "margin=-0.30");
  CHECK(r.rows[0].err >= 0.2);
}

TEST_CASE("dichotomy above the boundary has small risk at d = 30" * doctest::should_fail())
{
  const auto r = boundary_dichotomy_experiment(1, 1.0, 1e-3, 30, 0.5, 0.3, 50, 7);
  CHECK(r.rows[0].err <= 0.1);
}

TEST_CASE("dichotomy above the boundary does not worsen with d")
{
  const auto small = boundary_dichotomy_experiment(1, 1.0, 1e-3, 30, 0.5, 0.3, 50, 7);
  const auto large = boundary_dichotomy_experiment(1, 1.0, 1e-3, 120, 0.5, 0.3, 50, 7);
  CHECK(large.rows[0].err <= small.rows[0].err + 0.05);
  CHECK(small.rows[0].err < boundary_dichotomy_experiment(1, 1.0, 1e-3, 30, 0.5, -0.3, 50, 7).rows[0].err);
}
