#include <gtest/gtest.h>

#include <cmath>

#include "builders.hpp"
#include "ttk/error.hpp"
#include "ttk/shifts.hpp"

namespace sh = ttk::shifts;
using ttk::corpus::Condition;

namespace {

const sh::GridKey kTrain{"news", "alice", Condition::low};

sh::MllGrid single_genre_grid() {
  const sh::GridKey test{"fiction", "alice", Condition::low};
  sh::MllGrid grid;
  grid.add({kTrain, kTrain, -2.0});
  grid.add({kTrain, test, -2.4});
  return grid;
}

}  // namespace

TEST(Mll, Values) {
  std::vector<ttk::backend::TokenScores> one{{"a", "m", {-2.0, -4.0}, {}, {}, {}}};
  EXPECT_DOUBLE_EQ(sh::mll(one), -3.0);
  std::vector<ttk::backend::TokenScores> two{{"a", "m", {-1.0}, {}, {}, {}}, {"b", "m", {-2.0, -4.0}, {}, {}, {}}};
  EXPECT_DOUBLE_EQ(sh::mll(two), -2.0);
  std::vector<ttk::backend::TokenScores> none;
  EXPECT_THROW(sh::mll(none), ttk::ValidationError);

  ttk::Xorshift64Star rng(5);
  std::vector<ttk::backend::TokenScores> many;
  double oracle = 0;
  for (int i = 0; i < 100; ++i) {
    ttk::backend::TokenScores ts{"s" + std::to_string(i), "m", {}, {}, {}, {}};
    double s = 0;
    for (std::size_t t = 0, n = 1 + rng.below(30); t < n; ++t) {
      ts.token_logprobs.push_back(-4 * rng.uniform());
      s += ts.token_logprobs.back();
    }
    oracle += s / ts.token_logprobs.size();
    many.push_back(ts);
  }
  EXPECT_NEAR(sh::mll(many), oracle / 100, 1e-12);
}

TEST(Shifts, ReferenceIsZero) {
  const auto obs = sh::compute_shifts(single_genre_grid(), kTrain);
  ASSERT_EQ(obs.size(), 2u);
  const auto& self = obs[0].data == kTrain ? obs[0] : obs[1];
  EXPECT_EQ(self.o_shift, 0.0);
  EXPECT_EQ(self.g_shift, 0.0);
  EXPECT_EQ(self.a_shift, 0.0);
  EXPECT_EQ(self.t_shift, 0.0);
}

TEST(Shifts, SingleComponentConstruction) {
  const auto obs = sh::compute_shifts(single_genre_grid(), kTrain);
  const auto& other = obs[0].data == kTrain ? obs[1] : obs[0];
  EXPECT_NEAR(other.g_shift, -0.4, 1e-15);
  EXPECT_NEAR(other.o_shift, -0.4, 1e-15);
  EXPECT_EQ(other.a_shift, 0.0);
  EXPECT_EQ(other.t_shift, 0.0);
}

TEST(Shifts, MissingCellIsNamed) {
  sh::MllGrid grid;
  grid.add({kTrain, kTrain, -2.0});
  grid.add({kTrain, {"fiction", "bob", Condition::low}, -2.4});
  try {
    sh::compute_shifts(grid, kTrain);
    FAIL();
  } catch (const ttk::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("fiction:alice:low"), std::string::npos) << e.what();
  }
  EXPECT_THROW(grid.add({kTrain, kTrain, -1.0}), ttk::ValidationError);
  EXPECT_THROW(grid.add({kTrain, {"x", "y", Condition::high}, std::nan("")}), ttk::ValidationError);
}

TEST(Shifts, FullGridHas784Observations) {
  const auto obs = sh::compute_all_shifts(ttk::testing::additive_grid(0.0, 1));
  EXPECT_EQ(obs.size(), 784u);
}

TEST(Shifts, LinearInMll) {
  const auto grid = ttk::testing::additive_grid(0.01, 2);
  sh::MllGrid scaled;
  for (auto c : grid.cells()) {
    c.mll *= 2.5;
    scaled.add(c);
  }
  const auto a = sh::compute_all_shifts(grid), b = sh::compute_all_shifts(scaled);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b[i].o_shift, 2.5 * a[i].o_shift, 1e-12);
    EXPECT_NEAR(b[i].a_shift, 2.5 * a[i].a_shift, 1e-12);
  }
}

TEST(Regression, ExactAdditiveOrthogonalGrid) {
  const auto obs = sh::compute_all_shifts(ttk::testing::additive_grid(0.0, 3));
  const auto r = sh::shift_regression(obs);
  ASSERT_EQ(r.names.size(), 4u);
  EXPECT_EQ(r.names[1], "genre_shift");
  for (int j = 1; j <= 3; ++j) EXPECT_NEAR(r.coefficients[j], 1.0, 1e-9);
  EXPECT_NEAR(r.coefficients[0], 0.0, 1e-9);
  EXPECT_GE(r.r_squared, 1.0 - 1e-12);
  for (double v : r.vif) EXPECT_NEAR(v, 1.0, 1e-9);
  const auto excl = sh::shift_regression(obs, true);
  EXPECT_EQ(excl.n, 784u - 28u);
}

TEST(Regression, TooFewObservations) {
  const auto obs = sh::compute_shifts(single_genre_grid(), kTrain);
  EXPECT_THROW(sh::shift_regression(obs), ttk::ValidationError);
}

TEST(GridCsv, RoundTrip) {
  const auto grid = ttk::testing::additive_grid(0.05, 4);
  const auto csv = sh::to_csv(grid);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model_genre,model_author,model_cond,data_genre,data_author,data_cond,mll");
  const auto back = sh::parse_grid_csv(csv);
  EXPECT_EQ(back.size(), grid.size());
  EXPECT_EQ(sh::to_csv(back), csv);
  EXPECT_THROW(sh::parse_grid_csv("model_genre,model_author,model_cond,data_genre,data_author,data_cond,mll\n"
                                  "a,b,low,a,b,low,notanumber\n"),
               ttk::ValidationError);
}

namespace {

std::vector<sh::ShiftObservation> paired_observations(double author_offset, double noise, std::uint64_t seed) {
  ttk::Xorshift64Star rng(seed);
  std::vector<sh::ShiftObservation> out;
  for (int i = 0; i < 10; ++i) {
    const sh::GridKey data{"g" + std::to_string(i), "b", Condition::wild};
    const double g = rng.normal(), a = rng.normal();
    out.push_back({{"news", "alice", Condition::low}, data, g + a, g, a, 0.0});
    out.push_back({{"news", "alice", Condition::high}, data, 0.0, g + noise * rng.normal(),
                   a + author_offset + noise * rng.normal(), 0.0});
  }
  return out;
}

}  // namespace

TEST(Cancellation, IdenticalListsArePerfectlyCanceled) {
  const auto res = sh::cancellation_test(paired_observations(0.0, 0.0, 1));
  ASSERT_EQ(res.size(), 2u);
  for (const auto& r : res) {
    EXPECT_TRUE(r.perfectly_canceled);
    EXPECT_EQ(r.test.p, 1.0);
    EXPECT_EQ(r.n, 10u);
  }
}

TEST(Cancellation, PlantedOffsetIsSignificant) {
  const auto obs = paired_observations(0.5, 0.1, 2);
  const auto res = sh::cancellation_test(obs);
  const auto& genre = res[0].component == "genre_shift" ? res[0] : res[1];
  const auto& author = res[0].component == "author_shift" ? res[0] : res[1];
  EXPECT_LT(author.test.p, 1e-4);
  EXPECT_NEAR(author.mean_difference, -0.5, 0.15);
  EXPECT_GT(genre.test.p, author.test.p);

  std::vector<double> d;
  std::map<std::string, std::pair<double, double>> by_data;
  for (const auto& o : obs) {
    auto& slot = by_data[o.data.genre];
    (o.model.condition == Condition::low ? slot.first : slot.second) = o.a_shift;
  }
  for (const auto& [k, v] : by_data) d.push_back(v.first - v.second);
  double m = 0, s = 0;
  for (double x : d) m += x;
  m /= d.size();
  for (double x : d) s += (x - m) * (x - m);
  EXPECT_NEAR(author.test.t, m / std::sqrt(s / (d.size() - 1) / d.size()), 1e-9);
}

TEST(Cancellation, ConstantOffsetGivesInfiniteT) {
  const auto res = sh::cancellation_test(paired_observations(0.25, 0.0, 3));
  const auto& author = res[0].component == "author_shift" ? res[0] : res[1];
  EXPECT_FALSE(author.perfectly_canceled);
  EXPECT_TRUE(std::isinf(author.test.t));
  EXPECT_EQ(author.test.p, 0.0);
}

TEST(Cancellation, UnmatchedObservation) {
  auto obs = paired_observations(0.0, 0.1, 4);
  obs.pop_back();
  EXPECT_THROW(sh::cancellation_test(obs), ttk::ValidationError);
}
