#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "artmetrics/hedonic.hpp"
#include "oracles.hpp"

using namespace artmetrics;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

Eigen::MatrixXd to_eigen(const oracle::Dense& d) {
  Eigen::MatrixXd m(d.size(), d[0].size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[0].size(); ++j) m(i, j) = d[i][j];
  return m;
}

std::vector<std::string> names(std::size_t k) {
  std::vector<std::string> out{std::string(kInterceptName)};
  for (std::size_t j = 1; j < k; ++j) out.push_back("x" + std::to_string(j));
  return out;
}

struct System {
  oracle::Dense x;
  std::vector<double> y;
};

System random_system(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  System s;
  s.x = oracle::random_matrix(n, k, rng, -2.0, 2.0);
  for (auto& row : s.x) row[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < k; ++j) v += (0.5 * j - 1.0) * s.x[i][j];
    s.y.push_back(v + z(rng));
  }
  return s;
}

FitSummary fit_system(const System& s) {
  return fit_ols(to_eigen(s.x), Eigen::Map<const Eigen::VectorXd>(s.y.data(), s.y.size()), names(s.x[0].size()));
}

std::vector<FeatureRow> synthetic_rows(std::size_t n, std::mt19937_64& rng, double alpha = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 0.5);
  const std::vector<std::string> artists{"a", "b", "c", "d"};
  const std::vector<std::string> cities{"London", "New York", "Paris"};
  std::vector<FeatureRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow r;
    r.lot_id = "L" + std::to_string(i);
    r.e_g = 1.0 + 6.0 * u(rng);
    r.redpct = u(rng) * 0.5;
    r.bluepct = u(rng) * 0.5;
    r.height = 10 + 40 * u(rng);
    r.width = 10 + 40 * u(rng);
    r.signed_work = u(rng) < 0.7;
    r.dated = u(rng) < 0.3;
    r.artist = artists[i % artists.size()];
    r.medium = u(rng) < 0.5 ? "oil" : "acrylic";
    r.house = u(rng) < 0.5 ? "Sotheby's" : "Christie's";
    r.city = cities[(i / 3) % cities.size()];
    r.year = std::to_string(2000 + i % 5);
    r.month = i % 2 ? "03" : "11";
    r.topic = kAllTopics[i % 10];
    r.style = i % 4 == 0 ? "" : (i % 4 == 1 ? "Cubism" : "Pop Art");
    r.log_price = 5.0 + alpha * r.e_g + 0.2 * r.signed_work + 0.01 * r.height + (r.artist == "b" ? 0.5 : 0.0) + z(rng);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST(Terms, ParseAndCanonicalNames) {
  EXPECT_EQ(parse_term("e_g").name, "e_g");
  EXPECT_EQ(parse_term("entropy").name, "e_g");
  EXPECT_EQ(parse_term("signature").name, "signed");
  EXPECT_EQ(parse_term("height ^ 2").name, "height^2");
  EXPECT_EQ(parse_term("(height*width)^2").name, "(height*width)^2");
  EXPECT_EQ(parse_term("e_g * height * width").name, "e_g*height*width");
  EXPECT_EQ(code_of([] { parse_term("beauty"); }), ErrorCode::UnknownField);
  EXPECT_EQ(code_of([] { parse_term("height^"); }), ErrorCode::UnknownField);

  FeatureRow r;
  r.height = 3;
  r.width = 2;
  r.e_g = 0.5;
  EXPECT_DOUBLE_EQ(parse_term("(height*width)^2").eval(r), 36.0);
  EXPECT_DOUBLE_EQ(parse_term("e_g*height*width").eval(r), 3.0);
}

TEST(Specs, BenchmarkTermSets) {
  const auto s2 = builtin_spec("(2)");
  ASSERT_TRUE(s2);
  std::vector<std::string> terms;
  for (const auto& t : s2->terms) terms.push_back(t.name);
  EXPECT_EQ(terms, (std::vector<std::string>{"e_g", "height", "height^2", "width", "width^2", "signed", "dated"}));
  EXPECT_EQ(builtin_spec("benchmark-2")->terms.size(), 7u);
  EXPECT_FALSE(builtin_spec("1")->has_term("e_g"));
  EXPECT_TRUE(builtin_spec("3")->has_term("e_g^2"));
  EXPECT_TRUE(builtin_spec("4")->has_term("e_g*height"));
  EXPECT_TRUE(builtin_spec("5")->has_term("e_g*width"));
  EXPECT_TRUE(builtin_spec("topic-2")->include_topic);
  EXPECT_TRUE(builtin_spec("style-4")->include_topic);
  EXPECT_FALSE(builtin_spec("9"));

  const auto custom = spec_from_json(nlohmann::json::parse(R"({"terms":["e_g","height"],"dummies":["city"]})"));
  EXPECT_EQ(custom.terms.size(), 2u);
  EXPECT_EQ(custom.dummies, (std::vector<DummyGroup>{DummyGroup::City}));
}

TEST(Design, TwoRowsEntropyOnly) {
  std::vector<FeatureRow> rows(2);
  rows[0].e_g = 1;
  rows[1].e_g = 2;
  ModelSpec spec = make_spec("e", {"e_g"});
  const auto d = build_design(rows, spec);
  EXPECT_EQ(d.x.rows(), 2);
  EXPECT_EQ(d.x.cols(), 2);
}

TEST(Design, ThreeLevelGroupGivesTwoColumns) {
  std::vector<FeatureRow> rows(6);
  for (std::size_t i = 0; i < 6; ++i) rows[i].city = std::string(1, static_cast<char>('a' + i % 3));
  ModelSpec spec;
  spec.dummies = {DummyGroup::City};
  const auto d = build_design(rows, spec);
  EXPECT_EQ(d.columns, (std::vector<std::string>{"(intercept)", "city=b", "city=c"}));
  EXPECT_EQ(d.x(0, 1), 0.0);
  EXPECT_EQ(d.x(1, 1), 1.0);
  EXPECT_EQ(d.x(2, 2), 1.0);
}

TEST(Design, ColumnCountMatchesEnumeration) {
  std::mt19937_64 rng(2);
  const auto rows = synthetic_rows(120, rng);
  const auto spec = *builtin_spec("2");
  const auto d = build_design(rows, spec);
  std::size_t expect = 1 + spec.terms.size();
  for (auto g : spec.groups()) {
    std::set<std::string> levels;
    for (const auto& r : rows) levels.insert(group_level(r, g));
    expect += levels.size() - 1;
  }
  EXPECT_EQ(static_cast<std::size_t>(d.x.cols()), expect);
  EXPECT_EQ(d.columns.size(), expect);
}

TEST(Design, SingleLevelGroupOmittedAndEmptyRejected) {
  std::vector<FeatureRow> rows(4);
  for (std::size_t i = 0; i < 4; ++i) rows[i].e_g = static_cast<double>(i);
  const auto d = build_design(rows, make_spec("x", {"e_g"}));
  EXPECT_EQ(d.x.cols(), 2);
  EXPECT_EQ(code_of([] { build_design({}, ModelSpec{}); }), ErrorCode::EmptySample);
}

TEST(Ols, ExactLine) {
  Eigen::MatrixXd x(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = 1;
    x(i, 1) = i;
    y(i) = 1 + 2 * i;
  }
  const auto fit = fit_ols(x, y, {"(intercept)", "x"});
  EXPECT_NEAR(fit.coefficients[0].estimate, 1.0, 1e-12);
  EXPECT_NEAR(fit.coefficients[1].estimate, 2.0, 1e-12);
  EXPECT_NEAR(fit.rss, 0.0, 1e-20);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
}

TEST(Ols, MatchesNormalEquations) {
  std::mt19937_64 rng(100);
  const auto s = random_system(50, 4, rng);
  const auto fit = fit_system(s);
  const auto ref = oracle::normal_equations(s.x, s.y);
  ASSERT_EQ(fit.coefficients.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(fit.coefficients[j].estimate, ref.beta[j], 1e-8);
    EXPECT_NEAR(fit.coefficients[j].std_error, ref.se[j], 1e-8);
  }
  EXPECT_NEAR(fit.r2, ref.r2, 1e-8);
  EXPECT_NEAR(fit.adj_r2, ref.adj_r2, 1e-8);
  EXPECT_EQ(fit.df, 46u);
}

// Frozen values computed offline with statsmodels OLS.
TEST(Ols, FrozenSmallSystem) {
  oracle::Dense x{{1, 0}, {1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}};
  std::vector<double> y{1.1, 2.9, 5.2, 7.1, 8.8, 11.2};
  const auto fit = fit_system({x, y});
  EXPECT_NEAR(fit.coefficients[0].estimate, 1.0428571428571427, 1e-12);
  EXPECT_NEAR(fit.coefficients[1].estimate, 2.002857142857143, 1e-12);
  EXPECT_NEAR(fit.coefficients[1].std_error, 0.04389226141639197, 1e-12);
  EXPECT_NEAR(fit.coefficients[1].p_value, 1.3794754284220302e-06, 1e-12);
  EXPECT_NEAR(fit.adj_r2, 0.9976033066244199, 1e-12);
  EXPECT_EQ(fit.coefficients[1].stars, "***");
}

TEST(Ols, DuplicatedColumnDroppedOnce) {
  std::mt19937_64 rng(4);
  auto s = random_system(40, 3, rng);
  const auto base = fit_system(s);
  for (auto& row : s.x) row.push_back(row[1]);
  Eigen::MatrixXd x = to_eigen(s.x);
  const auto fit = fit_ols(x, Eigen::Map<const Eigen::VectorXd>(s.y.data(), s.y.size()),
                           {"(intercept)", "x1", "x2", "x1_copy"});
  EXPECT_EQ(fit.dropped, (std::vector<std::string>{"x1_copy"}));
  ASSERT_EQ(fit.coefficients.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fit.coefficients[j].estimate, base.coefficients[j].estimate, 1e-10);
  EXPECT_NEAR(fit.adj_r2, base.adj_r2, 1e-10);
}

TEST(Ols, FullDummySetDropsOnePerGroup) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> lvl(0, 2), lvl2(0, 3);
  std::normal_distribution<double> z;
  const int n = 80;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 1 + 3 + 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1;
    x(i, 1 + (i % 3)) = 1;
    x(i, 4 + lvl2(rng)) = 1;
    y(i) = z(rng);
  }
  const auto fit = fit_ols(x, y, {"(intercept)", "g=a", "g=b", "g=c", "h=a", "h=b", "h=c", "h=d"});
  EXPECT_EQ(fit.dropped, (std::vector<std::string>{"g=c", "h=d"}));
  EXPECT_EQ(fit.k, 6u);
}

TEST(Ols, UnderdeterminedAndNonFinite) {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 1, 1;
  Eigen::VectorXd y(2);
  y << 1, 2;
  EXPECT_EQ(code_of([&] { fit_ols(x, y, {"(intercept)", "x"}); }), ErrorCode::Underdetermined);
  Eigen::MatrixXd x3(3, 2);
  x3 << 1, 0, 1, 1, 1, NAN;
  Eigen::VectorXd y3(3);
  y3 << 1, 2, 3;
  EXPECT_EQ(code_of([&] { fit_ols(x3, y3, {"(intercept)", "x"}); }), ErrorCode::NonFinite);
}

TEST(OlsProperties, OracleOrthogonalityAndAdjustedBound) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> kdist(1, 10);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = kdist(rng);
    std::uniform_int_distribution<std::size_t> ndist(k + 2, 200);
    const auto s = random_system(ndist(rng), k, rng);
    const auto fit = fit_system(s);
    ASSERT_LE(fit.adj_r2, fit.r2 + 1e-15);
    if (k == 1) {
      ASSERT_NEAR(fit.adj_r2, fit.r2, 1e-12);
      continue;
    }
    ASSERT_LT(fit.adj_r2, fit.r2);
    const auto ref = oracle::normal_equations(s.x, s.y);
    for (std::size_t j = 0; j < k; ++j) {
      ASSERT_NEAR(fit.coefficients[j].estimate, ref.beta[j], 1e-8);
      ASSERT_NEAR(fit.coefficients[j].std_error, ref.se[j], 1e-8);
    }
    ASSERT_NEAR(fit.r2, ref.r2, 1e-8);
    ASSERT_NEAR(fit.adj_r2, ref.adj_r2, 1e-8);

    const Eigen::MatrixXd x = to_eigen(s.x);
    Eigen::VectorXd b(k);
    for (std::size_t j = 0; j < k; ++j) b(j) = fit.coefficients[j].estimate;
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(s.y.data(), s.y.size());
    ASSERT_LE((x.transpose() * (y - x * b)).cwiseAbs().maxCoeff(), 1e-6 * y.norm());
  }
}

TEST(OlsProperties, ColumnScaling) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_system(60, 5, rng);
    const auto base = fit_system(s);
    const double c = trial % 2 ? 1000.0 : 1e-3;
    for (auto& row : s.x) row[2] *= c;
    const auto scaled = fit_system(s);
    ASSERT_NEAR(scaled.coefficients[2].estimate * c, base.coefficients[2].estimate, 1e-8);
    ASSERT_NEAR(scaled.coefficients[2].std_error * c, base.coefficients[2].std_error, 1e-8);
    ASSERT_NEAR(scaled.coefficients[2].t_stat, base.coefficients[2].t_stat, 1e-8);
    ASSERT_NEAR(scaled.r2, base.r2, 1e-8);
    for (std::size_t j : {0u, 1u, 3u, 4u}) {
      ASSERT_NEAR(scaled.coefficients[j].estimate, base.coefficients[j].estimate, 1e-8);
      ASSERT_NEAR(scaled.coefficients[j].std_error, base.coefficients[j].std_error, 1e-8);
    }
  }
}

TEST(OlsProperties, RowOrderInvariance) {
  std::mt19937_64 rng(10);
  const auto rows = synthetic_rows(200, rng);
  const auto spec = *builtin_spec("2");
  const auto a = fit_spec(rows, spec);
  auto shuffled = rows;
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto b = fit_spec(shuffled, spec);
    ASSERT_EQ(a.n, b.n);
    ASSERT_EQ(a.k, b.k);
    ASSERT_EQ(a.dropped, b.dropped);
    ASSERT_EQ(a.coefficients.size(), b.coefficients.size());
    for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
      ASSERT_EQ(a.coefficients[j].name, b.coefficients[j].name);
      ASSERT_NEAR(a.coefficients[j].estimate, b.coefficients[j].estimate, 1e-10);
      ASSERT_NEAR(a.coefficients[j].std_error, b.coefficients[j].std_error, 1e-10);
    }
    ASSERT_NEAR(a.r2, b.r2, 1e-10);
    ASSERT_NEAR(a.adj_r2, b.adj_r2, 1e-10);
  }
}

TEST(Stars, Thresholds) {
  EXPECT_EQ(significance_stars(0.009), "***");
  EXPECT_EQ(significance_stars(0.01), "**");
  EXPECT_EQ(significance_stars(0.049), "**");
  EXPECT_EQ(significance_stars(0.05), "*");
  EXPECT_EQ(significance_stars(0.0999), "*");
  EXPECT_EQ(significance_stars(0.1), "");
}

TEST(Compare, RedundantCandidateLeavesFitUnchanged) {
  std::mt19937_64 rng(12);
  const auto rows = synthetic_rows(300, rng);
  // "width*1" style duplicates are not expressible; height^1 is height itself
  ModelSpec base = make_spec("b", {"e_g", "height"});
  base.dummies = {DummyGroup::Artist};
  ModelSpec with_dup = base;
  with_dup.terms.push_back(parse_term("(height)"));
  with_dup.terms.back().name = "height_copy";
  const auto a = fit_spec(rows, base);
  const auto b = fit_spec(rows, with_dup);
  EXPECT_EQ(b.dropped, (std::vector<std::string>{"height_copy"}));
  EXPECT_NEAR(a.adj_r2, b.adj_r2, 1e-10);
}

TEST(Compare, AddAndDropPanels) {
  std::mt19937_64 rng(14);
  auto rows = synthetic_rows(3000, rng, 0.3);
  ModelSpec full = make_spec("full", {"e_g", "signed", "dated"});
  full.dummies = {DummyGroup::Artist};
  ModelSpec base = make_spec("base", {});
  base.dummies = {DummyGroup::Artist};

  const auto add = compare_fit_add(rows, base, {"e_g", "dated"});
  ASSERT_EQ(add.entries.size(), 2u);
  EXPECT_GT(add.entries[0].delta_adj_r2, 0.0);
  EXPECT_NEAR(add.entries[1].delta_adj_r2, 0.0, 0.01);

  const auto drop = compare_fit_drop(rows, full, {"e_g", "dated"});
  EXPECT_LT(drop.entries[0].delta_adj_r2, 0.0);
  EXPECT_NEAR(drop.entries[1].delta_adj_r2, 0.0, 0.01);
  EXPECT_LT(drop.entries[0].delta_adj_r2, drop.entries[1].delta_adj_r2);

  const auto empty = compare_fit_drop(rows, full, {});
  EXPECT_TRUE(empty.entries.empty());
  EXPECT_EQ(empty.reference.n, rows.size());

  EXPECT_EQ(code_of([&] { compare_fit_drop(rows, full, {"bluepct"}); }), ErrorCode::UnknownField);
  EXPECT_EQ(code_of([&] { compare_fit_add(rows, base, {"beauty"}); }), ErrorCode::UnknownField);
  EXPECT_EQ(code_of([&] { compare_fit_add(rows, full, {"e_g"}); }), ErrorCode::InvalidArgument);
}

TEST(Compare, DroppingSoleRegressorLosesFit) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> z(0.0, 0.1);
  std::vector<FeatureRow> rows(500);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].e_g = static_cast<double>(i % 50) / 10.0;
    rows[i].log_price = 2.0 * rows[i].e_g + z(rng);
  }
  ModelSpec full = make_spec("f", {"e_g"});
  full.dummies.clear();
  const auto drop = compare_fit_drop(rows, full, {"e_g"});
  EXPECT_GT(drop.reference.adj_r2, 0.9);
  EXPECT_NEAR(drop.entries[0].fit.adj_r2, 0.0, 1e-12);
}

TEST(Compare, DummyGroupCandidate) {
  std::mt19937_64 rng(16);
  const auto rows = synthetic_rows(400, rng);
  ModelSpec base = make_spec("b", {"e_g"});
  base.dummies.clear();
  const auto add = compare_fit_add(rows, base, {"artist"});
  EXPECT_GT(add.entries[0].delta_adj_r2, 0.0);
}

TEST(ByTopic, SingleTopicAndTooSmall) {
  std::mt19937_64 rng(20);
  auto rows = synthetic_rows(60, rng);
  for (auto& r : rows) r.topic = TopicLabel::Landscape;
  ModelSpec spec = make_spec("s", {"e_g"});
  spec.dummies.clear();
  const auto fits = fit_by_topic(rows, spec);
  ASSERT_EQ(fits.size(), 1u);
  EXPECT_EQ(fits.begin()->first, TopicLabel::Landscape);

  rows[0].topic = TopicLabel::Nude;
  EXPECT_EQ(code_of([&] { fit_by_topic(rows, spec); }), ErrorCode::SubsampleTooSmall);
}

TEST(ByTopic, RecoversPerTopicAlpha) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  std::vector<FeatureRow> rows(2000);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].topic = i % 2 ? TopicLabel::Abstract : TopicLabel::Portrait;
    rows[i].e_g = u(rng);
    rows[i].log_price = 4.0 + (i % 2 ? 0.25 : -0.1) * rows[i].e_g + z(rng);
  }
  ModelSpec spec = make_spec("s", {"e_g"});
  spec.dummies.clear();
  const auto fits = fit_by_topic(rows, spec);
  const auto* a = fits.at(TopicLabel::Abstract).find("e_g");
  const auto* p = fits.at(TopicLabel::Portrait).find("e_g");
  EXPECT_NEAR(a->estimate, 0.25, 3 * a->std_error);
  EXPECT_NEAR(p->estimate, -0.1, 3 * p->std_error);
}

TEST(ModelSample, TopicAndStyleRestrictions) {
  std::mt19937_64 rng(22);
  const auto rows = synthetic_rows(100, rng);
  const auto topic_rows = model_sample(rows, *builtin_spec("topic-2"));
  for (const auto& r : topic_rows) EXPECT_TRUE(is_regular_topic(r.topic));
  const auto style_rows = model_sample(rows, *builtin_spec("style-2"));
  for (const auto& r : style_rows) EXPECT_FALSE(r.style.empty());
  EXPECT_EQ(style_rows.size(), 75u);
}

TEST(Serialization, JsonFieldsAndText) {
  std::mt19937_64 rng(23);
  const auto fit = fit_spec(synthetic_rows(150, rng), *builtin_spec("2"));
  const auto j = to_json(fit);
  for (const char* key : {"spec", "n", "k", "df", "rss", "sigma", "r2", "adj_r2", "terms", "dropped"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["terms"][0]["name"], "(intercept)");
  const auto text = to_text(fit);
  EXPECT_NE(text.find("artist dummy"), std::string::npos);
  EXPECT_NE(text.find("Adj. R^2"), std::string::npos);
  EXPECT_NE(text.find("(2)"), std::string::npos);
}
