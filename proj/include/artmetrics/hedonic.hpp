#pragma once

// Hedonic price regressions: dummy-encoded designs, OLS with classical
// inference, and adjusted-R^2 comparisons.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "artmetrics/catalog.hpp"
#include "artmetrics/error.hpp"

namespace artmetrics {

struct FeatureRow {
  std::string lot_id;
  double log_price = 0.0;
  double e_g = 0.0;
  double redpct = 0.0;
  double bluepct = 0.0;
  double height = 0.0;
  double width = 0.0;
  double signed_work = 0.0;
  double dated = 0.0;
  std::string artist;
  std::string medium;
  std::string house;
  std::string city;
  std::string year;
  std::string month;
  TopicLabel topic = TopicLabel::Unknown;
  std::string style;
};

// ---------------------------------------------------------------------------
// Terms

enum class NumericField { EntropyGray, Redpct, Bluepct, Height, Width, Signed, Dated };

inline std::string_view field_name(NumericField f) {
  switch (f) {
    case NumericField::EntropyGray: return "e_g";
    case NumericField::Redpct: return "redpct";
    case NumericField::Bluepct: return "bluepct";
    case NumericField::Height: return "height";
    case NumericField::Width: return "width";
    case NumericField::Signed: return "signed";
    case NumericField::Dated: return "dated";
  }
  return "";
}

inline std::optional<NumericField> parse_field(std::string_view name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::map<std::string, NumericField, std::less<>> names{
      {"e_g", NumericField::EntropyGray},     {"eg", NumericField::EntropyGray},
      {"entropy", NumericField::EntropyGray}, {"redpct", NumericField::Redpct},
      {"bluepct", NumericField::Bluepct},     {"height", NumericField::Height},
      {"width", NumericField::Width},         {"signed", NumericField::Signed},
      {"signature", NumericField::Signed},    {"dated", NumericField::Dated},
  };
  auto it = names.find(key);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

inline double field_value(const FeatureRow& r, NumericField f) {
  switch (f) {
    case NumericField::EntropyGray: return r.e_g;
    case NumericField::Redpct: return r.redpct;
    case NumericField::Bluepct: return r.bluepct;
    case NumericField::Height: return r.height;
    case NumericField::Width: return r.width;
    case NumericField::Signed: return r.signed_work;
    case NumericField::Dated: return r.dated;
  }
  return 0.0;
}

/// A monomial over numeric fields, e.g. "e_g", "height^2", "(height*width)^2".
struct Term {
  std::string name;
  std::vector<NumericField> factors;

  double eval(const FeatureRow& r) const {
    double v = 1.0;
    for (auto f : factors) v *= field_value(r, f);
    return v;
  }
};

namespace detail {

// term   := factor ('*' factor)*
// factor := atom ('^' digits)?
// atom   := identifier | '(' term ')'
class TermParser {
 public:
  explicit TermParser(std::string_view text) : text_(text) {}

  Term parse() {
    auto [name, factors] = product();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return {name, factors};
  }

 private:
  using Piece = std::pair<std::string, std::vector<NumericField>>;

  Piece product() {
    Piece acc = power();
    while (consume('*')) {
      Piece rhs = power();
      acc.first += "*" + rhs.first;
      acc.second.insert(acc.second.end(), rhs.second.begin(), rhs.second.end());
    }
    return acc;
  }

  Piece power() {
    Piece base;
    bool grouped = false;
    if (consume('(')) {
      base = product();
      grouped = base.first.find('*') != std::string::npos;
      if (!consume(')')) fail("missing ')'");
    } else {
      base = identifier();
    }
    if (consume('^')) {
      skip_space();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a positive integer");
      const int exp = std::stoi(std::string(text_.substr(start, pos_ - start)));
      if (exp < 1 || exp > 4) fail("exponent must be between 1 and 4");
      Piece out;
      out.first = (grouped ? "(" + base.first + ")" : base.first) + "^" + std::to_string(exp);
      for (int i = 0; i < exp; ++i) {
        out.second.insert(out.second.end(), base.second.begin(), base.second.end());
      }
      return out;
    }
    if (grouped) base.first = "(" + base.first + ")";
    return base;
  }

  Piece identifier() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const auto word = text_.substr(start, pos_ - start);
    if (word.empty()) fail("expected a field name");
    const auto field = parse_field(word);
    if (!field) throw Error(ErrorCode::UnknownField, "unknown field '" + std::string(word) + "'");
    return {std::string(field_name(*field)), {*field}};
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::UnknownField, "bad term '" + std::string(text_) + "': " + why);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Term parse_term(std::string_view text) { return detail::TermParser(text).parse(); }

// ---------------------------------------------------------------------------
// Dummy groups and model specifications

enum class DummyGroup { Artist, Medium, House, City, Year, Month, Topic, Style };

inline std::string_view group_name(DummyGroup g) {
  switch (g) {
    case DummyGroup::Artist: return "artist";
    case DummyGroup::Medium: return "medium";
    case DummyGroup::House: return "house";
    case DummyGroup::City: return "city";
    case DummyGroup::Year: return "year";
    case DummyGroup::Month: return "month";
    case DummyGroup::Topic: return "topic";
    case DummyGroup::Style: return "style";
  }
  return "";
}

inline std::optional<DummyGroup> parse_group(std::string_view name) {
  for (auto g : {DummyGroup::Artist, DummyGroup::Medium, DummyGroup::House, DummyGroup::City,
                 DummyGroup::Year, DummyGroup::Month, DummyGroup::Topic, DummyGroup::Style}) {
    if (detail::to_lower_ascii(name) == group_name(g)) return g;
  }
  return std::nullopt;
}

inline std::string group_level(const FeatureRow& r, DummyGroup g) {
  switch (g) {
    case DummyGroup::Artist: return r.artist;
    case DummyGroup::Medium: return r.medium;
    case DummyGroup::House: return r.house;
    case DummyGroup::City: return r.city;
    case DummyGroup::Year: return r.year;
    case DummyGroup::Month: return r.month;
    case DummyGroup::Topic: return std::string(topic_name(r.topic));
    case DummyGroup::Style: return r.style;
  }
  return {};
}

inline const std::vector<DummyGroup>& standard_dummies() {
  static const std::vector<DummyGroup> groups{DummyGroup::Artist, DummyGroup::Medium,
                                              DummyGroup::House,  DummyGroup::City,
                                              DummyGroup::Year,   DummyGroup::Month};
  return groups;
}

struct ModelSpec {
  std::string name;
  std::vector<Term> terms;
  std::vector<DummyGroup> dummies = standard_dummies();
  bool include_topic = false;
  bool include_style = false;

  bool has_term(std::string_view term_name) const {
    return std::any_of(terms.begin(), terms.end(),
                       [&](const Term& t) { return t.name == term_name; });
  }

  std::vector<DummyGroup> groups() const {
    auto out = dummies;
    if (include_topic) out.push_back(DummyGroup::Topic);
    if (include_style) out.push_back(DummyGroup::Style);
    return out;
  }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& t : terms) {
      if (!seen.insert(t.name).second) {
        throw Error(ErrorCode::InvalidArgument, "duplicate term '" + t.name + "'");
      }
    }
    std::set<DummyGroup> groups_seen;
    for (auto g : groups()) {
      if (!groups_seen.insert(g).second) {
        throw Error(ErrorCode::InvalidArgument,
                    "duplicate dummy group '" + std::string(group_name(g)) + "'");
      }
    }
  }
};

inline ModelSpec make_spec(std::string name, std::initializer_list<std::string_view> terms,
                           bool topic = false, bool style = false) {
  ModelSpec spec;
  spec.name = std::move(name);
  for (auto t : terms) spec.terms.push_back(parse_term(t));
  spec.include_topic = topic;
  spec.include_style = style;
  spec.validate();
  return spec;
}

/// Named specifications: benchmark "1".."5" (also "(2)", "benchmark-2"), and the
/// "topic-N", "style-N" and "color-N" families.
inline std::optional<ModelSpec> builtin_spec(std::string_view raw) {
  std::string key = detail::to_lower_ascii(detail::trim(raw));
  if (key.size() == 3 && key.front() == '(' && key.back() == ')') key = key.substr(1, 1);
  if (key.starts_with("benchmark-")) key = key.substr(10);

  if (key == "1") return make_spec("(1)", {"height", "height^2", "width", "width^2", "signed", "dated"});
  if (key == "2")
    return make_spec("(2)", {"e_g", "height", "height^2", "width", "width^2", "signed", "dated"});
  if (key == "3")
    return make_spec("(3)", {"e_g", "e_g^2", "height", "height^2", "width", "width^2", "signed", "dated"});
  if (key == "4")
    return make_spec("(4)", {"e_g", "height", "height^2", "e_g*height", "width", "width^2", "signed",
                             "dated"});
  if (key == "5")
    return make_spec("(5)", {"e_g", "height", "height^2", "width", "width^2", "e_g*width", "signed",
                             "dated"});

  if (key == "topic-1")
    return make_spec(key, {"height", "height^2", "width", "width^2", "signed", "dated"}, true);
  if (key == "topic-2")
    return make_spec(key, {"e_g", "height", "height^2", "width", "width^2", "signed", "dated"}, true);
  if (key == "topic-3")
    return make_spec(key, {"e_g", "e_g^2", "height", "height^2", "width", "width^2", "signed", "dated"},
                     true);
  if (key == "topic-4")
    return make_spec(key, {"e_g", "e_g^2", "height*width", "(height*width)^2", "signed", "dated"}, true);
  if (key == "topic-5")
    return make_spec(key, {"e_g", "e_g^2", "height*width", "(height*width)^2", "e_g*height*width",
                           "signed", "dated"},
                     true);

  if (key == "style-1")
    return make_spec(key, {"height", "height^2", "width", "width^2", "signed", "dated"}, false, true);
  if (key == "style-2" || key == "style-4")
    return make_spec(key, {"e_g", "height", "height^2", "width", "width^2", "signed", "dated"},
                     key == "style-4", true);
  if (key == "style-3" || key == "style-5")
    return make_spec(key, {"e_g", "e_g^2", "height", "height^2", "width", "width^2", "signed", "dated"},
                     key == "style-5", true);

  if (key == "color-1")
    return make_spec(key, {"redpct", "bluepct", "height", "height^2", "width", "width^2", "signed",
                           "dated"},
                     false, true);
  if (key == "color-2" || key == "color-4")
    return make_spec(key, {"e_g", "redpct", "bluepct", "height", "height^2", "width", "width^2",
                           "signed", "dated"},
                     key == "color-4", true);
  if (key == "color-3" || key == "color-5")
    return make_spec(key, {"e_g", "redpct", "bluepct", "e_g*redpct", "e_g*bluepct", "height",
                           "height^2", "width", "width^2", "signed", "dated"},
                     key == "color-5", true);
  return std::nullopt;
}

/// Custom specification: {"name", "terms": [...], "dummies": [...], "include_topic", "include_style"}.
inline ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.name = j.value("name", std::string("custom"));
  if (!j.contains("terms") || !j["terms"].is_array()) {
    throw Error(ErrorCode::InvalidArgument, "spec needs a 'terms' array");
  }
  for (const auto& t : j["terms"]) spec.terms.push_back(parse_term(t.get<std::string>()));
  if (j.contains("dummies")) {
    spec.dummies.clear();
    for (const auto& g : j["dummies"]) {
      const auto name = g.get<std::string>();
      const auto group = parse_group(name);
      if (!group || *group == DummyGroup::Topic || *group == DummyGroup::Style) {
        throw Error(ErrorCode::UnknownField, "unknown dummy group '" + name + "'");
      }
      spec.dummies.push_back(*group);
    }
  }
  spec.include_topic = j.value("include_topic", false);
  spec.include_style = j.value("include_style", false);
  spec.validate();
  return spec;
}

/// Rows eligible for a specification: topic models drop Untitled/Unknown rows,
/// style models drop rows without a style label.
inline std::vector<FeatureRow> model_sample(const std::vector<FeatureRow>& rows,
                                            const ModelSpec& spec) {
  if (!spec.include_topic && !spec.include_style) return rows;
  std::vector<FeatureRow> out;
  for (const auto& r : rows) {
    if (spec.include_topic && !is_regular_topic(r.topic)) continue;
    if (spec.include_style && r.style.empty()) continue;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Design matrix

inline constexpr std::string_view kInterceptName = "(intercept)";

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> columns;
};

inline Design build_design(const std::vector<FeatureRow>& rows, const ModelSpec& spec) {
  if (rows.empty()) throw Error(ErrorCode::EmptySample, "no observations for spec " + spec.name);
  spec.validate();

  struct GroupLevels {
    DummyGroup group;
    std::vector<std::string> levels;  // non-reference levels, sorted
  };
  std::vector<GroupLevels> encoded;
  for (auto g : spec.groups()) {
    std::set<std::string> levels;
    for (const auto& r : rows) levels.insert(group_level(r, g));
    if (levels.size() < 2) continue;
    // lexicographically smallest level is the reference
    encoded.push_back({g, std::vector<std::string>(std::next(levels.begin()), levels.end())});
  }

  std::size_t ncols = 1 + spec.terms.size();
  for (const auto& e : encoded) ncols += e.levels.size();

  Design d;
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(ncols));
  d.y.resize(n);
  d.columns.reserve(ncols);
  d.columns.emplace_back(kInterceptName);
  for (const auto& t : spec.terms) d.columns.push_back(t.name);
  for (const auto& e : encoded) {
    for (const auto& lv : e.levels) d.columns.push_back(std::string(group_name(e.group)) + "=" + lv);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    d.y(i) = r.log_price;
    d.x(i, 0) = 1.0;
    Eigen::Index c = 1;
    for (const auto& t : spec.terms) d.x(i, c++) = t.eval(r);
    for (const auto& e : encoded) {
      const auto level = group_level(r, e.group);
      auto it = std::lower_bound(e.levels.begin(), e.levels.end(), level);
      if (it != e.levels.end() && *it == level) d.x(i, c + (it - e.levels.begin())) = 1.0;
      c += static_cast<Eigen::Index>(e.levels.size());
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// OLS

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::string stars;
};

struct FitSummary {
  std::string spec;
  std::vector<Coefficient> coefficients;  // retained columns, design order
  std::vector<std::string> dropped;       // collinear columns removed before the solve
  std::size_t n = 0;
  std::size_t k = 0;  // retained columns including the intercept
  std::size_t df = 0;
  double rss = 0.0;
  double sigma = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;

  const Coefficient* find(std::string_view name) const {
    for (const auto& c : coefficients) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

inline std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

inline constexpr double kPivotTolerance = 1e-10;

/// Least squares via Householder QR that processes columns in design order and
/// drops any column whose residual norm, after projecting out the columns already
/// kept, is at most kPivotTolerance times its own norm.
inline FitSummary fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw Error(ErrorCode::InvalidArgument, "response length differs from rows");
  if (static_cast<Eigen::Index>(names.size()) != p) {
    throw Error(ErrorCode::InvalidArgument, "column name count differs from columns");
  }
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFinite, "design has NaN or Inf");

  Eigen::MatrixXd householder = Eigen::MatrixXd::Zero(n, std::min(n, p));
  Eigen::VectorXd beta_h(std::min(n, p));
  Eigen::MatrixXd r_full = Eigen::MatrixXd::Zero(std::min(n, p), std::min(n, p));
  std::vector<Eigen::Index> kept;
  std::vector<std::string> dropped;

  auto apply_reflectors = [&](Eigen::VectorXd& v, Eigen::Index count) {
    for (Eigen::Index j = 0; j < count; ++j) {
      auto h = householder.col(j).tail(n - j);
      const double s = beta_h(j) * h.dot(v.tail(n - j));
      v.tail(n - j) -= s * h;
    }
  };

  for (Eigen::Index c = 0; c < p; ++c) {
    const auto rank = static_cast<Eigen::Index>(kept.size());
    Eigen::VectorXd col = x.col(c);
    const double norm0 = col.norm();
    apply_reflectors(col, rank);
    const double resid = rank < n ? col.tail(n - rank).norm() : 0.0;
    if (norm0 == 0.0 || resid <= kPivotTolerance * norm0) {
      dropped.push_back(names[static_cast<std::size_t>(c)]);
      continue;
    }
    Eigen::VectorXd h = col.tail(n - rank);
    const double alpha = h(0) > 0.0 ? -resid : resid;
    h(0) -= alpha;
    householder.col(rank).tail(n - rank) = h;
    beta_h(rank) = 2.0 / h.squaredNorm();
    r_full.col(rank).head(rank) = col.head(rank);
    r_full(rank, rank) = alpha;
    kept.push_back(c);
  }

  const auto k = static_cast<Eigen::Index>(kept.size());
  if (n <= k) {
    throw Error(ErrorCode::Underdetermined, std::to_string(n) + " observations for " +
                                                std::to_string(k) + " retained columns");
  }

  Eigen::VectorXd qty = y;
  apply_reflectors(qty, k);
  const auto r = r_full.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd b = r.solve(qty.head(k));

  Eigen::MatrixXd xk(n, k);
  for (Eigen::Index j = 0; j < k; ++j) xk.col(j) = x.col(kept[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd resid = y - xk * b;

  FitSummary fit;
  fit.n = static_cast<std::size_t>(n);
  fit.k = static_cast<std::size_t>(k);
  fit.df = static_cast<std::size_t>(n - k);
  fit.rss = resid.squaredNorm();
  fit.dropped = std::move(dropped);
  const double s2 = fit.rss / static_cast<double>(fit.df);
  fit.sigma = std::sqrt(s2);

  const double ybar = y.mean();
  const double tss = (y.array() - ybar).square().sum();
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 1.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / static_cast<double>(n - k);

  // (X'X)^{-1} = R^{-1} R^{-T}
  const Eigen::MatrixXd r_inv = r.solve(Eigen::MatrixXd::Identity(k, k));
  boost::math::students_t tdist(static_cast<double>(fit.df));
  for (Eigen::Index j = 0; j < k; ++j) {
    Coefficient c;
    c.name = names[static_cast<std::size_t>(kept[static_cast<std::size_t>(j)])];
    c.estimate = b(j);
    c.std_error = fit.sigma * r_inv.row(j).norm();
    if (c.std_error > 0.0) {
      c.t_stat = c.estimate / c.std_error;
      c.p_value = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(c.t_stat)));
    } else {
      c.t_stat = c.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    c.stars = significance_stars(c.p_value);
    fit.coefficients.push_back(std::move(c));
  }
  return fit;
}

inline FitSummary fit_ols(const Design& d) { return fit_ols(d.x, d.y, d.columns); }

inline FitSummary fit_spec(const std::vector<FeatureRow>& rows, const ModelSpec& spec) {
  auto fit = fit_ols(build_design(model_sample(rows, spec), spec));
  fit.spec = spec.name;
  return fit;
}

// ---------------------------------------------------------------------------
// Model-fit comparisons

struct ComparisonEntry {
  std::string variable;
  FitSummary fit;
  double delta_adj_r2 = 0.0;  // entry adj R^2 minus reference adj R^2
};

struct ComparisonReport {
  std::string mode;  // "add" or "drop"
  FitSummary reference;
  std::vector<ComparisonEntry> entries;
};

namespace detail {

// A candidate is either a dummy group ("topic", "style", "artist", ...) or a term.
inline bool spec_contains(const ModelSpec& spec, const std::string& candidate) {
  if (auto g = parse_group(candidate)) {
    const auto groups = spec.groups();
    return std::find(groups.begin(), groups.end(), *g) != groups.end();
  }
  return spec.has_term(parse_term(candidate).name);
}

inline ModelSpec with_candidate(ModelSpec spec, const std::string& candidate) {
  if (auto g = parse_group(candidate)) {
    if (*g == DummyGroup::Topic) spec.include_topic = true;
    else if (*g == DummyGroup::Style) spec.include_style = true;
    else spec.dummies.push_back(*g);
  } else {
    spec.terms.push_back(parse_term(candidate));
  }
  spec.name += " + " + candidate;
  return spec;
}

inline ModelSpec without_candidate(ModelSpec spec, const std::string& candidate) {
  if (auto g = parse_group(candidate)) {
    if (*g == DummyGroup::Topic) spec.include_topic = false;
    else if (*g == DummyGroup::Style) spec.include_style = false;
    else std::erase(spec.dummies, *g);
  } else {
    const auto name = parse_term(candidate).name;
    std::erase_if(spec.terms, [&](const Term& t) { return t.name == name; });
  }
  spec.name += " - " + candidate;
  return spec;
}

}  // namespace detail

/// Fits the base spec, then base + each candidate on its own.
inline ComparisonReport compare_fit_add(const std::vector<FeatureRow>& rows, const ModelSpec& base,
                                        const std::vector<std::string>& candidates) {
  for (const auto& c : candidates) {
    if (detail::spec_contains(base, c)) {
      throw Error(ErrorCode::InvalidArgument, "candidate '" + c + "' already in base spec");
    }
  }
  // every fit uses the rows the largest model can use
  ModelSpec full = base;
  for (const auto& c : candidates) full = detail::with_candidate(full, c);
  const auto sample = model_sample(rows, full);
  ComparisonReport report;
  report.mode = "add";
  report.reference = fit_spec(sample, base);
  for (const auto& c : candidates) {
    ComparisonEntry e;
    e.variable = parse_group(c) ? c : parse_term(c).name;
    e.fit = fit_spec(sample, detail::with_candidate(base, c));
    e.delta_adj_r2 = e.fit.adj_r2 - report.reference.adj_r2;
    report.entries.push_back(std::move(e));
  }
  return report;
}

/// Fits the full spec, then full - each candidate on its own.
inline ComparisonReport compare_fit_drop(const std::vector<FeatureRow>& rows, const ModelSpec& full,
                                         const std::vector<std::string>& candidates) {
  for (const auto& c : candidates) {
    if (!detail::spec_contains(full, c)) {
      throw Error(ErrorCode::UnknownField, "candidate '" + c + "' is not part of the full spec");
    }
  }
  const auto sample = model_sample(rows, full);
  ComparisonReport report;
  report.mode = "drop";
  report.reference = fit_spec(sample, full);
  for (const auto& c : candidates) {
    ComparisonEntry e;
    e.variable = parse_group(c) ? c : parse_term(c).name;
    e.fit = fit_spec(sample, detail::without_candidate(full, c));
    e.delta_adj_r2 = e.fit.adj_r2 - report.reference.adj_r2;
    report.entries.push_back(std::move(e));
  }
  return report;
}

/// One fit per regular topic; topic dummies are never part of a within-topic fit.
inline std::map<TopicLabel, FitSummary> fit_by_topic(const std::vector<FeatureRow>& rows,
                                                     ModelSpec spec) {
  spec.include_topic = false;
  std::map<TopicLabel, std::vector<FeatureRow>> groups;
  for (const auto& r : rows) {
    if (is_regular_topic(r.topic)) groups[r.topic].push_back(r);
  }
  if (groups.empty()) throw Error(ErrorCode::EmptySample, "no rows with a regular topic");
  std::map<TopicLabel, FitSummary> out;
  for (const auto& [topic, subset] : groups) {
    try {
      auto fit = fit_spec(subset, spec);
      fit.spec = spec.name + " | " + std::string(topic_name(topic));
      out.emplace(topic, std::move(fit));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Underdetermined && e.code() != ErrorCode::EmptySample) throw;
      throw Error(ErrorCode::SubsampleTooSmall,
                  std::string(topic_name(topic)) + " (" + std::to_string(subset.size()) +
                      " rows): " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const FitSummary& fit) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& c : fit.coefficients) {
    terms.push_back({{"name", c.name},
                     {"coef", c.estimate},
                     {"se", c.std_error},
                     {"t", std::isfinite(c.t_stat) ? nlohmann::json(c.t_stat) : nlohmann::json(nullptr)},
                     {"p", c.p_value},
                     {"stars", c.stars}});
  }
  return {{"spec", fit.spec}, {"n", fit.n},         {"k", fit.k},
          {"df", fit.df},     {"rss", fit.rss},     {"sigma", fit.sigma},
          {"r2", fit.r2},     {"adj_r2", fit.adj_r2}, {"terms", terms},
          {"dropped", fit.dropped}};
}

inline nlohmann::json to_json(const ComparisonReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json row{{"variable", e.variable},
                       {"adj_r2", e.fit.adj_r2},
                       {"delta_adj_r2", e.delta_adj_r2},
                       {"n", e.fit.n}};
    if (const auto* c = e.fit.find(e.variable)) {
      row["coef"] = c->estimate;
      row["se"] = c->std_error;
      row["stars"] = c->stars;
    } else {
      row["coef"] = nullptr;
      row["se"] = nullptr;
      row["stars"] = "";
    }
    row["fit"] = to_json(e.fit);
    entries.push_back(std::move(row));
  }
  return {{"mode", report.mode}, {"reference", to_json(report.reference)}, {"entries", entries}};
}

namespace detail {

inline std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

inline std::string with_thousands(std::size_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace detail

/// Regression-table layout: estimate with stars, standard error in parentheses below.
/// Dummy-level coefficients are summarized as "control" per group.
inline std::string to_text(const FitSummary& fit) {
  constexpr std::size_t kName = 26;
  constexpr std::size_t kCol = 16;
  std::string out;
  out += detail::pad("", kName, true) + detail::pad(fit.spec, kCol) + "\n";
  out += std::string(kName + kCol, '-') + "\n";
  std::vector<std::string> controls;
  for (const auto& c : fit.coefficients) {
    if (c.name == kInterceptName) continue;
    if (const auto eq = c.name.find('='); eq != std::string::npos) {
      const auto group = c.name.substr(0, eq);
      if (std::find(controls.begin(), controls.end(), group) == controls.end()) controls.push_back(group);
      continue;
    }
    out += detail::pad(c.name, kName, true) +
           detail::pad(detail::fmt_fixed(c.estimate, 3) + detail::pad(c.stars, 3, true), kCol) + "\n";
    out += detail::pad("", kName, true) +
           detail::pad("(" + detail::fmt_fixed(c.std_error, 3) + ")   ", kCol) + "\n";
  }
  for (const auto& g : controls) {
    out += detail::pad(g + " dummy", kName, true) + detail::pad("control   ", kCol) + "\n";
  }
  out += std::string(kName + kCol, '-') + "\n";
  out += detail::pad("N", kName, true) + detail::pad(detail::with_thousands(fit.n) + "   ", kCol) + "\n";
  out += detail::pad("Adj. R^2", kName, true) +
         detail::pad(detail::fmt_fixed(fit.adj_r2, 3) + "   ", kCol) + "\n";
  if (!fit.dropped.empty()) {
    out += "dropped (collinear):";
    for (const auto& d : fit.dropped) out += " " + d;
    out += "\n";
  }
  out += "*** p<0.01, ** p<0.05, * p<0.1\n";
  return out;
}

inline std::string to_text(const ComparisonReport& report) {
  std::string out;
  out += report.mode == "add" ? "Add one variable to the base model\n"
                              : "Drop one variable from the full model\n";
  out += detail::pad("model", 28, true) + detail::pad("coef", 14) + detail::pad("N", 12) +
         detail::pad("Adj. R^2", 12) + detail::pad("change", 12) + "\n";
  auto line = [&](const std::string& label, const FitSummary& fit, const std::string& variable,
                  std::optional<double> delta) {
    std::string coef = "";
    if (const auto* c = variable.empty() ? nullptr : fit.find(variable)) {
      coef = detail::fmt_fixed(c->estimate, 3) + detail::pad(c->stars, 3, true);
    }
    out += detail::pad(label, 28, true) + detail::pad(coef, 14) +
           detail::pad(detail::with_thousands(fit.n), 12) +
           detail::pad(detail::fmt_fixed(fit.adj_r2, 4), 12) +
           detail::pad(delta ? detail::fmt_fixed(*delta, 4) : std::string(""), 12) + "\n";
  };
  line(report.mode == "add" ? "base" : "full", report.reference, "", std::nullopt);
  for (const auto& e : report.entries) {
    line((report.mode == "add" ? "+ " : "- ") + e.variable, e.fit,
         report.mode == "add" ? e.variable : "", e.delta_adj_r2);
  }
  return out;
}

}  // namespace artmetrics
