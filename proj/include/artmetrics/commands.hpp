#pragma once

// Batch commands behind the artmetrics CLI: feature extraction, sample
// assembly, fitting, comparisons, reports and synthetic bundles.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "artmetrics/catalog.hpp"
#include "artmetrics/color_features.hpp"
#include "artmetrics/csv.hpp"
#include "artmetrics/error.hpp"
#include "artmetrics/hedonic.hpp"
#include "artmetrics/image_io.hpp"
#include "artmetrics/infoquant.hpp"
#include "artmetrics/synth.hpp"

namespace artmetrics::cli {

// ---------------------------------------------------------------------------
// extract

struct ImageFeatures {
  std::string lot_id;
  double e_g = 0.0;
  double redpct = 0.0;
  double bluepct = 0.0;
};

inline ImageFeatures image_features(const PixelImage& img, std::size_t side) {
  const PixelImage resized = resize_bicubic(img, side, side);
  const auto shares = red_blue_pct(resized);
  return {"", svd_entropy(to_gray(resized)), shares.redpct, shares.bluepct};
}

struct ExtractOptions {
  std::filesystem::path images;
  std::filesystem::path out;
  std::size_t size = 400;
  std::size_t threads = 1;
};

struct ExtractSummary {
  std::size_t files = 0;
  std::size_t extracted = 0;
  std::size_t failed = 0;
  std::string csv;
};

inline std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string features_csv(const std::vector<ImageFeatures>& rows) {
  std::string out = "lot_id,e_g,redpct,bluepct\n";
  for (const auto& f : rows) {
    out += csv::format_row({f.lot_id, fixed6(f.e_g), fixed6(f.redpct), fixed6(f.bluepct)});
  }
  return out;
}

/// One row per decodable image, sorted by lot_id (the file stem) independent of threading.
inline ExtractSummary run_extract(const ExtractOptions& opt, std::ostream& log) {
  if (opt.size < 1) throw Error(ErrorCode::InvalidArgument, "--size must be >= 1");
  if (!std::filesystem::is_directory(opt.images)) {
    throw Error(ErrorCode::IoFailure, "not a directory: " + opt.images.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(opt.images)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.stem().string() < b.stem().string() ||
           (a.stem().string() == b.stem().string() && a.filename() < b.filename());
  });

  std::vector<std::optional<ImageFeatures>> results(files.size());
  std::vector<std::string> errors(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        auto f = image_features(load_image(files[i]), opt.size);
        f.lot_id = files[i].stem().string();
        results[i] = std::move(f);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(opt.threads, 1, std::max<std::size_t>(1, files.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  ExtractSummary summary;
  summary.files = files.size();
  std::vector<ImageFeatures> rows;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (results[i]) {
      rows.push_back(*results[i]);
    } else {
      ++summary.failed;
      log << "skipped " << files[i].filename().string() << ": " << errors[i] << "\n";
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.lot_id < b.lot_id; });
  summary.extracted = rows.size();
  if (files.empty()) log << "warning: no files in " << opt.images.string() << "\n";
  summary.csv = features_csv(rows);
  if (!opt.out.empty()) write_file(opt.out, summary.csv);
  return summary;
}

inline std::unordered_map<std::string, ImageFeatures> load_features(const std::filesystem::path& path) {
  const auto table = csv::Table::load(path);
  const auto id = table.column("lot_id");
  const auto eg = table.column("e_g");
  const bool has_color = table.has("redpct") && table.has("bluepct");
  const auto red = has_color ? table.column("redpct") : 0;
  const auto blue = has_color ? table.column("bluepct") : 0;
  std::unordered_map<std::string, ImageFeatures> out;
  std::size_t row_no = 0;
  for (const auto& row : table.rows()) {
    ++row_no;
    auto num = [&](std::size_t c) {
      const auto v = detail::parse_double(c < row.size() ? row[c] : std::string());
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        throw Error(ErrorCode::MalformedRow, "features row " + std::to_string(row_no) + ": bad number");
      }
      return *v;
    };
    if (row.size() != table.header().size()) {
      throw Error(ErrorCode::MalformedRow, "features row " + std::to_string(row_no) + ": wrong field count");
    }
    ImageFeatures f{row[id], num(eg), has_color ? num(red) : 0.0, has_color ? num(blue) : 0.0};
    out[f.lot_id] = f;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample assembly

struct SampleOptions {
  bool filter = true;
  double top_fraction = 0.01;
  std::vector<std::string> excluded_media = default_excluded_media();
  std::size_t top_media = 50;
  std::size_t top_houses = 20;
  std::size_t top_cities = 20;
  double max_unmatched = 0.1;  // share of records without features tolerated
  std::optional<KeywordTable> keywords;
};

struct SampleStats {
  std::size_t records = 0;
  std::size_t matched = 0;
  std::size_t after_filters = 0;
};

inline std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

/// Joins records with image features, applies the sample filters, condenses
/// categories and converts prices to log real USD.
inline std::vector<FeatureRow> assemble_rows(const std::vector<AuctionRecord>& records,
                                             const std::unordered_map<std::string, ImageFeatures>& features,
                                             const RateTables& rates, const SampleOptions& opt,
                                             SampleStats* stats = nullptr) {
  std::vector<AuctionRecord> joined;
  for (const auto& r : records) {
    if (features.contains(r.lot_id)) joined.push_back(r);
  }
  const std::size_t unmatched = records.size() - joined.size();
  if (joined.empty()) {
    throw Error(ErrorCode::JoinMismatch, "no record has matching image features");
  }
  if (static_cast<double>(unmatched) > opt.max_unmatched * static_cast<double>(records.size())) {
    throw Error(ErrorCode::JoinMismatch, std::to_string(unmatched) + " of " +
                                            std::to_string(records.size()) +
                                            " records have no image features");
  }
  if (opt.filter) {
    joined = filter_top_artists(joined, opt.top_fraction);
    joined = exclude_media(joined, opt.excluded_media);
  }
  if (joined.empty()) throw Error(ErrorCode::EmptySample, "sample filters removed every record");

  const auto media = condense_categories(joined, CategoryField::Medium, opt.top_media);
  const auto houses = condense_categories(joined, CategoryField::House, opt.top_houses);
  const auto cities = condense_categories(joined, CategoryField::City, opt.top_cities);
  const KeywordTable& table = opt.keywords ? *opt.keywords : default_keyword_table();

  std::vector<FeatureRow> rows;
  rows.reserve(joined.size());
  for (std::size_t i = 0; i < joined.size(); ++i) {
    const auto& r = joined[i];
    const auto& f = features.at(r.lot_id);
    FeatureRow row;
    row.lot_id = r.lot_id;
    row.log_price = std::log(real_usd_price(r, rates));
    row.e_g = f.e_g;
    row.redpct = f.redpct;
    row.bluepct = f.bluepct;
    row.height = r.height;
    row.width = r.width;
    row.signed_work = r.signed_work ? 1.0 : 0.0;
    row.dated = r.dated ? 1.0 : 0.0;
    row.artist = r.artist;
    row.medium = media[i];
    row.house = houses[i];
    row.city = cities[i];
    row.year = std::to_string(r.sale_year);
    row.month = two_digits(r.sale_month);
    row.topic = classify_topic(r.title, table);
    row.style = r.style;
    rows.push_back(std::move(row));
  }
  if (stats) *stats = {records.size(), records.size() - unmatched, rows.size()};
  return rows;
}

inline ModelSpec resolve_spec(const std::string& name_or_path) {
  if (auto spec = builtin_spec(name_or_path)) return *spec;
  if (!std::filesystem::exists(name_or_path)) {
    throw Error(ErrorCode::InvalidArgument, "'" + name_or_path + "' is neither a builtin spec nor a file");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_text(name_or_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "spec file: " + std::string(e.what()));
  }
  return spec_from_json(j);
}

struct DataInputs {
  std::filesystem::path records;
  std::filesystem::path features;
  std::filesystem::path rates;
  std::optional<std::filesystem::path> keywords;
  SampleOptions sample;
};

inline std::vector<FeatureRow> load_rows(DataInputs in, SampleStats* stats = nullptr) {
  if (in.keywords) in.sample.keywords = load_keyword_table(*in.keywords);
  return assemble_rows(load_records(in.records), load_features(in.features), load_rates(in.rates),
                       in.sample, stats);
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  DataInputs data;
  std::string spec = "2";
  std::filesystem::path out;  // JSON; the text table goes to <out>.txt
  bool by_topic = false;
};

struct FitOutput {
  FitSummary fit;
  std::map<TopicLabel, FitSummary> by_topic;
  std::string text;
  nlohmann::json json;
};

inline std::string topic_table_text(const std::map<TopicLabel, FitSummary>& fits) {
  std::string out = detail::pad("Topic", 16, true) + detail::pad("N", 10) + detail::pad("E_g", 14) +
                    detail::pad("Adj. R^2", 12) + "\n";
  for (const auto& [topic, fit] : fits) {
    const auto* c = fit.find("e_g");
    out += detail::pad(std::string(topic_name(topic)), 16, true) +
           detail::pad(detail::with_thousands(fit.n), 10) +
           detail::pad(c ? detail::fmt_fixed(c->estimate, 3) + detail::pad(c->stars, 3, true) : "-", 14) +
           detail::pad(detail::fmt_fixed(fit.adj_r2, 3), 12) + "\n";
  }
  return out;
}

inline FitOutput run_fit(const FitOptions& opt) {
  const ModelSpec spec = resolve_spec(opt.spec);
  const auto rows = load_rows(opt.data);
  FitOutput out;
  out.fit = fit_spec(rows, spec);
  out.json = to_json(out.fit);
  out.text = to_text(out.fit);
  if (opt.by_topic) {
    out.by_topic = fit_by_topic(rows, spec);
    nlohmann::json topics = nlohmann::json::object();
    for (const auto& [t, f] : out.by_topic) topics[std::string(topic_name(t))] = to_json(f);
    out.json["by_topic"] = topics;
    out.text += "\n" + topic_table_text(out.by_topic);
  }
  if (!opt.out.empty()) {
    write_file(opt.out, out.json.dump(2) + "\n");
    write_file(opt.out.string() + ".txt", out.text);
  }
  return out;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  DataInputs data;
  std::string spec = "2";
  std::vector<std::string> vars{"e_g", "signed", "dated"};
  std::filesystem::path out;
};

struct CompareOutput {
  ComparisonReport add;
  ComparisonReport drop;
  std::string text;
  nlohmann::json json;
};

inline CompareOutput compare_rows(const std::vector<FeatureRow>& rows, const ModelSpec& spec,
                                  const std::vector<std::string>& vars) {
  ModelSpec full = spec;
  for (const auto& v : vars) {
    if (!detail::spec_contains(full, v)) full = detail::with_candidate(full, v);
  }
  full.name = spec.name;
  ModelSpec base = full;
  for (const auto& v : vars) base = detail::without_candidate(base, v);
  base.name = "base";

  CompareOutput out;
  out.add = compare_fit_add(rows, base, vars);
  out.drop = compare_fit_drop(rows, full, vars);
  out.text = to_text(out.add) + "\n" + to_text(out.drop);
  out.json = {{"add", to_json(out.add)}, {"drop", to_json(out.drop)}};
  return out;
}

inline CompareOutput run_compare(const CompareOptions& opt) {
  for (const auto& v : opt.vars) {
    if (!parse_group(v)) parse_term(v);  // UnknownField before any I/O
  }
  const auto rows = load_rows(opt.data);
  auto out = compare_rows(rows, resolve_spec(opt.spec), opt.vars);
  if (!opt.out.empty()) write_file(opt.out, out.json.dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------------------
// report

struct GroupStats {
  std::string label;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = std::numeric_limits<double>::quiet_NaN();  // N-1 denominator
  double min = 0.0;
  double max = 0.0;
};

inline GroupStats describe(std::string label, const std::vector<double>& values) {
  GroupStats s;
  s.label = std::move(label);
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

struct StatsTable {
  std::vector<GroupStats> groups;
  GroupStats total;
};

/// E_g by topic for regular topics, in keyword-table order, plus the pooled total.
inline StatsTable topic_stats(const std::vector<AuctionRecord>& records,
                              const std::unordered_map<std::string, ImageFeatures>& features,
                              const KeywordTable& table = default_keyword_table()) {
  std::map<TopicLabel, std::vector<double>> by_topic;
  std::vector<double> all;
  for (const auto& r : records) {
    auto it = features.find(r.lot_id);
    if (it == features.end()) continue;
    const auto topic = classify_topic(r.title, table);
    if (!is_regular_topic(topic)) continue;
    by_topic[topic].push_back(it->second.e_g);
    all.push_back(it->second.e_g);
  }
  StatsTable out;
  for (const auto& [topic, values] : by_topic) out.groups.push_back(describe(std::string(topic_name(topic)), values));
  out.total = describe("Total", all);
  return out;
}

/// E_g by style label, most frequent first, plus the whole labelled sample.
inline StatsTable style_stats(const std::vector<AuctionRecord>& records,
                              const std::unordered_map<std::string, ImageFeatures>& features) {
  std::map<std::string, std::vector<double>> by_style;
  std::vector<double> all;
  for (const auto& r : records) {
    auto it = features.find(r.lot_id);
    if (it == features.end() || r.style.empty()) continue;
    by_style[r.style].push_back(it->second.e_g);
    all.push_back(it->second.e_g);
  }
  StatsTable out;
  for (const auto& [style, values] : by_style) out.groups.push_back(describe(style, values));
  std::stable_sort(out.groups.begin(), out.groups.end(),
                   [](const auto& a, const auto& b) { return a.n > b.n; });
  out.total = describe("Whole sample", all);
  return out;
}

inline std::string stats_text(const StatsTable& t, const std::string& header) {
  auto num = [](double v) { return std::isnan(v) ? std::string("-") : detail::fmt_fixed(v, 3); };
  auto line = [&](const GroupStats& g) {
    return detail::pad(g.label, 24, true) + detail::pad(detail::with_thousands(g.n), 10) +
           detail::pad(num(g.mean), 9) + detail::pad(num(g.sd), 9) + detail::pad(num(g.min), 9) +
           detail::pad(num(g.max), 9) + "\n";
  };
  std::string out = detail::pad(header, 24, true) + detail::pad("N", 10) + detail::pad("Mean", 9) +
                    detail::pad("Sd", 9) + detail::pad("Min", 9) + detail::pad("Max", 9) + "\n";
  for (const auto& g : t.groups) out += line(g);
  out += line(t.total);
  return out;
}

inline std::string stats_csv(const StatsTable& t) {
  auto num = [](double v) { return std::isnan(v) ? std::string("NA") : fixed6(v); };
  std::string out = "label,n,mean,sd,min,max\n";
  for (const auto* g : [&] {
         std::vector<const GroupStats*> all;
         for (const auto& g : t.groups) all.push_back(&g);
         all.push_back(&t.total);
         return all;
       }()) {
    out += csv::format_row({g->label, std::to_string(g->n), num(g->mean), num(g->sd), num(g->min), num(g->max)});
  }
  return out;
}

inline std::string bucket_label(const PriceBucket& b) {
  auto fmt = [](double v) { return detail::with_thousands(static_cast<std::size_t>(v)); };
  return "[" + fmt(b.lower) + ", " + (std::isinf(b.upper) ? std::string("inf") : fmt(b.upper)) + ")";
}

inline std::string price_text(const PriceDistribution& d) {
  std::string out = detail::pad("Price", 28, true) + detail::pad("N", 12) + detail::pad("Percentage", 12) + "\n";
  for (const auto& b : d.buckets) {
    out += detail::pad(bucket_label(b), 28, true) + detail::pad(detail::with_thousands(b.count), 12) +
           detail::pad(detail::fmt_fixed(b.rounded_percentage, 2) + "%", 12) + "\n";
  }
  out += detail::pad("Total", 28, true) + detail::pad(detail::with_thousands(d.total), 12) +
         detail::pad(d.total ? "100.00%" : "0.00%", 12) + "\n";
  return out;
}

inline std::string price_csv(const PriceDistribution& d) {
  std::string out = "lower,upper,count,percentage\n";
  for (const auto& b : d.buckets) {
    out += csv::format_row({format_number(b.lower), std::isinf(b.upper) ? "inf" : format_number(b.upper),
                            std::to_string(b.count), detail::fmt_fixed(b.rounded_percentage, 2)});
  }
  return out;
}

struct ReportOptions {
  std::filesystem::path records;
  std::string kind;
  std::optional<std::filesystem::path> features;  // required for topic-stats / style-stats
  std::optional<std::filesystem::path> rates;     // price-dist converts to USD when given
  std::optional<std::filesystem::path> keywords;
  bool csv = false;
  std::filesystem::path out;
};

inline std::string run_report(const ReportOptions& opt) {
  if (opt.kind != "price-dist" && opt.kind != "topic-stats" && opt.kind != "style-stats") {
    throw Error(ErrorCode::UnknownReportKind, "'" + opt.kind + "'");
  }
  const auto records = load_records(opt.records);
  std::string text;
  if (opt.kind == "price-dist") {
    std::vector<double> prices;
    std::optional<RateTables> rates;
    if (opt.rates) rates = load_rates(*opt.rates);
    for (const auto& r : records) prices.push_back(rates ? nominal_usd_price(r, *rates) : r.price);
    const auto dist = price_distribution(prices);
    text = opt.csv ? price_csv(dist) : price_text(dist);
  } else {
    if (!opt.features) throw Error(ErrorCode::InvalidArgument, opt.kind + " needs --features");
    const auto features = load_features(*opt.features);
    StatsTable table;
    if (opt.kind == "topic-stats") {
      const auto kw = opt.keywords ? load_keyword_table(*opt.keywords) : default_keyword_table();
      table = topic_stats(records, features, kw);
    } else {
      table = style_stats(records, features);
    }
    text = opt.csv ? stats_csv(table) : stats_text(table, opt.kind == "topic-stats" ? "Topic" : "Style");
  }
  if (!opt.out.empty()) write_file(opt.out, text);
  return text;
}

// ---------------------------------------------------------------------------
// classify-topic

inline std::string run_classify(const std::filesystem::path& records_path,
                                const std::optional<std::filesystem::path>& keywords,
                                const std::filesystem::path& out) {
  const auto records = load_records(records_path);
  const auto table = keywords ? load_keyword_table(*keywords) : default_keyword_table();
  std::string text = "lot_id,title,topic\n";
  for (const auto& r : records) {
    text += csv::format_row({r.lot_id, r.title, std::string(topic_name(classify_topic(r.title, table)))});
  }
  if (!out.empty()) write_file(out, text);
  return text;
}

// ---------------------------------------------------------------------------
// synth

inline SynthBundle run_synth(const std::filesystem::path& config_path, const std::filesystem::path& out_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_text(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "synth config: " + std::string(e.what()));
  }
  return write_synth_bundle(synth_config_from_json(j), out_dir);
}

}  // namespace artmetrics::cli
