#pragma once

// Synthetic auction bundles with a known data-generating process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "artmetrics/catalog.hpp"
#include "artmetrics/error.hpp"
#include "artmetrics/image_io.hpp"
#include "artmetrics/infoquant.hpp"

namespace artmetrics {

struct SynthConfig {
  std::size_t n_records = 1000;
  double true_alpha = 0.1;
  double intercept = 6.0;
  // "signed", "dated", "height", "width" are slopes; "group=level" keys
  // (artist, medium, house, city, year, month, topic, style) are level shifts.
  std::map<std::string, double> effects{{"signed", 0.15}, {"dated", 0.0}};
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
  std::size_t image_side = 400;
  std::size_t n_artists = 10;

  void validate() const {
    if (n_records < 1) throw Error(ErrorCode::InvalidArgument, "n_records must be >= 1");
    if (!(noise_sd > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sd must be > 0");
    if (image_side < 2) throw Error(ErrorCode::InvalidArgument, "image_side must be >= 2");
    if (n_artists < 1) throw Error(ErrorCode::InvalidArgument, "n_artists must be >= 1");
  }
};

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.n_records = j.value("n_records", c.n_records);
  c.true_alpha = j.value("true_alpha", c.true_alpha);
  c.intercept = j.value("intercept", c.intercept);
  if (j.contains("effects")) c.effects = j["effects"].get<std::map<std::string, double>>();
  c.noise_sd = j.value("noise_sd", c.noise_sd);
  c.seed = j.value("seed", c.seed);
  c.image_side = j.value("image_side", c.image_side);
  c.n_artists = j.value("n_artists", c.n_artists);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const SynthConfig& c) {
  return {{"n_records", c.n_records}, {"true_alpha", c.true_alpha}, {"intercept", c.intercept},
          {"effects", c.effects},     {"noise_sd", c.noise_sd},     {"seed", c.seed},
          {"image_side", c.image_side}, {"n_artists", c.n_artists}};
}

struct SynthImage {
  std::vector<std::uint8_t> levels;  // side x side, row-major
  double entropy = 0.0;              // of the quantized image
};

inline constexpr double kSynthEntropyTolerance = 0.05;

namespace detail {

inline GrayMatrix levels_to_gray(const std::vector<std::uint8_t>& levels, std::size_t side) {
  GrayMatrix m(side, side);
  for (std::size_t i = 0; i < levels.size(); ++i) m.values[i] = levels[i] / 255.0;
  return m;
}

}  // namespace detail

/// Mixes a rank-1 base with uniform noise, bisecting on the noise weight until the
/// quantized image's SVD entropy is within tolerance of the target.
inline SynthImage synth_image(std::size_t side, double target_fraction, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> base_dist(0.2, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> u(side), v(side), noise(side * side);
  for (auto& x : u) x = base_dist(rng);
  for (auto& x : v) x = base_dist(rng);
  for (auto& x : noise) x = unit(rng);

  auto render = [&](double w) {
    SynthImage img;
    img.levels.resize(side * side);
    for (std::size_t i = 0; i < side; ++i) {
      for (std::size_t j = 0; j < side; ++j) {
        const double val = (1.0 - w) * u[i] * v[j] + w * noise[i * side + j];
        img.levels[i * side + j] = to_byte(val);
      }
    }
    img.entropy = svd_entropy(detail::levels_to_gray(img.levels, side));
    return img;
  };

  SynthImage lo_img = render(0.0);
  SynthImage hi_img = render(1.0);
  const double target = lo_img.entropy + target_fraction * (hi_img.entropy - lo_img.entropy);
  double lo = 0.0;
  double hi = 1.0;
  SynthImage best = std::abs(lo_img.entropy - target) < std::abs(hi_img.entropy - target) ? lo_img : hi_img;
  for (int iter = 0; iter < 40 && std::abs(best.entropy - target) > kSynthEntropyTolerance; ++iter) {
    const double mid = 0.5 * (lo + hi);
    SynthImage img = render(mid);
    if (std::abs(img.entropy - target) < std::abs(best.entropy - target)) best = img;
    if (img.entropy < target) lo = mid;
    else hi = mid;
  }
  return best;
}

inline const std::vector<std::string>& synth_media() {
  static const std::vector<std::string> v{"oil on canvas",       "acrylic on canvas", "oil on panel",
                                          "watercolor on paper", "gouache on paper",  "mixed media on canvas",
                                          "oil on board",        "pastel on paper"};
  return v;
}

struct SynthCity {
  std::string city;
  std::string currency;
};

inline const std::vector<SynthCity>& synth_cities() {
  static const std::vector<SynthCity> v{{"New York", "USD"}, {"London", "GBP"}, {"Paris", "EUR"},
                                        {"Vienna", "EUR"},   {"Hong Kong", "USD"}, {"Milan", "EUR"}};
  return v;
}

inline const std::vector<std::string>& synth_houses() {
  static const std::vector<std::string> v{"Christie's", "Sotheby's", "Bonhams",
                                          "Phillips",   "Dorotheum", "Artcurial"};
  return v;
}

inline const std::vector<std::string>& synth_styles() {
  static const std::vector<std::string> v{"Pop art",       "Magic realism", "Art informel",
                                          "Expressionism", "Surrealism",    "Cubism"};
  return v;
}

inline double synth_cpi(int year) { return std::pow(1.025, year - 2000); }

inline double synth_fx(const std::string& currency, int year) {
  if (currency == "GBP") return 0.60 + 0.01 * (year - 2000);
  if (currency == "EUR") return 0.95 - 0.01 * (year - 2000);
  return 1.0;
}

struct SynthBundle {
  std::vector<AuctionRecord> records;
  std::vector<double> entropies;  // per record, of the written image
  std::vector<SynthImage> images;
  std::string rates_csv;
};

inline std::string synth_title(TopicLabel topic, std::mt19937_64& rng) {
  static const std::vector<std::string> suffix{"study", "no. 2", "in blue", "at dusk", "with figures"};
  std::uniform_int_distribution<std::size_t> pick_suffix(0, suffix.size() - 1);
  if (topic == TopicLabel::Unknown) {
    static const std::vector<std::string> free{"Meditation", "Reverie", "Echoes", "Fragment", "Silence"};
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    return free[pick(rng)] + " " + suffix[pick_suffix(rng)];
  }
  for (const auto& [label, keywords] : default_keyword_table().topics) {
    if (label != topic) continue;
    std::uniform_int_distribution<std::size_t> pick(0, keywords.size() - 1);
    std::string word = keywords[pick(rng)].text;
    if (!word.empty()) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
    return word + " " + suffix[pick_suffix(rng)];
  }
  return "Untitled";
}

inline SynthBundle generate_synth(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> size_dist(8.0, 60.0);
  std::normal_distribution<double> noise(0.0, cfg.noise_sd);
  std::uniform_int_distribution<std::size_t> pick_artist(0, cfg.n_artists - 1);
  std::uniform_int_distribution<std::size_t> pick_medium(0, synth_media().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_house(0, synth_houses().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_city(0, synth_cities().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_style(0, synth_styles().size() - 1);
  std::uniform_int_distribution<int> pick_year(2000, 2015);
  std::uniform_int_distribution<int> pick_month(1, 12);
  std::uniform_int_distribution<std::size_t> pick_topic(0, kAllTopics.size() - 1);

  auto effect = [&](const std::string& key) {
    auto it = cfg.effects.find(key);
    return it == cfg.effects.end() ? 0.0 : it->second;
  };

  const int width_digits = std::max<int>(6, static_cast<int>(std::to_string(cfg.n_records).size()));
  SynthBundle bundle;
  for (std::size_t i = 0; i < cfg.n_records; ++i) {
    AuctionRecord r;
    std::string id = std::to_string(i + 1);
    r.lot_id = "L" + std::string(static_cast<std::size_t>(width_digits) - id.size(), '0') + id;

    SynthImage img = synth_image(cfg.image_side, unit(rng), rng);

    char artist[32];
    std::snprintf(artist, sizeof(artist), "Artist %02zu", pick_artist(rng) + 1);
    r.artist = artist;
    r.medium = synth_media()[pick_medium(rng)];
    r.house = synth_houses()[pick_house(rng)];
    const auto& city = synth_cities()[pick_city(rng)];
    r.city = city.city;
    r.currency = city.currency;
    r.sale_year = pick_year(rng);
    r.sale_month = pick_month(rng);
    r.height = std::round(size_dist(rng) * 10.0) / 10.0;
    r.width = std::round(size_dist(rng) * 10.0) / 10.0;
    r.signed_work = unit(rng) < 0.72;
    r.dated = unit(rng) < 0.27;
    const TopicLabel topic = kAllTopics[pick_topic(rng)];
    r.title = synth_title(topic, rng);
    r.style = unit(rng) < 0.7 ? synth_styles()[pick_style(rng)] : std::string();
    r.image_path = "images/" + r.lot_id + ".png";

    char month[4];
    std::snprintf(month, sizeof(month), "%02d", r.sale_month);
    double log_price = cfg.intercept + cfg.true_alpha * img.entropy;
    log_price += effect("signed") * (r.signed_work ? 1.0 : 0.0);
    log_price += effect("dated") * (r.dated ? 1.0 : 0.0);
    log_price += effect("height") * r.height + effect("width") * r.width;
    log_price += effect("artist=" + r.artist) + effect("medium=" + r.medium) +
                 effect("house=" + r.house) + effect("city=" + r.city) +
                 effect("year=" + std::to_string(r.sale_year)) + effect(std::string("month=") + month) +
                 effect("topic=" + std::string(topic_name(classify_topic(r.title)))) +
                 (r.style.empty() ? 0.0 : effect("style=" + r.style));
    log_price += noise(rng);

    const double real_usd = std::exp(log_price);
    r.price = real_usd * synth_cpi(r.sale_year) * synth_fx(r.currency, r.sale_year);

    bundle.entropies.push_back(img.entropy);
    bundle.images.push_back(std::move(img));
    bundle.records.push_back(std::move(r));
  }

  std::string rates = "kind,currency,year,value\n";
  for (int y = 2000; y <= 2015; ++y) {
    rates += "cpi,," + std::to_string(y) + "," + format_number(synth_cpi(y)) + "\n";
  }
  for (const std::string cur : {"EUR", "GBP"}) {
    for (int y = 2000; y <= 2015; ++y) {
      rates += "fx," + cur + "," + std::to_string(y) + "," + format_number(synth_fx(cur, y)) + "\n";
    }
  }
  bundle.rates_csv = std::move(rates);
  return bundle;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

/// Writes images/, records.csv, rates.csv and config.json under out_dir.
inline SynthBundle write_synth_bundle(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  SynthBundle bundle = generate_synth(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + (out_dir / "images").string());
  for (std::size_t i = 0; i < bundle.records.size(); ++i) {
    const auto png = encode_png_gray(bundle.images[i].levels, cfg.image_side, cfg.image_side);
    write_file(out_dir / bundle.records[i].image_path,
               std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
  }
  write_file(out_dir / "records.csv", records_to_csv(bundle.records));
  write_file(out_dir / "rates.csv", bundle.rates_csv);
  write_file(out_dir / "config.json", to_json(cfg).dump(2) + "\n");
  return bundle;
}

}  // namespace artmetrics
