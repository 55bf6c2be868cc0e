#pragma once

// Auction record ingestion, price normalization, sample filters, category
// condensation and title-based topic classification.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "artmetrics/csv.hpp"
#include "artmetrics/error.hpp"

namespace artmetrics {

struct AuctionRecord {
  std::string lot_id;
  std::string title;
  std::string artist;
  std::string medium;
  std::string house;
  std::string city;
  int sale_year = 0;
  int sale_month = 1;
  double price = 0.0;
  std::string currency;
  double height = 0.0;  // inches
  double width = 0.0;   // inches
  bool signed_work = false;
  bool dated = false;
  std::string style;
  std::string image_path;
};

enum class TopicLabel {
  Abstract,
  Animals,
  Landscape,
  Nude,
  People,
  Portrait,
  Religion,
  SelfPortrait,
  StillLife,
  Urban,
  Untitled,
  Unknown,
};

inline constexpr std::array<TopicLabel, 12> kAllTopics{
    TopicLabel::Abstract, TopicLabel::Animals,   TopicLabel::Landscape,    TopicLabel::Nude,
    TopicLabel::People,   TopicLabel::Portrait,  TopicLabel::Religion,     TopicLabel::SelfPortrait,
    TopicLabel::StillLife, TopicLabel::Urban,    TopicLabel::Untitled,     TopicLabel::Unknown};

inline std::string_view topic_name(TopicLabel t) {
  switch (t) {
    case TopicLabel::Abstract: return "Abstract";
    case TopicLabel::Animals: return "Animals";
    case TopicLabel::Landscape: return "Landscape";
    case TopicLabel::Nude: return "Nude";
    case TopicLabel::People: return "People";
    case TopicLabel::Portrait: return "Portrait";
    case TopicLabel::Religion: return "Religion";
    case TopicLabel::SelfPortrait: return "SelfPortrait";
    case TopicLabel::StillLife: return "StillLife";
    case TopicLabel::Urban: return "Urban";
    case TopicLabel::Untitled: return "Untitled";
    case TopicLabel::Unknown: return "Unknown";
  }
  return "Unknown";
}

/// Accepts "SelfPortrait", "Self portrait", "self-portrait", ... (case and separators ignored).
inline std::optional<TopicLabel> parse_topic(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == ' ' || c == '-' || c == '_' || c == '\t') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (TopicLabel t : kAllTopics) {
    std::string candidate;
    for (char c : topic_name(t)) candidate.push_back(static_cast<char>(std::tolower(c)));
    if (candidate == key) return t;
  }
  return std::nullopt;
}

// Untitled and Unknown carry no subject matter.
inline bool is_regular_topic(TopicLabel t) {
  return t != TopicLabel::Untitled && t != TopicLabel::Unknown;
}

// ---------------------------------------------------------------------------
// Field parsing helpers

namespace detail {

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Records

inline constexpr std::array<std::string_view, 16> kRecordColumns{
    "lot_id", "title",    "artist",   "medium",   "house",  "city",  "sale_year", "sale_month",
    "price",  "currency", "height_in", "width_in", "signed", "dated", "style",     "image_path"};

inline std::vector<AuctionRecord> parse_records(const csv::Table& table) {
  for (auto name : kRecordColumns) table.column(std::string(name));
  std::array<std::size_t, kRecordColumns.size()> col{};
  for (std::size_t i = 0; i < kRecordColumns.size(); ++i) {
    col[i] = table.column(std::string(kRecordColumns[i]));
  }

  std::vector<AuctionRecord> out;
  out.reserve(table.rows().size());
  std::size_t row_no = 0;
  for (const auto& row : table.rows()) {
    ++row_no;
    auto fail = [&](const std::string& why) -> Error {
      return Error(ErrorCode::MalformedRow, "row " + std::to_string(row_no) + ": " + why);
    };
    if (row.size() != table.header().size()) {
      throw fail("expected " + std::to_string(table.header().size()) + " fields, got " +
                 std::to_string(row.size()));
    }
    auto field = [&](std::size_t k) -> const std::string& { return row[col[k]]; };
    auto flag = [&](std::size_t k) {
      const auto& v = field(k);
      if (v == "0") return false;
      if (v == "1") return true;
      throw fail(std::string(kRecordColumns[k]) + " must be 0 or 1, got '" + v + "'");
    };
    auto positive = [&](std::size_t k) {
      const auto v = detail::parse_double(field(k));
      if (!v || !std::isfinite(*v) || *v <= 0.0) {
        throw fail(std::string(kRecordColumns[k]) + " must be a positive number, got '" +
                   field(k) + "'");
      }
      return *v;
    };

    AuctionRecord r;
    r.lot_id = field(0);
    if (r.lot_id.empty()) throw fail("empty lot_id");
    r.title = field(1);
    r.artist = field(2);
    r.medium = field(3);
    r.house = field(4);
    r.city = field(5);
    const auto year = detail::parse_int(field(6));
    if (!year) throw fail("sale_year is not an integer: '" + field(6) + "'");
    r.sale_year = static_cast<int>(*year);
    const auto month = detail::parse_int(field(7));
    if (!month || *month < 1 || *month > 12) throw fail("sale_month must be 1..12");
    r.sale_month = static_cast<int>(*month);
    r.price = positive(8);
    r.currency = detail::upper(field(9));
    if (r.currency.empty()) throw fail("empty currency");
    r.height = positive(10);
    r.width = positive(11);
    r.signed_work = flag(12);
    r.dated = flag(13);
    r.style = field(14);
    r.image_path = field(15);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<AuctionRecord> load_records(const std::filesystem::path& path) {
  return parse_records(csv::Table::load(path));
}

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string records_to_csv(const std::vector<AuctionRecord>& records) {
  std::string out = csv::format_row(csv::Row(kRecordColumns.begin(), kRecordColumns.end()));
  for (const auto& r : records) {
    out += csv::format_row({r.lot_id, r.title, r.artist, r.medium, r.house, r.city,
                            std::to_string(r.sale_year), std::to_string(r.sale_month),
                            format_number(r.price), r.currency, format_number(r.height),
                            format_number(r.width), r.signed_work ? "1" : "0", r.dated ? "1" : "0",
                            r.style, r.image_path});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Price normalization

struct RateTables {
  std::map<std::pair<std::string, int>, double> fx;  // units of currency per USD
  std::map<int, double> cpi;                          // year 2000 = 1

  double fx_rate(const std::string& currency, int year) const {
    auto it = fx.find({currency, year});
    if (it != fx.end()) return it->second;
    if (currency == "USD") return 1.0;
    throw Error(ErrorCode::MissingRate, "no fx rate for " + currency + " in " + std::to_string(year));
  }

  double cpi_index(int year) const {
    auto it = cpi.find(year);
    if (it == cpi.end()) throw Error(ErrorCode::MissingRate, "no cpi for " + std::to_string(year));
    return it->second;
  }
};

inline RateTables parse_rates(const csv::Table& table) {
  const auto kind_col = table.column("kind");
  const auto cur_col = table.column("currency");
  const auto year_col = table.column("year");
  const auto value_col = table.column("value");
  RateTables rates;
  std::size_t row_no = 0;
  for (const auto& row : table.rows()) {
    ++row_no;
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::MalformedRow, "rates row " + std::to_string(row_no) + ": " + why);
    };
    if (row.size() != table.header().size()) throw fail("wrong field count");
    const auto year = detail::parse_int(row[year_col]);
    const auto value = detail::parse_double(row[value_col]);
    if (!year) throw fail("bad year");
    if (!value || !std::isfinite(*value) || *value <= 0.0) throw fail("rate must be positive");
    const auto kind = detail::to_lower_ascii(row[kind_col]);
    if (kind == "fx") {
      const auto cur = detail::upper(row[cur_col]);
      if (cur.empty()) throw fail("fx row without currency");
      rates.fx[{cur, static_cast<int>(*year)}] = *value;
    } else if (kind == "cpi") {
      if (!row[cur_col].empty()) throw fail("cpi rows leave currency empty");
      rates.cpi[static_cast<int>(*year)] = *value;
    } else {
      throw fail("kind must be fx or cpi, got '" + row[kind_col] + "'");
    }
  }
  auto base = rates.cpi.find(2000);
  if (base == rates.cpi.end() || std::abs(base->second - 1.0) > 1e-12) {
    throw Error(ErrorCode::MissingRate, "cpi table must contain year 2000 with value 1");
  }
  return rates;
}

inline RateTables load_rates(const std::filesystem::path& path) {
  return parse_rates(csv::Table::load(path));
}

inline double nominal_usd_price(const AuctionRecord& rec, const RateTables& rates) {
  return rec.price / rates.fx_rate(rec.currency, rec.sale_year);
}

/// Inflation-adjusted USD at year-2000 prices.
inline double real_usd_price(const AuctionRecord& rec, const RateTables& rates) {
  return nominal_usd_price(rec, rates) / rates.cpi_index(rec.sale_year);
}

// ---------------------------------------------------------------------------
// Sample filters

/// Keeps the ceil(fraction * #artists) most prolific artists; ties at the cutoff stay in.
inline std::vector<AuctionRecord> filter_top_artists(const std::vector<AuctionRecord>& records,
                                                     double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fraction must lie in (0, 1]");
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.artist];
  if (counts.empty()) return {};

  std::vector<std::size_t> sorted;
  sorted.reserve(counts.size());
  for (const auto& [_, c] : counts) sorted.push_back(c);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // small slack so that e.g. 0.01 * 300 does not round up to 4
  const double want = fraction * static_cast<double>(sorted.size());
  auto keep = static_cast<std::size_t>(std::ceil(want - 1e-9 * std::max(1.0, want)));
  keep = std::clamp<std::size_t>(keep, 1, sorted.size());
  const std::size_t cutoff = sorted[keep - 1];

  std::vector<AuctionRecord> out;
  for (const auto& r : records) {
    if (counts[r.artist] >= cutoff) out.push_back(r);
  }
  return out;
}

inline const std::vector<std::string>& default_excluded_media() {
  static const std::vector<std::string> kw{
      "bronze", "iron",   "sculpture", "terracotta", "assemblage", "steel",   "marble",  "aluminum",
      "brass",  "ceramic", "porcelain", "resin",     "plaster",    "metal",   "plastic", "stone"};
  return kw;
}

inline bool medium_excluded(std::string_view medium, const std::vector<std::string>& keywords) {
  const auto lowered = detail::to_lower_ascii(medium);
  return std::any_of(keywords.begin(), keywords.end(), [&](const std::string& kw) {
    return lowered.find(detail::to_lower_ascii(kw)) != std::string::npos;
  });
}

inline std::vector<AuctionRecord> exclude_media(const std::vector<AuctionRecord>& records,
                                                const std::vector<std::string>& keywords =
                                                    default_excluded_media()) {
  if (keywords.empty()) throw Error(ErrorCode::InvalidArgument, "keyword list is empty");
  std::vector<AuctionRecord> out;
  for (const auto& r : records) {
    if (!medium_excluded(r.medium, keywords)) out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Category condensation

inline constexpr std::string_view kOtherLevel = "other";

enum class CategoryField { Artist, Medium, House, City };

inline const std::string& category_value(const AuctionRecord& r, CategoryField f) {
  switch (f) {
    case CategoryField::Artist: return r.artist;
    case CategoryField::Medium: return r.medium;
    case CategoryField::House: return r.house;
    case CategoryField::City: return r.city;
  }
  return r.medium;
}

/// Top-k most frequent values keep their level, the rest become "other".
/// Frequency ties are broken by lexicographic order of the value.
inline std::vector<std::string> condense_values(const std::vector<std::string>& values,
                                                std::size_t top_k) {
  if (top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& v : values) ++freq[v];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::unordered_map<std::string, bool> kept;
  for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) kept[ranked[i].first] = true;

  std::vector<std::string> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(kept.contains(v) ? v : std::string(kOtherLevel));
  return out;
}

inline std::vector<std::string> condense_categories(const std::vector<AuctionRecord>& records,
                                                    CategoryField field, std::size_t top_k) {
  std::vector<std::string> values;
  values.reserve(records.size());
  for (const auto& r : records) values.push_back(category_value(r, field));
  return condense_values(values, top_k);
}

// ---------------------------------------------------------------------------
// Topic classification

namespace detail {

inline std::string_view fold_codepoint(char32_t cp) {
  if (cp >= 0xC0 && cp <= 0xFF) {
    static constexpr std::array<std::string_view, 64> latin1{
        "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
        "d", "n", "o", "o", "o", "o", "o",  "",  "o", "u", "u", "u", "u", "y", "th", "ss",
        "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
        "d", "n", "o", "o", "o", "o", "o",  "",  "o", "u", "u", "u", "u", "y", "th", "y"};
    return latin1[cp - 0xC0];
  }
  struct Range {
    char32_t lo, hi;
    std::string_view to;
  };
  static constexpr std::array<Range, 23> extended{{
      {0x100, 0x105, "a"}, {0x106, 0x10D, "c"}, {0x10E, 0x111, "d"}, {0x112, 0x11B, "e"},
      {0x11C, 0x123, "g"}, {0x124, 0x127, "h"}, {0x128, 0x131, "i"}, {0x132, 0x133, "ij"},
      {0x134, 0x135, "j"}, {0x136, 0x138, "k"}, {0x139, 0x142, "l"}, {0x143, 0x14B, "n"},
      {0x14C, 0x151, "o"}, {0x152, 0x153, "oe"}, {0x154, 0x159, "r"}, {0x15A, 0x161, "s"},
      {0x162, 0x167, "t"}, {0x168, 0x173, "u"}, {0x174, 0x175, "w"}, {0x176, 0x178, "y"},
      {0x179, 0x17E, "z"}, {0x17F, 0x17F, "s"}, {0x2019, 0x2019, "'"},
  }};
  for (const auto& r : extended) {
    if (cp >= r.lo && cp <= r.hi) return r.to;
  }
  return {};
}

}  // namespace detail

/// Lowercases, strips Latin diacritics, and collapses runs of whitespace.
inline std::string normalize_title(std::string_view text) {
  std::string out;
  bool pending_space = false;
  auto emit = [&](std::string_view piece) {
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.append(piece);
  };
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (std::isspace(c)) pending_space = true;
      else {
        const char lower = static_cast<char>(std::tolower(c));
        emit(std::string_view(&lower, 1));
      }
      ++i;
      continue;
    }
    std::size_t len = (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + len > text.size()) len = 1;
    char32_t cp = 0;
    if (len == 2) cp = ((c & 0x1F) << 6) | (text[i + 1] & 0x3F);
    else if (len == 3) cp = ((c & 0x0F) << 12) | ((text[i + 1] & 0x3F) << 6) | (text[i + 2] & 0x3F);
    if (cp == 0xA0) {
      pending_space = true;
    } else if (auto folded = detail::fold_codepoint(cp); !folded.empty()) {
      emit(folded);
    } else {
      emit(text.substr(i, len));
    }
    i += len;
  }
  return out;
}

struct TopicKeyword {
  std::string text;  // normalized
  bool word_boundary = false;
};

struct KeywordTable {
  // listing order doubles as the tie-break order
  std::vector<std::pair<TopicLabel, std::vector<TopicKeyword>>> topics;
};

/// Parses one keyword as written in a table: a trailing "_" (or "\_") requires a word boundary.
inline TopicKeyword parse_keyword(std::string_view raw) {
  std::string kw = detail::trim(raw);
  if (kw.size() >= 2 && kw.front() == '"' && kw.back() == '"') kw = kw.substr(1, kw.size() - 2);
  kw = detail::trim(kw);
  TopicKeyword out;
  if (!kw.empty() && kw.back() == '_') {
    out.word_boundary = true;
    kw.pop_back();
    if (!kw.empty() && kw.back() == '\\') kw.pop_back();
  }
  out.text = normalize_title(kw);
  return out;
}

inline const KeywordTable& default_keyword_table() {
  static const KeywordTable table = [] {
    const std::vector<std::pair<TopicLabel, std::vector<std::string_view>>> raw{
        {TopicLabel::Abstract, {"abstract", "composition"}},
        {TopicLabel::Animals,
         {"horse", "cheval", "chevaux", "cow_", "cows", "vache", "cattle", "cat_", "cats",
          "chat_", "dog_", "dogs", "chien", "sheep", "mouton", "bird", "oiseau"}},
        {TopicLabel::Landscape,
         {"landscape", "country landscape", "coastal landscape", "paysage", "seascape", "sea_",
          "mer_", "mountain", "river", "riviere", "lake", "lac_", "valley", "vallee"}},
        {TopicLabel::Nude, {"nude", "nu_", "nue_"}},
        {TopicLabel::People,
         {"people", "personnage", "family", "famille", "boy",   "garcon", "girl",   "fille",
          "man_",   "men_",       "homme",  "woman",   "women", "femme",  "child",  "enfant",
          "couple", "mother",     "mere_",  "father",  "pere_", "lady",   "dame"}},
        {TopicLabel::Portrait, {"portrait"}},
        {TopicLabel::Religion,
         {"jesus", "christ_", "apostle", "ange_", "angel", "saint_", "madonna", "holy_",
          "mary magdalene", "annunciation", "annonciation", "adoration", "adam and eve",
          "adam et eve", "crucifixion", "last supper"}},
        {TopicLabel::SelfPortrait, {"self-portrait", "self portrait", "auto-portrait", "autoportrait"}},
        {TopicLabel::StillLife, {"still life", "nature morte", "bouquet"}},
        {TopicLabel::Urban,
         {"city", "ville", "town", "village", "street", "rue", "market", "marche", "harbour",
          "port_", "paris", "london", "londres", "new york", "amsterdam", "rome_", "venice",
          "venise"}},
        {TopicLabel::Untitled, {"untitled", "sans titre"}},
    };
    KeywordTable t;
    for (const auto& [label, words] : raw) {
      std::vector<TopicKeyword> kws;
      for (auto w : words) kws.push_back(parse_keyword(w));
      t.topics.emplace_back(label, std::move(kws));
    }
    return t;
  }();
  return table;
}

/// Override file: one line per topic, "Topic: kw1, kw2, ...". Blank lines and '#' comments skipped.
inline KeywordTable parse_keyword_table(std::string_view text) {
  KeywordTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::MalformedRow, "keyword line " + std::to_string(line_no) + ": missing ':'");
    }
    const auto label = parse_topic(detail::trim(line.substr(0, colon)));
    if (!label || *label == TopicLabel::Unknown) {
      throw Error(ErrorCode::MalformedRow,
                  "keyword line " + std::to_string(line_no) + ": unknown topic '" +
                      line.substr(0, colon) + "'");
    }
    std::vector<TopicKeyword> kws;
    std::string_view rest = std::string_view(line).substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto comma = rest.find(',', start);
      if (comma == std::string_view::npos) comma = rest.size();
      auto kw = parse_keyword(rest.substr(start, comma - start));
      if (!kw.text.empty()) kws.push_back(std::move(kw));
      start = comma + 1;
    }
    table.topics.emplace_back(*label, std::move(kws));
  }
  return table;
}

inline KeywordTable load_keyword_table(const std::filesystem::path& path) {
  return parse_keyword_table(csv::read_text(path));
}

namespace detail {

inline bool is_letter_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

inline bool keyword_matches(std::string_view title, const TopicKeyword& kw) {
  if (kw.text.empty() || !title.starts_with(kw.text)) return false;
  if (!kw.word_boundary || title.size() == kw.text.size()) return true;
  return !is_letter_byte(title[kw.text.size()]);
}

}  // namespace detail

/// Prefix match against the keyword table; the longest keyword wins, then listing order.
inline TopicLabel classify_topic(std::string_view title,
                                 const KeywordTable& table = default_keyword_table()) {
  const std::string norm = normalize_title(title);
  TopicLabel best = TopicLabel::Unknown;
  std::size_t best_len = 0;
  for (const auto& [label, keywords] : table.topics) {
    for (const auto& kw : keywords) {
      if (kw.text.size() > best_len && detail::keyword_matches(norm, kw)) {
        best = label;
        best_len = kw.text.size();
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Price distribution

struct PriceBucket {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  double percentage = 0.0;          // exact share, in percent
  double rounded_percentage = 0.0;  // two decimals, summing to 100.00
};

struct PriceDistribution {
  std::vector<PriceBucket> buckets;
  std::size_t total = 0;
};

inline const std::vector<double>& default_price_edges() {
  static const std::vector<double> edges{1e2, 1e3, 1e4, 1e5, 1e6, 1e7};
  return edges;
}

/// Half-open buckets [0,e0), [e0,e1), ..., [e_last, inf).
inline PriceDistribution price_distribution(const std::vector<double>& prices,
                                            const std::vector<double>& edges = default_price_edges()) {
  if (!std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end() ||
      (!edges.empty() && edges.front() <= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bucket edges must be ascending positive reals");
  }
  PriceDistribution dist;
  double lo = 0.0;
  for (double e : edges) {
    dist.buckets.push_back({lo, e});
    lo = e;
  }
  dist.buckets.push_back({lo, std::numeric_limits<double>::infinity()});

  for (double p : prices) {
    const auto idx = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), p) -
                                              edges.begin());
    ++dist.buckets[idx].count;
  }
  dist.total = prices.size();
  if (dist.total == 0) return dist;

  // Largest-remainder rounding to hundredths of a percent.
  constexpr long long kUnits = 10000;
  std::vector<std::pair<double, std::size_t>> remainders;
  long long assigned = 0;
  for (std::size_t i = 0; i < dist.buckets.size(); ++i) {
    auto& b = dist.buckets[i];
    b.percentage = 100.0 * static_cast<double>(b.count) / static_cast<double>(dist.total);
    const double exact = static_cast<double>(b.count) * kUnits / static_cast<double>(dist.total);
    const auto floor_units = static_cast<long long>(std::floor(exact));
    b.rounded_percentage = static_cast<double>(floor_units);
    assigned += floor_units;
    remainders.emplace_back(exact - static_cast<double>(floor_units), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long long k = 0; k < kUnits - assigned; ++k) {
    dist.buckets[remainders[static_cast<std::size_t>(k)].second].rounded_percentage += 1.0;
  }
  for (auto& b : dist.buckets) b.rounded_percentage /= 100.0;
  return dist;
}

inline PriceDistribution price_distribution(const std::vector<AuctionRecord>& records,
                                            const std::vector<double>& edges = default_price_edges()) {
  std::vector<double> prices;
  prices.reserve(records.size());
  for (const auto& r : records) prices.push_back(r.price);
  return price_distribution(prices, edges);
}

}  // namespace artmetrics
