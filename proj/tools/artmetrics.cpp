// artmetrics command-line driver.

#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "artmetrics/commands.hpp"

namespace cli = artmetrics::cli;
using artmetrics::Error;
using artmetrics::ErrorCode;

namespace {

void add_data_inputs(CLI::App* cmd, cli::DataInputs& in, std::string& keywords) {
  cmd->add_option("--records", in.records, "auction records CSV")->required();
  cmd->add_option("--features", in.features, "image features CSV from extract")->required();
  cmd->add_option("--rates", in.rates, "fx/cpi rates CSV")->required();
  cmd->add_option("--keywords", keywords, "topic keyword table");
  cmd->add_flag("!--no-filter", in.sample.filter, "skip the top-artist and medium filters");
  cmd->add_option("--top-fraction", in.sample.top_fraction, "share of artists kept by total sales")
      ->capture_default_str();
  cmd->add_option("--max-unmatched", in.sample.max_unmatched,
                  "tolerated share of records without image features")
      ->capture_default_str();
  cmd->add_option("--top-media", in.sample.top_media)->capture_default_str();
  cmd->add_option("--top-houses", in.sample.top_houses)->capture_default_str();
  cmd->add_option("--top-cities", in.sample.top_cities)->capture_default_str();
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information quantity and hedonic pricing tools for painting images"};
  app.require_subcommand(1);

  cli::ExtractOptions ex;
  ex.threads = std::max(1u, std::thread::hardware_concurrency());
  auto* extract = app.add_subcommand("extract", "compute e_g, redpct and bluepct for a directory of images");
  extract->add_option("--images", ex.images)->required();
  extract->add_option("--out", ex.out)->required();
  extract->add_option("--size", ex.size, "side of the square resize")->capture_default_str();
  extract->add_option("--threads", ex.threads)->check(CLI::PositiveNumber);

  std::string cl_records, cl_out, cl_keywords;
  auto* classify = app.add_subcommand("classify-topic", "label each record title with a topic");
  classify->add_option("--records", cl_records)->required();
  classify->add_option("--out", cl_out)->required();
  classify->add_option("--keywords", cl_keywords);

  cli::FitOptions fo;
  std::string fit_keywords;
  auto* fit = app.add_subcommand("fit", "fit a hedonic regression");
  add_data_inputs(fit, fo.data, fit_keywords);
  fit->add_option("--spec", fo.spec, "builtin name (1..5, topic-N, style-N, color-N) or JSON file")
      ->capture_default_str();
  fit->add_option("--out", fo.out, "JSON output; the table goes to <out>.txt")->required();
  fit->add_flag("--by-topic", fo.by_topic, "also fit each regular topic subsample");

  cli::CompareOptions co;
  std::string cmp_keywords;
  auto* compare = app.add_subcommand("compare", "add-one / drop-one adjusted R^2 comparison");
  add_data_inputs(compare, co.data, cmp_keywords);
  compare->add_option("--spec", co.spec)->capture_default_str();
  compare->add_option("--vars", co.vars, "comma separated terms or dummy groups")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--out", co.out, "JSON output");

  cli::ReportOptions ro;
  std::string rep_features, rep_rates, rep_keywords;
  auto* report = app.add_subcommand("report", "price distribution or E_g descriptive statistics");
  report->add_option("--records", ro.records)->required();
  report->add_option("--kind", ro.kind, "price-dist, topic-stats or style-stats")->required();
  report->add_option("--features", rep_features, "needed by topic-stats and style-stats");
  report->add_option("--rates", rep_rates, "convert price-dist to USD");
  report->add_option("--keywords", rep_keywords);
  report->add_flag("--csv", ro.csv, "CSV instead of an aligned table");
  report->add_option("--out", ro.out);

  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic images + records + rates bundle");
  synth->add_option("--config", synth_config)->required();
  synth->add_option("--out", synth_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (extract->parsed()) {
      const auto s = cli::run_extract(ex, std::cerr);
      std::cerr << "extracted " << s.extracted << " of " << s.files << " files, " << s.failed << " skipped\n";
      return s.files > 0 && s.extracted == 0 ? 1 : 0;
    }
    if (classify->parsed()) {
      cli::run_classify(cl_records, opt_path(cl_keywords), cl_out);
    } else if (fit->parsed()) {
      fo.data.keywords = opt_path(fit_keywords);
      std::cout << cli::run_fit(fo).text;
    } else if (compare->parsed()) {
      co.data.keywords = opt_path(cmp_keywords);
      std::cout << cli::run_compare(co).text;
    } else if (report->parsed()) {
      ro.features = opt_path(rep_features);
      ro.rates = opt_path(rep_rates);
      ro.keywords = opt_path(rep_keywords);
      const auto text = cli::run_report(ro);
      if (ro.out.empty()) std::cout << text;
    } else if (synth->parsed()) {
      const auto bundle = cli::run_synth(synth_config, synth_out);
      std::cerr << "wrote " << bundle.records.size() << " records to " << synth_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::UnknownReportKind ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
