// foodgap: staged batch driver for the perception-gap analysis.
//
//   foodgap synth --counties 194 --plant tagx:Obese:gap:0.8:0.1 --out data/
//   foodgap run --config data/synth.cfg --out store/
//   foodgap correlate --folds 10 --alpha 0.05 --out store/

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "foodgap/pipeline.hpp"
#include "foodgap/synth.hpp"
#include "foodgap/util.hpp"

namespace {

using foodgap::RunConfig;

// Pipeline flags. Values are kept as text and applied through RunConfig::set
// so command line and config file share one parser.
struct PipelineFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
};

void add_pipeline_options(CLI::App* cmd, PipelineFlags& flags) {
  struct Spec {
    const char* key;
    const char* help;
  };
  static const Spec specs[] = {
      {"posts", "Post corpus, one JSON record per line"},
      {"counties", "County boundaries (GeoJSON FeatureCollection)"},
      {"health", "County health statistics CSV"},
      {"vocab", "Tag vocabulary CSV (tag,category)"},
      {"metrics", "Health metric registry override CSV"},
      {"min-county-posts", "Minimum posts for a county to be kept (2000)"},
      {"min-tag-counties", "Minimum counties a human tag must occur in (20)"},
      {"topk", "Machine tags kept per image (30)"},
      {"weighting", "Machine tag weighting: uniform|score"},
      {"family", "Feature families: gap,human,machine,subjective or all"},
      {"labels", "Subjective labels (healthy,delicious,organic)"},
      {"folds", "Cross-validation folds (10)"},
      {"alpha", "Benjamini-Hochberg level (0.05)"},
      {"se-mode", "Fold spread: se (stddev / sqrt(k)) or sd"},
      {"bh-grouping", "BH groups: metric-family|metric|global"},
      {"top", "Rows per report table (5)"},
      {"format", "Report format: md|csv"},
  };
  for (const auto& s : specs) cmd->add_option(std::string("--") + s.key, flags.values[s.key], s.help);
  cmd->add_flag("--significant-only", flags.switches["significant-only"],
                "Only BH-significant records in reports");
}

int run_stages(const std::vector<foodgap::Stage>& stages, const std::string& config_path,
               const PipelineFlags& flags, const std::map<std::string, std::string>& globals,
               const std::map<std::string, CLI::Option*>& given) {
  RunConfig cfg;
  std::map<std::string, bool> from_cli;
  for (const auto& [key, opt] : given) from_cli[key] = opt && opt->count() > 0;

  if (!config_path.empty())
    for (const auto& [key, value] : foodgap::parse_config_text(foodgap::read_file(config_path)))
      if (!from_cli[key]) cfg.set(key, value);
  for (const auto& [key, value] : flags.values)
    if (from_cli[key]) cfg.set(key, value);
  for (const auto& [key, on] : flags.switches)
    if (from_cli[key]) cfg.set(key, on ? "true" : "false");
  for (const auto& [key, value] : globals)
    if (from_cli[key]) cfg.set(key, value);

  auto outcomes = foodgap::run_pipeline(cfg, stages, &std::cerr);
  (void)outcomes;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perception-gap features and county health correlations"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> globals;
  std::map<std::string, CLI::Option*> given;
  bool force = false;
  app.add_option("--config", config_path, "Key-value config file; flags override it")
      ->check(CLI::ExistingFile);
  given["out"] = app.add_option("--out", globals["out"], "Store (or synth output) directory");
  given["seed"] = app.add_option("--seed", globals["seed"], "Random seed (42)");
  given["threads"] = app.add_option("--threads", globals["threads"], "Worker threads (1)");
  given["force"] = app.add_flag("--force", force, "Re-run stages even if up to date or reconfigured");

  PipelineFlags flags;
  std::map<std::string, std::vector<foodgap::Stage>> stage_commands = {
      {"ingest", {foodgap::Stage::ingest}},
      {"features", {foodgap::Stage::features}},
      {"correlate", {foodgap::Stage::correlate}},
      {"report", {foodgap::Stage::report}},
      {"run", {std::begin(foodgap::all_stages), std::end(foodgap::all_stages)}},
  };
  std::map<std::string, CLI::App*> commands;
  for (const auto& [name, stages] : stage_commands) {
    auto* cmd = app.add_subcommand(name, name == "run" ? "Run all stages" : "Run the " + name + " stage");
    add_pipeline_options(cmd, flags);
    commands[name] = cmd;
  }

  foodgap::SynthPlan plan;
  std::vector<std::string> plants, subjective_plants;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted effects");
  synth->add_option("--counties", plan.counties, "County count")->capture_default_str();
  synth->add_option("--users-per-county", plan.users_per_county)->capture_default_str();
  synth->add_option("--images-per-user", plan.images_per_user)->capture_default_str();
  synth->add_option("--vocab-size", plan.vocab_size)->capture_default_str();
  synth->add_option("--plant", plants, "tag:metric:family:r:sd");
  synth->add_option("--plant-subjective", subjective_plants, "label:tag:metric:r");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(foodgap::ErrorKind::usage);
  }

  try {
    if (synth->parsed()) {
      if (given["seed"]->count()) plan.seed = std::stoull(globals["seed"]);
      for (const auto& p : plants) plan.effects.push_back(foodgap::parse_plant(p));
      for (const auto& p : subjective_plants) plan.subjective.push_back(foodgap::parse_subjective_plant(p));
      std::string out = given["out"]->count() ? globals["out"] : "synth-out";
      auto data = foodgap::generate(plan);
      foodgap::write_synth(data, out);
      std::cerr << "synth: " << data.posts.size() << " posts in " << data.counties.size()
                << " counties written to " << out << "\n";
      for (const auto& r : data.realized)
        std::cerr << "  planted " << r.tag << " / " << r.metric << " / " << r.family
                  << ": realized r = " << r.realized_r << "\n";
      return 0;
    }
    for (const auto& [name, cmd] : commands) {
      if (!cmd->parsed()) continue;
      for (const auto& [key, value] : flags.values) given[key] = cmd->get_option("--" + key);
      given["significant-only"] = cmd->get_option("--significant-only");
      if (force) globals["force"] = "true";
      return run_stages(stage_commands[name], config_path, flags, globals, given);
    }
  } catch (const foodgap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(foodgap::ErrorKind::internal);
  }
  return static_cast<int>(foodgap::ErrorKind::internal);
}
