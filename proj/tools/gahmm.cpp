#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gahmm/cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = gahmm::cli;
  CLI::App app{"Ontology-trained HMMs for group activity recognition"};
  app.require_subcommand(1);

  cli::TrainOptions train;
  std::vector<std::string> catalogs;
  auto* t = app.add_subcommand("train", "Build a model bank from ontology catalogs (one file per layer)");
  t->add_option("--catalog", catalogs, "Catalog file; repeat for each layer, bottom first")->required();
  t->add_option("--out", train.out, "Bank file to write")->required();
  t->add_option("--alpha", train.alpha, "Emission smoothing")->capture_default_str();
  t->add_option("--self-loop", train.self_loop, "Self-transition of the label-state model")->capture_default_str();

  cli::RunOptions run;
  std::string config;
  auto add_run = [&](const std::string& name, const std::string& help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--events", run.events, "Event stream file")->required();
    c->add_option("--bank", run.bank, "Trained bank file")->required();
    c->add_option("--config", config, "Run configuration");
    return c;
  };
  auto* r = add_run("recognize", "Emit semantic messages as JSON lines");
  auto* e = add_run("explain", "Print the window-by-window trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : cli::kExitInput;
  }
  if (!config.empty()) run.config = config;

  if (t->parsed()) {
    train.catalogs.assign(catalogs.begin(), catalogs.end());
    return cli::cmd_train(train, std::cout, std::cerr);
  }
  if (r->parsed()) return cli::cmd_recognize(run, std::cout, std::cerr);
  if (e->parsed()) return cli::cmd_explain(run, std::cout, std::cerr);
  return cli::kExitInput;
}
