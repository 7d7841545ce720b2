#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hftlab/builtins.hpp"
#include "hftlab/model.hpp"
#include "hftlab/scan.hpp"
#include "hftlab/suite.hpp"

namespace {

struct Options {
  std::string model_path;
  std::string builtin;
  std::string grid_text = "-1:1:21";
  std::optional<double> lambda;
  std::vector<double> betas;
  double tol_deg = 0.0;
  std::optional<double> fd_step;
  std::string checks_text;
  bool json = false;
};

hftlab::LambdaGrid parse_grid(const std::string& text) {
  std::istringstream is(text);
  std::string a, b, n;
  if (!std::getline(is, a, ':') || !std::getline(is, b, ':') ||
      !std::getline(is, n) || a.empty() || b.empty() || n.empty()) {
    throw std::invalid_argument("grid must be START:STOP:POINTS, got '" +
                                text + "'");
  }
  hftlab::LambdaGrid g;
  try {
    size_t pos = 0;
    g.start = std::stod(a, &pos);
    if (pos != a.size()) throw std::invalid_argument(a);
    g.stop = std::stod(b, &pos);
    if (pos != b.size()) throw std::invalid_argument(b);
    g.points = std::stoi(n, &pos);
    if (pos != n.size()) throw std::invalid_argument(n);
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must be START:STOP:POINTS, got '" +
                                text + "'");
  }
  g.values();  // validate bounds eagerly
  return g;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void add_model_options(CLI::App* cmd, Options& o) {
  auto* model = cmd->add_option("--model", o.model_path,
                                "path to a model definition file");
  auto* builtin =
      cmd->add_option("--builtin", o.builtin, "name of a bundled model");
  model->excludes(builtin);
  builtin->excludes(model);
  cmd->add_option("--grid", o.grid_text,
                  "lambda grid as START:STOP:POINTS (default -1:1:21)");
  cmd->add_option("--tol-deg", o.tol_deg,
                  "degeneracy tolerance (<= 0 means scale-aware default)");
  cmd->add_flag("--json", o.json, "emit a JSON report on stdout");
}

std::pair<hftlab::ModelDefinition, std::string> load_model(const Options& o) {
  if (!o.builtin.empty()) {
    return {hftlab::builtin_model(o.builtin), o.builtin};
  }
  if (!o.model_path.empty()) {
    return {hftlab::parse_model_file(o.model_path), o.model_path};
  }
  throw std::invalid_argument("one of --model or --builtin is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hft-lab: numerical verification of eigenvalue-derivative identities "
      "for parametric Hermitian matrix families"};
  app.require_subcommand(1);
  Options o;

  CLI::App* verify = app.add_subcommand(
      "verify", "run the identity checks over a grid or a single lambda");
  add_model_options(verify, o);
  auto* lam = verify->add_option("--lambda", o.lambda,
                                 "verify a single lambda instead of a grid");
  lam->excludes(verify->get_option("--grid"));
  verify->add_option("--beta", o.betas,
                     "inverse temperature for the statistical checks "
                     "(repeatable, default 1)");
  verify->add_option("--fd-step", o.fd_step,
                     "finite-difference step (default 1e-5 * max(1,|lambda|))")
      ->check(CLI::PositiveNumber);
  verify->add_option("--checks", o.checks_text,
                     "comma-separated subset of checks to run");

  CLI::App* scan = app.add_subcommand(
      "scan", "locate degeneracy points of H(lambda) on a grid");
  add_model_options(scan, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto [model, label] = load_model(o);
    const hftlab::LambdaGrid grid = parse_grid(o.grid_text);
    if (verify->parsed()) {
      hftlab::RunConfig cfg;
      cfg.grid = grid;
      cfg.single_lambda = o.lambda;
      if (!o.betas.empty()) cfg.betas = o.betas;
      cfg.tol_deg = o.tol_deg;
      cfg.fd.step = o.fd_step;
      cfg.checks = split_csv(o.checks_text);
      cfg.model_label = label;
      const hftlab::SuiteResult result = hftlab::run_verification(model, cfg);
      std::cout << (o.json ? hftlab::to_json(result)
                           : hftlab::to_text(result));
      return result.all_pass() ? 0 : 1;
    }
    const hftlab::ScanResult result =
        hftlab::scan_degeneracies(model, grid, o.tol_deg);
    std::cout << (o.json ? hftlab::to_json(result, label)
                         : hftlab::to_text(result, label));
    return 0;
  } catch (const hftlab::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
