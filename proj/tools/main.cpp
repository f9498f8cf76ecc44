#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "wkstab/errors.hpp"
#include "wkstab/jobs.hpp"

namespace {

struct CliFlags {
  std::string config_path;
  std::string out_path;
  std::string csv_path;
  wkstab::jobs::JobOptions options;
};

void attach_common_flags(CLI::App* app, CliFlags& flags) {
  app->add_option("--config", flags.config_path, "job configuration JSON")->required();
  app->add_option("--out", flags.out_path, "write the JSON report here instead of stdout");
  app->add_option("--csv", flags.csv_path, "write the sweep table as CSV");
  app->add_option("--pipeline", flags.options.pipeline, "float|exact|both")
      ->check(CLI::IsMember({"float", "exact", "both"}));
  app->add_option("--order", flags.options.order, "quadrature order per axis/simplex");
  app->add_option("--threads", flags.options.threads, "worker threads for sweeps");
}

int execute(wkstab::jobs::Command cmd, const CliFlags& flags) {
  nlohmann::json config;
  {
    std::ifstream in(flags.config_path);
    if (!in) {
      std::cerr << "error: cannot open config file '" << flags.config_path << "'\n";
      return 2;
    }
    try {
      in >> config;
    } catch (const std::exception& e) {
      std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
      return 2;
    }
  }

  try {
    wkstab::jobs::Report report = wkstab::jobs::run(cmd, config, flags.options);
    std::string body = report.body.dump(2);
    if (flags.out_path.empty()) {
      std::cout << body << "\n";
    } else {
      std::ofstream out(flags.out_path);
      out << body << "\n";
    }
    if (!flags.csv_path.empty() && !report.csv.empty()) {
      std::ofstream csv(flags.csv_path);
      csv << report.csv;
    }
    return 0;
  } catch (const wkstab::Error& e) {
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return e.is_validation() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump(2) << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted K-stability invariants of toric manifolds and P^1-bundles"};
  app.require_subcommand(1);

  using wkstab::jobs::Command;
  struct Entry {
    CLI::App* sub;
    Command cmd;
    CliFlags flags;
  };
  std::vector<std::unique_ptr<Entry>> entries;

  auto add = [&](CLI::App* parent, const std::string& name, const std::string& desc, Command cmd) {
    auto entry = std::make_unique<Entry>();
    entry->sub = parent->add_subcommand(name, desc);
    entry->cmd = cmd;
    attach_common_flags(entry->sub, entry->flags);
    entries.push_back(std::move(entry));
  };

  add(&app, "slope", "(v,w)-slope of a labelled polytope", Command::Slope);
  add(&app, "wext", "extremal affine function by L^2_w projection", Command::WExt);
  add(&app, "futaki", "polytope Futaki invariant of a convex PL function", Command::Futaki);
  add(&app, "scan", "sweep single-crease PL functions for destabilizers", Command::Scan);
  add(&app, "abreu", "weighted scalar curvature grid and identity check", Command::Abreu);
  add(&app, "df", "lattice-sum Donaldson-Futaki invariant vs F^P", Command::Df);

  CLI::App* pbundle = app.add_subcommand("pbundle", "admissible P^1-bundle pipeline");
  pbundle->require_subcommand(1);
  add(pbundle, "solve", "solve the profile boundary-value problem", Command::PBundleSolve);
  add(pbundle, "futaki", "Futaki function F(z0)", Command::PBundleFutaki);
  add(pbundle, "report", "existence verdict with the full F curve", Command::PBundleReport);

  CLI11_PARSE(app, argc, argv);

  for (const auto& entry : entries)
    if (entry->sub->parsed()) return execute(entry->cmd, entry->flags);
  return 2;
}
