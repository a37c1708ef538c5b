// Command-line front end for the transactive EV market simulator.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tev/errors.hpp"
#include "tev/simulation.hpp"

namespace {

struct Overrides {
  std::string config;
  std::uint64_t seed = 0;
  std::string mode;
  std::string out;
  int days = 0;
  int fleet_size = 0;
  bool serial = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "Scenario JSON file (defaults apply when omitted)");
  app->add_option("--seed", o.seed, "Override the scenario seed");
  app->add_option("--mode", o.mode, "Override the charging mode (V1G or V2G)");
  app->add_option("--out", o.out, "Override the output directory");
  app->add_option("--days", o.days, "Override the number of simulated days");
  app->add_option("--fleet-size", o.fleet_size, "Override the number of EVs");
  app->add_flag("--serial", o.serial, "Run per-agent work on one thread");
}

// Keeps tiny negative round-off from printing as "-0.000".
double tidy(double v) { return std::fabs(v) < 5e-7 ? 0.0 : v; }

tev::ScenarioConfig resolve(const Overrides& o, const CLI::App* app) {
  tev::ScenarioConfig c = o.config.empty() ? tev::ScenarioConfig{} : tev::load_config_file(o.config);
  if (app->count("--seed")) c.seed = o.seed;
  if (!o.mode.empty()) c.mode = tev::parse_charge_mode(o.mode);
  if (!o.out.empty()) c.output_dir = o.out;
  if (app->count("--days")) c.days = o.days;
  if (app->count("--fleet-size")) c.fleet_size = o.fleet_size;
  if (o.serial) c.parallel = false;
  c.validate();
  return c;
}

// Minimal SVG scatter plot of one agents.csv column against the slider.
void scatter_svg(const std::vector<double>& x, const std::vector<double>& y, const std::string& ylabel,
                 const std::string& path) {
  const double w = 480, h = 360, m = 50;
  double ymin = 0, ymax = 1;
  if (!y.empty()) {
    ymin = *std::min_element(y.begin(), y.end());
    ymax = *std::max_element(y.begin(), y.end());
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 1;
    ymax += 1;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m / 2 << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << m << "\" y1=\"" << m / 2 << "\" x2=\"" << m << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">slider</text>\n";
  f << "<text x=\"14\" y=\"" << h / 2 << "\" transform=\"rotate(-90 14 " << h / 2
    << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", ymin);
  f << "<text x=\"" << m - 4 << "\" y=\"" << h - m << "\" text-anchor=\"end\" font-size=\"10\">"
    << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", ymax);
  f << "<text x=\"" << m - 4 << "\" y=\"" << m / 2 + 4
    << "\" text-anchor=\"end\" font-size=\"10\">" << buf << "</text>\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double px = m + x[i] * (w - 1.5 * m);
    const double py = (h - m) - (y[i] - ymin) / (ymax - ymin) * (h - 1.5 * m);
    f << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"4\" fill=\"steelblue\"/>\n";
  }
  f << "</svg>\n";
}

void plot_agents(const std::string& dir) {
  const std::string csv = (std::filesystem::path(dir) / "agents.csv").string();
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read " + csv + " (run the scenario first)");
  std::string line;
  std::getline(in, line);
  std::vector<double> w, sav, am_w, am;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 11) continue;
    w.push_back(std::stod(cells[2]));
    sav.push_back(std::stod(cells[9]));
    if (cells[10] != "NA") {
      am_w.push_back(w.back());
      am.push_back(std::stod(cells[10]));
    }
  }
  scatter_svg(w, sav, "savings %", (std::filesystem::path(dir) / "savings_vs_slider.svg").string());
  scatter_svg(am_w, am, "amenity %", (std::filesystem::path(dir) / "amenity_vs_slider.svg").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transactive EV charging market simulator"};
  app.require_subcommand(1);

  Overrides run_o, cmp_o, val_o;
  auto* run = app.add_subcommand("run", "Run base and transactive cases and write all logs");
  add_common(run, run_o);
  auto* cmp = app.add_subcommand("compare-modes", "Paired V1G/V2G runs over the degradation sweep");
  add_common(cmp, cmp_o);
  auto* val = app.add_subcommand("validate-config", "Check a scenario file and print it resolved");
  add_common(val, val_o);
  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "Write savings/amenity scatter plots from a run directory");
  plot->add_option("dir", plot_dir, "Output directory of a previous run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_o, run);
      const auto outcome = tev::run_scenario(cfg);
      tev::write_outputs(outcome, cfg, cfg.output_dir);
      const auto& s = outcome.system;
      std::printf("peak load     base %.2f kW  transactive %.2f kW\n", s.peak_load_base,
                  s.peak_load_transactive);
      std::printf("peak RT price base %.4f     transactive %.4f $/kWh\n", s.peak_price_base,
                  s.peak_price_transactive);
      std::printf("mean savings  %.2f %%\n", tidy(tev::mean_savings(outcome.agents)));
      std::printf("spearman      slider~savings %.3f  slider~amenity %.3f\n",
                  tidy(outcome.spearman_savings), tidy(outcome.spearman_amenity));
      std::printf("converged     %.1f %% of measured hours\n", 100.0 * s.converged_fraction);
      const bool ok = outcome.base.audit.ok() && outcome.transactive.audit.ok();
      std::printf("audit         %s (logged deviations: %d)\n", ok ? "clean" : "VIOLATIONS",
                  outcome.transactive.audit.logged_deviations);
      std::printf("outputs in    %s\n", cfg.output_dir.c_str());
      return ok ? 0 : 3;
    }
    if (*cmp) {
      const auto cfg = resolve(cmp_o, cmp);
      const auto rows = tev::compare_modes(cfg);
      tev::write_mode_comparison(rows, cfg.output_dir);
      std::printf("%8s %10s %10s %10s %12s\n", "phi", "V1G sav%", "V2G sav%", "delta", "delta peak%");
      bool ok = true;
      for (const auto& r : rows) {
        std::printf("%8.4f %10.3f %10.3f %10.3f %12.3f\n", r.phi, r.savings_v1g, r.savings_v2g,
                    tidy(r.delta_savings), tidy(r.delta_peak_reduction));
        ok = ok && r.audits_ok;
      }
      return ok ? 0 : 3;
    }
    if (*val) {
      const auto cfg = resolve(val_o, val);
      std::cout << tev::config_to_json(cfg) << '\n';
      return 0;
    }
    if (*plot) {
      plot_agents(plot_dir);
      std::printf("wrote %s/savings_vs_slider.svg and amenity_vs_slider.svg\n", plot_dir.c_str());
      return 0;
    }
  } catch (const tev::SimulationError& e) {
    std::fprintf(stderr, "simulation error (hour %d, agent %d): %s\n", e.hour(), e.agent_id(),
                 e.what());
    return 2;
  } catch (const tev::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
