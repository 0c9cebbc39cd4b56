// fabricsim: command-line front end for sweeps, the analytic models and the
// perftest scenario.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fabricsim/analysis.hpp"
#include "fabricsim/config_io.hpp"
#include "fabricsim/pcie.hpp"
#include "fabricsim/perftest.hpp"
#include "fabricsim/presets.hpp"
#include "fabricsim/sweep.hpp"

namespace fs = fabricsim;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kSimulation = 3, kIo = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

std::vector<fs::analysis::DataPoint> read_fit_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw fs::ConfigError(path, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "inter_pct,throughput_gbps")
    throw fs::ConfigError(path, "expected header 'inter_pct,throughput_gbps'");
  std::vector<fs::analysis::DataPoint> pts;
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    fs::analysis::DataPoint p;
    char comma = 0;
    if (!(ls >> p.x >> comma >> p.y) || comma != ',')
      throw fs::ConfigError(path + ":" + std::to_string(row), "expected two numbers");
    pts.push_back(p);
  }
  return pts;
}

struct RunOptions {
  std::string config, preset, out, svg, pattern, arbitration, loads;
  double duration_us = 0;
  long long seed = -1;
  unsigned workers = 0;
};

fs::FabricConfig resolve_config(const RunOptions& o) {
  if (o.config.empty() == o.preset.empty())
    throw fs::ConfigError("", "give exactly one of --config or --preset");
  fs::FabricConfig cfg = o.config.empty() ? fs::preset(o.preset) : fs::load_config(o.config);
  if (!o.pattern.empty()) {
    try {
      cfg.pattern = fs::TrafficPattern::named(o.pattern, cfg.pattern.message_bytes);
    } catch (const std::invalid_argument& e) {
      throw fs::ConfigError("--pattern", e.what());
    }
  }
  if (!o.arbitration.empty()) {
    try {
      cfg.arbitration = fs::parse_arbitration(o.arbitration);
    } catch (const std::invalid_argument& e) {
      throw fs::ConfigError("--arbitration", e.what());
    }
  }
  if (!o.loads.empty()) {
    std::vector<fs::LoadPoint> sweep;
    const fs::SimTime d = cfg.sweep.empty() ? fs::LoadPoint{}.duration : cfg.sweep.front().duration;
    std::istringstream ls(o.loads);
    for (std::string tok; std::getline(ls, tok, ',');) {
      try {
        sweep.push_back(fs::LoadPoint{std::stod(tok), d});
      } catch (const std::exception&) {
        throw fs::ConfigError("--loads", "'" + tok + "' is not a number");
      }
    }
    cfg.sweep = sweep;
  }
  if (o.duration_us > 0)
    for (auto& p : cfg.sweep) p.duration = fs::SimTime::from_us(o.duration_us);
  if (o.seed >= 0) cfg.seed.seed = static_cast<std::uint64_t>(o.seed);
  cfg.validate();
  return cfg;
}

int cmd_run(const RunOptions& o) {
  const fs::FabricConfig cfg = resolve_config(o);
  const unsigned workers = o.workers ? o.workers : fs::default_workers();
  const auto rows = fs::run_sweep(cfg, workers);
  const std::string csv = fs::sweep_csv(rows);
  if (o.out.empty() || o.out == "-") {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
    write_file(fs::p99_path(o.out), fs::sweep_p99_csv(rows));
  }
  if (!o.svg.empty()) {
    write_file(o.svg + "_throughput.svg", fs::throughput_svg(rows, cfg.name + " throughput"));
    write_file(o.svg + "_latency.svg", fs::latency_svg(rows, cfg.name + " latency"));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet-level simulator of intra- and inter-node accelerator networks"};
  app.require_subcommand(1);

  RunOptions run;
  auto* c_run = app.add_subcommand("run", "Run a load sweep and write CSV (and optional SVG)");
  c_run->add_option("-c,--config", run.config, "JSON configuration file");
  c_run->add_option("-p,--preset", run.preset, "Built-in preset name (see 'presets')");
  c_run->add_option("-o,--out", run.out, "Output CSV path ('-' for stdout); percentiles go to <out>_p99");
  c_run->add_option("--svg", run.svg, "Write <prefix>_throughput.svg and <prefix>_latency.svg");
  c_run->add_option("--duration", run.duration_us, "Override every load point's duration (us)");
  c_run->add_option("--pattern", run.pattern, "Override traffic pattern (C1..C5)");
  c_run->add_option("--arbitration", run.arbitration, "Override arbitration (round_robin, age)");
  c_run->add_option("--loads", run.loads, "Comma-separated loads in (0, 1]");
  c_run->add_option("--seed", run.seed, "Override the base seed");
  c_run->add_option("-j,--workers", run.workers, "Parallel load points (default FABRICSIM_WORKERS)");

  fs::pcie::PcieLinkParams pp;
  std::vector<std::uint64_t> sizes;
  auto* c_pcie = app.add_subcommand("pcie-latency", "Closed-form PCIe message transfer time");
  c_pcie->add_option("sizes", sizes, "Message sizes in bytes (default 128 B .. 4 MiB)");
  c_pcie->add_option("--width", pp.width, "Lanes")->capture_default_str();
  c_pcie->add_option("--datarate", pp.datarate_bps, "Per-lane bits per second")->capture_default_str();
  c_pcie->add_option("--encoding-num", pp.encoding_num)->capture_default_str();
  c_pcie->add_option("--encoding-den", pp.encoding_den)->capture_default_str();
  c_pcie->add_option("--tlp-overhead", pp.tlp_overhead_bytes)->capture_default_str();
  c_pcie->add_option("--max-payload", pp.max_payload_bytes)->capture_default_str();
  c_pcie->add_option("--dllp-overhead", pp.dllp_overhead_bytes)->capture_default_str();
  c_pcie->add_option("--dllp-size", pp.dllp_size_bytes)->capture_default_str();
  c_pcie->add_option("--ack-factor", pp.ack_factor)->capture_default_str();

  fs::analysis::OverheadInputs ov;
  double peak_gbps = 0;
  auto* c_over = app.add_subcommand("overhead", "Packetization overhead factor and throughput bound");
  c_over->add_option("--intra-header", ov.geometry.intra_header_bytes)->capture_default_str();
  c_over->add_option("--intra-payload", ov.geometry.intra_payload_bytes)->capture_default_str();
  c_over->add_option("--inter-header", ov.geometry.inter_header_bytes)->capture_default_str();
  c_over->add_option("--inter-payload", ov.geometry.inter_payload_bytes)->capture_default_str();
  c_over->add_option("--adjustment", ov.model_adjustment, "Per-node model constant")->capture_default_str();
  c_over->add_option("--inter-pct", ov.traffic_inter_pct, "Inter-node share, 0..100")->capture_default_str();
  c_over->add_option("--nodes", ov.num_nodes)->capture_default_str();
  c_over->add_option("--peak-gbps", peak_gbps, "Also report the bound as a share of this capacity");

  std::string fit_input;
  auto* c_fit = app.add_subcommand("fit", "Fit linear, quadratic, cubic and power-law models");
  c_fit->add_option("input", fit_input, "CSV with header inter_pct,throughput_gbps")->required();

  fs::PerftestScenario sc;
  auto* c_val = app.add_subcommand("validate", "Two-node ib_write-style latency and bandwidth sweep");
  c_val->add_option("--inter-gbps", sc.inter_link.bandwidth_gbps)->capture_default_str();
  c_val->add_option("--host-delay", sc.host_delay_ns, "Per-message host delay (ns)")->capture_default_str();
  c_val->add_option("--post-interval", sc.post_interval_ns, "Gap between posts (ns)")->capture_default_str();

  std::string show, write_dir;
  auto* c_pre = app.add_subcommand("presets", "List built-in presets");
  c_pre->add_option("--show", show, "Print one preset as JSON");
  c_pre->add_option("--write", write_dir, "Write every preset as <dir>/<name>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (c_run->parsed()) return cmd_run(run);

    if (c_pcie->parsed()) {
      pp.validate();
      if (sizes.empty())
        for (std::uint64_t s = 128; s <= (4u << 20); s *= 2) sizes.push_back(s);
      std::printf("bytes,tlps,acks,latency_ns\n");
      for (auto s : sizes)
        std::printf("%llu,%llu,%llu,%.4f\n", static_cast<unsigned long long>(s),
                    static_cast<unsigned long long>(fs::pcie::number_tlps(pp, s)),
                    static_cast<unsigned long long>(fs::pcie::number_acks(pp, s)),
                    fs::pcie::message_latency_ns(pp, s).to_double());
      return kOk;
    }

    if (c_over->parsed()) {
      const double factor = fs::analysis::traffic_overhead(ov.geometry);
      const double bound = fs::analysis::throughput_bound(ov);
      std::printf("overhead_factor %.4f\n", factor);
      std::printf("throughput_bound_gbps %.1f\n", bound);
      if (peak_gbps > 0) std::printf("share_of_peak_pct %.2f\n", 100.0 * bound / peak_gbps);
      return kOk;
    }

    if (c_fit->parsed()) {
      const auto report = fs::analysis::fit_models(read_fit_csv(fit_input));
      std::printf("model,ok,sse,r_squared,parameters\n");
      for (const auto& f : report.fits) {
        std::printf("%s,%d,%.6g,%.6f,", std::string(fs::analysis::to_string(f.model)).c_str(),
                    f.ok ? 1 : 0, f.sse, f.r_squared);
        for (std::size_t i = 0; i < f.parameters.size(); ++i)
          std::printf("%s%.10g", i ? " " : "", f.parameters[i]);
        if (!f.ok) std::printf("%s", f.failure.c_str());
        std::printf("\n");
      }
      return kOk;
    }

    if (c_val->parsed()) {
      std::printf("bytes,latency_us,bandwidth_gbytes_s,bandwidth_gib_s,pcie_segment_ns,pcie_model_ns\n");
      for (const auto& p : fs::run_perftest_sweep(sc))
        std::printf("%u,%.3f,%.3f,%.3f,%.2f,%.2f\n", p.message_bytes, p.latency_ns / 1e3,
                    p.bandwidth_gbytes_s, p.bandwidth_gbytes_s * 1e9 / (1u << 30), p.pcie_segment_ns,
                    p.pcie_model_ns);
      return kOk;
    }

    if (c_pre->parsed()) {
      if (!show.empty()) {
        std::cout << fs::dump_config(fs::preset(show));
      } else if (!write_dir.empty()) {
        for (const auto& [name, cfg] : fs::presets())
          write_file(write_dir + "/" + name + ".json", fs::dump_config(cfg));
      } else {
        for (const auto& [name, cfg] : fs::presets())
          std::printf("%-22s %3u nodes x %u acc @ %g Gbps, %s\n", name.c_str(), cfg.nodes(),
                      cfg.node.accelerators_per_node, cfg.node.acc_link_gbps,
                      cfg.pattern.name.c_str());
      }
      return kOk;
    }
  } catch (const fs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fs::SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kSimulation;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kUsage;
}
