/* Copyright 2026 The certsmooth Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include "certsmooth/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "certsmooth/campaign.hpp"
#include "certsmooth/classifiers.hpp"
#include "certsmooth/dataset.hpp"
#include "certsmooth/memory.hpp"
#include "certsmooth/metrics.hpp"
#include "certsmooth/report.hpp"
#include "certsmooth/sigma_opt.hpp"
#include "certsmooth/training.hpp"

namespace certsmooth {

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_real_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument(std::string("bad value '") + item + "' in " + what);
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  return values;
}

IndexKind index_kind_from_string(const std::string& text) {
  if (text == "linear") return IndexKind::kLinearScan;
  if (text == "sweep") return IndexKind::kSweep;
  throw std::invalid_argument("unknown index '" + text + "'");
}

// Flags shared by certify and optimize-sigma.
struct OptFlags {
  double sigma0 = 0.25;
  double step_alpha = 1e-4;
  std::size_t iters = 100;
  std::size_t n = 1;
  double sigma_min = 1e-3;
  double sigma_max = 2.0;
  std::string grad_mode = "auto";
  std::string return_mode = "faithful";
  double p_clamp = kPClamp;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App& app, bool sigma0_required) {
    auto* s0 = app.add_option("--sigma0", sigma0, "initial (or fixed) noise scale");
    if (sigma0_required) s0->required();
    app.add_option("--alpha-step", step_alpha, "ascent step size")->capture_default_str();
    app.add_option("--iters", iters, "ascent iterations K")->capture_default_str();
    app.add_option("--n", n, "noise samples in the optimisation batch")->capture_default_str();
    app.add_option("--sigma-min", sigma_min, "lower projection bound")->capture_default_str();
    app.add_option("--sigma-max", sigma_max, "upper projection bound")->capture_default_str();
    app.add_option("--grad-mode", grad_mode, "analytic | fd | auto")
        ->check(CLI::IsMember({"analytic", "fd", "auto"}))
        ->capture_default_str();
    app.add_option("--return-mode", return_mode, "faithful | best")
        ->check(CLI::IsMember({"faithful", "best"}))
        ->capture_default_str();
    app.add_option("--p-clamp", p_clamp, "probability clamp inside the proxy radius")
        ->capture_default_str();
    app.add_option("--seed", seed, "base seed (default: $CERTSMOOTH_SEED or 0)");
  }

  SigmaOptConfig to_config() const {
    SigmaOptConfig cfg;
    cfg.sigma0 = sigma0;
    cfg.step_alpha = step_alpha;
    cfg.iters_k = iters;
    cfg.n_samples = n;
    cfg.sigma_min = sigma_min;
    cfg.sigma_max = sigma_max;
    cfg.grad_mode = grad_mode_from_string(grad_mode);
    cfg.return_mode = return_mode_from_string(return_mode);
    cfg.p_clamp = p_clamp;
    return cfg;
  }
};

struct CertifyFlags {
  OptFlags opt;
  std::string mode = "ds";
  std::size_t n0 = 100;
  std::size_t n_cert = 100000;
  double alpha_fail = 0.001;
  std::string dataset;
  std::string classifier;
  std::string out;
  std::string metrics_out;
  std::string memory_in;
  std::string memory_out;
  std::string radii;
  std::size_t threads = 1;
  std::string index = "linear";
};

int run_certify(const CertifyFlags& f, std::ostream& out) {
  CampaignConfig cfg;
  cfg.mode = campaign_mode_from_string(f.mode);
  cfg.opt = f.opt.to_config();
  cfg.cert.sigma = f.opt.sigma0;
  cfg.cert.n0 = f.n0;
  cfg.cert.n_cert = f.n_cert;
  cfg.cert.alpha_fail = f.alpha_fail;
  cfg.cert.p_clamp = f.opt.p_clamp;
  if (!f.radii.empty()) cfg.radii = parse_real_list(f.radii, "--radii");
  cfg.seed = resolve_seed(f.opt.seed);
  cfg.threads = f.threads;
  cfg.index = index_kind_from_string(f.index);
  cfg.validate();

  const auto classifier = load_classifier(f.classifier);
  const auto data = load_dataset(f.dataset);
  MemoryStore memory = f.memory_in.empty() ? MemoryStore(cfg.index)
                                           : load_memory(f.memory_in, cfg.index);

  const auto result = run_campaign(*classifier, data, cfg, std::move(memory));

  nlohmann::json config = cfg.to_json();
  config["dataset"] = f.dataset;
  config["classifier"] = f.classifier;
  if (!f.memory_in.empty()) config["memory_in"] = f.memory_in;
  const std::filesystem::path csv_path = f.out;
  const std::filesystem::path json_path =
      f.metrics_out.empty() ? metrics_path_for(csv_path) : std::filesystem::path(f.metrics_out);
  emit_report(result.rows, result.metrics, config, csv_path, json_path);
  if (!f.memory_out.empty()) save_memory(result.memory, f.memory_out);

  out << "certified " << result.rows.size() << " inputs: acr=" << format_real(result.metrics.acr)
      << " abstain_rate=" << format_real(result.metrics.abstain_rate)
      << " overlap_events=" << result.metrics.overlap_events << '\n';
  return kExitOk;
}

struct OptimizeFlags {
  OptFlags opt;
  std::string classifier;
  std::string point;
  std::string noise = "gaussian";
};

int run_optimize(const OptimizeFlags& f, std::ostream& out) {
  SigmaOptConfig cfg = f.opt.to_config();
  cfg.noise = f.noise == "uniform" ? NoiseKind::kUniform : NoiseKind::kGaussian;
  cfg.seed = resolve_seed(f.opt.seed);
  const auto classifier = load_classifier(f.classifier);
  const Point x = parse_real_list(f.point, "--x");
  if (x.size() != classifier->dim()) {
    throw std::invalid_argument("--x has " + std::to_string(x.size()) +
                                " coordinates, classifier expects " +
                                std::to_string(classifier->dim()));
  }
  const auto result = optimize_sigma(*classifier, x, cfg);
  out << "iteration,sigma,proxy_radius,top_class\n";
  for (const auto& e : result.trace.entries) {
    out << e.iteration << ',' << format_real(e.sigma) << ',' << format_real(e.proxy_radius) << ','
        << e.top_class << '\n';
  }
  out << "# sigma_star=" << format_real(result.sigma_star)
      << " class_flips=" << result.trace.class_flips() << '\n';
  return kExitOk;
}

struct DemoFlags {
  std::string dataset = "annuli";
  std::size_t seeds = 10;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> n_train;
  std::optional<std::size_t> n_test;
  std::optional<std::size_t> n_cert;
  std::string out;
};

int run_demo(const DemoFlags& f, std::ostream& out) {
  DemoConfig cfg = default_demo_config();
  cfg.dataset = synthetic_kind_from_string(f.dataset);
  cfg.num_seeds = f.seeds;
  cfg.base_seed = resolve_seed(f.seed);
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.n_train) cfg.n_train = *f.n_train;
  if (f.n_test) cfg.n_test = *f.n_test;
  if (f.n_cert) cfg.certify.cert.n_cert = *f.n_cert;

  const auto results = run_train_demo(cfg);
  std::size_t wins = 0;
  nlohmann::json doc = nlohmann::json::array();
  out << "seed,ds_acr,fixed_acr,ds_wins\n";
  for (const auto& r : results) {
    const bool win = r.data_dependent.acr > r.fixed.acr;
    wins += win ? 1 : 0;
    out << r.seed << ',' << format_real(r.data_dependent.acr) << ',' << format_real(r.fixed.acr)
        << ',' << (win ? 1 : 0) << '\n';
    doc.push_back({{"seed", r.seed},
                   {"data_dependent", r.data_dependent.to_json()},
                   {"fixed", r.fixed.to_json()}});
  }
  out << "# data-dependent ACR higher in " << wins << '/' << results.size() << " seeds\n";
  if (!f.out.empty()) {
    std::ofstream file(f.out, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + f.out + " for writing");
    file << doc.dump(2) << '\n';
  }
  return kExitOk;
}

int run_report(const std::string& in, const std::string& radii, std::ostream& out) {
  const auto rows = read_report_csv(in);
  std::vector<CertificationOutcome> outcomes;
  std::vector<std::size_t> labels;
  for (const auto& row : rows) {
    outcomes.push_back(row.outcome);
    labels.push_back(row.label);
  }
  const auto grid = radii.empty() ? default_radii_grid() : parse_real_list(radii, "--radii");
  auto summary = summarize(outcomes, labels, grid);
  for (const auto& row : rows) summary.adjusted_by_memory += row.adjusted_by_memory ? 1 : 0;
  out << summary.to_json().dump(2) << '\n';
  return kExitOk;
}

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  const char* env = std::getenv("CERTSMOOTH_SEED");
  if (env == nullptr || *env == '\0') return 0;
  const std::string text(env);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("CERTSMOOTH_SEED is not an unsigned integer: '" + text + "'");
  }
  return value;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized smoothing with per-input noise scales and memory-based certification",
               "certsmooth"};
  app.require_subcommand(1);

  CertifyFlags cert;
  auto* certify = app.add_subcommand("certify", "certify every row of a dataset");
  cert.opt.add_to(*certify, /*sigma0_required=*/true);
  certify->add_option("--mode", cert.mode, "fixed | ds | ds-l1")
      ->check(CLI::IsMember({"fixed", "ds", "ds-l1"}))
      ->capture_default_str();
  certify->add_option("--n0", cert.n0, "selection samples")->capture_default_str();
  certify->add_option("--n-cert", cert.n_cert, "estimation samples")->capture_default_str();
  certify->add_option("--alpha-fail", cert.alpha_fail, "failure probability")
      ->capture_default_str();
  certify->add_option("--dataset", cert.dataset, "CSV: d reals then a label per row")->required();
  certify->add_option("--classifier", cert.classifier, "classifier JSON")->required();
  certify->add_option("--out", cert.out, "report CSV")->required();
  certify->add_option("--metrics-out", cert.metrics_out, "metrics JSON (default: <out>.json)");
  certify->add_option("--memory-in", cert.memory_in, "memory to resume from (JSON lines)");
  certify->add_option("--memory-out", cert.memory_out, "where to save the final memory");
  certify->add_option("--radii", cert.radii, "comma-separated radius grid (default 0:0.25:3)");
  certify->add_option("--threads", cert.threads, "worker threads")->capture_default_str();
  certify->add_option("--index", cert.index, "linear | sweep")
      ->check(CLI::IsMember({"linear", "sweep"}))
      ->capture_default_str();

  OptimizeFlags optf;
  auto* optimize = app.add_subcommand("optimize-sigma", "print the ascent trace for one input");
  optf.opt.add_to(*optimize, /*sigma0_required=*/false);
  optimize->add_option("--classifier", optf.classifier, "classifier JSON")->required();
  optimize->add_option("--x", optf.point, "comma-separated input point")->required();
  optimize->add_option("--noise", optf.noise, "gaussian | uniform")
      ->check(CLI::IsMember({"gaussian", "uniform"}))
      ->capture_default_str();

  DemoFlags demo;
  auto* train = app.add_subcommand("train-demo",
                                   "train on synthetic data, compare per-input and fixed sigma");
  train->add_option("--dataset", demo.dataset, "annuli | clusters")
      ->check(CLI::IsMember({"annuli", "clusters"}))
      ->capture_default_str();
  train->add_option("--seeds", demo.seeds, "number of seeds")->capture_default_str();
  train->add_option("--seed", demo.seed, "first seed (default: $CERTSMOOTH_SEED or 0)");
  train->add_option("--epochs", demo.epochs, "training epochs");
  train->add_option("--n-train", demo.n_train, "training points per seed");
  train->add_option("--n-test", demo.n_test, "test points per seed");
  train->add_option("--n-cert", demo.n_cert, "estimation samples per certificate");
  train->add_option("--out", demo.out, "per-seed metrics JSON");

  std::string report_in;
  std::string report_radii;
  auto* report = app.add_subcommand("report", "recompute metrics from a report CSV");
  report->add_option("--in", report_in, "report CSV")->required();
  report->add_option("--radii", report_radii, "comma-separated radius grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; everything else is a usage error.
    const int code = app.exit(e, out, err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk : kExitUsage;
  }

  try {
    if (certify->parsed()) return run_certify(cert, out);
    if (optimize->parsed()) return run_optimize(optf, out);
    if (train->parsed()) return run_demo(demo, out);
    if (report->parsed()) return run_report(report_in, report_radii, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace certsmooth
