#include "fedsynth/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedsynth/accountant.hpp"
#include "fedsynth/blobs.hpp"
#include "fedsynth/classifier.hpp"
#include "fedsynth/error.hpp"
#include "fedsynth/federation.hpp"
#include "fedsynth/io.hpp"
#include "fedsynth/parallel.hpp"
#include "fedsynth/preprocess.hpp"
#include "fedsynth/report.hpp"
#include "fedsynth/sweep.hpp"

namespace fedsynth {

namespace {

namespace fs = std::filesystem;

// ------------------------------------------------------------ value parsing

double parse_real(const std::string& text, const std::string& flag) {
  if (text == "inf" || text == "+inf") return kInf;
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ParseError("--" + flag + ": expected a number or inf, got '" + text + "'");
  }
  return v;
}

template <class Int>
Int parse_integer(const std::string& text, const std::string& flag) {
  Int v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ParseError("--" + flag + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Mode parse_mode_flag(const std::string& text) {
  const auto m = parse_mode(text);
  if (!m) {
    throw ParseError("--mode: unknown mode '" + text +
                     "' (non-private, centralized, fed-conventional, fed-cape)");
  }
  return *m;
}

// Flat "key=value" defaults; a key names a flag without its dashes.
std::vector<std::string> config_args(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::vector<std::string> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(n) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(path.string() + ":" + std::to_string(n) + ": empty key");
    if (value == "true") {
      out.push_back("--" + key);
    } else if (value != "false") {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

// ------------------------------------------------------------ data loading

struct DataSource {
  std::string path;
  std::string labels;  // IDX labels file; empty for CSV
  int label_column = -1;
  int classes = 0;
};

Dataset load_dataset(const DataSource& src) {
  const std::optional<int> K = src.classes > 0 ? std::optional<int>(src.classes) : std::nullopt;
  if (!src.labels.empty()) return io::read_idx_dataset(src.path, src.labels, K);
  if (fs::path(src.path).extension() == ".csv") {
    const std::optional<std::size_t> col =
        src.label_column >= 0 ? std::optional<std::size_t>(static_cast<std::size_t>(src.label_column))
                              : std::nullopt;
    return io::read_csv_dataset(src.path, col, K);
  }
  throw FormatError("cannot tell the format of " + src.path +
                    ": use a .csv file or give IDX labels with the matching labels flag");
}

Dataset load_synthetic(const std::string& path, int classes) {
  if (fs::path(path).extension() == ".csv") {
    return io::read_csv_dataset(path, std::nullopt,
                                classes > 0 ? std::optional<int>(classes) : std::nullopt);
  }
  return io::read_binary_synthetic(path).as_dataset();
}

// --------------------------------------------------------------- commands

struct Common {
  int threads = 0;
  std::string delta = "1e-5";
  int alpha_max = 200;
};

void add_common(CLI::App* cmd, Common& c, bool privacy) {
  cmd->add_option("--threads", c.threads, "OpenMP threads (0 = runtime default)")->capture_default_str();
  if (privacy) {
    cmd->add_option("--delta", c.delta, "target delta")->capture_default_str();
    cmd->add_option("--alpha-max", c.alpha_max, "largest Renyi order tried")->capture_default_str();
  }
}

struct AccountFlags {
  std::string epsilon;
  std::string tau_g;
  int l = 0;
  double c = 1.0;
  std::int64_t N = 0;
  int K = 0;
  std::int64_t T = 0;
  int S = 1;
  std::string mode = "fed-cape";
  std::string report;
  std::string rdp_csv;
};

PrivacyParams privacy_of(const AccountFlags& f, const Common& common) {
  PrivacyParams p;
  p.delta = parse_real(common.delta, "delta");
  p.alpha_max = common.alpha_max;
  p.l = f.l;
  p.c = f.c;
  p.N = f.N;
  p.K = f.K;
  p.T = f.T;
  p.S = f.S;
  return p;
}

void write_reports(const AccountingReport& r, const std::string& report, const std::string& rdp_csv) {
  if (!report.empty()) io::write_file_atomic(report, format_report(r));
  if (!rdp_csv.empty()) io::write_file_atomic(rdp_csv, format_rdp_curve(r));
}

void cmd_calibrate(const AccountFlags& f, const Common& common, std::ostream& out) {
  PrivacyParams p = privacy_of(f, common);
  p.epsilon_target = parse_real(f.epsilon, "epsilon");
  const Mode mode = parse_mode_flag(f.mode);
  Calibration cal = calibrate_tau(p);
  const NoiseScales scales = client_noise(mode, cal.tau_central, mode == Mode::kCentralized ? 1 : p.S);
  cal.report.tau_e = scales.tau_e;
  if (cal.tau_central > 0) add_local_sampling_diagnostic(cal.report, p);
  out << "mode=" << mode_name(mode) << '\n';
  out << "client_tau_g=" << format_double(scales.tau_g) << '\n';
  out << format_report(cal.report);
  write_reports(cal.report, f.report, f.rdp_csv);
}

void cmd_account(const AccountFlags& f, const Common& common, std::ostream& out) {
  PrivacyParams p = privacy_of(f, common);
  const double tau = parse_real(f.tau_g, "tau-g");
  if (!(tau > 0)) throw ConfigError("non-private: tau_g = 0 admits no finite epsilon");
  p.validate();
  AccountingReport r = total_epsilon(p, tau);
  add_local_sampling_diagnostic(r, p);
  out << format_report(r);
  write_reports(r, f.report, f.rdp_csv);
}

struct GenerateFlags {
  DataSource data;
  AccountFlags acc;
  std::uint64_t seed = 42;
  bool with_replacement = false;
  std::size_t block_slots = 512;
  std::string out;
  std::string format;
};

void cmd_generate(const GenerateFlags& f, const Common& common, std::ostream& out) {
  const Mode mode = parse_mode_flag(f.acc.mode);
  RunConfig cfg;
  cfg.mode = mode;
  cfg.privacy = privacy_of(f.acc, common);
  cfg.master_seed = f.seed;
  cfg.with_replacement = f.with_replacement;
  cfg.block_slots = f.block_slots;
  if (mode != Mode::kNonPrivate) {
    if (f.acc.epsilon.empty() == f.acc.tau_g.empty()) {
      throw ConfigError("give exactly one of --epsilon and --tau-g");
    }
    if (!f.acc.tau_g.empty()) {
      cfg.tau_central = parse_real(f.acc.tau_g, "tau-g");
    } else {
      cfg.privacy.epsilon_target = parse_real(f.acc.epsilon, "epsilon");
    }
  }
  std::string format = f.format;
  if (format.empty()) format = fs::path(f.out).extension() == ".csv" ? "csv" : "bin";
  if (format != "csv" && format != "bin") throw ParseError("--format: expected csv or bin, got '" + format + "'");

  const Dataset ds = load_dataset(f.data);
  const PipelineResult res = run_pipeline(ds, cfg);
  if (format == "csv") {
    io::write_csv_dataset(res.data.as_dataset(), f.out);
  } else {
    io::write_binary_synthetic(res.data, f.out);
  }
  write_reports(res.report, f.acc.report, f.acc.rdp_csv);
  out << "mode=" << mode_name(mode) << '\n';
  out << "records=" << res.data.size() << '\n';
  out << "clients=" << res.clients << '\n';
  out << "client_tau_g=" << format_double(res.client_scales.tau_g) << '\n';
  out << format_report(res.report);
}

struct TrainFlags {
  int epochs = 50;
  double lr = 0.05;
  std::size_t batch = 128;
  std::uint64_t seed = 42;
};

TrainOptions train_options(const TrainFlags& f) {
  TrainOptions o;
  o.epochs = f.epochs;
  o.learning_rate = f.lr;
  o.batch_size = f.batch;
  o.seed = f.seed;
  return o;
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--epochs", f.epochs, "classifier epochs")->capture_default_str();
  cmd->add_option("--lr", f.lr, "classifier learning rate")->capture_default_str();
  cmd->add_option("--batch", f.batch, "classifier mini-batch size")->capture_default_str();
}

struct EvaluateFlags {
  std::string synthetic;
  DataSource test;
  DataSource train;
  double c = 1.0;
  std::string baseline;
  TrainFlags train_opts;
};

void cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  const Dataset test = load_dataset(f.test);
  const Dataset synth = load_synthetic(f.synthetic, test.num_classes);
  std::optional<EvalData> data;
  Dataset prepared_test;
  if (!f.train.path.empty()) {
    data = prepare_eval_data(load_dataset(f.train), test, f.c);
    prepared_test = data->test;
  } else {
    prepared_test = preprocess_with(test, zscore_fit(test.features), f.c);
  }
  const TrainOptions opts = train_options(f.train_opts);
  Dataset train_set = synth;
  if (train_set.num_classes < prepared_test.num_classes) train_set.num_classes = prepared_test.num_classes;
  const double acc = evaluate_accuracy(train_softmax(train_set, opts), prepared_test);

  std::optional<double> baseline;
  if (f.baseline == "train") {
    if (!data) throw ConfigError("--baseline train needs --train");
    baseline = baseline_accuracy(*data, opts);
  } else if (!f.baseline.empty()) {
    baseline = parse_real(f.baseline, "baseline");
  }
  out << "accuracy=" << format_double(acc) << '\n';
  out << "n_synthetic=" << synth.size() << '\n';
  out << "n_test=" << test.size() << '\n';
  if (baseline) {
    out << "baseline=" << format_double(*baseline) << '\n';
    out << "utility_ratio=" << format_double(utility_ratio(acc, *baseline)) << '\n';
  }
}

struct SweepFlags {
  DataSource train;
  DataSource test;
  std::string modes = "fed-cape";
  std::string ls;
  std::string Ss = "1";
  std::string epsilons;
  std::string seeds = "42";
  std::int64_t T = 0;
  double c = 1.0;
  bool with_replacement = false;
  std::string out;
  TrainFlags train_opts;
};

void cmd_sweep(const SweepFlags& f, const Common& common, std::ostream& out) {
  SweepGrid grid;
  for (const auto& m : split_list(f.modes)) grid.modes.push_back(parse_mode_flag(m));
  for (const auto& s : split_list(f.ls)) grid.ls.push_back(parse_integer<int>(s, "l"));
  for (const auto& s : split_list(f.Ss)) grid.Ss.push_back(parse_integer<int>(s, "S"));
  for (const auto& s : split_list(f.epsilons)) grid.epsilons.push_back(parse_real(s, "epsilon"));
  for (const auto& s : split_list(f.seeds)) grid.seeds.push_back(parse_integer<std::uint64_t>(s, "seeds"));
  if (grid.size() == 0) throw ConfigError("sweep grid is empty");
  SweepSettings settings;
  settings.c = f.c;
  settings.delta = parse_real(common.delta, "delta");
  settings.T = f.T;
  settings.alpha_max = common.alpha_max;
  settings.with_replacement = f.with_replacement;
  settings.train = train_options(f.train_opts);
  const SweepOutcome res = run_sweep(load_dataset(f.train), load_dataset(f.test), grid, settings, fs::path(f.out));
  std::size_t failed = 0;
  for (const auto& r : res.rows) failed += r.error.empty() ? 0 : 1;
  out << "rows=" << res.rows.size() << '\n';
  out << "computed=" << res.computed << '\n';
  out << "failed=" << failed << '\n';
}

struct BlobFlags {
  BlobParams params;
  std::string out;
  std::string test_out;
  std::size_t test_per_class = 100;
};

void cmd_make_blobs(const BlobFlags& f, std::ostream& out) {
  const Dataset train = make_blobs(f.params);
  io::write_csv_dataset(train, f.out);
  out << "rows=" << train.size() << '\n';
  if (!f.test_out.empty()) {
    const Dataset test = make_blobs_split(f.params, f.test_per_class, 1);
    io::write_csv_dataset(test, f.test_out);
    out << "test_rows=" << test.size() << '\n';
  }
}

int exit_code(ErrorCategory c) { return c == ErrorCategory::kContract ? 1 : 2; }

void add_source(CLI::App* cmd, DataSource& src, const std::string& prefix, bool required) {
  auto* o = cmd->add_option("--" + prefix, src.path, "dataset (.csv, or IDX images with --" + prefix + "-labels)");
  if (required) o->required();
  cmd->add_option("--" + prefix + "-labels", src.labels, "IDX labels file");
  cmd->add_option("--" + prefix + "-label-column", src.label_column, "CSV label column (default last)");
  cmd->add_option("--" + prefix + "-classes", src.classes, "number of classes (default max label + 1)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated differentially private synthetic data with correlated noise", "fedsynth"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  app.fallthrough(false);

  Common common;
  AccountFlags acc;
  GenerateFlags gen;
  EvaluateFlags eval;
  SweepFlags sweep;
  BlobFlags blobs;
  std::string config_unused;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_unused, "flat key=value file of flag defaults; flags win");
  };
  auto add_account_flags = [](CLI::App* cmd, AccountFlags& f, bool need_N) {
    cmd->add_option("--l", f.l, "order of mixture")->required();
    cmd->add_option("--c", f.c, "clipping norm")->capture_default_str();
    if (need_N) cmd->add_option("--N", f.N, "global dataset size")->required();
    if (need_N) cmd->add_option("--K", f.K, "number of classes")->required();
    cmd->add_option("--T", f.T, "released records")->required();
    cmd->add_option("--S", f.S, "clients")->capture_default_str();
    cmd->add_option("--report", f.report, "write the accounting report here");
    cmd->add_option("--rdp-csv", f.rdp_csv, "write the alpha,rdp curve here");
  };

  auto* calibrate = app.add_subcommand("calibrate", "noise level for a target epsilon");
  add_common(calibrate, common, true);
  add_config(calibrate);
  calibrate->add_option("--epsilon", acc.epsilon, "target epsilon (or inf)")->required();
  calibrate->add_option("--mode", acc.mode, "mode whose client scales are printed")->capture_default_str();
  add_account_flags(calibrate, acc, true);

  auto* account = app.add_subcommand("account", "epsilon for a given noise level");
  add_common(account, common, true);
  add_config(account);
  account->add_option("--tau-g", acc.tau_g, "accounted noise std (tau_g printed by calibrate)")->required();
  add_account_flags(account, acc, true);

  auto* generate = app.add_subcommand("generate", "release a synthetic dataset");
  add_common(generate, common, true);
  add_config(generate);
  add_source(generate, gen.data, "data", true);
  generate->add_option("--mode", gen.acc.mode, "non-private|centralized|fed-conventional|fed-cape")->capture_default_str();
  generate->add_option("--epsilon", gen.acc.epsilon, "target epsilon (or inf)");
  generate->add_option("--tau-g", gen.acc.tau_g, "accounted noise std instead of --epsilon");
  add_account_flags(generate, gen.acc, false);
  generate->add_option("--seed", gen.seed, "master seed")->capture_default_str();
  generate->add_flag("--with-replacement", gen.with_replacement, "always sample mixes with replacement");
  generate->add_option("--block-slots", gen.block_slots, "slots per processing block")->capture_default_str();
  generate->add_option("--out", gen.out, "output file")->required();
  generate->add_option("--format", gen.format, "csv or bin (default from the extension)");

  auto* evaluate = app.add_subcommand("evaluate", "train on synthetic data, test on real data");
  add_common(evaluate, common, false);
  add_config(evaluate);
  evaluate->add_option("--synthetic", eval.synthetic, "synthetic dataset (.bin or .csv)")->required();
  add_source(evaluate, eval.test, "test", true);
  add_source(evaluate, eval.train, "train", false);
  evaluate->add_option("--c", eval.c, "clipping norm for the real data")->capture_default_str();
  evaluate->add_option("--baseline", eval.baseline, "real-data accuracy, or 'train' to measure it");
  evaluate->add_option("--seed", eval.train_opts.seed, "classifier seed")->capture_default_str();
  add_train_flags(evaluate, eval.train_opts);

  auto* sweep_cmd = app.add_subcommand("sweep", "grid of runs written as CSV");
  add_common(sweep_cmd, common, true);
  add_config(sweep_cmd);
  add_source(sweep_cmd, sweep.train, "train", true);
  add_source(sweep_cmd, sweep.test, "test", true);
  sweep_cmd->add_option("--modes", sweep.modes, "comma-separated modes")->capture_default_str();
  sweep_cmd->add_option("--l", sweep.ls, "comma-separated orders of mixture")->required();
  sweep_cmd->add_option("--S", sweep.Ss, "comma-separated client counts")->capture_default_str();
  sweep_cmd->add_option("--epsilon", sweep.epsilons, "comma-separated epsilons (inf allowed)")->required();
  sweep_cmd->add_option("--seeds", sweep.seeds, "comma-separated seeds")->capture_default_str();
  sweep_cmd->add_option("--T", sweep.T, "released records")->required();
  sweep_cmd->add_option("--c", sweep.c, "clipping norm")->capture_default_str();
  sweep_cmd->add_flag("--with-replacement", sweep.with_replacement, "always sample mixes with replacement");
  sweep_cmd->add_option("--out", sweep.out, "CSV file (resumed if present)")->required();
  add_train_flags(sweep_cmd, sweep.train_opts);

  auto* make = app.add_subcommand("make-blobs", "write a Gaussian-blob CSV dataset");
  add_config(make);
  make->add_option("--out", blobs.out, "train CSV")->required();
  make->add_option("--test-out", blobs.test_out, "held-out CSV from the same clusters");
  make->add_option("--test-per-class", blobs.test_per_class, "held-out rows per class")->capture_default_str();
  make->add_option("--K", blobs.params.num_classes, "classes")->capture_default_str();
  make->add_option("--per-class", blobs.params.per_class, "rows per class")->capture_default_str();
  make->add_option("--dim", blobs.params.dim, "features")->capture_default_str();
  make->add_option("--spread", blobs.params.cluster_spread, "cluster std")->capture_default_str();
  make->add_option("--scale", blobs.params.center_scale, "center range")->capture_default_str();
  make->add_option("--seed", blobs.params.seed, "seed")->capture_default_str();

  try {
    // Config entries go right after the subcommand so later flags win.
    std::vector<std::string> argv{"fedsynth"};
    for (std::size_t i = 0; i < args.size(); ++i) {
      argv.push_back(args[i]);
      if (i == 0) {
        for (std::size_t j = 1; j < args.size(); ++j) {
          std::string path;
          if (args[j] == "--config" && j + 1 < args.size()) path = args[j + 1];
          if (args[j].rfind("--config=", 0) == 0) path = args[j].substr(9);
          if (!path.empty()) {
            const auto extra = config_args(path);
            argv.insert(argv.end(), extra.begin(), extra.end());
          }
        }
      }
    }
    std::vector<const char*> ptrs;
    for (const auto& a : argv) ptrs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      throw ParseError(e.what());
    }

    set_threads(common.threads < 0 ? 0 : common.threads);
    if (calibrate->parsed()) cmd_calibrate(acc, common, out);
    if (account->parsed()) cmd_account(acc, common, out);
    if (generate->parsed()) cmd_generate(gen, common, out);
    if (evaluate->parsed()) cmd_evaluate(eval, out);
    if (sweep_cmd->parsed()) cmd_sweep(sweep, common, out);
    if (make->parsed()) cmd_make_blobs(blobs, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fedsynth
