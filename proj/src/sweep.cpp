#include "fedsynth/sweep.hpp"

#include <charconv>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "fedsynth/error.hpp"
#include "fedsynth/federation.hpp"
#include "fedsynth/io.hpp"
#include "fedsynth/parallel.hpp"
#include "fedsynth/report.hpp"

namespace fedsynth {

namespace {

using Key = std::tuple<std::string, int, int, std::string, std::uint64_t>;

Key key_of(const SweepRow& r) {
  return {std::string(mode_name(r.mode)), r.l, r.S, format_double(r.epsilon), r.seed};
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',') ch = ';';
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_real(const std::string& s, std::size_t line) {
  if (s == "inf") return kInf;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("sweep CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& s, std::size_t line) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("sweep CSV line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

EvalData prepare_eval_data(const Dataset& train, const Dataset& test, double c) {
  train.validate();
  test.validate();
  if (train.dim() != test.dim()) {
    throw ConfigError("train has " + std::to_string(train.dim()) + " features, test has " +
                      std::to_string(test.dim()));
  }
  EvalData out;
  out.stats = zscore_fit(train.features);
  out.train = preprocess_with(train, out.stats, c);
  out.test = preprocess_with(test, out.stats, c);
  return out;
}

double baseline_accuracy(const EvalData& data, const TrainOptions& options) {
  return evaluate_accuracy(train_softmax(data.train, options), data.test);
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    out += std::string(mode_name(r.mode)) + ',' + std::to_string(r.l) + ',' + std::to_string(r.S) + ',' +
           format_double(r.epsilon) + ',' + std::to_string(r.seed) + ',' + opt(r.accuracy) + ',' +
           opt(r.baseline) + ',' + opt(r.utility_ratio) + ',' + sanitize(r.error) + '\n';
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) {
    throw FormatError("sweep CSV: header must be '" + std::string(kSweepHeader) + "'");
  }
  std::vector<SweepRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 9) {
      throw FormatError("sweep CSV line " + std::to_string(n) + ": expected 9 fields, got " +
                        std::to_string(cells.size()));
    }
    SweepRow r;
    const auto mode = parse_mode(cells[0]);
    if (!mode) throw FormatError("sweep CSV line " + std::to_string(n) + ": unknown mode '" + cells[0] + "'");
    r.mode = *mode;
    r.l = parse_int<int>(cells[1], n);
    r.S = parse_int<int>(cells[2], n);
    r.epsilon = parse_real(cells[3], n);
    r.seed = parse_int<std::uint64_t>(cells[4], n);
    if (!cells[5].empty()) r.accuracy = parse_real(cells[5], n);
    if (!cells[6].empty()) r.baseline = parse_real(cells[6], n);
    if (!cells[7].empty()) r.utility_ratio = parse_real(cells[7], n);
    r.error = cells[8];
    rows.push_back(std::move(r));
  }
  return rows;
}

SweepOutcome run_sweep(const Dataset& train, const Dataset& test, const SweepGrid& grid,
                       const SweepSettings& settings, const std::optional<std::filesystem::path>& out) {
  if (grid.size() == 0) throw ConfigError("sweep grid is empty");

  std::vector<SweepRow> existing;
  if (out && std::filesystem::exists(*out)) {
    const auto bytes = io::read_file_bytes(*out);
    existing = parse_sweep_csv(std::string(bytes.begin(), bytes.end()));
  }
  std::map<Key, std::size_t> done;
  for (std::size_t i = 0; i < existing.size(); ++i) done.emplace(key_of(existing[i]), i);

  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (Mode m : grid.modes)
    for (int l : grid.ls)
      for (int S : grid.Ss)
        for (double e : grid.epsilons)
          for (std::uint64_t seed : grid.seeds) {
            SweepRow r;
            r.mode = m;
            r.l = l;
            r.S = S;
            r.epsilon = e;
            r.seed = seed;
            rows.push_back(r);
          }

  std::vector<std::size_t> todo;
  std::set<Key> in_grid;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Key k = key_of(rows[i]);
    in_grid.insert(k);
    if (auto it = done.find(k); it != done.end()) {
      rows[i] = existing[it->second];
    } else {
      todo.push_back(i);
    }
  }

  SweepOutcome outcome;
  if (!todo.empty()) {
    const EvalData data = prepare_eval_data(train, test, settings.c);
    std::map<std::uint64_t, double> baselines;
    for (std::size_t i : todo) baselines.emplace(rows[i].seed, 0.0);
    std::vector<std::uint64_t> seeds;
    for (const auto& [s, v] : baselines) seeds.push_back(s);
    std::vector<double> base(seeds.size());
    parallel_for_dynamic(static_cast<std::int64_t>(seeds.size()), [&](std::int64_t i) {
      TrainOptions o = settings.train;
      o.seed = seeds[static_cast<std::size_t>(i)];
      base[static_cast<std::size_t>(i)] = baseline_accuracy(data, o);
    });
    for (std::size_t i = 0; i < seeds.size(); ++i) baselines[seeds[i]] = base[i];

    parallel_for_dynamic(static_cast<std::int64_t>(todo.size()), [&](std::int64_t j) {
      SweepRow& r = rows[todo[static_cast<std::size_t>(j)]];
      r.baseline = baselines.at(r.seed);
      try {
        RunConfig cfg;
        cfg.mode = r.mode;
        cfg.privacy.epsilon_target = r.epsilon;
        cfg.privacy.delta = settings.delta;
        cfg.privacy.l = r.l;
        cfg.privacy.c = settings.c;
        cfg.privacy.T = settings.T;
        cfg.privacy.S = r.S;
        cfg.privacy.alpha_max = settings.alpha_max;
        cfg.with_replacement = settings.with_replacement;
        cfg.master_seed = r.seed;
        const PipelineResult res = run_pipeline(train, cfg);
        TrainOptions o = settings.train;
        o.seed = r.seed;
        r.accuracy = evaluate_accuracy(train_softmax(res.data, o), data.test);
        if (*r.baseline > 0) r.utility_ratio = utility_ratio(*r.accuracy, *r.baseline);
      } catch (const std::exception& e) {
        r.error = sanitize(e.what());
      }
    });
    outcome.computed = todo.size();
  }

  for (const auto& r : existing) {
    if (!in_grid.count(key_of(r))) rows.push_back(r);
  }
  if (out && (outcome.computed > 0 || !std::filesystem::exists(*out))) {
    io::write_file_atomic(*out, format_sweep_csv(rows));
  }
  outcome.rows = std::move(rows);
  return outcome;
}

}  // namespace fedsynth
