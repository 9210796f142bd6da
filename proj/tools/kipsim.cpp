#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kipsim/metrics.hpp"
#include "kipsim/sim.hpp"
#include "kipsim/stream.hpp"

namespace fs = std::filesystem;
using namespace kipsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonFlags {
  std::vector<std::string> overrides;
  bool no_history = false;
  bool dump_histograms = false;
  bool replay_model = false;
  bool single_thread = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--set", flags.overrides,
                  "config override as dotted.path=value (repeatable)");
  cmd->add_flag("--no-history", flags.no_history,
                "use only the fresh histogram, no history blending");
  cmd->add_flag("--dump-histograms", flags.dump_histograms,
                "write per-batch local and merged histograms as JSONL");
  cmd->add_flag("--replay-model", flags.replay_model,
                "gate cost models in-batch replay instead of state migration");
  cmd->add_flag("--single-thread", flags.single_thread,
                "process all workers on one thread (reference mode)");
}

SimConfig resolve_config(const std::string& config_path,
                         const CommonFlags& flags) {
  std::string text = read_file(config_path);
  text = apply_overrides(text, flags.overrides);
  SimConfig cfg = sim_config_from_json(text);
  if (flags.no_history) cfg.use_history = false;
  if (flags.replay_model) cfg.replay_model = true;
  if (flags.single_thread) cfg.single_thread = true;
  return cfg;
}

void dump_histograms(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open histogram dump: " + path);
  for (std::size_t batch = 0; batch < trace.blended.size(); ++batch) {
    nlohmann::ordered_json j;
    j["batch"] = batch;
    auto merged = nlohmann::ordered_json::array();
    for (const auto& e : trace.blended[batch].entries)
      merged.push_back({{"key", e.key}, {"freq", e.freq}});
    j["blended"] = std::move(merged);
    auto locals = nlohmann::ordered_json::array();
    for (const auto& l : trace.locals[batch]) {
      nlohmann::ordered_json jl;
      jl["worker_id"] = l.worker_id;
      jl["observed"] = l.observed;
      auto entries = nlohmann::ordered_json::array();
      for (const auto& [k, c] : l.entries)
        entries.push_back({{"key", k}, {"count", c}});
      jl["entries"] = std::move(entries);
      locals.push_back(std::move(jl));
    }
    j["locals"] = std::move(locals);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing histogram dump: " + path);
}

RunSummary run_one(const SimConfig& cfg, const fs::path& out_dir,
                   bool dump_hists) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());

  SimTrace trace;
  trace.capture_locals = dump_hists;
  std::vector<BatchReport> reports =
      run_simulation(cfg, dump_hists ? &trace : nullptr);
  write_csv(reports, (out_dir / "metrics.csv").string());
  RunSummary summary = summarize(reports, sim_config_to_json(cfg));
  write_summary(summary, (out_dir / "summary.json").string());
  if (dump_hists) dump_histograms(trace, (out_dir / "histograms.jsonl").string());
  return summary;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const CommonFlags& flags) {
  SimConfig cfg = resolve_config(config_path, flags);
  run_one(cfg, out_dir, flags.dump_histograms);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values, const std::string& out_dir,
              unsigned repeats, const CommonFlags& flags) {
  if (values.empty()) throw std::invalid_argument("sweep values must be non-empty");
  if (axis != "partitions" && axis != "lambda" && axis != "exponent")
    throw std::invalid_argument("unknown sweep axis: " + axis);

  const SimConfig base = resolve_config(config_path, flags);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);
  std::ofstream sweep_csv(fs::path(out_dir) / "sweep.csv", std::ios::binary);
  if (!sweep_csv) throw IoError("cannot open sweep.csv in " + out_dir);
  sweep_csv << "value,mean_imbalance,mean_migration\n";

  for (double value : values) {
    SimConfig cfg = base;
    std::string label;
    if (axis == "partitions") {
      auto n = static_cast<std::uint32_t>(value);
      if (n < 1 || value != n)
        throw std::invalid_argument("partitions values must be positive integers");
      // keep the host/partition ratio of the base config
      const std::uint64_t ratio =
          base.partitioner_cfg.num_hosts / base.partitioner_cfg.num_partitions;
      cfg.partitioner_cfg.num_partitions = n;
      cfg.partitioner_cfg.num_hosts = static_cast<std::uint32_t>(ratio * n);
      label = "partitions_" + std::to_string(n);
    } else if (axis == "lambda") {
      auto l = static_cast<std::uint32_t>(value);
      if (l < 1 || value != l)
        throw std::invalid_argument("lambda values must be positive integers");
      cfg.partitioner_cfg.lambda = l;
      label = "lambda_" + std::to_string(l);
    } else {
      cfg.stream.exponent = value;
      std::ostringstream ss;
      ss << "exponent_" << value;
      label = ss.str();
    }

    double imb_sum = 0.0, mig_sum = 0.0;
    for (unsigned r = 0; r < repeats; ++r) {
      SimConfig rep = cfg;
      rep.stream.seed = cfg.stream.seed + r;
      rep.partitioner_cfg.hash_seed = cfg.partitioner_cfg.hash_seed + r;
      const fs::path sub =
          fs::path(out_dir) / label / ("rep" + std::to_string(r));
      RunSummary s = run_one(rep, sub, flags.dump_histograms);
      imb_sum += s.mean_imbalance;
      mig_sum += s.mean_migration;
    }
    sweep_csv << value << ',' << imb_sum / repeats << ',' << mig_sum / repeats
              << '\n';
    sweep_csv.flush();
  }
  if (!sweep_csv) throw IoError("failed writing sweep.csv");
  return kExitOk;
}

int cmd_generate(std::uint64_t records, std::uint64_t keys, double exponent,
                 std::uint64_t seed, std::uint32_t batch_size,
                 const std::string& out_path) {
  StreamSpec spec;
  spec.source = StreamSource::Zipf;
  spec.total_records = records;
  spec.distinct_keys = keys;
  spec.exponent = exponent;
  spec.seed = seed;
  spec.validate();

  ZipfSource src(spec);
  std::vector<std::string> all;
  all.reserve(records);
  while (src.next_batch(all, batch_size) > 0) {
  }
  save_stream(all, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KIP stream-partitioning simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, gen_out;
  std::vector<double> values;
  unsigned repeats = 10;
  CommonFlags flags;
  std::uint64_t gen_records = 100000, gen_keys = 100000, gen_seed = 0;
  double gen_exponent = 1.0;
  std::uint32_t gen_batch = 100000;

  CLI::App* sim = app.add_subcommand("simulate", "run one simulation");
  sim->add_option("-c,--config", config_path, "config JSON path")->required();
  sim->add_option("-o,--out", out_dir, "output directory")->required();
  add_common_flags(sim, flags);

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("-c,--config", config_path, "config JSON path")->required();
  sweep->add_option("--axis", axis, "partitions | lambda | exponent")->required();
  sweep->add_option("--values", values, "axis values")->required()->delimiter(',');
  sweep->add_option("-o,--out", out_dir, "output directory")->required();
  sweep->add_option("--repeats", repeats, "independent repeats per value");
  add_common_flags(sweep, flags);

  CLI::App* gen = app.add_subcommand("generate", "write a Zipf stream file");
  gen->add_option("--records", gen_records, "number of records");
  gen->add_option("--keys", gen_keys, "number of distinct keys");
  gen->add_option("--exponent", gen_exponent, "Zipf exponent");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--batch-size", gen_batch, "generation batch size");
  gen->add_option("-O,--output", gen_out, "output stream path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, flags);
    if (sweep->parsed())
      return cmd_sweep(config_path, axis, values, out_dir, repeats, flags);
    return cmd_generate(gen_records, gen_keys, gen_exponent, gen_seed,
                        gen_batch, gen_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
