#include "kipsim/sim.hpp"

#include <algorithm>
#include <iostream>
#include <set>
#include <thread>

#include <json.hpp>

namespace kipsim {

using nlohmann::json;
using nlohmann::ordered_json;

bool gate_decide(const GateSpec& gate, double est_old_imbalance,
                 double est_new_imbalance, double cost) {
  switch (gate.mode) {
    case GateMode::Always: return true;
    case GateMode::Never: return false;
    case GateMode::CostBenefit:
      return (est_old_imbalance - est_new_imbalance) >
             gate.benefit_margin + cost;
  }
  return false;
}

void SimConfig::validate() const {
  stream.validate();
  partitioner_cfg.validate();
  if (num_workers < 1) throw std::invalid_argument("num_workers must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (state_window_batches < 1)
    throw std::invalid_argument("state_window_batches must be >= 1");
  if (repartition_gate.benefit_margin < 0.0)
    throw std::invalid_argument("benefit_margin must be >= 0");
  if (sketch.capacity_factor < 1)
    throw std::invalid_argument("sketch capacity_factor must be >= 1");
  if (sketch.decay_alpha <= 0.0 || sketch.decay_alpha > 1.0)
    throw std::invalid_argument("sketch decay_alpha must be in (0, 1]");
  if (sketch.sample_every < 1)
    throw std::invalid_argument("sketch sample_every must be >= 1");
  if (history_window < 1)
    throw std::invalid_argument("history_window must be >= 1");
  if (history_gamma <= 0.0 || history_gamma > 1.0)
    throw std::invalid_argument("history_gamma must be in (0, 1]");
}

void SlidingState::push(
    std::unordered_map<std::string, std::uint64_t> batch_counts) {
  ring_.push_back(std::move(batch_counts));
  if (ring_.size() > window_) ring_.pop_front();
}

StateSizeMap SlidingState::aggregate() const {
  StateSizeMap out;
  for (const auto& batch : ring_)
    for (const auto& [k, c] : batch) out[k] += c;
  return out;
}

std::uint64_t SlidingState::total() const {
  std::uint64_t t = 0;
  for (const auto& batch : ring_)
    for (const auto& [k, c] : batch) t += c;
  return t;
}

namespace {

struct WorkerResult {
  std::vector<std::uint64_t> tally;
  std::unordered_map<std::string, std::uint64_t> key_counts;
};

void process_worker(const std::vector<std::string>& records, std::uint32_t w,
                    std::uint32_t num_workers,
                    const KeyIsolatorPartitioner& part, FrequencySketch& sketch,
                    std::uint32_t sample_every, WorkerResult& out) {
  out.tally.assign(part.num_partitions(), 0);
  std::uint64_t local_idx = 0;
  for (std::size_t i = w; i < records.size(); i += num_workers) {
    const std::string& key = records[i];
    ++out.tally[part.route(key)];
    ++out.key_counts[key];
    if (local_idx % sample_every == 0) sketch.offer(key);
    ++local_idx;
  }
}

}  // namespace

std::vector<BatchReport> run_simulation(const SimConfig& cfg, SimTrace* trace) {
  cfg.validate();
  if (cfg.partitioner_cfg.num_hosts <
      10ULL * cfg.partitioner_cfg.num_partitions)
    std::cerr << "warning: num_hosts < 10 * num_partitions; host-level "
                 "rebalancing will be coarse\n";

  const PartitionerConfig& pcfg = cfg.partitioner_cfg;
  const std::uint32_t n = pcfg.num_partitions;
  const std::size_t b = pcfg.histogram_size();

  KeyIsolatorPartitioner current = KeyIsolatorPartitioner::fresh(pcfg);
  std::vector<FrequencySketch> sketches;
  sketches.reserve(cfg.num_workers);
  for (std::uint32_t w = 0; w < cfg.num_workers; ++w)
    sketches.emplace_back(cfg.sketch.variant,
                          static_cast<std::size_t>(cfg.sketch.capacity_factor) * b);

  HistogramHistory history(cfg.history_window, cfg.history_gamma);
  SlidingState sliding(cfg.state_window_batches);
  auto source = open_source(cfg.stream);

  std::vector<BatchReport> reports;
  std::vector<std::string> records;
  std::vector<WorkerResult> results(cfg.num_workers);

  for (std::uint64_t batch = 0;; ++batch) {
    records.clear();
    if (source->next_batch(records, cfg.batch_size) == 0) break;

    // (1)+(2): route, tally and sample; workers own disjoint index strides
    if (cfg.single_thread || cfg.num_workers == 1) {
      for (std::uint32_t w = 0; w < cfg.num_workers; ++w)
        process_worker(records, w, cfg.num_workers, current, sketches[w],
                       cfg.sketch.sample_every, results[w]);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(cfg.num_workers);
      for (std::uint32_t w = 0; w < cfg.num_workers; ++w)
        threads.emplace_back(process_worker, std::cref(records), w,
                             cfg.num_workers, std::cref(current),
                             std::ref(sketches[w]), cfg.sketch.sample_every,
                             std::ref(results[w]));
      for (auto& t : threads) t.join();
    }

    BatchReport report;
    report.batch_index = batch;
    report.per_partition_counts.assign(n, 0);
    std::unordered_map<std::string, std::uint64_t> batch_counts;
    for (auto& res : results) {
      for (std::uint32_t p = 0; p < n; ++p)
        report.per_partition_counts[p] += res.tally[p];
      for (auto& [k, c] : res.key_counts) batch_counts[k] += c;
      res.key_counts.clear();
    }
    report.imbalance = load_imbalance(report.per_partition_counts);
    report.degenerate = records.empty();

    // (3): local tops -> merged global histogram -> optional history blend
    std::vector<LocalHistogram> locals;
    locals.reserve(cfg.num_workers);
    double observed = 0.0;
    for (std::uint32_t w = 0; w < cfg.num_workers; ++w) {
      locals.push_back(sketches[w].local_top(b));
      locals.back().worker_id = static_cast<int>(w);
      observed += locals.back().observed;
    }

    if (observed > 0.0) {
      Histogram fresh = merge(locals, b);
      Histogram blended = cfg.use_history ? history.blend(fresh) : fresh;

      // (4): candidate + gate
      if (cfg.repartition_gate.mode != GateMode::Never) {
        KeyIsolatorPartitioner candidate = kip_update(current, blended, pcfg);
        const double est_old =
            estimated_loads(current, blended, pcfg).max() * n;
        const double est_new =
            estimated_loads(candidate, blended, pcfg).max() * n;
        const double migration =
            migration_fraction(current, candidate, sliding.aggregate());
        const double cost = cfg.replay_model ? 1.0 : migration;
        if (gate_decide(cfg.repartition_gate, est_old, est_new, cost)) {
          current = std::move(candidate);
          report.repartitioned = true;
          report.migration = migration;
        }
      }
      report.heavy_key_count = blended.entries.size();
      report.est_maxload = estimated_loads(current, blended, pcfg).max();

      if (trace) {
        std::vector<std::string> keys;
        keys.reserve(fresh.entries.size());
        for (const auto& e : fresh.entries) keys.push_back(e.key);
        std::sort(keys.begin(), keys.end());
        trace->fresh_top_keys.push_back(std::move(keys));
        trace->blended.push_back(blended);
        if (trace->capture_locals) trace->locals.push_back(locals);
        trace->explicit_route_counts.push_back(current.explicit_routes.size());
      }
    }
    report.partitioner_version = current.version;

    // (5): roll the state window, then age the sketches
    sliding.push(std::move(batch_counts));
    if (cfg.sketch.variant == SketchVariant::DecayedCounters &&
        cfg.sketch.decay_alpha < 1.0)
      for (auto& s : sketches) s.decay(cfg.sketch.decay_alpha);

    reports.push_back(std::move(report));
  }
  return reports;
}

// ---------- config JSON ----------

namespace {

void reject_unknown(const json& j, const std::string& scope,
                    std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("unknown config field: " + scope + it.key());
  }
}

GateMode gate_mode_from_string(const std::string& s) {
  if (s == "always") return GateMode::Always;
  if (s == "never") return GateMode::Never;
  if (s == "cost_benefit") return GateMode::CostBenefit;
  throw std::invalid_argument("unknown gate mode: " + s);
}

std::string to_string(GateMode m) {
  switch (m) {
    case GateMode::Always: return "always";
    case GateMode::Never: return "never";
    case GateMode::CostBenefit: return "cost_benefit";
  }
  return "?";
}

DriftMode drift_mode_from_string(const std::string& s) {
  if (s == "permute_top_k") return DriftMode::PermuteTopK;
  if (s == "reseed") return DriftMode::Reseed;
  throw std::invalid_argument("unknown drift mode: " + s);
}

}  // namespace

SimConfig sim_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }

  SimConfig cfg;
  reject_unknown(j, "",
                 {"stream", "partitioner_cfg", "num_workers", "batch_size",
                  "state_window_batches", "repartition_gate", "sketch",
                  "use_history", "history_window", "history_gamma",
                  "single_thread", "replay_model"});

  if (j.contains("stream")) {
    const json& js = j.at("stream");
    reject_unknown(js, "stream.",
                   {"source", "total_records", "distinct_keys", "exponent",
                    "seed", "path", "drift"});
    if (js.contains("source")) {
      const std::string s = js.at("source").get<std::string>();
      if (s == "zipf")
        cfg.stream.source = StreamSource::Zipf;
      else if (s == "file")
        cfg.stream.source = StreamSource::File;
      else
        throw std::invalid_argument("unknown stream source: " + s);
    }
    if (js.contains("total_records"))
      cfg.stream.total_records = js.at("total_records").get<std::uint64_t>();
    if (js.contains("distinct_keys"))
      cfg.stream.distinct_keys = js.at("distinct_keys").get<std::uint64_t>();
    if (js.contains("exponent"))
      cfg.stream.exponent = js.at("exponent").get<double>();
    if (js.contains("seed")) cfg.stream.seed = js.at("seed").get<std::uint64_t>();
    if (js.contains("path")) cfg.stream.path = js.at("path").get<std::string>();
    if (js.contains("drift") && !js.at("drift").is_null()) {
      const json& jd = js.at("drift");
      reject_unknown(jd, "stream.drift.", {"period_batches", "mode", "k"});
      DriftSpec d;
      if (jd.contains("period_batches"))
        d.period_batches = jd.at("period_batches").get<std::uint32_t>();
      if (jd.contains("mode"))
        d.mode = drift_mode_from_string(jd.at("mode").get<std::string>());
      if (jd.contains("k")) d.k = jd.at("k").get<std::uint32_t>();
      cfg.stream.drift = d;
    }
  }

  bool hosts_given = false;
  if (j.contains("partitioner_cfg")) {
    const json& jp = j.at("partitioner_cfg");
    reject_unknown(jp, "partitioner_cfg.",
                   {"num_partitions", "num_hosts", "lambda", "epsilon",
                    "hash_seed"});
    if (jp.contains("num_partitions"))
      cfg.partitioner_cfg.num_partitions =
          jp.at("num_partitions").get<std::uint32_t>();
    if (jp.contains("num_hosts")) {
      cfg.partitioner_cfg.num_hosts = jp.at("num_hosts").get<std::uint32_t>();
      hosts_given = true;
    }
    if (jp.contains("lambda"))
      cfg.partitioner_cfg.lambda = jp.at("lambda").get<std::uint32_t>();
    if (jp.contains("epsilon"))
      cfg.partitioner_cfg.epsilon = jp.at("epsilon").get<double>();
    if (jp.contains("hash_seed"))
      cfg.partitioner_cfg.hash_seed = jp.at("hash_seed").get<std::uint64_t>();
  }
  if (!hosts_given)
    cfg.partitioner_cfg.num_hosts = 100 * cfg.partitioner_cfg.num_partitions;

  if (j.contains("num_workers"))
    cfg.num_workers = j.at("num_workers").get<std::uint32_t>();
  if (j.contains("batch_size"))
    cfg.batch_size = j.at("batch_size").get<std::uint32_t>();
  if (j.contains("state_window_batches"))
    cfg.state_window_batches = j.at("state_window_batches").get<std::uint32_t>();

  if (j.contains("repartition_gate")) {
    const json& jg = j.at("repartition_gate");
    reject_unknown(jg, "repartition_gate.", {"mode", "benefit_margin"});
    if (jg.contains("mode"))
      cfg.repartition_gate.mode =
          gate_mode_from_string(jg.at("mode").get<std::string>());
    if (jg.contains("benefit_margin"))
      cfg.repartition_gate.benefit_margin =
          jg.at("benefit_margin").get<double>();
  }

  if (j.contains("sketch")) {
    const json& jk = j.at("sketch");
    reject_unknown(jk, "sketch.",
                   {"variant", "capacity_factor", "decay_alpha", "sample_every"});
    if (jk.contains("variant"))
      cfg.sketch.variant =
          sketch_variant_from_string(jk.at("variant").get<std::string>());
    if (jk.contains("capacity_factor"))
      cfg.sketch.capacity_factor = jk.at("capacity_factor").get<std::uint32_t>();
    if (jk.contains("decay_alpha"))
      cfg.sketch.decay_alpha = jk.at("decay_alpha").get<double>();
    if (jk.contains("sample_every"))
      cfg.sketch.sample_every = jk.at("sample_every").get<std::uint32_t>();
  }

  if (j.contains("use_history")) cfg.use_history = j.at("use_history").get<bool>();
  if (j.contains("history_window"))
    cfg.history_window = j.at("history_window").get<std::uint32_t>();
  if (j.contains("history_gamma"))
    cfg.history_gamma = j.at("history_gamma").get<double>();
  if (j.contains("single_thread"))
    cfg.single_thread = j.at("single_thread").get<bool>();
  if (j.contains("replay_model"))
    cfg.replay_model = j.at("replay_model").get<bool>();

  cfg.validate();
  return cfg;
}

std::string sim_config_to_json(const SimConfig& cfg) {
  ordered_json j;
  ordered_json js;
  js["source"] = cfg.stream.source == StreamSource::Zipf ? "zipf" : "file";
  js["total_records"] = cfg.stream.total_records;
  js["distinct_keys"] = cfg.stream.distinct_keys;
  js["exponent"] = cfg.stream.exponent;
  js["seed"] = cfg.stream.seed;
  if (!cfg.stream.path.empty()) js["path"] = cfg.stream.path;
  if (cfg.stream.drift) {
    ordered_json jd;
    jd["period_batches"] = cfg.stream.drift->period_batches;
    jd["mode"] = cfg.stream.drift->mode == DriftMode::PermuteTopK
                     ? "permute_top_k"
                     : "reseed";
    jd["k"] = cfg.stream.drift->k;
    js["drift"] = jd;
  }
  j["stream"] = js;

  ordered_json jp;
  jp["num_partitions"] = cfg.partitioner_cfg.num_partitions;
  jp["num_hosts"] = cfg.partitioner_cfg.num_hosts;
  jp["lambda"] = cfg.partitioner_cfg.lambda;
  jp["epsilon"] = cfg.partitioner_cfg.epsilon;
  jp["hash_seed"] = cfg.partitioner_cfg.hash_seed;
  j["partitioner_cfg"] = jp;

  j["num_workers"] = cfg.num_workers;
  j["batch_size"] = cfg.batch_size;
  j["state_window_batches"] = cfg.state_window_batches;

  ordered_json jg;
  jg["mode"] = to_string(cfg.repartition_gate.mode);
  jg["benefit_margin"] = cfg.repartition_gate.benefit_margin;
  j["repartition_gate"] = jg;

  ordered_json jk;
  jk["variant"] = to_string(cfg.sketch.variant);
  jk["capacity_factor"] = cfg.sketch.capacity_factor;
  jk["decay_alpha"] = cfg.sketch.decay_alpha;
  jk["sample_every"] = cfg.sketch.sample_every;
  j["sketch"] = jk;

  j["use_history"] = cfg.use_history;
  j["history_window"] = cfg.history_window;
  j["history_gamma"] = cfg.history_gamma;
  j["single_thread"] = cfg.single_thread;
  j["replay_model"] = cfg.replay_model;
  return j.dump(2);
}

std::string apply_overrides(const std::string& config_json,
                            const std::vector<std::string>& overrides) {
  static const std::set<std::string> valid_paths = {
      "stream.source", "stream.total_records", "stream.distinct_keys",
      "stream.exponent", "stream.seed", "stream.path",
      "stream.drift.period_batches", "stream.drift.mode", "stream.drift.k",
      "partitioner_cfg.num_partitions", "partitioner_cfg.num_hosts",
      "partitioner_cfg.lambda", "partitioner_cfg.epsilon",
      "partitioner_cfg.hash_seed", "num_workers", "batch_size",
      "state_window_batches", "repartition_gate.mode",
      "repartition_gate.benefit_margin", "sketch.variant",
      "sketch.capacity_factor", "sketch.decay_alpha", "sketch.sample_every",
      "use_history", "history_window", "history_gamma", "single_thread",
      "replay_model"};

  json j = json::parse(config_json);
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must be path=value: " + ov);
    const std::string path = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    if (!valid_paths.count(path))
      throw std::invalid_argument("unknown config path: " + path);

    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;  // bare strings like zipf
    }

    json* node = &j;
    std::size_t start = 0;
    for (;;) {
      const std::size_t dot = path.find('.', start);
      if (dot == std::string::npos) {
        (*node)[path.substr(start)] = value;
        break;
      }
      node = &(*node)[path.substr(start, dot - start)];
      start = dot + 1;
    }
  }
  return j.dump();
}

}  // namespace kipsim
