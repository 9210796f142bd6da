#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "kipsim/hash.hpp"
#include "kipsim/histogram.hpp"
#include "kipsim/metrics.hpp"
#include "kipsim/partitioner.hpp"
#include "kipsim/sim.hpp"
#include "kipsim/sketch.hpp"
#include "kipsim/stream.hpp"

namespace py = pybind11;
using namespace kipsim;

namespace {

Histogram histogram_from_pairs(
    const std::vector<std::pair<std::string, double>>& pairs,
    std::size_t capacity) {
  Histogram h;
  h.capacity = capacity;
  for (const auto& [key, freq] : pairs) h.entries.push_back({key, freq});
  normalize_order(h);
  return h;
}

std::vector<std::pair<std::string, double>> histogram_to_pairs(
    const Histogram& h) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& e : h.entries) out.emplace_back(e.key, e.freq);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Key-isolating stream partitioner: routing, sketches, simulator";

  py::register_exception<EmptyInput>(m, "EmptyInput", PyExc_ValueError);
  py::register_exception<ConfigMismatch>(m, "ConfigMismatch", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("hash64", &hash64, py::arg("key"), py::arg("seed") = 0);
  m.def("uniform_hash", &uniform_hash, py::arg("key"), py::arg("n_buckets"),
        py::arg("seed") = 0);
  m.def(
      "load_imbalance",
      [](const std::vector<std::uint64_t>& counts) {
        return load_imbalance(counts);
      },
      py::arg("counts"));

  py::class_<PartitionerConfig>(m, "PartitionerConfig")
      .def(py::init([](std::uint32_t num_partitions, std::uint32_t num_hosts,
                       std::uint32_t lambda_, double epsilon,
                       std::uint64_t hash_seed) {
             PartitionerConfig cfg{num_partitions, num_hosts, lambda_, epsilon,
                                   hash_seed};
             cfg.validate();
             return cfg;
           }),
           py::arg("num_partitions"), py::arg("num_hosts"),
           py::arg("lambda_") = 2, py::arg("epsilon") = 0.05,
           py::arg("hash_seed") = 0)
      .def_readonly("num_partitions", &PartitionerConfig::num_partitions)
      .def_readonly("num_hosts", &PartitionerConfig::num_hosts)
      .def_readonly("lambda_", &PartitionerConfig::lambda)
      .def_readonly("epsilon", &PartitionerConfig::epsilon)
      .def_readonly("hash_seed", &PartitionerConfig::hash_seed)
      .def_property_readonly("histogram_size",
                             &PartitionerConfig::histogram_size);

  py::class_<KeyIsolatorPartitioner>(m, "Partitioner")
      .def_static("fresh", &KeyIsolatorPartitioner::fresh, py::arg("config"))
      .def_static(
          "from_json",
          [](const std::string& text) { return partitioner_from_json(text); },
          py::arg("text"))
      .def("to_json",
           [](const KeyIsolatorPartitioner& p) { return partitioner_to_json(p); })
      .def("route",
           [](const KeyIsolatorPartitioner& p, const std::string& key) {
             return p.route(key);
           },
           py::arg("key"))
      .def_readonly("version", &KeyIsolatorPartitioner::version)
      .def_property_readonly("num_partitions",
                             &KeyIsolatorPartitioner::num_partitions)
      .def_property_readonly("explicit_routes",
                             [](const KeyIsolatorPartitioner& p) {
                               return std::map<std::string, std::uint32_t>(
                                   p.explicit_routes.begin(),
                                   p.explicit_routes.end());
                             });

  m.def(
      "kip_update",
      [](const KeyIsolatorPartitioner& prev,
         const std::vector<std::pair<std::string, double>>& histogram,
         const PartitionerConfig& cfg) {
        return kip_update(prev,
                          histogram_from_pairs(histogram, cfg.histogram_size()),
                          cfg);
      },
      py::arg("prev"), py::arg("histogram"), py::arg("config"),
      "Next partitioner from the previous one and a (key, freq) histogram");

  m.def(
      "estimated_loads",
      [](const KeyIsolatorPartitioner& p,
         const std::vector<std::pair<std::string, double>>& histogram,
         const PartitionerConfig& cfg) {
        const LoadVector lv = estimated_loads(
            p, histogram_from_pairs(histogram, cfg.histogram_size()), cfg);
        return py::make_tuple(lv.loads, lv.maxload, lv.hostload);
      },
      py::arg("partitioner"), py::arg("histogram"), py::arg("config"),
      "Per-partition estimated loads plus (maxload, hostload)");

  m.def(
      "migration_fraction",
      [](const KeyIsolatorPartitioner& old_p,
         const KeyIsolatorPartitioner& new_p,
         const std::map<std::string, std::uint64_t>& state) {
        return migration_fraction(old_p, new_p,
                                  StateSizeMap(state.begin(), state.end()));
      },
      py::arg("old"), py::arg("new"), py::arg("state"));

  py::enum_<SketchVariant>(m, "SketchVariant")
      .value("SPACE_SAVING", SketchVariant::SpaceSaving)
      .value("LOSSY_COUNTING", SketchVariant::LossyCounting)
      .value("DECAYED_COUNTERS", SketchVariant::DecayedCounters);

  py::class_<LocalHistogram>(m, "LocalHistogram")
      .def_readonly("worker_id", &LocalHistogram::worker_id)
      .def_readonly("entries", &LocalHistogram::entries)
      .def_readonly("observed", &LocalHistogram::observed);

  py::class_<FrequencySketch>(m, "FrequencySketch")
      .def(py::init<SketchVariant, std::size_t>(), py::arg("variant"),
           py::arg("capacity"))
      .def("offer",
           [](FrequencySketch& s, const std::string& key) { s.offer(key); },
           py::arg("key"))
      .def("decay", &FrequencySketch::decay, py::arg("alpha"))
      .def("local_top", &FrequencySketch::local_top, py::arg("b"))
      .def("estimate",
           [](const FrequencySketch& s, const std::string& key)
               -> std::optional<std::pair<double, double>> {
             double count = 0, error = 0;
             if (!s.estimate(key, count, error)) return std::nullopt;
             return std::make_pair(count, error);
           },
           py::arg("key"), "(count, error) for a tracked key, else None")
      .def_property_readonly("tracked", &FrequencySketch::tracked)
      .def_property_readonly("total_weight", &FrequencySketch::total_weight);

  m.def(
      "merge",
      [](const std::vector<LocalHistogram>& locals, std::size_t b) {
        return histogram_to_pairs(merge(locals, b));
      },
      py::arg("locals"), py::arg("b"),
      "Merge worker histograms into the top-b relative-frequency histogram");

  m.def(
      "run_simulation",
      [](const std::string& config_json,
         const std::vector<std::string>& overrides) {
        const SimConfig cfg =
            sim_config_from_json(apply_overrides(config_json, overrides));
        const auto reports = run_simulation(cfg);
        return py::make_tuple(reports_to_csv(reports),
                              summary_to_json(summarize(
                                  reports, sim_config_to_json(cfg))));
      },
      py::arg("config_json"), py::arg("overrides") = std::vector<std::string>{},
      "Full batch-replay run; returns (metrics_csv, summary_json)");

  m.def(
      "generate_stream",
      [](std::uint64_t records, std::uint64_t keys, double exponent,
         std::uint64_t seed) {
        StreamSpec spec;
        spec.total_records = records;
        spec.distinct_keys = keys;
        spec.exponent = exponent;
        spec.seed = seed;
        spec.validate();
        auto source = open_source(spec);
        std::vector<std::string> out;
        source->next_batch(out, records);
        return out;
      },
      py::arg("records"), py::arg("keys"), py::arg("exponent") = 1.0,
      py::arg("seed") = 0, "Zipf-distributed key stream as a list of tokens");
}
