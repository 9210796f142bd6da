#include "kipsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kipsim/stream.hpp"

namespace kipsim {

double load_imbalance(const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0, mx = 0;
  for (std::uint64_t c : counts) {
    total += c;
    mx = std::max(mx, c);
  }
  if (total == 0) return 1.0;
  const double mean = static_cast<double>(total) / counts.size();
  return static_cast<double>(mx) / mean;
}

// shortest decimal that round-trips the double, locale-independent
static std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string reports_to_csv(const std::vector<BatchReport>& reports) {
  std::ostringstream out;
  out << "batch,imbalance,migration,repartitioned,version,heavy_keys,"
         "est_maxload";
  const std::size_t n =
      reports.empty() ? 0 : reports.front().per_partition_counts.size();
  for (std::size_t i = 0; i < n; ++i) out << ",n" << i;
  out << '\n';
  for (const auto& r : reports) {
    out << r.batch_index << ',' << fmt_double(r.imbalance) << ','
        << fmt_double(r.migration) << ',' << (r.repartitioned ? 1 : 0) << ','
        << r.partitioner_version << ',' << r.heavy_key_count << ','
        << fmt_double(r.est_maxload);
    for (std::uint64_t c : r.per_partition_counts) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

void write_csv(const std::vector<BatchReport>& reports,
               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open csv output: " + path);
  out << reports_to_csv(reports);
  if (!out) throw IoError("failed writing csv: " + path);
}

RunSummary summarize(const std::vector<BatchReport>& reports,
                     const std::string& config_echo) {
  RunSummary s;
  s.config_echo = config_echo;
  s.batches = reports.size();
  double imb_sum = 0.0, mig_sum = 0.0;
  std::uint64_t tail = 0;
  for (const auto& r : reports) {
    if (r.degenerate) ++s.degenerate_batches;
    if (r.batch_index == 0) {
      s.warmup_imbalance = r.imbalance;
      s.warmup_migration = r.migration;
      continue;
    }
    ++tail;
    imb_sum += r.imbalance;
    mig_sum += r.migration;
    s.max_imbalance = std::max(s.max_imbalance, r.imbalance);
  }
  if (tail > 0) {
    s.mean_imbalance = imb_sum / tail;
    s.mean_migration = mig_sum / tail;
  }
  return s;
}

std::string summary_to_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["batches"] = s.batches;
  j["mean_imbalance"] = s.mean_imbalance;
  j["max_imbalance"] = s.max_imbalance;
  j["mean_migration"] = s.mean_migration;
  j["warmup_imbalance"] = s.warmup_imbalance;
  j["warmup_migration"] = s.warmup_migration;
  j["degenerate_batches"] = s.degenerate_batches;
  j["sketch_substitution"] = s.sketch_substitution;
  if (!s.config_echo.empty())
    j["config"] = nlohmann::ordered_json::parse(s.config_echo);
  return j.dump(2);
}

void write_summary(const RunSummary& summary, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open summary output: " + path);
  out << summary_to_json(summary) << '\n';
  if (!out) throw IoError("failed writing summary: " + path);
}

}  // namespace kipsim
