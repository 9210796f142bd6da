#include "kipsim/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "kipsim/hash.hpp"

namespace kipsim {

void StreamSpec::validate() const {
  if (total_records < 1)
    throw std::invalid_argument("total_records must be >= 1");
  if (distinct_keys < 1)
    throw std::invalid_argument("distinct_keys must be >= 1");
  if (exponent < 0.0) throw std::invalid_argument("exponent must be >= 0");
  if (drift && drift->period_batches < 1)
    throw std::invalid_argument("drift period_batches must be >= 1");
  if (source == StreamSource::File && path.empty())
    throw std::invalid_argument("file source requires a path");
}

static std::string hex_token(std::uint64_t value, int width) {
  static const char* digits = "0123456789abcdef";
  std::string s(width, '0');
  for (int i = width - 1; i >= 0 && value != 0; --i) {
    s[i] = digits[value & 0xf];
    value >>= 4;
  }
  return s;
}

ZipfSource::ZipfSource(const StreamSpec& spec) : spec_(spec), rng_(spec.seed) {
  spec_.validate();
  const std::uint64_t k = spec_.distinct_keys;
  cdf_.resize(k);
  double acc = 0.0;
  for (std::uint64_t r = 0; r < k; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -spec_.exponent);
    cdf_[r] = acc;
  }
  for (double& v : cdf_) v /= acc;
  cdf_.back() = 1.0;

  perm_.resize(k);
  for (std::uint64_t i = 0; i < k; ++i) perm_[i] = i;
  std::mt19937_64 perm_rng(spec_.seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(perm_.begin(), perm_.end(), perm_rng);
}

std::string ZipfSource::token_for_rank(std::uint64_t rank) const {
  const int width = spec_.distinct_keys > 0xffffffffULL ? 16 : 8;
  return hex_token(perm_[rank], width);
}

void ZipfSource::apply_drift() {
  const DriftSpec& d = *spec_.drift;
  ++drift_events_;
  std::mt19937_64 event_rng(spec_.seed ^
                            hash64("drift", drift_events_ * 0x51'7c'c1'b7ULL));
  if (d.mode == DriftMode::Reseed) {
    std::shuffle(perm_.begin(), perm_.end(), event_rng);
    return;
  }
  // permute_top_k: swap each hot rank's token with a random rank so that
  // previously cold tokens become heavy
  const std::uint64_t k = std::min<std::uint64_t>(d.k, spec_.distinct_keys);
  std::uniform_int_distribution<std::uint64_t> pick(0, spec_.distinct_keys - 1);
  for (std::uint64_t i = 0; i < k; ++i)
    std::swap(perm_[i], perm_[pick(event_rng)]);
}

std::size_t ZipfSource::next_batch(std::vector<std::string>& out,
                                   std::size_t n) {
  if (emitted_ >= spec_.total_records) return 0;
  if (spec_.drift && batches_emitted_ > 0 &&
      batches_emitted_ % spec_.drift->period_batches == 0)
    apply_drift();
  ++batches_emitted_;

  const std::size_t count = static_cast<std::size_t>(
      std::min<std::uint64_t>(n, spec_.total_records - emitted_));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = uni(rng_);
    const std::size_t rank =
        std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
    out.push_back(token_for_rank(std::min<std::size_t>(rank, cdf_.size() - 1)));
  }
  emitted_ += count;
  return count;
}

FileSource::FileSource(const std::string& path) : records_(load_stream(path)) {}

std::size_t FileSource::next_batch(std::vector<std::string>& out,
                                   std::size_t n) {
  const std::size_t count = std::min(n, records_.size() - pos_);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(std::move(records_[pos_ + i]));
  pos_ += count;
  return count;
}

std::unique_ptr<RecordSource> open_source(const StreamSpec& spec) {
  spec.validate();
  if (spec.source == StreamSource::File)
    return std::make_unique<FileSource>(spec.path);
  return std::make_unique<ZipfSource>(spec);
}

std::vector<std::string> load_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stream file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw FormatError(path + ": line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  bool weighted;
  if (line == "key")
    weighted = false;
  else if (line == "key,weight")
    weighted = true;
  else
    throw FormatError(path + ": line 1: header must be \"key\" or \"key,weight\"");

  std::vector<std::string> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty())
      throw FormatError(path + ": line " + std::to_string(lineno) +
                        ": empty record");
    if (!weighted) {
      if (line.find(',') != std::string::npos)
        throw FormatError(path + ": line " + std::to_string(lineno) +
                          ": unexpected comma in key");
      out.push_back(line);
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0)
      throw FormatError(path + ": line " + std::to_string(lineno) +
                        ": expected key,weight");
    std::uint64_t w = 0;
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, w);
    if (ec != std::errc() || ptr != last || w == 0)
      throw FormatError(path + ": line " + std::to_string(lineno) +
                        ": bad weight");
    std::string key = line.substr(0, comma);
    for (std::uint64_t i = 0; i < w; ++i) out.push_back(key);
  }
  return out;
}

void save_stream(const std::vector<std::string>& keys,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << "key\n";
  for (const auto& k : keys) out << k << '\n';
  if (!out) throw IoError("failed writing stream file: " + path);
}

}  // namespace kipsim
