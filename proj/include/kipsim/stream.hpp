#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace kipsim {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DriftMode { PermuteTopK, Reseed };

struct DriftSpec {
  std::uint32_t period_batches = 5;
  DriftMode mode = DriftMode::PermuteTopK;
  std::uint32_t k = 100;
};

enum class StreamSource { Zipf, File };

struct StreamSpec {
  StreamSource source = StreamSource::Zipf;
  std::uint64_t total_records = 0;
  std::uint64_t distinct_keys = 1;
  double exponent = 1.0;
  std::uint64_t seed = 0;
  std::optional<DriftSpec> drift;
  std::string path;  // for source == File

  void validate() const;
};

// Pull-based record source consumed batch by batch.
class RecordSource {
 public:
  virtual ~RecordSource() = default;
  // Appends up to `n` keys to `out`; returns the number appended
  // (0 at end of stream).
  virtual std::size_t next_batch(std::vector<std::string>& out,
                                 std::size_t n) = 0;
};

// Draws keys i.i.d. with P(rank r) proportional to r^(-exponent) over
// distinct_keys ranks. Ranks map to fixed-length hex tokens through a seeded
// pseudorandom bijection. Drift, when configured, re-permutes the top-k
// rank-to-token mapping every period_batches batches.
class ZipfSource : public RecordSource {
 public:
  explicit ZipfSource(const StreamSpec& spec);

  std::size_t next_batch(std::vector<std::string>& out, std::size_t n) override;

  std::string token_for_rank(std::uint64_t rank) const;

 private:
  void apply_drift();

  StreamSpec spec_;
  std::vector<double> cdf_;
  std::vector<std::uint64_t> perm_;  // rank -> token value, a bijection
  std::mt19937_64 rng_;
  std::uint64_t emitted_ = 0;
  std::uint64_t batches_emitted_ = 0;
  std::uint64_t drift_events_ = 0;
};

class FileSource : public RecordSource {
 public:
  explicit FileSource(const std::string& path);
  std::size_t next_batch(std::vector<std::string>& out, std::size_t n) override;

 private:
  std::vector<std::string> records_;
  std::size_t pos_ = 0;
};

std::unique_ptr<RecordSource> open_source(const StreamSpec& spec);

// Reads the whole stream file: UTF-8 text, header "key" or "key,weight",
// one record per line (a weight of w repeats the key w times).
std::vector<std::string> load_stream(const std::string& path);

// Writes keys in the one-column text format.
void save_stream(const std::vector<std::string>& keys, const std::string& path);

}  // namespace kipsim
