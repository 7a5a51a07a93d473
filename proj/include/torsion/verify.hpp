#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "torsion/io.hpp"

namespace torsion {

struct VerifyConfig {
  std::uint64_t seed = 0;
  int instances = 200;
  std::string data_dir = TORSION_DATA_DIR;
  double rank_tol = kRankTolerance;
  double gap_tol = kGapTolerance;
  double rel_tol = 0.0;  // 0: each property uses its own threshold
  double cr_tol = 0.0;   // 0: default exponent threshold 1.7
  int threads = 0;       // 0: TORSION_WB_THREADS or hardware concurrency
};

struct PropertyResult {
  std::string name;
  int instances = 0;
  int failures = 0;
  int skipped = 0;
  double max_deviation = 0.0;
  double threshold = 0.0;
  std::string note;

  bool passed() const { return failures == 0 && instances > 0; }
};

struct SuiteResult {
  std::string suite;
  std::vector<PropertyResult> properties;
  double seconds = 0.0;

  bool passed() const;
};

/// Names accepted by run_suite, "all" included.
const std::vector<std::string>& suite_names();

/// Throws ValidationError for an unknown suite name.
std::vector<SuiteResult> run_suite(const std::string& name, const VerifyConfig& config);

Json to_json(const SuiteResult& s);

/// Worker count: config value, else TORSION_WB_THREADS, else hardware.
int worker_count(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers; results keep
/// index order.
template <class T>
std::vector<T> parallel_map(int count, int threads, const std::function<T(int)>& body);

/// Files in data_dir/corpus matching a prefix ("" for all), sorted by name.
std::vector<std::string> corpus_files(const std::string& data_dir, const std::string& subdir,
                                      const std::string& prefix = "");

}  // namespace torsion

#include "torsion/parallel.ipp"
