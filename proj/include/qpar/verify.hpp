#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qpar {

// One checked case: the theorem's target value, what we measured, and the
// verdict. `key` doubles as the canonical sort key and the human label.
struct VerifyCase {
  std::string key;
  nlohmann::ordered_json params;
  double bound = 0.0;
  double measured = 0.0;
  bool pass = false;
  std::string note;  // direction of the comparison, flags, extras
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<VerifyCase> cases;

  bool all_pass() const;
  int failures() const;
  // One JSON object per case plus a trailing summary object. Identical
  // invocations produce identical bytes.
  std::string to_jsonl() const;
  std::string summary_table() const;
};

// Optional grid narrowing; a suite ignores fields it has no use for.
struct VerifyOptions {
  std::uint64_t seed = 0;
  int threads = 0;  // <= 0: hardware concurrency
  std::optional<int> max_arity;
  std::optional<int> n;
  std::optional<int> k;
  std::optional<int> p;
  std::optional<int> trials;
};

// Registered suite ids, sorted.
const std::vector<std::string>& verify_suite_ids();

// Runs one suite; cases come back sorted by key. Unknown ids raise
// IndexOutOfRange.
VerifyReport run_verify_suite(const std::string& id, const VerifyOptions& opt = {});

// Merge already-parsed JSON-lines records into one canonically sorted
// report stream (used by `report merge`).
std::string merge_reports(const std::vector<std::string>& jsonl_blobs);

}  // namespace qpar
