#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace sig::theory {

// Verdict of one randomized verification with the values it compared.
struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json details;
};

nlohmann::json to_json(const CheckResult& r);

// H_1 >= H_2 >= H_3 >= H_4 >= mixture cross-entropy on five random
// three-atom instances, by exact enumeration.
CheckResult check_bound_ordering(std::uint64_t seed);

// Closed form vs. numeric optimum on 100 interior instances; vanishing
// threshold vs. constrained optimum (plus KKT) on 20 boundary instances.
CheckResult check_optimal_assignment(std::uint64_t seed);

// Monte-Carlo affinity ratio for c in {1, 2, 3} and the chi-squared MGF at
// dim 2, noncentrality 0, each within 3 standard errors.
CheckResult check_affinity_ratio(std::uint64_t seed, std::size_t samples = 1'000'000);

// which: ordering | assignment | ratio | all. lemma1, theorem1 and corollary1
// are accepted as aliases.
std::vector<CheckResult> run_theory_checks(const std::string& which, std::uint64_t seed);

}  // namespace sig::theory
