#ifndef GLMSTAB_REPORT_HPP
#define GLMSTAB_REPORT_HPP

#include "json.hpp"

#include "glmstab/experiments.hpp"
#include "glmstab/stability.hpp"
#include "glmstab/synth.hpp"

namespace glmstab {

using Json = nlohmann::ordered_json;

// JSON views of the result types. Field names match the C++ members.
// Non-finite numbers serialize as null.
Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const Domain& domain);
Json to_json(const LossFamily& family);
Json to_json(const DistributionSpec& spec);
Json to_json(const CovarianceSummary& cov);
Json to_json(const SolveResult& result);
Json to_json(const StabilityReport& report, bool include_loo_predictors = false);
Json to_json(const InvarianceReport& report);
Json to_json(const TrialRecord& record);
Json to_json(const McReport& report, bool include_trials = true);
Json to_json(const SgdReport& report, bool include_trials = true);

}  // namespace glmstab

#endif  // GLMSTAB_REPORT_HPP
