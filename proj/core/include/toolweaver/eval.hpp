#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/prompts.hpp"
#include "toolweaver/tool_spec.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace toolweaver {

enum class Scenario { single, multi, error };

inline constexpr std::array<Scenario, 3> kAllScenarios{Scenario::single, Scenario::multi,
                                                       Scenario::error};

std::string_view to_string(Scenario scenario);
std::optional<Scenario> parse_scenario(std::string_view text);

enum class Criterion { format, logic, sem, comp, cons, det, help };

std::string_view to_string(Criterion criterion);
/// Column label as printed in reports: Format, Logic, Sem, Comp, Cons, Det, Help.
std::string_view criterion_label(Criterion criterion);

/// Criteria scored for a scenario, in report column order.
const std::vector<Criterion>& criteria_for(Scenario scenario);

struct CriterionScores {
    Scenario scenario = Scenario::single;
    std::map<Criterion, bool> passed;
    bool evaluated = true; ///< false when a judge call failed; excluded from denominators
    std::string note;

    /// Passes every criterion of its scenario.
    bool all() const;
};

struct ScoreOptions {
    /// Skip judges once a deterministic criterion fails; the skipped criteria count as failed.
    bool fail_fast = true;
};

/// Scores one sample-sink or transcript record. Format and Comp are computed locally; the
/// remaining criteria are judge calls. Judge BackendErrors yield evaluated=false.
CriterionScores score_record(Scenario scenario, const Json& record, const ToolSpec& tool,
                             Backend& judge, const ScoreOptions& options = {},
                             const PromptTemplates& prompts = PromptTemplates::defaults());

struct ScenarioMetrics {
    std::size_t evaluated = 0;
    std::size_t unevaluated = 0;
    std::map<Criterion, double> rates; ///< percent
    double all = 0.0;                  ///< percent
};

struct MetricReport {
    std::map<Scenario, ScenarioMetrics> scenarios; ///< only scenarios with any record
    std::optional<double> avg; ///< mean of the three All values when all three are present

    bool empty() const noexcept { return scenarios.empty(); }
};

/// rate = 100 × passing / evaluated, All = 100 × all-passing / evaluated.
MetricReport aggregate(const std::vector<CriterionScores>& scores);

/// Arithmetic mean of per-scenario All values.
double average_of_all(double single_all, double multi_all, double error_all);

/// Half-up rounding to one decimal, stable for values like 0.05 that binary cannot represent.
double round_half_up_1dp(double value);

enum class ReportFormat { table, csv };

/// Column layout: Format,Logic,Sem,Comp,All | Format,Logic,Sem,Comp,Cons,All | Det,Help,All | Avg.
/// Rounding happens here only. Empty reports render the header alone.
std::string render_report(const MetricReport& report, ReportFormat format);

} // namespace toolweaver
