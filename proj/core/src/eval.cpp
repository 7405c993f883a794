#include "toolweaver/eval.hpp"

#include "toolweaver/carg_multi.hpp"
#include "toolweaver/errors.hpp"
#include "toolweaver/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace toolweaver {

std::string_view to_string(Scenario scenario) {
    switch (scenario) {
    case Scenario::single: return "single";
    case Scenario::multi: return "multi";
    case Scenario::error: return "error";
    }
    return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view text) {
    for (Scenario s : kAllScenarios) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::string_view to_string(Criterion criterion) {
    switch (criterion) {
    case Criterion::format: return "format";
    case Criterion::logic: return "logic";
    case Criterion::sem: return "sem";
    case Criterion::comp: return "comp";
    case Criterion::cons: return "cons";
    case Criterion::det: return "det";
    case Criterion::help: return "help";
    }
    return "unknown";
}

std::string_view criterion_label(Criterion criterion) {
    switch (criterion) {
    case Criterion::format: return "Format";
    case Criterion::logic: return "Logic";
    case Criterion::sem: return "Sem";
    case Criterion::comp: return "Comp";
    case Criterion::cons: return "Cons";
    case Criterion::det: return "Det";
    case Criterion::help: return "Help";
    }
    return "?";
}

const std::vector<Criterion>& criteria_for(Scenario scenario) {
    static const std::vector<Criterion> single{Criterion::format, Criterion::logic, Criterion::sem, Criterion::comp};
    static const std::vector<Criterion> multi{Criterion::format, Criterion::logic, Criterion::sem, Criterion::comp,
                                              Criterion::cons};
    static const std::vector<Criterion> error{Criterion::det, Criterion::help};
    switch (scenario) {
    case Scenario::single: return single;
    case Scenario::multi: return multi;
    case Scenario::error: break;
    }
    return error;
}

bool CriterionScores::all() const {
    for (Criterion c : criteria_for(scenario)) {
        const auto it = passed.find(c);
        if (it == passed.end() || !it->second) return false;
    }
    return true;
}

namespace {

const Json& field_of(const Json& record, std::initializer_list<const char*> names) {
    for (const char* n : names) {
        if (const auto it = record.find(n); it != record.end()) return *it;
    }
    std::string joined;
    for (const char* n : names) joined += std::string(joined.empty() ? "" : "/") + n;
    throw PreconditionError("record lacks '" + joined + "'");
}

// Arguments of a record: either a bare object or a {tool_id, arguments} call record.
Json call_arguments(const Json& value) {
    if (value.is_object() && value.contains("arguments") && value.contains("tool_id")) return value["arguments"];
    return value;
}

std::string history_of(const Json& record) {
    if (record.contains("turns")) return render_history(multi_sample_from_json(record).turns, kMaxTurns);
    if (const auto it = record.find("history"); it != record.end()) {
        return it->is_string() ? it->get<std::string>() : it->dump(2);
    }
    return "(none)";
}

std::string message_of(const Json& record) {
    const Json& m = field_of(record, {"message", "error_message", "response"});
    return m.is_string() ? m.get<std::string>() : m.dump();
}

} // namespace

CriterionScores score_record(Scenario scenario, const Json& record, const ToolSpec& tool, Backend& judge,
                             const ScoreOptions& options, const PromptTemplates& prompts) {
    if (!record.is_object()) throw PreconditionError("record must be an object");
    CriterionScores scores;
    scores.scenario = scenario;
    const std::string spec = to_json(tool).dump(2);

    auto ask = [&](const char* name, const char* tag, PromptVars vars) {
        return ask_judge(judge, prompts.request(name, tag, vars)).passed();
    };

    try {
        if (scenario == Scenario::error) {
            const Json args = call_arguments(field_of(record, {"corrupted_input", "arguments", "input"}));
            const PromptVars vars{{"tool_spec", spec}, {"arguments", args.dump(2)}, {"message", message_of(record)}};
            scores.passed[Criterion::det] = ask("eval_det", tags::eval_det, vars);
            scores.passed[Criterion::help] = ask("eval_help", tags::eval_help, vars);
            return scores;
        }

        const bool multi = scenario == Scenario::multi;
        const Json args = call_arguments(multi ? field_of(record, {"final_call", "arguments", "input"})
                                               : field_of(record, {"input", "arguments"}));
        const ToolOutput output = ToolOutput::from_json(
            multi ? field_of(record, {"final_output", "output", "payload"}) : field_of(record, {"output", "payload"}));

        bool format_ok = true;
        bool comp_ok = true;
        for (const auto& issue : format_issues(tool, {tool.id(), args}, output)) {
            if (issue.kind == FormatIssueKind::missing_response_field) {
                comp_ok = false;
            } else if (issue.kind == FormatIssueKind::output_not_structured) {
                format_ok = false;
                comp_ok = false;
            } else {
                format_ok = false;
            }
        }
        scores.passed[Criterion::format] = format_ok;
        scores.passed[Criterion::comp] = comp_ok;

        std::vector<Criterion> judged{Criterion::logic, Criterion::sem};
        if (multi) judged.push_back(Criterion::cons);
        if (options.fail_fast && !(format_ok && comp_ok)) {
            for (Criterion c : judged) scores.passed[c] = false;
            scores.note = "judges skipped after deterministic failure";
            return scores;
        }
        const PromptVars vars{{"tool_spec", spec}, {"arguments", args.dump(2)}, {"output", output.to_json().dump(2)}};
        scores.passed[Criterion::logic] = ask("eval_logic", tags::eval_logic, vars);
        scores.passed[Criterion::sem] = ask("eval_sem", tags::eval_sem, vars);
        if (multi) {
            scores.passed[Criterion::cons] = ask("eval_cons", tags::eval_cons,
                                                 {{"history", history_of(record)},
                                                  {"final_call", args.dump(2)},
                                                  {"output", output.to_json().dump(2)}});
        }
    } catch (const BackendError& e) {
        scores.evaluated = false;
        scores.note = e.what();
    } catch (const Json::exception& e) {
        throw PreconditionError(std::string("record does not match the scenario shape: ") + e.what());
    }
    return scores;
}

MetricReport aggregate(const std::vector<CriterionScores>& scores) {
    MetricReport report;
    std::map<Scenario, std::map<Criterion, std::size_t>> passing;
    std::map<Scenario, std::size_t> all_passing;
    for (const auto& s : scores) {
        auto& m = report.scenarios[s.scenario];
        if (!s.evaluated) {
            ++m.unevaluated;
            continue;
        }
        ++m.evaluated;
        for (Criterion c : criteria_for(s.scenario)) {
            const auto it = s.passed.find(c);
            if (it != s.passed.end() && it->second) ++passing[s.scenario][c];
        }
        if (s.all()) ++all_passing[s.scenario];
    }
    for (auto& [scenario, m] : report.scenarios) {
        if (m.evaluated == 0) continue;
        const double n = static_cast<double>(m.evaluated);
        for (Criterion c : criteria_for(scenario)) {
            m.rates[c] = 100.0 * static_cast<double>(passing[scenario][c]) / n;
        }
        m.all = 100.0 * static_cast<double>(all_passing[scenario]) / n;
    }
    const bool complete = std::all_of(kAllScenarios.begin(), kAllScenarios.end(), [&](Scenario s) {
        const auto it = report.scenarios.find(s);
        return it != report.scenarios.end() && it->second.evaluated > 0;
    });
    if (complete) {
        report.avg = average_of_all(report.scenarios[Scenario::single].all, report.scenarios[Scenario::multi].all,
                                    report.scenarios[Scenario::error].all);
    }
    return report;
}

double average_of_all(double single_all, double multi_all, double error_all) {
    return (single_all + multi_all + error_all) / 3.0;
}

double round_half_up_1dp(double value) {
    const double scaled = value * 10.0;
    // Absorb representation error so that e.g. 0.05 (stored as 0.04999...) rounds up.
    return std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::abs(scaled))) / 10.0;
}

namespace {

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", round_half_up_1dp(v));
    return buf;
}

// Cells of one scenario block: its criteria then All; blank when nothing was evaluated.
std::vector<std::string> block_cells(const MetricReport& report, Scenario s) {
    std::vector<std::string> cells;
    const auto it = report.scenarios.find(s);
    const bool have = it != report.scenarios.end() && it->second.evaluated > 0;
    for (Criterion c : criteria_for(s)) cells.push_back(have ? fmt1(it->second.rates.at(c)) : "");
    cells.push_back(have ? fmt1(it->second.all) : "");
    return cells;
}

std::vector<std::string> block_labels(Scenario s) {
    std::vector<std::string> labels;
    for (Criterion c : criteria_for(s)) labels.emplace_back(criterion_label(c));
    labels.emplace_back("All");
    return labels;
}

std::string footnote(const MetricReport& report) {
    std::string parts;
    for (const auto& [s, m] : report.scenarios) {
        if (m.unevaluated == 0) continue;
        parts += std::string(parts.empty() ? "" : ", ") + std::string(to_string(s)) + "=" + std::to_string(m.unevaluated);
    }
    return parts.empty() ? "" : "unevaluated records (judge failures, excluded): " + parts;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

} // namespace

std::string render_report(const MetricReport& report, ReportFormat format) {
    std::vector<std::vector<std::string>> labels;
    std::vector<std::vector<std::string>> values;
    for (Scenario s : kAllScenarios) {
        labels.push_back(block_labels(s));
        values.push_back(block_cells(report, s));
    }
    labels.push_back({"Avg"});
    values.push_back({report.avg ? fmt1(*report.avg) : ""});

    std::string out;
    const std::string note = footnote(report);
    if (format == ReportFormat::csv) {
        auto row = [](const std::vector<std::vector<std::string>>& blocks) {
            std::string line;
            for (const auto& b : blocks) {
                for (const auto& c : b) line += (line.empty() ? "" : ",") + c;
            }
            return line + "\n";
        };
        out = row(labels);
        if (report.empty()) return out;
        out += row(values);
        if (!note.empty()) out += "# " + note + "\n";
        return out;
    }

    constexpr std::size_t width = 7;
    const std::vector<std::string> titles{"Single-turn", "Multi-turn", "Error", ""};
    auto row = [&](const std::vector<std::vector<std::string>>& blocks) {
        std::string line;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (b) line += " |";
            for (const auto& c : blocks[b]) line += pad(c, width);
        }
        return line + "\n";
    };
    std::string title_line;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        if (b) title_line += " |";
        const std::size_t w = width * labels[b].size();
        std::string t = titles[b];
        title_line += pad(t, w);
    }
    out = title_line + "\n" + row(labels);
    if (report.empty()) return out;
    out += row(values);
    if (!note.empty()) out += note + "\n";
    return out;
}

} // namespace toolweaver
