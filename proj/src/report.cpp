#include "fsvm/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace fsvm {

namespace {

Json number_or_null(double v)
{
    return std::isfinite(v) ? Json(v) : Json();
}

std::string fixed(double v, int digits)
{
    if (!std::isfinite(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width)
        s.append(width - s.size(), ' ');
    return s;
}

} // namespace

Json candidate_row(const CandidateOutcome& o)
{
    Json j;
    j["type"] = "candidate";
    j["candidate"] = to_json(o.candidate);
    j["trained"] = o.trained;
    if (o.trained) {
        j["validation_error"] = o.validation_error;
        j["score"] = o.score;
        j["iterations"] = o.iterations;
    } else {
        j["failure"] = o.failure;
    }
    j["penalty"] = o.penalty;
    return j;
}

Json run_row(const RunRecord& r)
{
    Json j;
    j["type"] = "run";
    j["index"] = r.index;
    j["excluded"] = r.excluded;
    if (r.excluded) {
        j["cause"] = r.cause;
    } else {
        j["error"] = r.error;
        j["tested"] = r.tested;
        j["misclassified"] = r.misclassified;
        if (r.selected) {
            j["selected"] = to_json(*r.selected);
            j["validation_score"] = r.validation_score;
        }
    }
    return j;
}

std::string selection_payload(const SelectionResult& result)
{
    Json summary;
    summary["type"] = "selection";
    summary["chosen"] = to_json(result.chosen);
    summary["chosen_index"] = result.chosen_index;
    summary["train_size"] = result.train_size;
    summary["validation_size"] = result.validation_size;
    summary["support_vectors"] = result.model.support().size();
    summary["bias"] = result.model.bias();
    summary["warnings"] = result.warnings;
    std::string out = summary.dump() + "\n";
    for (const auto& o : result.table)
        out += candidate_row(o).dump() + "\n";
    return out;
}

std::string evaluation_payload(const EvaluationReport& report)
{
    Json summary;
    summary["type"] = "evaluation";
    summary["protocol"] = to_json(report.protocol);
    summary["mean_error"] = number_or_null(report.mean_error);
    summary["runs"] = report.runs.size();
    summary["excluded"] = report.excluded;
    if (report.p_value)
        summary["p_value"] = number_or_null(*report.p_value);
    std::string out = summary.dump() + "\n";
    for (const auto& r : report.runs)
        out += run_row(r).dump() + "\n";
    return out;
}

std::string run_metadata(const std::string& command, double wall_seconds)
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    Json j;
    j["command"] = command;
    j["timestamp"] = stamp;
    j["wall_seconds"] = wall_seconds;
    return j.dump(2) + "\n";
}

std::string render_selection(const SelectionResult& result)
{
    std::ostringstream out;
    out << pad("dim", 6) << pad("kernel", 40) << pad("C", 12) << pad("val.err", 10) << pad("penalty", 10)
        << "score\n";
    for (std::size_t i = 0; i < result.table.size(); ++i) {
        const auto& o = result.table[i];
        out << pad(std::to_string(o.candidate.dimension), 6) << pad(o.candidate.kernel.describe(), 40)
            << pad(format_double(o.candidate.C), 12);
        if (o.trained)
            out << pad(fixed(o.validation_error, 4), 10) << pad(fixed(o.penalty, 4), 10) << fixed(o.score, 4);
        else
            out << "failed: " << o.failure;
        if (i == result.chosen_index)
            out << "  <- chosen";
        out << "\n";
    }
    out << "train " << result.train_size << ", validation " << result.validation_size << ", support vectors "
        << result.model.support().size() << "\n";
    for (const auto& w : result.warnings)
        out << "warning: " << w << "\n";
    return out.str();
}

std::string render_evaluation(const EvaluationReport& report)
{
    std::ostringstream out;
    out << "protocol " << to_string(report.protocol.kind) << ", " << report.runs.size() << " runs, "
        << report.excluded << " excluded\n";
    out << pad("run", 6) << pad("error", 10) << pad("tested", 8) << "selected\n";
    for (const auto& r : report.runs) {
        out << pad(std::to_string(r.index), 6);
        if (r.excluded) {
            out << "excluded: " << r.cause << "\n";
            continue;
        }
        out << pad(fixed(r.error, 4), 10) << pad(std::to_string(r.tested), 8);
        if (r.selected)
            out << "d=" << r.selected->dimension << " " << r.selected->kernel.describe() << " C="
                << format_double(r.selected->C);
        out << "\n";
    }
    out << "mean error " << fixed(report.mean_error, 4) << "\n";
    if (report.p_value)
        out << "p-value " << fixed(*report.p_value, 4) << "\n";
    return out.str();
}

} // namespace fsvm
