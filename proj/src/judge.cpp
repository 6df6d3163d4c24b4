#include "shelljudge/judge.hpp"

#include <sstream>

#include "shelljudge/errors.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

namespace fs = std::filesystem;

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Accepted: return "Accepted";
        case Verdict::WrongAnswer: return "WrongAnswer";
        case Verdict::TimeLimitExceeded: return "TimeLimitExceeded";
        case Verdict::RuntimeError: return "RuntimeError";
        case Verdict::OutputLimitExceeded: return "OutputLimitExceeded";
        case Verdict::JudgeError: return "JudgeError";
    }
    return "JudgeError";
}

const char* verdict_display(Verdict v) {
    switch (v) {
        case Verdict::Accepted: return "Accepted";
        case Verdict::WrongAnswer: return "Wrong answer";
        case Verdict::TimeLimitExceeded: return "Time limit exceeded";
        case Verdict::RuntimeError: return "Runtime error";
        case Verdict::OutputLimitExceeded: return "Output limit exceeded";
        case Verdict::JudgeError: return "Judge error";
    }
    return "Judge error";
}

std::optional<Verdict> verdict_from_name(const std::string& s) {
    for (Verdict v : {Verdict::Accepted, Verdict::WrongAnswer, Verdict::TimeLimitExceeded,
                      Verdict::RuntimeError, Verdict::OutputLimitExceeded, Verdict::JudgeError})
        if (s == verdict_name(v)) return v;
    return std::nullopt;
}

bool compare_output(const std::string& produced, const std::string& expected, CompareMode mode) {
    if (mode == CompareMode::Exact) return produced == expected;
    auto strip_one = [](const std::string& s) -> std::string_view {
        std::string_view v = s;
        if (!v.empty() && v.back() == '\n') v.remove_suffix(1);
        return v;
    };
    return strip_one(produced) == strip_one(expected);
}

Judge::Judge(const Sandbox& sandbox, fs::path scratch_root)
    : sandbox_(&sandbox), scratch_root_(std::move(scratch_root)) {
    fs::create_directories(scratch_root_);
}

namespace {

// Comparison decides first; a nonzero exit only matters when the output is
// already wrong (shell pipelines exit nonzero benignly).
Verdict classify(const ExecutionOutcome& oc, const TestCase& tc, CompareMode mode) {
    if (oc.killed)
        return oc.reason == KillReason::Timeout ? Verdict::TimeLimitExceeded
                                                : Verdict::OutputLimitExceeded;
    if (compare_output(oc.stdout_bytes, tc.expected_stdout, mode)) return Verdict::Accepted;
    return oc.exit_code == 0 ? Verdict::WrongAnswer : Verdict::RuntimeError;
}

} // namespace

EvaluationResult Judge::evaluate(const ContestPack& pack, const std::string& problem_id,
                                 const std::string& script, CaseSet set) const {
    const Problem* problem = pack.find(problem_id);
    if (!problem) throw ContestError(Ec::unknown_problem, problem_id);
    const auto& cases = set == CaseSet::Hidden ? problem->hidden_cases : problem->public_cases;
    if (cases.empty()) {
        if (set == CaseSet::Public) throw ContestError(Ec::no_public_cases, problem_id);
        throw ContestError(Ec::missing_hidden_cases, problem_id);
    }

    std::string files_path =
        pack.shared_files.empty() ? std::string() : fs::absolute(pack.shared_files).string();

    EvaluationResult result;
    for (const auto& tc : cases) {
        TestResult tr;
        tr.case_id = tc.id;
        try {
            util::TempDir workdir(scratch_root_, "run-");
            ExecutionSpec spec;
            spec.script = script;
            for (const auto& a : tc.argv)
                spec.argv.push_back(util::replace_all(a, "{FILES}", files_path));
            spec.stdin_bytes = tc.stdin_bytes;
            spec.time_limit_ms = problem->time_limit_ms;
            spec.output_limit = pack.config.output_limit;
            spec.workdir = workdir.path();
            spec.shared_files = pack.shared_files;
            if (sandbox_->options().retain_workdirs) workdir.release();

            ExecutionOutcome oc = sandbox_->execute(spec);
            tr.verdict = classify(oc, tc, problem->compare);
            tr.wall_ms = oc.wall_ms;
            tr.produced_stdout = oc.stdout_bytes;
        } catch (const std::exception&) {
            tr.verdict = Verdict::JudgeError; // setup failure, never the contestant's fault
        }
        result.per_test.push_back(std::move(tr));
    }

    result.aggregate = Verdict::Accepted;
    for (const auto& tr : result.per_test) {
        if (tr.verdict != Verdict::Accepted) {
            result.aggregate = tr.verdict;
            break;
        }
    }
    return result;
}

fs::path write_instructor_log(const EvaluationResult& result, const std::string& contestant,
                              const std::string& problem, const std::string& script,
                              const fs::path& log_root) {
    try {
        fs::path dir = log_root / contestant / problem;
        fs::create_directories(dir);
        std::string seq = std::to_string(result.submission_seq);
        fs::path log_file = dir / (seq + ".log");

        std::ostringstream out;
        out << "submission " << seq << " contestant " << contestant << " problem " << problem
            << " judged_at " << result.judged_at << "s\n";
        out << "aggregate: " << verdict_name(result.aggregate) << "\n";
        for (const auto& tr : result.per_test) {
            out << "case " << tr.case_id << ": " << verdict_name(tr.verdict)
                << " wall_ms=" << tr.wall_ms << "\n";
            out << "--- produced stdout (case " << tr.case_id << ", " << tr.produced_stdout.size()
                << " bytes) ---\n";
            out << tr.produced_stdout;
            if (!tr.produced_stdout.empty() && tr.produced_stdout.back() != '\n') out << "\n";
            out << "--- end case " << tr.case_id << " ---\n";
        }
        out << "=== script (" << script.size() << " bytes) ===\n";
        out << script;

        util::write_file(log_file, out.str());
        util::write_file(dir / (seq + ".script"), script);
        return log_file;
    } catch (const std::exception& e) {
        throw ContestError(Ec::log_write_failure, e.what());
    }
}

std::optional<Verdict> parse_instructor_log_aggregate(const fs::path& log_file) {
    std::string text;
    try {
        text = util::read_file(log_file);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    for (const auto& line : util::split_lines(text)) {
        if (line.rfind("aggregate: ", 0) == 0) return verdict_from_name(line.substr(11));
    }
    return std::nullopt;
}

} // namespace shelljudge
