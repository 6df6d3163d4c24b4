#include <filesystem>

#include "shelljudge/judge.hpp"
#include "shelljudge/pack.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

namespace fs = std::filesystem;

// Operator pre-flight: structural warnings plus a hidden-case run of each
// supplied reference solution.
ValidationReport validate_pack(const ContestPack& pack,
                               const std::map<std::string, std::string>& reference_solutions) {
    ValidationReport report;

    for (const auto& [id, _] : reference_solutions) {
        if (!pack.find(id))
            report.findings.push_back({id, "reference solution for unknown problem"});
    }

    for (const auto& p : pack.problems) {
        if (p.public_cases.empty())
            report.findings.push_back({p.id, "no public cases; `check` will be unusable"});

        auto it = reference_solutions.find(p.id);
        if (it == reference_solutions.end()) continue;

        try {
            util::TempDir scratch(fs::temp_directory_path(), "shelljudge-validate-");
            Sandbox sandbox;
            Judge judge(sandbox, scratch.path());
            EvaluationResult res = judge.evaluate(pack, p.id, it->second, CaseSet::Hidden);
            for (const auto& tr : res.per_test) {
                if (tr.verdict == Verdict::Accepted) continue;
                report.findings.push_back(
                    {p.id, "reference solution: hidden case " + tr.case_id + " -> " +
                               verdict_name(tr.verdict)});
            }
        } catch (const std::exception& e) {
            report.findings.push_back({p.id, std::string("reference execution failed: ") + e.what()});
        }
    }
    return report;
}

} // namespace shelljudge
