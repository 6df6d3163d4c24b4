#include "shelljudge/pack.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "shelljudge/errors.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

namespace fs = std::filesystem;
using nlohmann::json;

const char* compare_mode_name(CompareMode m) {
    return m == CompareMode::Exact ? "exact" : "newline_tolerant";
}

std::optional<CompareMode> compare_mode_from_name(const std::string& s) {
    if (s == "exact") return CompareMode::Exact;
    if (s == "newline_tolerant") return CompareMode::NewlineTolerant;
    return std::nullopt;
}

const Problem* ContestPack::find(const std::string& id) const {
    for (const auto& p : problems)
        if (p.id == id) return &p;
    return nullptr;
}

int ContestPack::index_of(const std::string& id) const {
    for (size_t i = 0; i < problems.size(); i++)
        if (problems[i].id == id) return (int)i;
    return -1;
}

namespace {

[[noreturn]] void malformed(const std::string& field, const std::string& reason) {
    throw ContestError(Ec::malformed_manifest, field + ": " + reason);
}

int64_t require_positive_int(const json& j, const std::string& field) {
    if (!j.contains(field)) malformed(field, "missing");
    if (!j[field].is_number_integer()) malformed(field, "not an integer");
    int64_t v = j[field].get<int64_t>();
    if (v <= 0) malformed(field, "must be positive");
    return v;
}

int64_t optional_nonneg_int(const json& j, const std::string& field, int64_t def) {
    if (!j.contains(field)) return def;
    if (!j[field].is_number_integer()) malformed(field, "not an integer");
    int64_t v = j[field].get<int64_t>();
    if (v < 0) malformed(field, "must be non-negative");
    return v;
}

ContestConfig parse_manifest(const fs::path& file) {
    json j;
    try {
        j = json::parse(util::read_file(file));
    } catch (const json::exception& e) {
        malformed("contest.json", e.what());
    }
    if (!j.is_object()) malformed("contest.json", "not a JSON object");

    ContestConfig c;
    if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
        malformed("name", "missing or empty");
    c.name = j["name"].get<std::string>();
    c.duration_min = require_positive_int(j, "duration_minutes");
    c.wrong_attempt_penalty_min = optional_nonneg_int(j, "wrong_attempt_penalty_minutes", 10);
    c.hint_penalty_min = optional_nonneg_int(j, "hint_penalty_minutes", 15);
    c.output_limit = optional_nonneg_int(j, "output_limit_bytes", 1 << 20);
    if (c.output_limit == 0) malformed("output_limit_bytes", "must be positive");
    if (j.contains("count_unsolved_failures")) {
        if (!j["count_unsolved_failures"].is_boolean())
            malformed("count_unsolved_failures", "not a boolean");
        c.count_unsolved_failures = j["count_unsolved_failures"].get<bool>();
    }

    if (!j.contains("problem_order") || !j["problem_order"].is_array())
        malformed("problem_order", "missing or not an array");
    std::set<std::string> seen;
    for (const auto& e : j["problem_order"]) {
        if (!e.is_string()) malformed("problem_order", "entries must be strings");
        std::string id = e.get<std::string>();
        if (id.empty()) malformed("problem_order", "empty id");
        if (!seen.insert(id).second) malformed("problem_order", "duplicate id " + id);
        c.problem_order.push_back(id);
    }
    if (c.problem_order.empty()) malformed("problem_order", "must not be empty");
    return c;
}

// Cases are declared by their NN.out file; NN.args and NN.stdin are optional.
std::vector<TestCase> load_cases(const fs::path& dir, const std::string& problem_id, bool hidden) {
    std::vector<TestCase> cases;
    if (!fs::is_directory(dir)) return cases;

    std::map<std::string, TestCase> by_id;
    std::set<std::string> stems_with_aux;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        fs::path p = entry.path();
        std::string ext = p.extension().string();
        std::string stem = p.stem().string();
        if (ext != ".out" && ext != ".args" && ext != ".stdin")
            throw ContestError(Ec::malformed_pack, problem_id + ": unexpected case file " +
                                                       p.filename().string());
        if (ext == ".out") {
            TestCase tc;
            tc.id = stem;
            tc.expected_stdout = util::read_file(p);
            by_id.emplace(stem, std::move(tc));
        } else {
            stems_with_aux.insert(stem);
        }
    }
    for (const auto& stem : stems_with_aux) {
        if (by_id.count(stem)) continue;
        std::string msg = problem_id + ": case " + stem + " has no ." + "out file";
        if (hidden) throw ContestError(Ec::missing_hidden_cases, msg);
        throw ContestError(Ec::malformed_pack, msg);
    }
    for (auto& [stem, tc] : by_id) {
        fs::path args = dir / (stem + ".args");
        if (fs::exists(args)) {
            // one argument per line, no shell interpretation
            std::string raw = util::read_file(args);
            for (auto& line : util::split_lines(raw)) tc.argv.push_back(line);
        }
        fs::path sin = dir / (stem + ".stdin");
        if (fs::exists(sin)) tc.stdin_bytes = util::read_file(sin);
    }

    for (auto& [stem, tc] : by_id) cases.push_back(std::move(tc)); // map order = sorted by id
    return cases;
}

std::vector<Hint> load_hints(const fs::path& dir, const std::string& problem_id) {
    std::vector<Hint> hints;
    if (!fs::is_directory(dir)) return hints;
    std::map<int, std::string> by_index;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        fs::path p = entry.path();
        std::string stem = p.stem().string();
        if (p.extension() != ".txt" || stem.empty() ||
            stem.find_first_not_of("0123456789") != std::string::npos)
            throw ContestError(Ec::malformed_pack,
                               problem_id + ": unexpected hint file " + p.filename().string());
        int idx = std::stoi(stem);
        if (idx < 1 || by_index.count(idx))
            throw ContestError(Ec::malformed_pack,
                               problem_id + ": bad or duplicate hint index " + stem);
        by_index[idx] = util::read_file(p);
    }
    int expect = 1;
    for (const auto& [idx, body] : by_index) {
        if (idx != expect)
            throw ContestError(Ec::hint_gap, problem_id + ": missing hint " + std::to_string(expect));
        hints.push_back(Hint{idx, body});
        expect++;
    }
    return hints;
}

Problem load_problem(const fs::path& dir, const std::string& id) {
    Problem p;
    p.id = id;
    p.title = id;

    fs::path statement = dir / "statement.txt";
    if (!fs::exists(statement))
        throw ContestError(Ec::malformed_pack, id + ": missing statement.txt");
    p.statement = util::read_file(statement);
    if (p.statement.empty())
        throw ContestError(Ec::malformed_pack, id + ": statement.txt is empty");

    fs::path meta = dir / "problem.json";
    if (fs::exists(meta)) {
        json j;
        try {
            j = json::parse(util::read_file(meta));
        } catch (const json::exception& e) {
            throw ContestError(Ec::malformed_pack, id + ": problem.json: " + e.what());
        }
        if (j.contains("title")) p.title = j["title"].get<std::string>();
        if (j.contains("time_limit_ms")) {
            int64_t v = j["time_limit_ms"].get<int64_t>();
            if (v <= 0) throw ContestError(Ec::malformed_pack, id + ": time_limit_ms must be positive");
            p.time_limit_ms = v;
        }
        if (j.contains("comparison_mode")) {
            auto m = compare_mode_from_name(j["comparison_mode"].get<std::string>());
            if (!m)
                throw ContestError(Ec::malformed_pack, id + ": unknown comparison_mode");
            p.compare = *m;
        }
    }

    p.hints = load_hints(dir / "hints", id);
    p.public_cases = load_cases(dir / "public", id, false);
    p.hidden_cases = load_cases(dir / "hidden", id, true);
    if (p.hidden_cases.empty()) throw ContestError(Ec::missing_hidden_cases, id);
    return p;
}

// Length-prefixed field encoding keeps the digest free of delimiter ambiguity.
void put(std::string& buf, const std::string& s) {
    buf += std::to_string(s.size());
    buf += ':';
    buf += s;
}

void feed_cases(std::string& buf, const std::string& tag, const std::vector<TestCase>& cases) {
    for (const auto& c : cases) {
        put(buf, tag);
        put(buf, c.id);
        put(buf, std::to_string(c.argv.size()));
        for (const auto& a : c.argv) put(buf, a);
        put(buf, c.stdin_bytes);
        put(buf, c.expected_stdout);
    }
}

std::string compute_digest(const ContestPack& pack) {
    std::string buf;
    put(buf, pack.config.name);
    put(buf, std::to_string(pack.config.duration_min));
    put(buf, std::to_string(pack.config.wrong_attempt_penalty_min));
    put(buf, std::to_string(pack.config.hint_penalty_min));
    put(buf, std::to_string(pack.config.output_limit));
    put(buf, pack.config.count_unsolved_failures ? "1" : "0");
    for (const auto& p : pack.problems) {
        put(buf, "problem");
        put(buf, p.id);
        put(buf, p.title);
        put(buf, p.statement);
        put(buf, std::to_string(p.time_limit_ms));
        put(buf, compare_mode_name(p.compare));
        for (const auto& h : p.hints) {
            put(buf, "hint");
            put(buf, std::to_string(h.index));
            put(buf, h.body);
        }
        feed_cases(buf, "public", p.public_cases);
        feed_cases(buf, "hidden", p.hidden_cases);
    }
    if (!pack.shared_files.empty() && fs::is_directory(pack.shared_files)) {
        std::vector<fs::path> entries;
        for (const auto& e : fs::recursive_directory_iterator(pack.shared_files))
            if (e.is_regular_file()) entries.push_back(e.path());
        std::sort(entries.begin(), entries.end());
        for (const auto& f : entries) {
            put(buf, "file");
            put(buf, fs::relative(f, pack.shared_files).generic_string());
            put(buf, util::read_file(f));
        }
    }
    return util::sha256_hex(buf);
}

} // namespace

ContestPack load_pack(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ContestError(Ec::missing_manifest, "no such pack directory: " + dir.string());
    fs::path manifest = dir / "contest.json";
    if (!fs::exists(manifest))
        throw ContestError(Ec::missing_manifest, manifest.string());

    ContestPack pack;
    pack.root = fs::absolute(dir);
    pack.config = parse_manifest(manifest);

    fs::path files = pack.root / "files";
    if (fs::is_directory(files)) pack.shared_files = files;

    for (const auto& id : pack.config.problem_order) {
        fs::path pdir = pack.root / "problems" / id;
        if (!fs::is_directory(pdir)) throw ContestError(Ec::missing_problem, id);
        pack.problems.push_back(load_problem(pdir, id));
    }
    pack.digest = compute_digest(pack);
    return pack;
}

std::string ValidationReport::to_string() const {
    if (findings.empty()) return "pack ok\n";
    std::string out;
    for (const auto& f : findings) {
        if (!f.problem.empty()) out += "[" + f.problem + "] ";
        out += f.what + "\n";
    }
    return out;
}

} // namespace shelljudge
