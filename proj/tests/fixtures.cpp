#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <map>

#include <unistd.h>

#include "shelljudge/util.hpp"

namespace fixtures {

using shelljudge::util::read_file;
using shelljudge::util::split_lines;
using shelljudge::util::write_file;

namespace {

void write(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    write_file(p, content);
}

} // namespace

fs::path fresh_dir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    fs::path p = fs::temp_directory_path() /
                 ("shelljudge-test-" + std::to_string(::getpid()) + "-" + tag + "-" +
                  std::to_string(counter.fetch_add(1)));
    fs::create_directories(p);
    return p;
}

// ---------------------------------------------------------------------------
// mini pack

fs::path write_mini_pack(const fs::path& dir, int problems, int hidden_cases,
                         int64_t duration_min) {
    std::string order;
    for (int i = 1; i <= problems; i++) {
        if (i > 1) order += ", ";
        order += "\"p" + std::to_string(i) + "\"";
    }
    write(dir / "contest.json",
          "{\n"
          "  \"name\": \"mini fixture contest\",\n"
          "  \"duration_minutes\": " + std::to_string(duration_min) + ",\n"
          "  \"wrong_attempt_penalty_minutes\": 10,\n"
          "  \"hint_penalty_minutes\": 15,\n"
          "  \"problem_order\": [" + order + "]\n"
          "}\n");

    for (int i = 1; i <= problems; i++) {
        std::string pid = "p" + std::to_string(i);
        fs::path pdir = dir / "problems" / pid;
        write(pdir / "statement.txt",
              "Write a script that prints the line `" + pid + "-ok` to standard output.\n");
        write(pdir / "problem.json", "{\"time_limit_ms\": 3000}\n");
        write(pdir / "hints" / "1.txt", "HINT_BODY_" + pid + "_1: echo writes a line.\n");
        write(pdir / "hints" / "2.txt", "HINT_BODY_" + pid + "_2: mind the exact spelling.\n");
        write(pdir / "public" / "01.out", pid + "-ok\n");
        for (int c = 1; c <= hidden_cases; c++) {
            char num[16];
            std::snprintf(num, sizeof(num), "%02d", c);
            std::string cid = num;
            write(pdir / "hidden" / (cid + ".args"), "HIDDEN_ARG_" + pid + "_" + cid + "\n");
            write(pdir / "hidden" / (cid + ".stdin"), "HIDDEN_STDIN_" + pid + "_" + cid + "\n");
            write(pdir / "hidden" / (cid + ".out"), pid + "-ok\n");
        }
    }
    return dir;
}

std::string mini_ok_script(const std::string& problem_id) {
    return "#!/bin/bash\necho " + problem_id + "-ok\n";
}

std::string mini_wrong_script() { return "#!/bin/bash\necho not-the-answer\n"; }

std::string mini_slow_script(int64_t sleep_s) {
    return "#!/bin/bash\nsleep " + std::to_string(sleep_s) + "\necho too-late\n";
}

// ---------------------------------------------------------------------------
// failed-login analysis pack

std::string make_lastb_log(std::vector<std::pair<std::string, int>> counts, unsigned seed) {
    static const char* ips[] = {"93.144.87.93", "201.7.119.2", "185.220.101.4", "45.83.64.11",
                                "121.18.238.109"};
    static const char* days[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
    std::vector<std::string> lines;
    std::mt19937 rng(seed);
    size_t n = 0;
    for (const auto& [user, count] : counts) {
        for (int i = 0; i < count; i++) {
            int hh = (int)(rng() % 24), mm = (int)(rng() % 60);
            char when[64];
            std::snprintf(when, sizeof(when), "%s Nov %2d %02d:%02d - %02d:%02d  (00:00)",
                          days[rng() % 7], (int)(rng() % 28) + 1, hh, mm, hh, mm);
            lines.push_back(user + "    ssh:notty    " + ips[n++ % 5] + "     " + when);
        }
    }
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::string tally_expected(const std::string& log_text, int min_count) {
    std::map<std::string, int> counts;
    for (const auto& line : split_lines(log_text)) {
        size_t end = line.find_first_of(" \t");
        std::string user = end == std::string::npos ? line : line.substr(0, end);
        if (!user.empty()) counts[user]++;
    }
    std::vector<std::pair<std::string, int>> kept;
    for (const auto& [user, c] : counts)
        if (c >= min_count) kept.push_back({user, c});
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first > b.first; // reverse alphabetical on ties
    });
    std::string out;
    for (const auto& [user, c] : kept) out += std::to_string(c) + " " + user + "\n";
    return out;
}

const char* const kListing1PublicBlock = "41 root\n18 pi\n9 admin\n8 NL5xUDpV2xRa\n7 craft\n";

fs::path write_listing1_pack(const fs::path& dir) {
    write(dir / "contest.json",
          "{\n"
          "  \"name\": \"failed-login analysis\",\n"
          "  \"duration_minutes\": 120,\n"
          "  \"problem_order\": [\"login-analysis\"]\n"
          "}\n");

    fs::path pdir = dir / "problems" / "login-analysis";
    write(pdir / "statement.txt",
          "You administer a server that records every failed login attempt. Each line of the\n"
          "record has the user name first, then the terminal, source address and timestamps:\n"
          "\n"
          "  admin    ssh:notty    93.144.87.93     Fri Nov 10 14:56 - 14:56  (00:00)\n"
          "\n"
          "Write a script that receives a number N and, optionally, the path of such a log\n"
          "file. When no path is given the log arrives on standard input. Print one line per\n"
          "user with at least N failed attempts, as `<attempts> <user>`, most attempts first;\n"
          "break ties by reverse alphabetical order of the user name.\n"
          "\n"
          "Example:\n"
          "  $ ./script.sh 7 {FILES}/intentos_acceso.txt\n");
    write(pdir / "problem.json", "{\"title\": \"failed login analysis\"}\n");
    write(pdir / "hints" / "1.txt",
          "sort compares alphabetically unless told otherwise: -n switches to numeric order\n"
          "and -r reverses it (see man sort).\n");
    write(pdir / "hints" / "2.txt",
          "To walk over the lines stored in a variable:\n"
          "\n"
          "data=$( ... )\n"
          "while read -r line; do\n"
          "    # use $line here\n"
          "done <<< \"$data\"\n");

    // public log: the counts behind the published example output
    std::string public_log = make_lastb_log({{"root", 41},
                                             {"pi", 18},
                                             {"admin", 9},
                                             {"NL5xUDpV2xRa", 8},
                                             {"craft", 7},
                                             {"guest", 3},
                                             {"ubnt", 2},
                                             {"oracle", 1}},
                                            1001);
    write(dir / "files" / "intentos_acceso.txt", public_log);

    write(pdir / "public" / "01.args", "7\n{FILES}/intentos_acceso.txt\n");
    write(pdir / "public" / "01.out", tally_expected(public_log, 7));

    // hidden: same log under other thresholds, plus a tie-heavy log on stdin
    write(pdir / "hidden" / "01.args", "7\n{FILES}/intentos_acceso.txt\n");
    write(pdir / "hidden" / "01.out", tally_expected(public_log, 7));
    write(pdir / "hidden" / "02.args", "3\n{FILES}/intentos_acceso.txt\n");
    write(pdir / "hidden" / "02.out", tally_expected(public_log, 3));
    write(pdir / "hidden" / "03.args", "10\n{FILES}/intentos_acceso.txt\n");
    write(pdir / "hidden" / "03.out", tally_expected(public_log, 10));

    std::string tie_log = make_lastb_log(
        {{"alpha", 5}, {"beta", 5}, {"zeta", 5}, {"root", 9}, {"backup", 2}}, 2002);
    write(pdir / "hidden" / "04.args", "5\n");
    write(pdir / "hidden" / "04.stdin", tie_log);
    write(pdir / "hidden" / "04.out", tally_expected(tie_log, 5));
    write(pdir / "hidden" / "05.args", "1\n");
    write(pdir / "hidden" / "05.stdin", tie_log);
    write(pdir / "hidden" / "05.out", tally_expected(tie_log, 1));

    return dir;
}

std::string listing1_reference() {
    return "#!/bin/bash\n"
           "n=\"$1\"\n"
           "if [ \"$#\" -ge 2 ]; then\n"
           "    src=\"$2\"\n"
           "else\n"
           "    src=/dev/stdin\n"
           "fi\n"
           "awk '{print $1}' \"$src\" | sort | uniq -c \\\n"
           "    | awk -v n=\"$n\" '$1 >= n {print $1, $2}' \\\n"
           "    | sort -k1,1nr -k2,2r\n";
}

std::string listing1_wrong_ascending() {
    return "#!/bin/bash\n"
           "n=\"$1\"\n"
           "if [ \"$#\" -ge 2 ]; then\n"
           "    src=\"$2\"\n"
           "else\n"
           "    src=/dev/stdin\n"
           "fi\n"
           "awk '{print $1}' \"$src\" | sort | uniq -c \\\n"
           "    | awk -v n=\"$n\" '$1 >= n {print $1, $2}' \\\n"
           "    | sort -k1,1n -k2,2\n";
}

// ---------------------------------------------------------------------------
// looping pack

fs::path write_tle_pack(const fs::path& dir, int64_t time_limit_ms) {
    write(dir / "contest.json",
          "{\n"
          "  \"name\": \"loop trap\",\n"
          "  \"duration_minutes\": 120,\n"
          "  \"problem_order\": [\"branchy\"]\n"
          "}\n");
    fs::path pdir = dir / "problems" / "branchy";
    write(pdir / "statement.txt", "Read one number from stdin and print `ok`.\n");
    write(pdir / "problem.json",
          "{\"time_limit_ms\": " + std::to_string(time_limit_ms) + "}\n");
    write(pdir / "public" / "01.stdin", "1\n");
    write(pdir / "public" / "01.out", "ok\n");
    write(pdir / "hidden" / "01.stdin", "1\n");
    write(pdir / "hidden" / "01.out", "ok\n");
    write(pdir / "hidden" / "02.stdin", "2\n");
    write(pdir / "hidden" / "02.out", "ok\n");
    return dir;
}

std::string tle_loop_script() {
    return "#!/bin/bash\n"
           "read -r x\n"
           "if [ \"$x\" = \"1\" ]; then\n"
           "    echo ok\n"
           "else\n"
           "    while :; do :; done\n"
           "fi\n";
}

} // namespace fixtures
