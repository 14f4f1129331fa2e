#pragma once

#include <spawn.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zqual/error.hpp"
#include "zqual/io.hpp"

extern char** environ;

namespace zqual {

/// Splits a command line into arguments on whitespace outside single or double quotes. Quotes are removed.
inline std::vector<std::string> split_command(std::string_view cmd) {
    std::vector<std::string> args;
    std::string cur;
    bool in_token = false;
    char quote = 0;
    for (char c : cmd) {
        if (quote) {
            if (c == quote)
                quote = 0;
            else
                cur.push_back(c);
        } else if (c == '\'' || c == '"') {
            quote = c;
            in_token = true;
        } else if (c == ' ' || c == '\t' || c == '\n') {
            if (in_token) args.push_back(std::move(cur));
            cur.clear();
            in_token = false;
        } else {
            cur.push_back(c);
            in_token = true;
        }
    }
    if (quote) throw Error("unterminated quote in command template: " + std::string(cmd));
    if (in_token) args.push_back(std::move(cur));
    return args;
}

/// Replaces every {name} in `arg`; an unknown or unbound name is an error.
inline std::string substitute(std::string_view arg, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t pos = 0;
    while (pos < arg.size()) {
        auto open = arg.find('{', pos);
        if (open == std::string_view::npos) break;
        auto close = arg.find('}', open + 1);
        if (close == std::string_view::npos) break;
        out.append(arg.substr(pos, open - pos));
        const std::string name(arg.substr(open + 1, close - open - 1));
        auto it = values.find(name);
        if (it == values.end()) throw Error("placeholder {" + name + "} unresolved");
        out += it->second;
        pos = close + 1;
    }
    out.append(arg.substr(pos));
    return out;
}

struct ProcessResult {
    int exit_status = 0;
    double seconds = 0;
};

/// Runs argv[0] (PATH-resolved) with stdout/stderr redirected to the given logs. Timed from spawn to exit.
/// Throws ProcessError when the child cannot start or exits nonzero (stderr tail attached).
inline ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& stdout_log,
                                 const std::filesystem::path& stderr_log) {
    if (argv.empty()) throw ProcessError("empty command");
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, stdout_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, stderr_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);

    const auto start = std::chrono::steady_clock::now();
    pid_t pid = 0;
    const int rc = posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw ProcessError("cannot start '" + argv[0] + "': " + std::strerror(rc), rc);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) throw ProcessError("waitpid failed for '" + argv[0] + "'");
    }
    const auto stop = std::chrono::steady_clock::now();
    ProcessResult r;
    r.seconds = std::chrono::duration<double>(stop - start).count();
    if (WIFEXITED(status)) {
        r.exit_status = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        r.exit_status = 128 + WTERMSIG(status);
    }
    if (r.exit_status != 0) {
        auto err = read_text_file(stderr_log);
        if (err.size() > 4096) err = err.substr(err.size() - 4096);
        throw ProcessError("'" + argv[0] + "' exited with status " + std::to_string(r.exit_status) +
                               (err.empty() ? "" : ": " + err),
                           r.exit_status, err);
    }
    return r;
}

}  // namespace zqual
