#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "zqual/cli.hpp"
#include "zqual/dataset.hpp"
#include "zqual/io.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("zqual-test-" + std::to_string(::getpid()) + "-" + tag + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

inline std::vector<double> uniform_values(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline std::vector<double> normal_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

/// Writes `values` as a raw file and returns the matching descriptor.
inline zqual::DatasetDescriptor write_raw(const fs::path& path, const std::string& id, const std::vector<double>& values,
                                          std::vector<std::size_t> dims, zqual::Precision p = zqual::Precision::single) {
    zqual::DatasetDescriptor d;
    d.id = id;
    d.path = path;
    d.precision = p;
    d.dims = std::move(dims);
    // Round through the storage precision so the in-memory copy matches what is on disk.
    std::vector<double> stored = values;
    if (p == zqual::Precision::single)
        for (auto& x : stored) x = static_cast<double>(static_cast<float>(x));
    zqual::write_dataset(path, zqual::Dataset(d, stored));
    return d;
}

struct CliResult {
    int code = 0;
    std::string out;
};

inline CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "zqual");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    std::ostringstream out;
    const int code = zqual::cli_main(static_cast<int>(args.size()), argv.data(), out);
    return {code, out.str()};
}

/// Every file under root except the excluded relative paths/prefixes, mapped to its bytes.
inline std::map<std::string, std::string> snapshot(const fs::path& root, const std::vector<std::string>& exclude) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto rel = e.path().lexically_relative(root).generic_string();
        bool skip = false;
        for (const auto& x : exclude)
            if (rel == x || rel.starts_with(x + "/")) skip = true;
        if (!skip) files[rel] = zqual::read_text_file(e.path());
    }
    return files;
}

}  // namespace testing_support
