#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

namespace testutil {

inline std::filesystem::path fresh_dir(const std::string& hint) {
    static std::atomic<int> counter{0};
    auto path = std::filesystem::temp_directory_path() /
                ("evfl_" + hint + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
    return path;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace testutil
