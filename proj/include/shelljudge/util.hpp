#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace shelljudge::util {

// Whole-file IO; bytes, no text-mode translation.
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& bytes);
// Write to a sibling temp file then rename, so failures never leave a partial file.
void write_file_atomic(const std::filesystem::path& p, const std::string& bytes);

std::string base64_encode(const std::string& bytes);
std::optional<std::string> base64_decode(const std::string& text);

// FIPS 180-4 SHA-256, lowercase hex digest.
std::string sha256_hex(const std::string& bytes);

// 32 hex chars from the system entropy source.
std::string random_token();

// Splits on '\n'; a trailing newline does not produce a final empty element.
std::vector<std::string> split_lines(const std::string& s);

std::string replace_all(std::string s, const std::string& from, const std::string& to);

int64_t steady_ms();

// Scratch directory that removes itself (recursively) unless released.
class TempDir {
  public:
    explicit TempDir(const std::filesystem::path& parent, const std::string& prefix);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    void release() { keep_ = true; }

  private:
    std::filesystem::path path_;
    bool keep_ = false;
};

} // namespace shelljudge::util
