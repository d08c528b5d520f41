#pragma once

#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>

#include "hybridtok/errors.hpp"

namespace hybridtok {

// Output file that only appears under its final name once commit() succeeds.
// An uncommitted temp file is removed on destruction.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path)
      : path_(std::move(path)),
        tmp_(path_.string() + ".tmp." + std::to_string(::getpid())),
        out_(tmp_, std::ios::binary | std::ios::trunc) {
    if (!out_) fail(ErrorKind::MalformedFile, "cannot open for writing: " + tmp_.string());
  }

  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void write(std::string_view data) { out_.write(data.data(), static_cast<std::streamsize>(data.size())); }

  void commit() {
    out_.flush();
    if (!out_) fail(ErrorKind::MalformedFile, "write failed: " + tmp_.string());
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  AtomicFile f(path);
  f.write(content);
  f.commit();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MalformedFile, "not found: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Minimal JSON text helpers for the hot JSONL writers.
namespace json_text {

inline void append_string(std::string& out, std::string_view s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

template <typename Int>
void append_int(std::string& out, Int v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

template <typename Int>
void append_array(std::string& out, std::span<const Int> values) {
  out.push_back('[');
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    append_int(out, values[i]);
  }
  out.push_back(']');
}

inline void append_key(std::string& out, std::string_view key, bool first = false) {
  if (!first) out.push_back(',');
  append_string(out, key);
  out.push_back(':');
}

}  // namespace json_text

}  // namespace hybridtok
