#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace viewopt {

// Line-oriented key/value text format used by manifests, run configs and
// run metadata: one `key value...` per line, dotted keys for nesting, `#`
// starts a comment. Writers emit keys in a fixed order so identical content
// serializes to identical bytes.

std::string format_double(double v);  // shortest round-trip decimal

class KvWriter {
  public:
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }
    void add(const std::string& key, double value) { add(key, format_double(value)); }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }
    void add(const std::string& key, long value) { add(key, std::to_string(value)); }
    void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
    void comment(const std::string& text);

    const std::string& str() const { return out_; }
    void write_file(const std::filesystem::path& path) const;

  private:
    std::string out_;
};

class KvMap {
  public:
    static KvMap parse(const std::string& text);
    static KvMap load_file(const std::filesystem::path& path);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    long get_long(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

}  // namespace viewopt
