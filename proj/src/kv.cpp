#include "viewopt/kv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace viewopt {

std::string format_double(double v) {
    char buf[40];
    // shortest representation that parses back to the same double
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

void KvWriter::add(const std::string& key, const std::string& value) {
    out_ += key;
    out_ += ' ';
    out_ += value;
    out_ += '\n';
}

void KvWriter::comment(const std::string& text) {
    out_ += "# ";
    out_ += text;
    out_ += '\n';
}

void KvWriter::write_file(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << out_;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

KvMap KvMap::parse(const std::string& text) {
    KvMap kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        std::size_t sep = line.find(' ', start);
        if (sep == std::string::npos) {
            kv.entries_[line.substr(start)] = "";
        } else {
            kv.entries_[line.substr(start, sep - start)] = line.substr(sep + 1);
        }
    }
    return kv;
}

KvMap KvMap::load_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

const std::string& KvMap::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw std::runtime_error("missing key: " + key);
    return it->second;
}

std::string KvMap::get_or(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

long KvMap::get_long(const std::string& key) const { return std::stol(get(key)); }

double KvMap::get_double(const std::string& key) const { return std::strtod(get(key).c_str(), nullptr); }

std::uint64_t KvMap::get_u64(const std::string& key) const { return std::stoull(get(key)); }

}  // namespace viewopt
