#include "viewopt/learn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace viewopt {

namespace {

template <typename T>
void write_pod(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f, const std::filesystem::path& path) {
    T v;
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw CheckpointError("checkpoint: truncated file: " + path.string());
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, std::uint32_t arch_tag,
                     const std::vector<NamedTensorView>& tensors) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("checkpoint: cannot open for writing: " + path.string());
    f.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(f, kCheckpointVersion);
    write_pod(f, arch_tag);
    write_pod(f, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        write_pod(f, static_cast<std::uint32_t>(t.name.size()));
        f.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        write_pod(f, static_cast<std::uint64_t>(t.rows));
        write_pod(f, static_cast<std::uint64_t>(t.cols));
        f.write(reinterpret_cast<const char*>(t.data), static_cast<std::streamsize>(t.rows * t.cols * 4));
    }
    if (!f) throw CheckpointError("checkpoint: write failed: " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, std::uint32_t expected_arch_tag,
                     const std::vector<NamedTensorView>& tensors) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("checkpoint: cannot open: " + path.string());
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path.string());
    auto version = read_pod<std::uint32_t>(f, path);
    if (version != kCheckpointVersion)
        throw CheckpointError("checkpoint: unsupported format version " + std::to_string(version) + " in " +
                              path.string());
    auto tag = read_pod<std::uint32_t>(f, path);
    if (tag != expected_arch_tag)
        throw CheckpointError("checkpoint: architecture tag " + std::to_string(tag) + " does not match expected " +
                              std::to_string(expected_arch_tag) + " in " + path.string());
    auto count = read_pod<std::uint32_t>(f, path);
    if (count != tensors.size())
        throw CheckpointError("checkpoint: tensor count mismatch in " + path.string());
    for (const auto& t : tensors) {
        auto name_len = read_pod<std::uint32_t>(f, path);
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        auto rows = read_pod<std::uint64_t>(f, path);
        auto cols = read_pod<std::uint64_t>(f, path);
        if (name != t.name || rows != static_cast<std::uint64_t>(t.rows) ||
            cols != static_cast<std::uint64_t>(t.cols))
            throw CheckpointError("checkpoint: tensor " + name + " (" + std::to_string(rows) + "x" +
                                  std::to_string(cols) + ") does not match expected " + t.name + " (" +
                                  std::to_string(t.rows) + "x" + std::to_string(t.cols) + ") in " + path.string());
        f.read(reinterpret_cast<char*>(t.data), static_cast<std::streamsize>(t.rows * t.cols * 4));
        if (!f) throw CheckpointError("checkpoint: truncated tensor data in " + path.string());
    }
}

std::uint32_t checkpoint_arch_tag(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("checkpoint: cannot open: " + path.string());
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path.string());
    read_pod<std::uint32_t>(f, path);
    return read_pod<std::uint32_t>(f, path);
}

}  // namespace viewopt
