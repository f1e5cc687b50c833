#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace viewopt {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned binary checkpoint: magic, format version, architecture tag, then
// named row-major float32 tensors with their shapes. Loading validates the
// architecture tag and every tensor's name and shape.
inline constexpr char kCheckpointMagic[8] = {'V', 'O', 'P', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensorView {
    std::string name;
    long rows = 0;
    long cols = 0;
    float* data = nullptr;  // rows*cols floats
};

void save_checkpoint(const std::filesystem::path& path, std::uint32_t arch_tag,
                     const std::vector<NamedTensorView>& tensors);

// reads into the given tensors; throws on tag/name/shape mismatch
void load_checkpoint(const std::filesystem::path& path, std::uint32_t expected_arch_tag,
                     const std::vector<NamedTensorView>& tensors);

// header probe for dispatching by architecture
std::uint32_t checkpoint_arch_tag(const std::filesystem::path& path);

}  // namespace viewopt
