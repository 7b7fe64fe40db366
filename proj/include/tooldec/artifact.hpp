#pragma once

// Compiled-artifact file: a session machine together with the vocabulary,
// inventory and scaffold it was built from.
//
// Layout (little-endian):
//   "TOOLDEC\0"  u32 version  u64 vocab fingerprint  u64 |S|  u64 |V|
//   u64 len + vocab document
//   u64 len + canonical inventory document
//   u64 len + scaffold document
//   u32 eos  u32 start
//   |S| x (u8 accepting, i32 segment, i32 tool, i32 anchor progress, u32 byte state)
//   (|S|+1) x u32 transition offsets
//   u64 |T|, then |T| x (u32 token, u32 target)
//   |S| x ceil(|V|/8) mask bytes
//   u64 FNV-1a of everything above

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tooldec/linker.hpp"
#include "tooldec/vocab.hpp"

namespace tooldec {

inline constexpr std::uint32_t kArtifactVersion = 1;

class ArtifactError : public std::runtime_error {
public:
    enum class Kind { Corrupt, VersionMismatch, FingerprintMismatch, Io };

    ArtifactError(Kind kind, const std::string& detail);
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

const char* to_string(ArtifactError::Kind kind);

struct Artifact {
    Vocabulary vocab;
    SessionFsm session;
};

std::string serialize_artifact(const Vocabulary& vocab, const SessionFsm& session);

// `expected_fingerprint` is the caller's vocabulary; a different one raises
// FingerprintMismatch.
Artifact load_artifact(std::string_view bytes, std::optional<std::uint64_t> expected_fingerprint = std::nullopt);
Artifact read_artifact_file(const std::filesystem::path& path,
                            std::optional<std::uint64_t> expected_fingerprint = std::nullopt);

}  // namespace tooldec
