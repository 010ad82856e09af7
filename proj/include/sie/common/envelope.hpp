#pragma once

#include <string>
#include <string_view>

namespace sie {

/// Self-describing container used by every persisted file (run snapshots,
/// index snapshots, memory files). Layout:
///
///   <MAGIC> <version> <body-bytes> <fnv1a64-hex>\n<body>
///
/// unseal() rejects a foreign magic or a length/checksum mismatch with
/// Errc::corrupt_snapshot, and a different version with
/// Errc::version_mismatch.
std::string seal(std::string_view magic, int version, std::string_view body);

std::string unseal(std::string_view magic, int expected_version, std::string_view bytes);

/// Reads the version field without validating the body.
int peek_version(std::string_view magic, std::string_view bytes);

}  // namespace sie
