#include "sie/common/envelope.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "sie/common/digest.hpp"
#include "sie/common/error.hpp"

namespace sie {

namespace {

struct Header {
  int version = 0;
  std::size_t length = 0;
  std::string checksum;
  std::size_t body_offset = 0;
};

Header parse_header(std::string_view magic, std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos)
    fail(Errc::corrupt_snapshot, "missing header line", std::string(magic));
  std::istringstream in{std::string(bytes.substr(0, nl))};
  std::string got_magic;
  Header h;
  if (!(in >> got_magic) || got_magic != magic)
    fail(Errc::corrupt_snapshot, "expected magic " + std::string(magic), std::string(magic));
  if (!(in >> h.version))
    fail(Errc::corrupt_snapshot, "unreadable format version", std::string(magic));
  if (!(in >> h.length >> h.checksum))
    fail(Errc::corrupt_snapshot, "truncated header", std::string(magic));
  h.body_offset = nl + 1;
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string seal(std::string_view magic, int version, std::string_view body) {
  std::string out;
  out.reserve(body.size() + 64);
  out.append(magic);
  out += ' ';
  out += std::to_string(version);
  out += ' ';
  out += std::to_string(body.size());
  out += ' ';
  out += hex64(fnv1a64(body));
  out += '\n';
  out.append(body);
  return out;
}

std::string unseal(std::string_view magic, int expected_version, std::string_view bytes) {
  const Header h = parse_header(magic, bytes);
  if (h.version != expected_version)
    fail(Errc::version_mismatch,
         std::string(magic) + " format version " + std::to_string(h.version) +
             ", this build reads " + std::to_string(expected_version),
         std::to_string(h.version));
  const auto body = bytes.substr(h.body_offset);
  if (body.size() != h.length)
    fail(Errc::corrupt_snapshot,
         "body is " + std::to_string(body.size()) + " bytes, header says " +
             std::to_string(h.length),
         std::string(magic));
  if (hex64(fnv1a64(body)) != h.checksum)
    fail(Errc::corrupt_snapshot, "checksum mismatch", std::string(magic));
  return std::string(body);
}

int peek_version(std::string_view magic, std::string_view bytes) {
  return parse_header(magic, bytes).version;
}

}  // namespace sie
