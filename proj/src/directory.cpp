#include "codssi/directory.hpp"

#include <algorithm>

#include "codssi/codec.hpp"
#include "codssi/errors.hpp"

namespace codssi {
namespace {

constexpr std::string_view kMagic = "CODSSI/DIR1";
constexpr std::string_view kScheme = "ed25519";

Bytes payload(const std::vector<KeyDirectory::Entry>& entries, BytesView root_pub) {
  Writer w;
  w.str(kMagic);
  w.str(kScheme);
  w.bytes(root_pub);
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    w.str(e.id);
    w.bytes(e.public_key);
  }
  return w.take();
}

}  // namespace

void KeyDirectory::add(const std::string& id, Bytes public_key) {
  if (id.empty()) throw DirectoryError("empty party id");
  if (public_key.size() != kPublicKeyBytes) throw DirectoryError("bad key length");
  if (lookup(id)) throw DuplicatePartyId(id);
  entries_.push_back(Entry{id, std::move(public_key)});
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
}

std::optional<Bytes> KeyDirectory::lookup(const std::string& id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return e.public_key;
  }
  return std::nullopt;
}

Bytes KeyDirectory::serialize_signed(const SigningKey& root) const {
  Bytes body = payload(entries_, root.public_key());
  Bytes sig = root.sign(body);
  Writer w;
  w.bytes(body);
  w.bytes(sig);
  return w.take();
}

KeyDirectory KeyDirectory::parse_signed(BytesView file) {
  try {
    Reader outer(file);
    Bytes body = outer.bytes();
    Bytes sig = outer.bytes();
    outer.expect_end();

    Reader r(body);
    if (r.str() != kMagic) throw DirectoryError("not a directory file");
    if (r.str() != kScheme) throw DirectoryError("unknown signature scheme");
    Bytes root_pub = r.bytes();
    if (!signature_verify(root_pub, body, sig)) {
      throw DirectoryError("directory self-signature check failed");
    }
    uint32_t count = r.u32();
    KeyDirectory dir;
    for (uint32_t i = 0; i < count; ++i) {
      std::string id = r.str();
      Bytes key = r.bytes();
      dir.add(id, std::move(key));
    }
    r.expect_end();
    return dir;
  } catch (const CodecError& e) {
    throw DirectoryError(std::string("malformed directory file: ") + e.what());
  }
}

}  // namespace codssi
