#pragma once

#include <optional>

#include "codssi/codec.hpp"
#include "codssi/group.hpp"

namespace codssi {

inline constexpr uint8_t kProtocolVersion = 1;
inline constexpr size_t kMaxBodySize = 16 * 1024 * 1024;
inline constexpr size_t kMaxSessionIdSize = 64;

enum class FrameKind : uint8_t {
  offer = 1,
  oprf_request = 2,
  oprf_response = 3,
  error = 4,
  close = 5,
};

// One protocol message. session_id is empty exactly on Offer frames; the
// session identifier does not exist until the offer has been delivered.
struct Frame {
  uint8_t version = kProtocolVersion;
  FrameKind kind = FrameKind::close;
  Bytes session_id;
  Bytes body;

  bool operator==(const Frame&) const = default;
};

// Throws BodyTooLarge; layout: version, kind, u32-framed session_id, u32-framed body.
Bytes encode_frame(const Frame& frame);

// Total parse: any input yields either a frame or a diagnosis, never a throw.
struct FrameDecode {
  std::optional<Frame> frame;
  size_t error_position = 0;
  std::string error;  // internal diagnosis; callers report failures uniformly
};
FrameDecode decode_frame(BytesView in);

// Offer payload. The holder signs the preceding fields together with the
// handshake transcript hash, so a tampered offer never validates.
struct OfferBody {
  Bytes vp_bytes;
  Bytes dvp_bytes;
  uint32_t quota = 0;
  Bytes fresh_nonce;
  Bytes offer_sig;
};

Bytes encode_offer_body(const OfferBody& body);
OfferBody decode_offer_body(BytesView in);  // throws CodecError
Bytes offer_signing_payload(const OfferBody& body, BytesView transcript_hash);

// Request/response bodies: u32 count, then per element a u8 length and the
// encoding. Body size is exactly 4 + count * (encoding length + 1).
Bytes encode_element_list(const std::vector<GroupElement>& elements);
std::vector<GroupElement> decode_element_list(BytesView in);  // throws CodecError

enum class WireErrorCode : uint32_t {
  quota_exceeded = 1,
  invalid_element = 2,
  session_mismatch = 3,
  rejected = 4,
  internal = 5,
};

struct ErrorBody {
  WireErrorCode code = WireErrorCode::internal;
  std::string detail;  // fixed per-code wording, never claim-dependent
};

Bytes encode_error_body(const ErrorBody& body);
ErrorBody decode_error_body(BytesView in);  // throws CodecError

}  // namespace codssi
