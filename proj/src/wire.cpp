#include "codssi/wire.hpp"

namespace codssi {
namespace {

bool known_kind(uint8_t k) {
  return k >= static_cast<uint8_t>(FrameKind::offer) &&
         k <= static_cast<uint8_t>(FrameKind::close);
}

}  // namespace

Bytes encode_frame(const Frame& frame) {
  if (frame.body.size() > kMaxBodySize) throw BodyTooLarge();
  if (frame.session_id.size() > kMaxSessionIdSize) {
    throw Error("session id too long");
  }
  if ((frame.kind == FrameKind::offer) != frame.session_id.empty()) {
    throw Error("session id must be absent on offers and present elsewhere");
  }
  Writer w;
  w.u8(frame.version);
  w.u8(static_cast<uint8_t>(frame.kind));
  w.bytes(frame.session_id);
  w.bytes(frame.body);
  return w.take();
}

FrameDecode decode_frame(BytesView in) {
  FrameDecode out;
  try {
    Reader r(in);
    Frame f;
    f.version = r.u8();
    if (f.version != kProtocolVersion) {
      out.error_position = 0;
      out.error = "unsupported version";
      return out;
    }
    uint8_t kind = r.u8();
    if (!known_kind(kind)) {
      out.error_position = 1;
      out.error = "unknown frame kind";
      return out;
    }
    f.kind = static_cast<FrameKind>(kind);
    uint32_t sid_len = r.u32();
    if (sid_len > kMaxSessionIdSize) {
      out.error_position = r.position();
      out.error = "session id too long";
      return out;
    }
    BytesView sid = r.raw(sid_len);
    f.session_id.assign(sid.begin(), sid.end());
    if ((f.kind == FrameKind::offer) != f.session_id.empty()) {
      out.error_position = r.position();
      out.error = "session id presence violates frame kind";
      return out;
    }
    uint32_t body_len = r.u32();
    if (body_len > kMaxBodySize) {
      out.error_position = r.position();
      out.error = "body too large";
      return out;
    }
    BytesView body = r.raw(body_len);
    f.body.assign(body.begin(), body.end());
    r.expect_end();
    out.frame = std::move(f);
    return out;
  } catch (const CodecError& e) {
    out.error_position = e.position();
    out.error = e.what();
    return out;
  }
}

Bytes encode_offer_body(const OfferBody& body) {
  Writer w;
  w.bytes(body.vp_bytes);
  w.bytes(body.dvp_bytes);
  w.u32(body.quota);
  w.bytes(body.fresh_nonce);
  w.bytes(body.offer_sig);
  return w.take();
}

OfferBody decode_offer_body(BytesView in) {
  Reader r(in);
  OfferBody b;
  b.vp_bytes = r.bytes();
  b.dvp_bytes = r.bytes();
  b.quota = r.u32();
  b.fresh_nonce = r.bytes();
  b.offer_sig = r.bytes();
  r.expect_end();
  return b;
}

Bytes offer_signing_payload(const OfferBody& body, BytesView transcript_hash) {
  Writer w;
  w.str("CODSSI-OFFER-v1");
  w.bytes(body.vp_bytes);
  w.bytes(body.dvp_bytes);
  w.u32(body.quota);
  w.bytes(body.fresh_nonce);
  w.bytes(transcript_hash);
  return w.take();
}

Bytes encode_element_list(const std::vector<GroupElement>& elements) {
  if (elements.empty()) throw Error("element list must be non-empty");
  Writer w;
  w.u32(static_cast<uint32_t>(elements.size()));
  for (const auto& e : elements) {
    if (e.encoding.empty() || e.encoding.size() > 255) {
      throw Error("element encoding length out of range");
    }
    w.u8(static_cast<uint8_t>(e.encoding.size()));
    w.raw(e.encoding);
  }
  return w.take();
}

std::vector<GroupElement> decode_element_list(BytesView in) {
  Reader r(in);
  uint32_t count = r.u32();
  if (count == 0) throw CodecError("empty element list", 0);
  if (count > kMaxBodySize / 2) throw CodecError("element count too large", 0);
  std::vector<GroupElement> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    uint8_t len = r.u8();
    if (len == 0) throw CodecError("zero-length element", r.position());
    BytesView enc = r.raw(len);
    GroupElement e;
    e.encoding.assign(enc.begin(), enc.end());
    out.push_back(std::move(e));
  }
  r.expect_end();
  return out;
}

Bytes encode_error_body(const ErrorBody& body) {
  Writer w;
  w.u32(static_cast<uint32_t>(body.code));
  w.str(body.detail);
  return w.take();
}

ErrorBody decode_error_body(BytesView in) {
  Reader r(in);
  ErrorBody b;
  uint32_t code = r.u32();
  if (code < 1 || code > 5) throw CodecError("unknown error code", 0);
  b.code = static_cast<WireErrorCode>(code);
  b.detail = r.str();
  r.expect_end();
  return b;
}

}  // namespace codssi
