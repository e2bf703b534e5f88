#include <gtest/gtest.h>

#include <vector>

#include "codssi/errors.hpp"
#include "codssi/oprf.hpp"
#include "codssi/rng.hpp"
#include "codssi/wire.hpp"

using namespace codssi;

namespace {

Frame sample_frame() {
  Frame f;
  f.kind = FrameKind::oprf_request;
  f.session_id = Bytes(32, 0xAB);
  f.body = to_bytes("request body");
  return f;
}

std::vector<GroupElement> secp_elements(size_t n, RandomSource& rng) {
  auto g = secp256k1_group();
  std::vector<GroupElement> out;
  for (size_t i = 0; i < n; ++i) {
    Digest x = commit(rng.bytes(8), rng.bytes(8));
    out.push_back(g->hash_to_group(x));
  }
  return out;
}

}  // namespace

TEST(Frame, RoundtripProperty) {
  SeededRandom rng(42);
  const FrameKind kinds[] = {FrameKind::offer, FrameKind::oprf_request,
                             FrameKind::oprf_response, FrameKind::error,
                             FrameKind::close};
  for (int i = 0; i < 500; ++i) {
    Frame f;
    f.kind = kinds[rng.next_u64() % 5];
    f.session_id = f.kind == FrameKind::offer
                       ? Bytes{}
                       : rng.bytes(1 + rng.next_u64() % kMaxSessionIdSize);
    f.body = rng.bytes(rng.next_u64() % 300);
    Bytes enc = encode_frame(f);
    FrameDecode dec = decode_frame(enc);
    ASSERT_TRUE(dec.frame.has_value()) << dec.error;
    EXPECT_EQ(*dec.frame, f);
  }
}

TEST(Frame, EveryTruncationDiagnoses) {
  Bytes enc = encode_frame(sample_frame());
  for (size_t len = 0; len < enc.size(); ++len) {
    FrameDecode dec = decode_frame(BytesView(enc.data(), len));
    EXPECT_FALSE(dec.frame.has_value()) << "length " << len;
    EXPECT_FALSE(dec.error.empty());
  }
  // Trailing garbage is also not a valid frame.
  Bytes extended = enc;
  extended.push_back(0x00);
  EXPECT_FALSE(decode_frame(extended).frame.has_value());
}

TEST(Frame, RandomBufferFuzz) {
  SeededRandom rng(43);
  size_t decoded = 0;
  for (int i = 0; i < 20000; ++i) {
    Bytes buf = rng.bytes(rng.next_u64() % 64);
    FrameDecode dec = decode_frame(buf);  // must not crash or throw
    if (dec.frame.has_value()) ++decoded;
  }
  // Random bytes essentially never parse: version, kind, both length fields
  // and the sid rule all have to line up.
  EXPECT_LT(decoded, 5u);
}

TEST(Frame, VersionAndKindGating) {
  Bytes enc = encode_frame(sample_frame());
  Bytes t = enc;
  t[0] = 2;
  EXPECT_FALSE(decode_frame(t).frame.has_value());
  EXPECT_EQ(decode_frame(t).error_position, 0u);

  for (uint8_t kind : {0x00, 0x06, 0x7f, 0xff}) {
    t = enc;
    t[1] = kind;
    EXPECT_FALSE(decode_frame(t).frame.has_value()) << int(kind);
    EXPECT_EQ(decode_frame(t).error_position, 1u);
  }
}

TEST(Frame, SessionIdPresenceRule) {
  Frame offer;
  offer.kind = FrameKind::offer;
  offer.body = to_bytes("x");
  EXPECT_TRUE(decode_frame(encode_frame(offer)).frame.has_value());

  offer.session_id = Bytes(8, 0x01);
  EXPECT_THROW(encode_frame(offer), Error);

  Frame request = sample_frame();
  request.session_id.clear();
  EXPECT_THROW(encode_frame(request), Error);

  // Hand-built bytes that violate the rule must not decode either.
  Frame shell = sample_frame();
  Bytes enc = encode_frame(shell);
  enc[1] = static_cast<uint8_t>(FrameKind::offer);  // offer with 32-byte sid
  EXPECT_FALSE(decode_frame(enc).frame.has_value());
}

TEST(Frame, SizeLimits) {
  Frame f = sample_frame();
  f.session_id = Bytes(kMaxSessionIdSize + 1, 0x01);
  EXPECT_THROW(encode_frame(f), Error);

  f = sample_frame();
  f.body = Bytes(kMaxBodySize + 1, 0x00);
  EXPECT_THROW(encode_frame(f), BodyTooLarge);

  // Header claiming an oversized body is rejected before any allocation.
  Bytes enc = encode_frame(sample_frame());
  // Body length field sits after version, kind, u32 sid length, sid bytes.
  size_t body_len_at = 2 + 4 + 32;
  enc[body_len_at] = 0xff;
  enc[body_len_at + 1] = 0xff;
  enc[body_len_at + 2] = 0xff;
  enc[body_len_at + 3] = 0xff;
  FrameDecode dec = decode_frame(enc);
  EXPECT_FALSE(dec.frame.has_value());
  EXPECT_EQ(dec.error, "body too large");
}

TEST(ElementList, ExactBodySizes) {
  SeededRandom rng(44);
  EXPECT_THROW(encode_element_list({}), Error);
  for (size_t n : {1u, 2u, 7u, 32u}) {
    auto elems = secp_elements(n, rng);
    Bytes body = encode_element_list(elems);
    EXPECT_EQ(body.size(), 4 + n * (33 + 1));
    auto back = decode_element_list(body);
    EXPECT_EQ(back, elems);
  }

  auto g = toy_group();
  std::vector<GroupElement> toy{GroupElement{Bytes{4}}, GroupElement{Bytes{9}}};
  Bytes body = encode_element_list(toy);
  EXPECT_EQ(body.size(), 4 + 2 * (1 + 1));
  EXPECT_EQ(decode_element_list(body), toy);
}

TEST(ElementList, MalformedInputsThrow) {
  SeededRandom rng(45);
  Bytes body = encode_element_list(secp_elements(3, rng));

  for (size_t len = 0; len < body.size(); ++len) {
    EXPECT_THROW(decode_element_list(BytesView(body.data(), len)), CodecError)
        << "length " << len;
  }

  Bytes trailing = body;
  trailing.push_back(0x00);
  EXPECT_THROW(decode_element_list(trailing), CodecError);

  Bytes lying_count = body;
  lying_count[3] = 4;  // count says 4, payload holds 3
  EXPECT_THROW(decode_element_list(lying_count), CodecError);

  Bytes huge_count(4, 0xff);
  EXPECT_THROW(decode_element_list(huge_count), CodecError);
}

TEST(OfferBody, Roundtrip) {
  OfferBody body;
  body.vp_bytes = to_bytes("presentation bytes");
  body.dvp_bytes = to_bytes("encrypted data bytes");
  body.quota = 7;
  body.fresh_nonce = Bytes(32, 0x5c);
  body.offer_sig = Bytes(64, 0x6d);

  Bytes enc = encode_offer_body(body);
  OfferBody back = decode_offer_body(enc);
  EXPECT_EQ(back.vp_bytes, body.vp_bytes);
  EXPECT_EQ(back.dvp_bytes, body.dvp_bytes);
  EXPECT_EQ(back.quota, body.quota);
  EXPECT_EQ(back.fresh_nonce, body.fresh_nonce);
  EXPECT_EQ(back.offer_sig, body.offer_sig);

  for (size_t len = 0; len < enc.size(); ++len) {
    EXPECT_THROW(decode_offer_body(BytesView(enc.data(), len)), CodecError);
  }
}

TEST(OfferBody, SigningPayloadBindsEverything) {
  OfferBody body;
  body.vp_bytes = to_bytes("vp");
  body.dvp_bytes = to_bytes("dvp");
  body.quota = 3;
  body.fresh_nonce = Bytes(32, 0x01);
  Bytes transcript(64, 0x02);
  Bytes base = offer_signing_payload(body, transcript);

  OfferBody t = body;
  t.vp_bytes[0] ^= 1;
  EXPECT_NE(offer_signing_payload(t, transcript), base);
  t = body;
  t.dvp_bytes[0] ^= 1;
  EXPECT_NE(offer_signing_payload(t, transcript), base);
  t = body;
  t.quota = 4;
  EXPECT_NE(offer_signing_payload(t, transcript), base);
  t = body;
  t.fresh_nonce[0] ^= 1;
  EXPECT_NE(offer_signing_payload(t, transcript), base);
  Bytes other_transcript = transcript;
  other_transcript[0] ^= 1;
  EXPECT_NE(offer_signing_payload(body, other_transcript), base);

  // The signature field itself is outside the signed payload.
  t = body;
  t.offer_sig = Bytes(64, 0x0f);
  EXPECT_EQ(offer_signing_payload(t, transcript), base);
}

TEST(ErrorBody, RoundtripAllCodes) {
  for (WireErrorCode code :
       {WireErrorCode::quota_exceeded, WireErrorCode::invalid_element,
        WireErrorCode::session_mismatch, WireErrorCode::rejected,
        WireErrorCode::internal}) {
    ErrorBody body{code, "fixed wording"};
    ErrorBody back = decode_error_body(encode_error_body(body));
    EXPECT_EQ(back.code, code);
    EXPECT_EQ(back.detail, body.detail);
  }
  EXPECT_THROW(decode_error_body(BytesView()), CodecError);
}
