#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "codssi/directory.hpp"
#include "codssi/wire.hpp"

namespace codssi {

// Ordered, reliable byte pipe. read_exact blocks until the buffer is full;
// returns false only on clean end-of-stream before the first byte, throws
// TransportError on mid-object EOF, timeout, or transport failure.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual bool read_exact(std::span<uint8_t> out) = 0;
  virtual void write_all(BytesView data) = 0;
  virtual void close() = 0;

  virtual void set_read_timeout(std::chrono::milliseconds timeout) = 0;
};

// In-process pipe pair for tests and local runs.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> loopback_pair();

class Listener {
 public:
  virtual ~Listener() = default;
  virtual std::unique_ptr<ByteStream> accept() = 0;
  virtual void shutdown() = 0;
  virtual std::string bound_endpoint() const = 0;
};

// Endpoint syntax: "loop:<name>" or "tcp:<host>:<port>".
std::unique_ptr<Listener> listen_endpoint(const std::string& endpoint);
std::unique_ptr<ByteStream> connect_endpoint(const std::string& endpoint);

struct HandshakeResult {
  std::string peer_id;
  Bytes transcript_hash;
};

// Frame-granular channel over a byte stream. Handshake must run first; it
// mutually authenticates both parties against the directory and yields the
// transcript hash that session ids are derived from.
class FrameChannel {
 public:
  explicit FrameChannel(std::unique_ptr<ByteStream> stream);

  HandshakeResult handshake_client(const KeyDirectory& directory,
                                   const SigningKey& my_key, const std::string& my_id,
                                   RandomSource& rng);
  HandshakeResult handshake_server(const KeyDirectory& directory,
                                   const SigningKey& my_key, const std::string& my_id,
                                   RandomSource& rng);

  void send(const Frame& frame);
  // nullopt on clean end-of-stream. Malformed frames raise TransportError
  // with uniform wording.
  std::optional<Frame> recv();
  void close();

 private:
  Bytes recv_blob();
  void send_blob(BytesView blob);

  std::unique_ptr<ByteStream> stream_;
};

}  // namespace codssi
