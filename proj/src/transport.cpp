#include "codssi/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>

#include "codssi/sha3.hpp"

namespace codssi {
namespace {

constexpr auto kDefaultReadTimeout = std::chrono::seconds(30);
constexpr std::string_view kHelloMagic = "CODSSI-HS1";
constexpr size_t kHandshakeNonceBytes = 32;
constexpr size_t kMaxBlobSize = kMaxBodySize + 4096;

// ---- loopback ----

struct PipeBuffer {
  std::mutex m;
  std::condition_variable cv;
  std::deque<uint8_t> data;
  bool closed = false;
};

class LoopbackStream final : public ByteStream {
 public:
  LoopbackStream(std::shared_ptr<PipeBuffer> in, std::shared_ptr<PipeBuffer> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  ~LoopbackStream() override { close(); }

  bool read_exact(std::span<uint8_t> out) override {
    size_t got = 0;
    std::unique_lock<std::mutex> lock(in_->m);
    while (got < out.size()) {
      if (in_->data.empty()) {
        if (in_->closed) {
          if (got == 0) return false;
          throw TransportError("stream closed mid-message");
        }
        if (!in_->cv.wait_for(lock, timeout_, [&] {
              return !in_->data.empty() || in_->closed;
            })) {
          throw TransportError("read timed out");
        }
        continue;
      }
      out[got++] = in_->data.front();
      in_->data.pop_front();
    }
    return true;
  }

  void write_all(BytesView data) override {
    std::lock_guard<std::mutex> lock(out_->m);
    if (out_->closed) throw TransportError("stream closed");
    out_->data.insert(out_->data.end(), data.begin(), data.end());
    out_->cv.notify_all();
  }

  void close() override {
    for (auto& buf : {in_, out_}) {
      std::lock_guard<std::mutex> lock(buf->m);
      buf->closed = true;
      buf->cv.notify_all();
    }
  }

  void set_read_timeout(std::chrono::milliseconds timeout) override {
    timeout_ = timeout;
  }

 private:
  std::shared_ptr<PipeBuffer> in_;
  std::shared_ptr<PipeBuffer> out_;
  std::chrono::milliseconds timeout_ = kDefaultReadTimeout;
};

struct LoopbackHub {
  std::mutex m;
  std::condition_variable cv;
  // name -> pending server-side ends awaiting accept
  std::map<std::string, std::deque<std::unique_ptr<ByteStream>>> pending;
  std::map<std::string, int> listeners;  // refcount of active listeners

  static LoopbackHub& instance() {
    static LoopbackHub hub;
    return hub;
  }
};

class LoopbackListener final : public Listener {
 public:
  explicit LoopbackListener(std::string name) : name_(std::move(name)) {
    auto& hub = LoopbackHub::instance();
    std::lock_guard<std::mutex> lock(hub.m);
    hub.listeners[name_]++;
  }

  ~LoopbackListener() override { shutdown(); }

  std::unique_ptr<ByteStream> accept() override {
    auto& hub = LoopbackHub::instance();
    std::unique_lock<std::mutex> lock(hub.m);
    hub.cv.wait(lock, [&] {
      return down_ || !hub.pending[name_].empty();
    });
    if (down_ && hub.pending[name_].empty()) {
      throw TransportError("listener shut down");
    }
    auto stream = std::move(hub.pending[name_].front());
    hub.pending[name_].pop_front();
    return stream;
  }

  void shutdown() override {
    auto& hub = LoopbackHub::instance();
    std::lock_guard<std::mutex> lock(hub.m);
    if (!down_) {
      down_ = true;
      hub.listeners[name_]--;
    }
    hub.cv.notify_all();
  }

  std::string bound_endpoint() const override { return "loop:" + name_; }

 private:
  std::string name_;
  bool down_ = false;
};

// ---- tcp ----

class TcpStream final : public ByteStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {
    set_read_timeout(kDefaultReadTimeout);
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~TcpStream() override { close(); }

  bool read_exact(std::span<uint8_t> out) override {
    size_t got = 0;
    while (got < out.size()) {
      ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
      if (n == 0) {
        if (got == 0) return false;
        throw TransportError("connection closed mid-message");
      }
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) {
          throw TransportError("read timed out");
        }
        throw TransportError(std::string("recv failed: ") + std::strerror(errno));
      }
      got += static_cast<size_t>(n);
    }
    return true;
  }

  void write_all(BytesView data) override {
    size_t sent = 0;
    while (sent < data.size()) {
      ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("send failed: ") + std::strerror(errno));
      }
      sent += static_cast<size_t>(n);
    }
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

  void set_read_timeout(std::chrono::milliseconds timeout) override {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  }

 private:
  int fd_;
};

class TcpListener final : public Listener {
 public:
  TcpListener(const std::string& host, uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw TransportError("socket creation failed");
    int one = 1;
    setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (host.empty() || host == "0.0.0.0" || host == "*") {
      addr.sin_addr.s_addr = INADDR_ANY;
    } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd_);
      throw TransportError("listen host must be an IPv4 address");
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
        ::listen(fd_, 16) < 0) {
      ::close(fd_);
      throw TransportError(std::string("bind/listen failed: ") + std::strerror(errno));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    host_ = host.empty() ? "0.0.0.0" : host;
  }

  ~TcpListener() override { shutdown(); }

  std::unique_ptr<ByteStream> accept() override {
    int client = ::accept(fd_, nullptr, nullptr);
    if (client < 0) {
      throw TransportError(std::string("accept failed: ") + std::strerror(errno));
    }
    return std::make_unique<TcpStream>(client);
  }

  void shutdown() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

  std::string bound_endpoint() const override {
    return "tcp:" + host_ + ":" + std::to_string(port_);
  }

 private:
  int fd_ = -1;
  std::string host_;
  uint16_t port_ = 0;
};

std::unique_ptr<ByteStream> tcp_connect(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) {
    throw TransportError("host resolution failed: " + host);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw TransportError("connect failed: " + host + ":" + std::to_string(port));
  return std::make_unique<TcpStream>(fd);
}

struct Endpoint {
  enum class Kind { loop, tcp } kind;
  std::string name_or_host;
  uint16_t port = 0;
};

Endpoint parse_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("loop:", 0) == 0) {
    std::string name = endpoint.substr(5);
    if (name.empty()) throw TransportError("empty loopback name");
    return Endpoint{Endpoint::Kind::loop, name, 0};
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    std::string rest = endpoint.substr(4);
    size_t colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= rest.size()) {
      throw TransportError("tcp endpoint must be tcp:<host>:<port>");
    }
    int port = std::stoi(rest.substr(colon + 1));
    if (port < 0 || port > 65535) throw TransportError("port out of range");
    return Endpoint{Endpoint::Kind::tcp, rest.substr(0, colon),
                    static_cast<uint16_t>(port)};
  }
  throw TransportError("endpoint must start with loop: or tcp:");
}

// ---- handshake ----

struct Hello {
  std::string id;
  Bytes nonce;
};

Bytes encode_client_hello(const Hello& h) {
  Writer w;
  w.str(kHelloMagic);
  w.str(h.id);
  w.bytes(h.nonce);
  return w.take();
}

Hello decode_client_hello(BytesView in) {
  Reader r(in);
  if (r.str() != kHelloMagic) throw HandshakeFailure("peer is not speaking this protocol");
  Hello h;
  h.id = r.str();
  h.nonce = r.bytes();
  r.expect_end();
  if (h.id.empty() || h.nonce.size() != kHandshakeNonceBytes) {
    throw HandshakeFailure("malformed hello");
  }
  return h;
}

Bytes server_sig_payload(BytesView client_hello, BytesView server_core) {
  Bytes p = to_bytes("CODSSI-HS-server");
  append_framed(p, client_hello);
  append_framed(p, server_core);
  return p;
}

Bytes client_sig_payload(BytesView client_hello, BytesView server_hello) {
  Bytes p = to_bytes("CODSSI-HS-client");
  append_framed(p, client_hello);
  append_framed(p, server_hello);
  return p;
}

Bytes transcript_hash(BytesView client_hello, BytesView server_hello,
                      BytesView client_auth) {
  Sha3_512 h;
  h.update(to_bytes("CODSSI-HS-transcript"));
  h.update_framed(client_hello).update_framed(server_hello).update_framed(client_auth);
  Sha3Digest d = h.finish();
  return Bytes(d.begin(), d.end());
}

Bytes require_peer_key(const KeyDirectory& directory, const std::string& id) {
  auto key = directory.lookup(id);
  if (!key) throw HandshakeFailure("peer not in key directory: " + id);
  return *key;
}

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> loopback_pair() {
  auto ab = std::make_shared<PipeBuffer>();
  auto ba = std::make_shared<PipeBuffer>();
  return {std::make_unique<LoopbackStream>(ba, ab),
          std::make_unique<LoopbackStream>(ab, ba)};
}

std::unique_ptr<Listener> listen_endpoint(const std::string& endpoint) {
  Endpoint ep = parse_endpoint(endpoint);
  if (ep.kind == Endpoint::Kind::loop) {
    return std::make_unique<LoopbackListener>(ep.name_or_host);
  }
  return std::make_unique<TcpListener>(ep.name_or_host, ep.port);
}

std::unique_ptr<ByteStream> connect_endpoint(const std::string& endpoint) {
  Endpoint ep = parse_endpoint(endpoint);
  if (ep.kind == Endpoint::Kind::tcp) {
    return tcp_connect(ep.name_or_host, ep.port);
  }
  auto& hub = LoopbackHub::instance();
  auto [client_end, server_end] = loopback_pair();
  {
    std::lock_guard<std::mutex> lock(hub.m);
    if (hub.listeners[ep.name_or_host] <= 0) {
      throw TransportError("no listener on " + endpoint);
    }
    hub.pending[ep.name_or_host].push_back(std::move(server_end));
    hub.cv.notify_all();
  }
  return std::move(client_end);
}

FrameChannel::FrameChannel(std::unique_ptr<ByteStream> stream)
    : stream_(std::move(stream)) {}

void FrameChannel::send_blob(BytesView blob) {
  Bytes msg;
  append_u32_be(msg, static_cast<uint32_t>(blob.size()));
  msg.insert(msg.end(), blob.begin(), blob.end());
  stream_->write_all(msg);
}

Bytes FrameChannel::recv_blob() {
  std::array<uint8_t, 4> len_bytes{};
  if (!stream_->read_exact(len_bytes)) {
    return {};
  }
  uint32_t len = read_u32_be(len_bytes);
  if (len == 0 || len > kMaxBlobSize) throw TransportError("message size out of range");
  Bytes blob(len);
  if (!stream_->read_exact(blob)) {
    throw TransportError("stream closed mid-message");
  }
  return blob;
}

HandshakeResult FrameChannel::handshake_client(const KeyDirectory& directory,
                                               const SigningKey& my_key,
                                               const std::string& my_id,
                                               RandomSource& rng) {
  Hello mine{my_id, rng.bytes(kHandshakeNonceBytes)};
  Bytes client_hello = encode_client_hello(mine);
  send_blob(client_hello);

  Bytes server_hello = recv_blob();
  if (server_hello.empty()) throw HandshakeFailure("peer closed during handshake");
  std::string server_id;
  Bytes server_core;
  try {
    Reader r(server_hello);
    server_id = r.str();
    Bytes server_nonce = r.bytes();
    if (server_nonce.size() != kHandshakeNonceBytes) {
      throw HandshakeFailure("malformed hello");
    }
    Writer core;
    core.str(server_id);
    core.bytes(server_nonce);
    server_core = core.take();
    Bytes sig = r.bytes();
    r.expect_end();
    Bytes server_key = require_peer_key(directory, server_id);
    if (!signature_verify(server_key, server_sig_payload(client_hello, server_core),
                          sig)) {
      throw HandshakeFailure("server authentication failed");
    }
  } catch (const CodecError&) {
    throw HandshakeFailure("malformed handshake message");
  }

  Bytes client_auth =
      my_key.sign(client_sig_payload(client_hello, server_hello));
  send_blob(client_auth);

  return HandshakeResult{server_id,
                         transcript_hash(client_hello, server_hello, client_auth)};
}

HandshakeResult FrameChannel::handshake_server(const KeyDirectory& directory,
                                               const SigningKey& my_key,
                                               const std::string& my_id,
                                               RandomSource& rng) {
  Bytes client_hello = recv_blob();
  if (client_hello.empty()) throw HandshakeFailure("peer closed during handshake");
  Hello client;
  try {
    client = decode_client_hello(client_hello);
  } catch (const CodecError&) {
    throw HandshakeFailure("malformed handshake message");
  }
  Bytes client_key = require_peer_key(directory, client.id);

  Writer core;
  core.str(my_id);
  core.bytes(rng.bytes(kHandshakeNonceBytes));
  Bytes server_core = core.take();
  Bytes sig = my_key.sign(server_sig_payload(client_hello, server_core));
  Writer hello;
  hello.raw(server_core);
  hello.bytes(sig);
  Bytes server_hello = hello.take();
  send_blob(server_hello);

  Bytes client_auth = recv_blob();
  if (client_auth.empty()) throw HandshakeFailure("peer closed during handshake");
  if (!signature_verify(client_key, client_sig_payload(client_hello, server_hello),
                        client_auth)) {
    throw HandshakeFailure("client authentication failed");
  }

  return HandshakeResult{client.id,
                         transcript_hash(client_hello, server_hello, client_auth)};
}

void FrameChannel::send(const Frame& frame) { send_blob(encode_frame(frame)); }

std::optional<Frame> FrameChannel::recv() {
  Bytes blob = recv_blob();
  if (blob.empty()) return std::nullopt;
  FrameDecode d = decode_frame(blob);
  if (!d.frame) throw TransportError("malformed frame");
  return std::move(*d.frame);
}

void FrameChannel::close() { stream_->close(); }

}  // namespace codssi
