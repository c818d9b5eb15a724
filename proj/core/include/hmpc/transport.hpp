#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hmpc/prf.hpp"
#include "hmpc/ring.hpp"

namespace hmpc {

enum class Phase : std::uint8_t { prep = 0, online = 1, verify = 2 };
constexpr int kPhases = 3;
const char* phase_name(Phase p);

class AbortError : public std::runtime_error {
 public:
  AbortError(Phase phase, std::string tag, const std::string& reason, std::vector<int> suspects = {})
      : std::runtime_error(reason), phase(phase), tag(std::move(tag)), suspects(std::move(suspects)) {}
  Phase phase;
  std::string tag;
  std::vector<int> suspects;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FrameKind : std::uint8_t { data = 0, abort = 1, tombstone = 2 };

struct Frame {
  FrameKind kind = FrameKind::data;
  Phase phase = Phase::prep;
  std::uint16_t seq = 0;
  std::vector<std::uint8_t> payload;
};

// Byte transport between endpoints 0..size-1.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual int id() const = 0;
  virtual int size() const = 0;
  virtual void send(int to, Frame&& f) = 0;
  virtual Frame recv(int from) = 0;
};

// Blocking FIFO per ordered pair, shared by the in-memory and TCP backends.
class Mailbox {
 public:
  explicit Mailbox(int size, std::chrono::milliseconds timeout);
  void push(int from, Frame&& f);
  Frame pop(int from);
  void close(int from, const std::string& why);

 private:
  struct Slot {
    std::deque<Frame> q;
    bool closed = false;
    std::string why;
  };
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Slot> slots_;
  std::chrono::milliseconds timeout_;
};

class MemNetwork {
 public:
  explicit MemNetwork(int size, std::chrono::milliseconds timeout = std::chrono::milliseconds(300000));
  Endpoint& endpoint(int i);
  int size() const { return static_cast<int>(boxes_.size()); }

 private:
  class Ep;
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  std::vector<std::unique_ptr<Endpoint>> eps_;
};

struct RosterEntry {
  std::string host;
  int port = 0;
};
std::vector<RosterEntry> load_roster(const std::string& path);
std::vector<RosterEntry> local_roster(int size, int base_port);

// One TCP connection per peer, a reader thread per connection feeding a Mailbox.
class TcpEndpoint : public Endpoint {
 public:
  TcpEndpoint(int id, const std::vector<RosterEntry>& roster,
              std::chrono::milliseconds timeout = std::chrono::milliseconds(300000));
  ~TcpEndpoint() override;
  int id() const override { return id_; }
  int size() const override { return static_cast<int>(fds_.size()); }
  void send(int to, Frame&& f) override;
  Frame recv(int from) override;

 private:
  void reader(int peer);
  int id_;
  std::vector<int> fds_;
  std::vector<std::unique_ptr<std::mutex>> wmu_;
  Mailbox box_;
  std::vector<std::thread> readers_;
};

// Bit-exact serialization; elements of arbitrary width are packed without padding.
class Writer {
 public:
  void put(std::uint64_t v, int bits);
  void put128(u128 v, int bits);
  void put_words(const std::uint64_t* v, std::size_t n);
  void put_bytes(const void* p, std::size_t n);
  void reserve_bytes(std::size_t n);
  std::uint64_t bits() const { return bits_; }
  // Trims the internal slack; the result holds exactly ceil(bits / 8) bytes.
  std::vector<std::uint8_t>& bytes();
  bool empty() const { return bits_ == 0; }

 private:
  std::vector<std::uint8_t> buf_;
  std::uint64_t bits_ = 0;
};

class Reader {
 public:
  Reader() = default;
  explicit Reader(std::vector<std::uint8_t> b) : buf_(std::move(b)) {}
  std::uint64_t get(int bits);
  u128 get128(int bits);
  void get_words(std::uint64_t* out, std::size_t n);
  void get_bytes(void* p, std::size_t n);
  std::uint64_t remaining_bits() const { return buf_.size() * 8 - pos_; }
  const std::vector<std::uint8_t>& raw() const { return buf_; }

 private:
  void need(std::uint64_t bits) const;
  std::vector<std::uint8_t> buf_;
  std::uint64_t pos_ = 0;
};

struct MeterCell {
  std::uint64_t bits = 0;
  std::uint64_t bytes = 0;
  std::uint64_t messages = 0;
  std::uint64_t rounds = 0;
  std::uint64_t modeled_bits = 0;
};

// Per-party counters keyed by (phase, tag). Traffic with the dealer is kept apart.
class Meter {
 public:
  void sent(Phase p, const std::string& tag, std::uint64_t bits, std::uint64_t bytes);
  void round(Phase p, const std::string& tag);
  void modeled(Phase p, const std::string& tag, std::uint64_t bits);
  void dealer(std::uint64_t bytes) { dealer_bytes_ += bytes; }
  void add(Phase p, const std::string& tag, const MeterCell& c);
  const std::map<std::pair<int, std::string>, MeterCell>& cells() const { return cells_; }
  MeterCell total(Phase p) const;
  MeterCell total(Phase p, const std::string& tag) const;
  std::uint64_t dealer_bytes() const { return dealer_bytes_; }
  void merge(const Meter& o);

 private:
  std::map<std::pair<int, std::string>, MeterCell> cells_;
  std::uint64_t dealer_bytes_ = 0;
};

struct FaultRule {
  enum class Action { flip_bit, add, replace, drop };
  int from = -1;
  int to = -1;
  int phase = -1;
  std::string tag;
  int nth = 0;  // index among matching messages; -1 matches every one
  Action action = Action::flip_bit;
  std::uint64_t offset = 0;  // bit offset for flip_bit, 64-bit element index otherwise
  std::uint64_t value = 1;
};

FaultRule parse_fault_rule(const std::string& text);

class FaultInjector {
 public:
  void add(FaultRule r);
  bool empty() const { return rules_.empty(); }
  // Mutates payload in place; returns false when the message is to be dropped.
  bool apply(int from, int to, Phase p, const std::string& tag, std::vector<std::uint8_t>& payload,
             std::uint64_t bits);
  std::vector<std::string> log() const;
  std::size_t fired() const;

 private:
  mutable std::mutex mu_;
  std::vector<FaultRule> rules_;
  std::vector<int> seen_;
  std::vector<std::string> log_;
};

class Comm;

// One synchronous round: queue messages with to(), declare senders with expect(), then run().
class Round {
 public:
  Round(Comm& c, Phase p, std::string tag);
  Writer& to(int peer);
  void expect(int peer);
  void expect_all_but_me();
  void run();
  bool has(int peer) const;
  Reader& from(int peer);
  // Abort frames count as missing messages instead of raising.
  void tolerate_aborts() { tolerant_ = true; }

 private:
  Comm& c_;
  bool tolerant_ = false;
  Phase phase_;
  std::string tag_;
  std::map<int, Writer> out_;
  std::vector<int> expect_;
  std::map<int, Reader> in_;
  std::vector<int> missing_;
  bool done_ = false;
};

class Comm {
 public:
  Comm(Endpoint& ep, int parties, FaultInjector* faults = nullptr, bool transcript = false);
  int id() const { return ep_.id(); }
  int parties() const { return parties_; }
  int dealer_id() const { return parties_; }
  Meter& meter() { return meter_; }
  const Meter& meter() const { return meter_; }
  Round round(Phase p, const std::string& tag) { return Round(*this, p, tag); }

  // Unmetered point-to-point traffic with the dealer endpoint.
  void dealer_send(Writer& w);
  Reader dealer_recv();

  // Tell every peer that this party aborted; peers blocked in a round will observe it.
  void broadcast_abort();
  Digest transcript_digest();

 private:
  friend class Round;
  void deliver(int to, Phase p, const std::string& tag, Writer& w);
  std::optional<Reader> collect(int from, Phase p, const std::string& tag);
  Endpoint& ep_;
  int parties_;
  FaultInjector* faults_;
  Meter meter_;
  std::vector<std::uint16_t> send_seq_, recv_seq_;
  std::unique_ptr<Hasher> transcript_;
  bool aborted_ = false;
  std::vector<bool> dead_;
};

}  // namespace hmpc
