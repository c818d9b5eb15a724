#include "hmpc/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hmpc {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::prep: return "preprocessing";
    case Phase::online: return "online";
    case Phase::verify: return "verification";
  }
  return "?";
}

Mailbox::Mailbox(int size, std::chrono::milliseconds timeout) : slots_(size), timeout_(timeout) {}

void Mailbox::push(int from, Frame&& f) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    slots_[from].q.push_back(std::move(f));
  }
  cv_.notify_all();
}

Frame Mailbox::pop(int from) {
  std::unique_lock<std::mutex> lk(mu_);
  auto& s = slots_[from];
  if (!cv_.wait_for(lk, timeout_, [&] { return !s.q.empty() || s.closed; }))
    throw TransportError("timed out waiting for party " + std::to_string(from));
  if (s.q.empty()) throw TransportError("connection to party " + std::to_string(from) + " closed: " + s.why);
  Frame f = std::move(s.q.front());
  s.q.pop_front();
  return f;
}

void Mailbox::close(int from, const std::string& why) {
  {
    std::lock_guard<std::mutex> lk(mu_);
    slots_[from].closed = true;
    slots_[from].why = why;
  }
  cv_.notify_all();
}

class MemNetwork::Ep : public Endpoint {
 public:
  Ep(MemNetwork& net, int id) : net_(net), id_(id) {}
  int id() const override { return id_; }
  int size() const override { return net_.size(); }
  void send(int to, Frame&& f) override { net_.boxes_.at(to)->push(id_, std::move(f)); }
  Frame recv(int from) override { return net_.boxes_[id_]->pop(from); }

 private:
  MemNetwork& net_;
  int id_;
};

MemNetwork::MemNetwork(int size, std::chrono::milliseconds timeout) {
  for (int i = 0; i < size; ++i) boxes_.push_back(std::make_unique<Mailbox>(size, timeout));
  for (int i = 0; i < size; ++i) eps_.push_back(std::make_unique<Ep>(*this, i));
}

Endpoint& MemNetwork::endpoint(int i) { return *eps_.at(i); }

std::vector<RosterEntry> load_roster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open roster " + path);
  auto j = nlohmann::json::parse(in);
  std::vector<RosterEntry> out;
  for (const auto& e : j.at("parties")) out.push_back({e.at("host").get<std::string>(), e.at("port").get<int>()});
  return out;
}

std::vector<RosterEntry> local_roster(int size, int base_port) {
  std::vector<RosterEntry> out;
  for (int i = 0; i < size; ++i) out.push_back({"127.0.0.1", base_port + i});
  return out;
}

namespace {

void write_all(int fd, const void* p, std::size_t n) {
  auto* c = static_cast<const std::uint8_t*>(p);
  while (n > 0) {
    ssize_t w = ::send(fd, c, n, MSG_NOSIGNAL);
    if (w <= 0) throw TransportError("socket write failed");
    c += w;
    n -= static_cast<std::size_t>(w);
  }
}

bool read_all(int fd, void* p, std::size_t n) {
  auto* c = static_cast<std::uint8_t*>(p);
  while (n > 0) {
    ssize_t r = ::recv(fd, c, n, 0);
    if (r <= 0) return false;
    c += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

int connect_to(const RosterEntry& e, std::chrono::milliseconds timeout) {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    addrinfo hints{}, *res = nullptr;
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (getaddrinfo(e.host.c_str(), std::to_string(e.port).c_str(), &hints, &res) == 0) {
      int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
      if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
        freeaddrinfo(res);
        return fd;
      }
      if (fd >= 0) ::close(fd);
      freeaddrinfo(res);
    }
    if (std::chrono::steady_clock::now() > deadline)
      throw TransportError("cannot connect to " + e.host + ":" + std::to_string(e.port));
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

constexpr std::uint8_t kAbortByte = 0xFF;
constexpr std::uint8_t kTombstoneByte = 0xFE;

}  // namespace

TcpEndpoint::TcpEndpoint(int id, const std::vector<RosterEntry>& roster, std::chrono::milliseconds timeout)
    : id_(id), fds_(roster.size(), -1), box_(static_cast<int>(roster.size()), timeout) {
  const int n = static_cast<int>(roster.size());
  for (int i = 0; i < n; ++i) wmu_.push_back(std::make_unique<std::mutex>());
  int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  int one = 1;
  setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(static_cast<std::uint16_t>(roster[id].port));
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(lfd, n) != 0) {
    ::close(lfd);
    throw TransportError("cannot listen on port " + std::to_string(roster[id].port));
  }
  for (int p = 0; p < id; ++p) {
    int fd = connect_to(roster[p], timeout);
    std::int32_t me = id;
    write_all(fd, &me, 4);
    fds_[p] = fd;
  }
  for (int k = id + 1; k < n; ++k) {
    int fd = ::accept(lfd, nullptr, nullptr);
    if (fd < 0) throw TransportError("accept failed");
    std::int32_t who = -1;
    if (!read_all(fd, &who, 4) || who <= id || who >= n || fds_[who] != -1) throw TransportError("bad handshake");
    fds_[who] = fd;
  }
  ::close(lfd);
  for (int p = 0; p < n; ++p) {
    if (p == id) continue;
    setsockopt(fds_[p], IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  for (int p = 0; p < n; ++p)
    if (p != id) readers_.emplace_back([this, p] { reader(p); });
}

TcpEndpoint::~TcpEndpoint() {
  for (int fd : fds_)
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  for (auto& t : readers_) t.join();
  for (int fd : fds_)
    if (fd >= 0) ::close(fd);
}

void TcpEndpoint::reader(int peer) {
  while (true) {
    std::uint8_t hdr[7];
    if (!read_all(fds_[peer], hdr, 7)) {
      box_.close(peer, "peer disconnected");
      return;
    }
    Frame f;
    std::uint8_t ph = hdr[0];
    std::memcpy(&f.seq, hdr + 1, 2);
    std::uint32_t len;
    std::memcpy(&len, hdr + 3, 4);
    f.payload.resize(len);
    if (len && !read_all(fds_[peer], f.payload.data(), len)) {
      box_.close(peer, "truncated frame");
      return;
    }
    if (ph == kAbortByte) {
      f.kind = FrameKind::abort;
    } else if (ph == kTombstoneByte) {
      f.kind = FrameKind::tombstone;
    } else {
      f.kind = FrameKind::data;
      f.phase = static_cast<Phase>(ph);
    }
    box_.push(peer, std::move(f));
  }
}

void TcpEndpoint::send(int to, Frame&& f) {
  std::uint8_t hdr[7];
  hdr[0] = f.kind == FrameKind::abort       ? kAbortByte
           : f.kind == FrameKind::tombstone ? kTombstoneByte
                                            : static_cast<std::uint8_t>(f.phase);
  std::memcpy(hdr + 1, &f.seq, 2);
  std::uint32_t len = static_cast<std::uint32_t>(f.payload.size());
  std::memcpy(hdr + 3, &len, 4);
  std::lock_guard<std::mutex> lk(*wmu_[to]);
  write_all(fds_[to], hdr, 7);
  if (len) write_all(fds_[to], f.payload.data(), len);
}

Frame TcpEndpoint::recv(int from) { return box_.pop(from); }

void Writer::reserve_bytes(std::size_t need) {
  if (buf_.size() < need) buf_.resize(std::max(need + 64, buf_.size() * 2));
}

std::vector<std::uint8_t>& Writer::bytes() {
  buf_.resize((bits_ + 7) >> 3);
  return buf_;
}

void Writer::put(std::uint64_t v, int bits) {
  if (bits < 64) v &= (std::uint64_t(1) << bits) - 1;
  const std::size_t at = bits_ >> 3;
  const unsigned shift = bits_ & 7;
  reserve_bytes(at + 16);
  u128 cur;
  std::memcpy(&cur, buf_.data() + at, 16);
  cur |= static_cast<u128>(v) << shift;
  std::memcpy(buf_.data() + at, &cur, 16);
  bits_ += bits;
}

void Writer::put128(u128 v, int bits) {
  if (bits <= 64) return put(static_cast<std::uint64_t>(v), bits);
  put(static_cast<std::uint64_t>(v), 64);
  put(static_cast<std::uint64_t>(v >> 64), bits - 64);
}

void Writer::put_words(const std::uint64_t* v, std::size_t n) {
  if ((bits_ & 7) == 0) {
    const std::size_t at = bits_ >> 3;
    reserve_bytes(at + 8 * n);
    std::memcpy(buf_.data() + at, v, 8 * n);
    bits_ += 64 * n;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) put(v[i], 64);
}

void Writer::put_bytes(const void* p, std::size_t n) {
  auto* c = static_cast<const std::uint8_t*>(p);
  if ((bits_ & 7) == 0) {
    const std::size_t at = bits_ >> 3;
    reserve_bytes(at + n);
    std::memcpy(buf_.data() + at, c, n);
    bits_ += 8 * n;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) put(c[i], 8);
}

void Reader::need(std::uint64_t bits) const {
  if (pos_ + bits > buf_.size() * 8) throw TransportError("message shorter than expected");
}

std::uint64_t Reader::get(int bits) {
  need(bits);
  const std::size_t at = pos_ >> 3;
  const unsigned shift = pos_ & 7;
  u128 x = 0;
  if (at + 16 <= buf_.size()) {
    std::memcpy(&x, buf_.data() + at, 16);
  } else {
    const std::size_t nb = buf_.size() - at;
    std::memcpy(&x, buf_.data() + at, nb);
  }
  pos_ += bits;
  std::uint64_t v = static_cast<std::uint64_t>(x >> shift);
  return bits < 64 ? v & ((std::uint64_t(1) << bits) - 1) : v;
}

u128 Reader::get128(int bits) {
  if (bits <= 64) return get(bits);
  u128 lo = get(64);
  u128 hi = get(bits - 64);
  return lo | (hi << 64);
}

void Reader::get_words(std::uint64_t* out, std::size_t n) {
  need(64 * n);
  if ((pos_ & 7) == 0) {
    std::memcpy(out, buf_.data() + pos_ / 8, 8 * n);
    pos_ += 64 * n;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = get(64);
}

void Reader::get_bytes(void* p, std::size_t n) {
  auto* c = static_cast<std::uint8_t*>(p);
  if ((pos_ & 7) == 0) {
    need(8 * n);
    std::memcpy(c, buf_.data() + pos_ / 8, n);
    pos_ += 8 * n;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<std::uint8_t>(get(8));
}

void Meter::sent(Phase p, const std::string& tag, std::uint64_t bits, std::uint64_t bytes) {
  auto& c = cells_[{static_cast<int>(p), tag}];
  c.bits += bits;
  c.bytes += bytes;
  c.messages += 1;
}

void Meter::round(Phase p, const std::string& tag) { cells_[{static_cast<int>(p), tag}].rounds += 1; }

void Meter::modeled(Phase p, const std::string& tag, std::uint64_t bits) {
  cells_[{static_cast<int>(p), tag}].modeled_bits += bits;
}

void Meter::add(Phase p, const std::string& tag, const MeterCell& c) {
  auto& d = cells_[{static_cast<int>(p), tag}];
  d.bits += c.bits;
  d.bytes += c.bytes;
  d.messages += c.messages;
  d.rounds += c.rounds;
  d.modeled_bits += c.modeled_bits;
}

MeterCell Meter::total(Phase p) const {
  MeterCell t;
  for (const auto& [k, c] : cells_) {
    if (k.first != static_cast<int>(p)) continue;
    t.bits += c.bits;
    t.bytes += c.bytes;
    t.messages += c.messages;
    t.rounds += c.rounds;
    t.modeled_bits += c.modeled_bits;
  }
  return t;
}

MeterCell Meter::total(Phase p, const std::string& tag) const {
  auto it = cells_.find({static_cast<int>(p), tag});
  return it == cells_.end() ? MeterCell{} : it->second;
}

void Meter::merge(const Meter& o) {
  for (const auto& [k, c] : o.cells_) {
    auto& d = cells_[k];
    d.bits += c.bits;
    d.bytes += c.bytes;
    d.messages += c.messages;
    d.rounds = std::max(d.rounds, c.rounds);
    d.modeled_bits += c.modeled_bits;
  }
  dealer_bytes_ += o.dealer_bytes_;
}

FaultRule parse_fault_rule(const std::string& text) {
  // key=value pairs separated by commas, e.g. "from=1,to=2,tag=eval,nth=0,action=add,offset=0,value=1"
  FaultRule r;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad fault rule item: " + item);
    std::string k = item.substr(0, eq), v = item.substr(eq + 1);
    if (k == "from") r.from = std::stoi(v);
    else if (k == "to") r.to = std::stoi(v);
    else if (k == "phase") r.phase = v == "prep" ? 0 : v == "online" ? 1 : v == "verify" ? 2 : std::stoi(v);
    else if (k == "tag") r.tag = v;
    else if (k == "nth") r.nth = std::stoi(v);
    else if (k == "offset") r.offset = std::stoull(v, nullptr, 0);
    else if (k == "value") r.value = std::stoull(v, nullptr, 0);
    else if (k == "action") {
      if (v == "flip") r.action = FaultRule::Action::flip_bit;
      else if (v == "add") r.action = FaultRule::Action::add;
      else if (v == "replace") r.action = FaultRule::Action::replace;
      else if (v == "drop") r.action = FaultRule::Action::drop;
      else throw std::invalid_argument("unknown fault action " + v);
    } else {
      throw std::invalid_argument("unknown fault rule key " + k);
    }
  }
  return r;
}

void FaultInjector::add(FaultRule r) {
  std::lock_guard<std::mutex> lk(mu_);
  rules_.push_back(std::move(r));
  seen_.push_back(0);
}

bool FaultInjector::apply(int from, int to, Phase p, const std::string& tag, std::vector<std::uint8_t>& payload,
                          std::uint64_t bits) {
  std::lock_guard<std::mutex> lk(mu_);
  bool keep = true;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    if (r.from >= 0 && r.from != from) continue;
    if (r.to >= 0 && r.to != to) continue;
    if (r.phase >= 0 && r.phase != static_cast<int>(p)) continue;
    if (!r.tag.empty() && r.tag != tag) continue;
    int k = seen_[i]++;
    if (r.nth >= 0 && k != r.nth) continue;
    std::ostringstream msg;
    msg << "fault " << i << " on " << from << "->" << to << " " << phase_name(p) << "/" << tag << " #" << k;
    switch (r.action) {
      case FaultRule::Action::drop:
        keep = false;
        msg << " dropped";
        break;
      case FaultRule::Action::flip_bit: {
        if (bits == 0) break;
        std::uint64_t b = r.offset % bits;
        payload[b / 8] ^= static_cast<std::uint8_t>(1u << (b % 8));
        msg << " flipped bit " << b;
        break;
      }
      case FaultRule::Action::add:
      case FaultRule::Action::replace: {
        std::size_t words = payload.size() / 8;
        if (words == 0) {
          if (!payload.empty()) payload[0] ^= static_cast<std::uint8_t>(r.value | 1);
          break;
        }
        std::size_t at = (r.offset % words) * 8;
        std::uint64_t v;
        std::memcpy(&v, payload.data() + at, 8);
        v = r.action == FaultRule::Action::add ? v + r.value : r.value;
        std::memcpy(payload.data() + at, &v, 8);
        msg << (r.action == FaultRule::Action::add ? " added " : " replaced ") << r.value << " at word "
            << at / 8;
        break;
      }
    }
    log_.push_back(msg.str());
  }
  return keep;
}

std::vector<std::string> FaultInjector::log() const {
  std::lock_guard<std::mutex> lk(mu_);
  return log_;
}

std::size_t FaultInjector::fired() const {
  std::lock_guard<std::mutex> lk(mu_);
  return log_.size();
}

Round::Round(Comm& c, Phase p, std::string tag) : c_(c), phase_(p), tag_(std::move(tag)) {}

Writer& Round::to(int peer) {
  if (peer == c_.id()) throw std::logic_error("a party cannot message itself");
  return out_[peer];
}

void Round::expect(int peer) {
  if (peer == c_.id()) throw std::logic_error("a party cannot expect a message from itself");
  expect_.push_back(peer);
}

void Round::expect_all_but_me() {
  for (int p = 0; p < c_.parties(); ++p)
    if (p != c_.id()) expect_.push_back(p);
}

void Round::run() {
  if (done_) throw std::logic_error("round already run");
  done_ = true;
  for (auto& [peer, w] : out_) c_.deliver(peer, phase_, tag_, w);
  for (int peer : expect_) {
    std::optional<Reader> r;
    if (tolerant_) {
      if (!c_.dead_[peer]) {
        try {
          r = c_.collect(peer, phase_, tag_);
        } catch (const AbortError&) {
          c_.dead_[peer] = true;
        }
      }
    } else {
      r = c_.collect(peer, phase_, tag_);
    }
    if (r) in_[peer] = std::move(*r);
    else missing_.push_back(peer);
  }
  c_.meter_.round(phase_, tag_);
}

bool Round::has(int peer) const { return in_.count(peer) > 0; }

Reader& Round::from(int peer) {
  auto it = in_.find(peer);
  if (it == in_.end())
    throw AbortError(phase_, tag_, "missing message from party " + std::to_string(peer), {peer});
  return it->second;
}

Comm::Comm(Endpoint& ep, int parties, FaultInjector* faults, bool transcript)
    : ep_(ep), parties_(parties), faults_(faults), send_seq_(ep.size(), 0), recv_seq_(ep.size(), 0), dead_(ep.size(), false) {
  if (transcript) transcript_ = std::make_unique<Hasher>();
}

void Comm::deliver(int to, Phase p, const std::string& tag, Writer& w) {
  Frame f;
  f.phase = p;
  f.seq = send_seq_[to]++;
  f.payload = std::move(w.bytes());
  std::uint64_t bits = w.bits();
  if (faults_ && !faults_->apply(id(), to, p, tag, f.payload, bits)) {
    f.kind = FrameKind::tombstone;
    f.payload.clear();
    ep_.send(to, std::move(f));
    return;
  }
  meter_.sent(p, tag, bits, f.payload.size());
  if (transcript_) {
    std::uint8_t hdr[4] = {0, static_cast<std::uint8_t>(to), static_cast<std::uint8_t>(p), 0};
    transcript_->update(hdr, 4);
    transcript_->update(tag.data(), tag.size());
    transcript_->update(f.payload.data(), f.payload.size());
  }
  ep_.send(to, std::move(f));
}

std::optional<Reader> Comm::collect(int from, Phase p, const std::string& tag) {
  Frame f = ep_.recv(from);
  if (f.kind == FrameKind::abort)
    throw AbortError(p, tag, "party " + std::to_string(from) + " aborted", {});
  std::uint16_t want = recv_seq_[from]++;
  if (f.seq != want) throw TransportError("out-of-order frame from party " + std::to_string(from));
  if (f.kind == FrameKind::tombstone) return std::nullopt;
  if (f.phase != p)
    throw TransportError(std::string("phase mismatch from party ") + std::to_string(from) + ": expected " +
                         phase_name(p) + ", got " + phase_name(f.phase));
  if (transcript_) {
    std::uint8_t hdr[4] = {1, static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(p), 0};
    transcript_->update(hdr, 4);
    transcript_->update(tag.data(), tag.size());
    transcript_->update(f.payload.data(), f.payload.size());
  }
  return Reader(std::move(f.payload));
}

void Comm::dealer_send(Writer& w) {
  Frame f;
  f.phase = Phase::prep;
  f.seq = send_seq_[dealer_id()]++;
  meter_.dealer(w.bytes().size());
  f.payload = std::move(w.bytes());
  ep_.send(dealer_id(), std::move(f));
}

Reader Comm::dealer_recv() {
  auto r = collect(dealer_id(), Phase::prep, "dealer");
  if (!r) throw TransportError("dealer message lost");
  return std::move(*r);
}

void Comm::broadcast_abort() {
  if (aborted_) return;
  aborted_ = true;
  for (int p = 0; p < ep_.size(); ++p) {
    if (p == id()) continue;
    Frame f;
    f.kind = FrameKind::abort;
    try {
      ep_.send(p, std::move(f));
    } catch (const std::exception&) {
    }
  }
}

Digest Comm::transcript_digest() {
  if (!transcript_) return Digest{};
  return transcript_->finish();
}

}  // namespace hmpc
