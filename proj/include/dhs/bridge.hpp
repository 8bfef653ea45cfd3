#pragma once

#include "dhs/heuristics.hpp"
#include "dhs/policy.hpp"
#include "dhs/search.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

/*
  Newline-delimited JSON over TCP between a running search and an external
  controller. The search side sends a greeting
      {"proto":1,"n":<lists>,"feature_len":<5n+1>}
  then one step message per controller step
      {"t":..,"features":[diff],"raw":[feature vector],"reward":..,"done":false}
  and waits for {"h":<index>} before expanding. The last message has
  done=true and an "outcome" string; no reply is expected to it.
*/

namespace dhs {

inline constexpr int kProtocolVersion = 1;
inline constexpr double kDefaultBridgeTimeout = 30.0;

class BridgeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BridgeTimeout : public BridgeError {
public:
    using BridgeError::BridgeError;
};

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    std::string to_string() const { return host + ":" + std::to_string(port); }
};

/// "host:port"; throws std::invalid_argument.
Endpoint parse_endpoint(const std::string &text);

/// One connected stream socket exchanging text lines.
class Connection {
public:
    Connection() = default;
    explicit Connection(int fd);
    Connection(Connection &&other) noexcept;
    Connection &operator=(Connection &&other) noexcept;
    Connection(const Connection &) = delete;
    Connection &operator=(const Connection &) = delete;
    ~Connection();

    bool is_open() const { return fd_ >= 0; }
    /// Receive timeout in seconds (<= 0 disables it).
    void set_timeout(double seconds);
    /// Appends '\n'. Throws BridgeError when the peer is gone.
    void send_line(const std::string &line);
    /// Next line without its newline; nullopt on orderly shutdown. Throws
    /// BridgeTimeout or BridgeError.
    std::optional<std::string> recv_line();
    void close();

private:
    int fd_ = -1;
    std::string buffer_;
};

class Listener {
public:
    /// Binds and listens; port 0 picks a free port.
    explicit Listener(const Endpoint &endpoint);
    Listener(Listener &&other) noexcept;
    Listener(const Listener &) = delete;
    Listener &operator=(const Listener &) = delete;
    ~Listener();

    std::uint16_t port() const { return port_; }
    /// Blocks for the next connection; timeout <= 0 waits forever.
    Connection accept(double timeout_seconds = -1.0);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

Connection connect_to(const Endpoint &endpoint, double timeout_seconds = kDefaultBridgeTimeout);

struct Greeting {
    int proto = kProtocolVersion;
    std::size_t n = 0;
    std::size_t feature_len = 0;
};

struct StepMessage {
    std::size_t t = 0;
    std::vector<double> features;
    std::vector<double> raw;
    double reward = 0.0;
    bool done = false;
    std::optional<std::string> outcome;
};

std::string encode_greeting(const Greeting &g);
std::string encode_step(const StepMessage &m);
std::string encode_action(std::size_t h);
std::string encode_error(const std::string &kind, const std::string &detail);
/// Decoders throw BridgeError on malformed input.
Greeting decode_greeting(const std::string &line);
StepMessage decode_step(const std::string &line);
std::size_t decode_action(const std::string &line);

/*
  Search-side policy forwarding every select() over a connection. The
  connector is invoked at the start of each episode. Lost connections and
  timeouts abort the search with controller-disconnected; malformed replies
  and out-of-range indices get an error reply and abort with protocol-error.
*/
class RemotePolicy : public ControlPolicy {
public:
    using Connector = std::function<Connection()>;
    RemotePolicy(Connector connector, std::string spec, double timeout_seconds = kDefaultBridgeTimeout);

    void begin_episode(std::size_t n) override;
    std::size_t select(const StepView &step) override;
    void end_episode(const StepView &step, Outcome outcome) override;
    std::string spec() const override { return spec_; }

private:
    Connector connector_;
    std::string spec_;
    double timeout_;
    Connection conn_;
    bool broken_ = false;
};

/// Policy of kind remote:<host:port>: connects to a listening controller.
std::unique_ptr<ControlPolicy> remote_policy(const Endpoint &endpoint,
                                             double timeout_seconds = kDefaultBridgeTimeout);

/// Accepts one controller on `listener` and runs the search under its control.
SearchResult serve_search(const Task &task, Portfolio &portfolio, Listener &listener, SearchBudget budget = {},
                          double timeout_seconds = kDefaultBridgeTimeout, TraceMode trace_mode = TraceMode::Full);
SearchResult serve_search(const Task &task, Portfolio &portfolio, const Endpoint &endpoint,
                          SearchBudget budget = {}, double timeout_seconds = kDefaultBridgeTimeout,
                          TraceMode trace_mode = TraceMode::Full);

struct ControllerSession {
    std::size_t steps = 0;
    std::optional<Outcome> outcome;
};

/// Controller side: answers every step of one search with `policy`.
ControllerSession run_controller(Connection &conn, ControlPolicy &policy);

}  // namespace dhs
