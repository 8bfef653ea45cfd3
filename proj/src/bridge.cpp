#include "dhs/bridge.hpp"

#include "json.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

using namespace std;
using json = nlohmann::ordered_json;

namespace dhs {

Endpoint parse_endpoint(const string &text) {
    size_t colon = text.rfind(':');
    if (colon == string::npos || colon == 0 || colon + 1 == text.size())
        throw invalid_argument("endpoint must look like host:port, got '" + text + "'");
    Endpoint ep;
    ep.host = text.substr(0, colon);
    int port = 0;
    try {
        size_t used = 0;
        port = stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1)
            throw invalid_argument("trailing characters");
    } catch (const exception &) {
        throw invalid_argument("bad port in endpoint '" + text + "'");
    }
    if (port < 0 || port > 65535)
        throw invalid_argument("port out of range in endpoint '" + text + "'");
    ep.port = static_cast<uint16_t>(port);
    return ep;
}

namespace {

string errno_text(const string &what) {
    return what + ": " + strerror(errno);
}

addrinfo *resolve(const Endpoint &ep, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive)
        hints.ai_flags = AI_PASSIVE;
    addrinfo *res = nullptr;
    string port = to_string(ep.port);
    int rc = getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res);
    if (rc != 0)
        throw BridgeError("cannot resolve " + ep.to_string() + ": " + gai_strerror(rc));
    return res;
}

}  // namespace

Connection::Connection(int fd) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

Connection::Connection(Connection &&other) noexcept : fd_(other.fd_), buffer_(move(other.buffer_)) {
    other.fd_ = -1;
}

Connection &Connection::operator=(Connection &&other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        buffer_ = move(other.buffer_);
        other.fd_ = -1;
    }
    return *this;
}

Connection::~Connection() {
    close();
}

void Connection::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    buffer_.clear();
}

void Connection::set_timeout(double seconds) {
    if (fd_ < 0)
        return;
    timeval tv{};
    if (seconds > 0) {
        tv.tv_sec = static_cast<time_t>(seconds);
        tv.tv_usec = static_cast<suseconds_t>((seconds - floor(seconds)) * 1e6);
        if (tv.tv_sec == 0 && tv.tv_usec == 0)
            tv.tv_usec = 1;
    }
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void Connection::send_line(const string &line) {
    if (fd_ < 0)
        throw BridgeError("send on a closed connection");
    string data = line + '\n';
    size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw BridgeError(errno_text("send"));
        }
        sent += static_cast<size_t>(n);
    }
}

optional<string> Connection::recv_line() {
    if (fd_ < 0)
        throw BridgeError("receive on a closed connection");
    while (true) {
        size_t nl = buffer_.find('\n');
        if (nl != string::npos) {
            string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n == 0)
            return nullopt;
        if (n < 0) {
            if (errno == EINTR)
                continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw BridgeTimeout("timed out waiting for the peer");
            throw BridgeError(errno_text("recv"));
        }
        buffer_.append(chunk, static_cast<size_t>(n));
    }
}

Listener::Listener(const Endpoint &endpoint) {
    addrinfo *res = resolve(endpoint, true);
    string last_error = "no usable address";
    for (addrinfo *ai = res; ai; ai = ai->ai_next) {
        int fd = socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0)
            continue;
        int one = 1;
        setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) {
            fd_ = fd;
            break;
        }
        last_error = errno_text("bind " + endpoint.to_string());
        ::close(fd);
    }
    freeaddrinfo(res);
    if (fd_ < 0)
        throw BridgeError(last_error);
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len);
    if (addr.ss_family == AF_INET)
        port_ = ntohs(reinterpret_cast<sockaddr_in *>(&addr)->sin_port);
    else
        port_ = ntohs(reinterpret_cast<sockaddr_in6 *>(&addr)->sin6_port);
}

Listener::Listener(Listener &&other) noexcept : fd_(other.fd_), port_(other.port_) {
    other.fd_ = -1;
}

Listener::~Listener() {
    if (fd_ >= 0)
        ::close(fd_);
}

Connection Listener::accept(double timeout_seconds) {
    if (timeout_seconds > 0) {
        pollfd pfd{fd_, POLLIN, 0};
        int rc;
        do {
            rc = poll(&pfd, 1, static_cast<int>(timeout_seconds * 1000));
        } while (rc < 0 && errno == EINTR);
        if (rc == 0)
            throw BridgeTimeout("no controller connected within the timeout");
        if (rc < 0)
            throw BridgeError(errno_text("poll"));
    }
    int fd;
    do {
        fd = ::accept(fd_, nullptr, nullptr);
    } while (fd < 0 && errno == EINTR);
    if (fd < 0)
        throw BridgeError(errno_text("accept"));
    return Connection(fd);
}

Connection connect_to(const Endpoint &endpoint, double timeout_seconds) {
    addrinfo *res = resolve(endpoint, false);
    string last_error = "no usable address";
    int connected = -1;
    for (addrinfo *ai = res; ai; ai = ai->ai_next) {
        int fd = socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0)
            continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            connected = fd;
            break;
        }
        last_error = errno_text("connect " + endpoint.to_string());
        ::close(fd);
    }
    freeaddrinfo(res);
    if (connected < 0)
        throw BridgeError(last_error);
    Connection conn(connected);
    conn.set_timeout(timeout_seconds);
    return conn;
}

string encode_greeting(const Greeting &g) {
    json j;
    j["proto"] = g.proto;
    j["n"] = g.n;
    j["feature_len"] = g.feature_len;
    return j.dump();
}

string encode_step(const StepMessage &m) {
    json j;
    j["t"] = m.t;
    j["features"] = m.features;
    j["raw"] = m.raw;
    j["reward"] = m.reward;
    j["done"] = m.done;
    if (m.outcome)
        j["outcome"] = *m.outcome;
    return j.dump();
}

string encode_action(size_t h) {
    json j;
    j["h"] = h;
    return j.dump();
}

string encode_error(const string &kind, const string &detail) {
    json j;
    j["error"] = kind;
    j["detail"] = detail;
    return j.dump();
}

namespace {

json parse_object(const string &line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception &e) {
        throw BridgeError(string("malformed message: ") + e.what());
    }
    if (!j.is_object())
        throw BridgeError("malformed message: expected a JSON object");
    if (j.contains("error"))
        throw BridgeError("peer reported " + j["error"].dump() + ": " + j.value("detail", ""));
    return j;
}

}  // namespace

Greeting decode_greeting(const string &line) {
    json j = parse_object(line);
    try {
        Greeting g;
        g.proto = j.at("proto").get<int>();
        g.n = j.at("n").get<size_t>();
        g.feature_len = j.at("feature_len").get<size_t>();
        if (g.proto != kProtocolVersion)
            throw BridgeError("unsupported protocol version " + to_string(g.proto));
        return g;
    } catch (const json::exception &e) {
        throw BridgeError(string("malformed greeting: ") + e.what());
    }
}

StepMessage decode_step(const string &line) {
    json j = parse_object(line);
    try {
        StepMessage m;
        m.t = j.at("t").get<size_t>();
        m.features = j.at("features").get<vector<double>>();
        if (j.contains("raw"))
            m.raw = j["raw"].get<vector<double>>();
        m.reward = j.at("reward").get<double>();
        m.done = j.at("done").get<bool>();
        if (j.contains("outcome"))
            m.outcome = j["outcome"].get<string>();
        return m;
    } catch (const json::exception &e) {
        throw BridgeError(string("malformed step message: ") + e.what());
    }
}

size_t decode_action(const string &line) {
    json j = parse_object(line);
    if (!j.contains("h") || !j["h"].is_number_integer())
        throw BridgeError("malformed action message: need an integer \"h\"");
    if (j["h"].get<long long>() < 0)
        throw BridgeError("malformed action message: negative index");
    return j["h"].get<size_t>();
}

namespace {

StepMessage make_step(const StepView &step, bool done) {
    StepMessage m;
    m.t = step.t;
    m.features = step.diff.values;
    auto raw = step.features.values();
    m.raw.assign(raw.begin(), raw.end());
    m.reward = step.reward;
    m.done = done;
    return m;
}

}  // namespace

RemotePolicy::RemotePolicy(Connector connector, string spec, double timeout_seconds)
    : connector_(move(connector)), spec_(move(spec)), timeout_(timeout_seconds) {}

void RemotePolicy::begin_episode(size_t n) {
    ControlPolicy::begin_episode(n);
    broken_ = false;
    conn_ = connector_();
    conn_.set_timeout(timeout_);
    try {
        conn_.send_line(encode_greeting({kProtocolVersion, n, feature_length(n)}));
    } catch (const BridgeError &) {
        broken_ = true;
    }
}

size_t RemotePolicy::select(const StepView &step) {
    if (broken_)
        throw PolicyAbort(Outcome::ControllerDisconnected, "controller connection lost");
    optional<string> reply;
    try {
        conn_.send_line(encode_step(make_step(step, false)));
        reply = conn_.recv_line();
    } catch (const BridgeError &e) {
        broken_ = true;
        throw PolicyAbort(Outcome::ControllerDisconnected, e.what());
    }
    if (!reply) {
        broken_ = true;
        throw PolicyAbort(Outcome::ControllerDisconnected, "controller closed the connection");
    }
    size_t h = 0;
    string problem;
    try {
        h = decode_action(*reply);
        if (h >= num_heuristics_)
            problem = "index " + to_string(h) + " out of range for " + to_string(num_heuristics_) + " lists";
    } catch (const BridgeError &e) {
        problem = e.what();
    }
    if (!problem.empty()) {
        try {
            conn_.send_line(encode_error("protocol-error", problem));
        } catch (const BridgeError &) {
            broken_ = true;
        }
        throw PolicyAbort(Outcome::ProtocolError, problem);
    }
    return h;
}

void RemotePolicy::end_episode(const StepView &step, Outcome outcome) {
    if (!broken_ && conn_.is_open()) {
        StepMessage m = make_step(step, true);
        m.reward = step_reward(StepKind::Terminal);
        m.outcome = outcome_name(outcome);
        try {
            conn_.send_line(encode_step(m));
        } catch (const BridgeError &) {
        }
    }
    conn_.close();
}

unique_ptr<ControlPolicy> remote_policy(const Endpoint &endpoint, double timeout_seconds) {
    return make_unique<RemotePolicy>([endpoint, timeout_seconds] { return connect_to(endpoint, timeout_seconds); },
                                     "remote:" + endpoint.to_string(), timeout_seconds);
}

SearchResult serve_search(const Task &task, Portfolio &portfolio, Listener &listener, SearchBudget budget,
                          double timeout_seconds, TraceMode trace_mode) {
    Connection conn = listener.accept(timeout_seconds);
    bool used = false;
    RemotePolicy policy(
        [&] {
            if (used)
                throw BridgeError("serve_search runs a single episode");
            used = true;
            return move(conn);
        },
        "remote:served", timeout_seconds);
    return run_gbfs(task, portfolio, policy, budget, trace_mode);
}

SearchResult serve_search(const Task &task, Portfolio &portfolio, const Endpoint &endpoint, SearchBudget budget,
                          double timeout_seconds, TraceMode trace_mode) {
    Listener listener(endpoint);
    return serve_search(task, portfolio, listener, budget, timeout_seconds, trace_mode);
}

ControllerSession run_controller(Connection &conn, ControlPolicy &policy) {
    auto next = [&]() -> string {
        optional<string> line = conn.recv_line();
        if (!line)
            throw BridgeError("search closed the connection");
        return *line;
    };
    Greeting g = decode_greeting(next());
    if (g.feature_len != feature_length(g.n))
        throw BridgeError("greeting announces inconsistent feature length");
    policy.begin_episode(g.n);
    ControllerSession session;
    while (true) {
        StepMessage m = decode_step(next());
        if (m.features.size() != g.feature_len)
            throw BridgeError("step message has " + to_string(m.features.size()) + " features, expected " +
                              to_string(g.feature_len));
        FeatureVector features(g.n);
        if (m.raw.size() == g.feature_len)
            copy(m.raw.begin(), m.raw.end(), features.values().begin());
        FeatureDiff diff{m.features};
        StepView view{m.t, features, diff, m.reward};
        if (m.done) {
            Outcome outcome = parse_outcome(m.outcome.value_or("budget-exceeded"));
            policy.end_episode(view, outcome);
            session.outcome = outcome;
            return session;
        }
        size_t h = policy.select(view);
        conn.send_line(encode_action(h));
        ++session.steps;
    }
}

}  // namespace dhs
