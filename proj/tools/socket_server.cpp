#include "socket_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string_view>

#include <spdlog/spdlog.h>

#include "lppo/error.hpp"

namespace lppo::tools {

namespace {

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  ~Fd() { reset(); }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_;
};

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

Fd listen_on(const std::string& address) {
  if (address.rfind("unix:", 0) == 0) {
    const std::string path = address.substr(5);
    Fd fd(::socket(AF_UNIX, SOCK_STREAM, 0));
    if (!fd) throw Error("socket: " + std::string(std::strerror(errno)));
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof(addr.sun_path)) throw Error("socket path too long: " + path);
    std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
    ::unlink(path.c_str());
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw Error("bind " + path + ": " + std::strerror(errno));
    }
    if (::listen(fd.get(), 4) != 0) throw Error("listen: " + std::string(std::strerror(errno)));
    return fd;
  }

  std::string host = "127.0.0.1";
  std::string port = address;
  if (auto colon = address.rfind(':'); colon != std::string::npos) {
    host = address.substr(0, colon);
    port = address.substr(colon + 1);
  }
  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (!fd) throw Error("socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  try {
    addr.sin_port = htons(static_cast<std::uint16_t>(std::stoi(port)));
  } catch (const std::exception&) {
    throw Error("invalid socket address \"" + address + "\"");
  }
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw Error("invalid host in socket address \"" + address + "\"");
  }
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw Error("bind " + address + ": " + std::strerror(errno));
  }
  if (::listen(fd.get(), 4) != 0) throw Error("listen: " + std::string(std::strerror(errno)));
  return fd;
}

}  // namespace

int serve_socket(SchedulerService& service, const std::string& address,
                 std::size_t max_connections) {
  Fd listener = listen_on(address);
  spdlog::info("serving on {}", address);

  Fd client;
  std::string buffer;
  std::size_t finished = 0;
  while (max_connections == 0 || finished < max_connections) {
    pollfd fds[2] = {{listener.get(), POLLIN, 0}, {client.get(), POLLIN, 0}};
    const nfds_t n = client ? 2 : 1;
    if (::poll(fds, n, -1) < 0) {
      if (errno == EINTR) continue;
      throw Error("poll: " + std::string(std::strerror(errno)));
    }

    if (fds[0].revents & POLLIN) {
      Fd incoming(::accept(listener.get(), nullptr, nullptr));
      if (incoming) {
        if (client) {
          // The tracker has a single owner; concurrent sessions are refused.
          write_all(incoming.get(),
                    "{\"error\":\"busy: another session owns the scheduler state\"}\n");
        } else {
          client = std::move(incoming);
          buffer.clear();
          spdlog::info("session opened");
        }
      }
    }

    if (client && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) {
      char chunk[4096];
      const ssize_t got = ::recv(client.get(), chunk, sizeof(chunk), 0);
      if (got <= 0) {
        if (got < 0 && errno == EINTR) continue;
        client.reset();
        ++finished;
        spdlog::info("session closed");
        continue;
      }
      buffer.append(chunk, static_cast<std::size_t>(got));
      std::size_t pos;
      while ((pos = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, pos);
        buffer.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        write_all(client.get(), service.handle_line(line) + "\n");
      }
    }
  }
  return 0;
}

}  // namespace lppo::tools
