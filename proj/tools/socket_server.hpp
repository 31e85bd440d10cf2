#pragma once

#include <string>

#include "lppo/service.hpp"

namespace lppo::tools {

/// Serves the line protocol on a listening socket. `address` is either
/// `unix:<path>` or `[host:]port` (TCP, host defaults to 127.0.0.1).
/// One connection at a time; a second concurrent client receives an error
/// frame and is closed. Returns when `max_connections` sessions have ended
/// (0 = never).
int serve_socket(SchedulerService& service, const std::string& address,
                 std::size_t max_connections = 0);

}  // namespace lppo::tools
