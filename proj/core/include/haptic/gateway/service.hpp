#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "haptic/session/protocol.hpp"

namespace haptic::gateway {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;  ///< 0 picks a free port
  std::optional<std::string> report_path;
  std::optional<std::string> frames_csv_path;
  std::size_t max_queued_frames = 8;
};

/// WebSocket endpoint for one operator. A session thread owns the engine
/// and runs the 100 Hz control loop; the network thread only moves
/// messages. The two talk through an ordered command queue and posted
/// frame snapshots.
class Service {
 public:
  Service(session::SessionSetup setup, session::SessionConfig config, Seed seed,
          ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and starts both threads. Returns the bound port.
  std::uint16_t start();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  std::uint16_t port() const noexcept;
  /// Report of the finished session, if any. Safe after stop().
  std::optional<session::SessionReport> report() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace haptic::gateway
