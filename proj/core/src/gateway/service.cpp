#include "haptic/gateway/service.hpp"

#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <fstream>
#include <future>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "haptic/core/error.hpp"
#include "haptic/gateway/wire.hpp"

namespace haptic::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

struct Outgoing {
  std::string text;
  bool droppable = false;  // periodic telemetry only
};

}  // namespace

struct Service::Impl {
  class Connection;

  Impl(session::SessionSetup setup, session::SessionConfig cfg, Seed s, ServiceOptions opts)
      : config(cfg),
        seed(s),
        options(std::move(opts)),
        task_name(setup.task.name()),
        engine(std::make_unique<session::SessionEngine>(std::move(setup), std::move(cfg), s)),
        acceptor(ioc),
        telemetry_timer(ioc),
        signals(ioc) {
    latest = TelemetryFrame::from(engine->snapshot());
  }

  session::SessionConfig config;
  Seed seed;
  ServiceOptions options;
  std::string task_name;

  // session side
  std::unique_ptr<session::SessionEngine> engine;
  std::mutex queue_mutex;
  std::condition_variable queue_cv;
  std::deque<CommandEnvelope> commands;
  bool stopping = false;
  std::thread session_thread;
  mutable std::mutex report_mutex;
  std::optional<session::SessionReport> final_report;

  // network side
  asio::io_context ioc;
  tcp::acceptor acceptor;
  asio::steady_timer telemetry_timer;
  asio::signal_set signals;
  Clock::time_point next_telemetry;
  std::shared_ptr<Connection> active;
  TelemetryFrame latest;
  std::thread io_thread;
  std::uint16_t bound_port = 0;

  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stop_requested = false;
  bool stopped = false;

  // ---- network thread ----

  void do_accept();
  void schedule_telemetry();
  void send_to_active(const Message& m, bool droppable);

  // ---- session thread ----

  void session_loop();
  void handle(const CommandEnvelope& cmd);
  void publish(const session::SessionFrame& f, bool immediate) {
    TelemetryFrame t = TelemetryFrame::from(f);
    asio::post(ioc, [this, t = std::move(t), immediate]() mutable {
      latest = t;
      if (immediate) send_to_active(latest, false);
    });
  }
  void post_message(Message m) {
    asio::post(ioc, [this, m = std::move(m)] { send_to_active(m, false); });
  }

  void request_stop() {
    {
      std::lock_guard lock(stop_mutex);
      stop_requested = true;
    }
    stop_cv.notify_all();
  }
};

class Service::Impl::Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(Impl& owner, tcp::socket socket) : owner_(owner), ws_(std::move(socket)) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void send(std::string text, bool droppable) {
    if (closed_) return;
    if (droppable) {
      std::size_t queued = 0;
      for (const Outgoing& o : out_) queued += o.droppable ? 1 : 0;
      if (queued >= owner_.options.max_queued_frames) {
        // oldest droppable frame that is not currently being written
        for (auto it = out_.begin() + (writing_ ? 1 : 0); it != out_.end(); ++it) {
          if (it->droppable) {
            out_.erase(it);
            break;
          }
        }
      }
    }
    out_.push_back(Outgoing{std::move(text), droppable});
    if (!writing_) write_next();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    if (owner_.active && owner_.active.get() != this) {
      busy_ = true;
      send(encode(StatusMessage{"busy"}), false);
      return;
    }
    owner_.active = shared_from_this();
    send(encode(owner_.latest), false);
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      closed_ = true;
      if (owner_.active.get() == this) owner_.active.reset();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      Message m = decode(text);
      auto* cmd = std::get_if<CommandEnvelope>(&m);
      if (cmd == nullptr) throw Error(ErrorCode::parse_error, "only cmd messages are accepted");
      if (!guard_.accept(cmd->seq)) {
        send(encode(ErrorMessage{"out_of_order",
                                 "seq " + std::to_string(cmd->seq) + " is not above " +
                                     std::to_string(*guard_.last()),
                                 cmd->seq}),
             false);
      } else {
        {
          std::lock_guard lock(owner_.queue_mutex);
          owner_.commands.push_back(std::move(*cmd));
        }
        owner_.queue_cv.notify_one();
      }
    } catch (const Error& e) {
      send(encode(ErrorMessage{std::string(to_string(e.code())), e.what(), std::nullopt}), false);
    }
    read();
  }

  void write_next() {
    if (out_.empty() || closed_) {
      writing_ = false;
      if (busy_ && !closed_) close();
      return;
    }
    writing_ = true;
    ws_.async_write(asio::buffer(out_.front().text),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (!self->out_.empty()) self->out_.pop_front();
                      if (ec) {
                        self->closed_ = true;
                        self->writing_ = false;
                        return;
                      }
                      self->write_next();
                    });
  }

  Impl& owner_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<Outgoing> out_;
  SeqGuard guard_;
  bool writing_ = false;
  bool closed_ = false;
  bool busy_ = false;
};

void Service::Impl::do_accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Connection>(*this, std::move(socket))->start();
    do_accept();
  });
}

void Service::Impl::schedule_telemetry() {
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(1.0 / config.telemetry_hz));
  next_telemetry += period;
  // after a stall, skip missed slots rather than bursting
  const auto now = Clock::now();
  if (next_telemetry < now) next_telemetry = now + period;
  telemetry_timer.expires_at(next_telemetry);
  telemetry_timer.async_wait([this](beast::error_code ec) {
    if (ec) return;
    send_to_active(latest, true);
    schedule_telemetry();
  });
}

void Service::Impl::send_to_active(const Message& m, bool droppable) {
  if (active) active->send(encode(m), droppable);
}

void Service::Impl::handle(const CommandEnvelope& cmd) {
  const session::Phase before = engine->phase();
  try {
    if (std::holds_alternative<Retrain>(cmd.payload) && before == session::Phase::idle) {
      session::SessionFrame f = engine->snapshot();
      f.phase = session::Phase::retraining;
      publish(f, true);
    }
    apply(*engine, cmd);
  } catch (const Error& e) {
    post_message(ErrorMessage{std::string(to_string(e.code())), e.what(), cmd.seq});
  }
  const bool phase_changed = engine->phase() != before;
  publish(engine->snapshot(), phase_changed);

  if (std::holds_alternative<Retrain>(cmd.payload) && engine->report() &&
      engine->phase() == session::Phase::done) {
    const session::SessionReport& r = *engine->report();
    {
      std::lock_guard lock(report_mutex);
      final_report = r;
    }
    if (options.frames_csv_path) {
      std::ofstream out(*options.frames_csv_path);
      session::write_frames_csv(out, r.frames);
    }
    if (options.report_path) {
      std::ofstream out(*options.report_path);
      out << session::report_json(r, task_name, seed, options.frames_csv_path).dump(2) << '\n';
    }
    post_message(ReportMessage::from(r));
  }
}

void Service::Impl::session_loop() {
  const auto tick = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(config.control.config.tick));
  auto next = Clock::now() + tick;
  for (;;) {
    std::deque<CommandEnvelope> batch;
    {
      std::unique_lock lock(queue_mutex);
      queue_cv.wait_until(lock, next, [this] { return stopping || !commands.empty(); });
      if (stopping) return;
      batch.swap(commands);
    }
    for (const CommandEnvelope& c : batch) handle(c);

    if (Clock::now() >= next) {
      if (engine->phase() == session::Phase::trial && !engine->trial_awaiting_choice()) {
        engine->trial_tick();
        publish(engine->snapshot(), false);
      }
      next += tick;
      if (next < Clock::now()) next = Clock::now() + tick;
    }
  }
}

Service::Service(session::SessionSetup setup, session::SessionConfig config, Seed seed,
                 ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(setup), std::move(config), seed, std::move(options))) {}

Service::~Service() { stop(); }

std::uint16_t Service::start() {
  Impl& m = *impl_;
  const tcp::endpoint endpoint(asio::ip::make_address(m.options.host), m.options.port);
  beast::error_code ec;
  m.acceptor.open(endpoint.protocol(), ec);
  if (!ec) m.acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) m.acceptor.bind(endpoint, ec);
  if (!ec) m.acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(ErrorCode::invalid_argument,
                "cannot bind " + m.options.host + ":" + std::to_string(m.options.port) + ": " +
                    ec.message());
  }
  m.bound_port = m.acceptor.local_endpoint().port();

  m.signals.add(SIGINT);
  m.signals.add(SIGTERM);
  m.signals.async_wait([&m](beast::error_code err, int) {
    if (!err) m.request_stop();
  });

  m.do_accept();
  m.next_telemetry = Clock::now();
  m.schedule_telemetry();
  m.session_thread = std::thread([&m] { m.session_loop(); });
  m.io_thread = std::thread([&m] { m.ioc.run(); });
  return m.bound_port;
}

void Service::wait() {
  Impl& m = *impl_;
  std::unique_lock lock(m.stop_mutex);
  m.stop_cv.wait(lock, [&m] { return m.stop_requested; });
}

void Service::stop() {
  if (!impl_) return;
  Impl& m = *impl_;
  {
    std::lock_guard lock(m.stop_mutex);
    if (m.stopped) return;
    m.stopped = true;
    m.stop_requested = true;
  }
  m.stop_cv.notify_all();
  {
    std::lock_guard lock(m.queue_mutex);
    m.stopping = true;
  }
  m.queue_cv.notify_all();
  if (m.session_thread.joinable()) m.session_thread.join();

  if (m.io_thread.joinable()) {
    std::promise<void> closed;
    asio::post(m.ioc, [&m, &closed] {
      beast::error_code ec;
      m.acceptor.close(ec);
      m.telemetry_timer.cancel();
      m.signals.cancel();
      if (m.active) m.active->close();
      closed.set_value();
    });
    closed.get_future().wait_for(std::chrono::seconds(1));
    // give the close frame a moment to flush
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    m.ioc.stop();
    m.io_thread.join();
  }
}

std::uint16_t Service::port() const noexcept { return impl_->bound_port; }

std::optional<session::SessionReport> Service::report() const {
  std::lock_guard lock(impl_->report_mutex);
  return impl_->final_report;
}

}  // namespace haptic::gateway
