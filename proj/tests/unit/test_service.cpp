#include <algorithm>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "haptic/gateway/service.hpp"
#include "haptic/gateway/wire.hpp"
#include "haptic/session/protocol.hpp"
#include "haptic/session/task.hpp"
#include "haptic/session/teacher.hpp"

using namespace haptic;
using namespace haptic::gateway;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

class Client {
 public:
  explicit Client(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const CommandEnvelope& cmd) { ws_.write(asio::buffer(encode(cmd))); }

  // Blocks for the next message; telemetry keeps arriving, so this cannot
  // stall on a live connection.
  std::optional<Message> next() {
    beast::flat_buffer buf;
    beast::error_code ec;
    ws_.read(buf, ec);
    if (ec) return std::nullopt;
    return decode(beast::buffers_to_string(buf.data()));
  }

  template <class Pred>
  std::optional<Message> until(Pred pred, std::chrono::seconds limit, std::vector<Message>* seen = nullptr) {
    const auto deadline = Clock::now() + limit;
    while (Clock::now() < deadline) {
      auto m = next();
      if (!m) return std::nullopt;
      if (seen) seen->push_back(*m);
      if (pred(*m)) return m;
    }
    return std::nullopt;
  }

 private:
  asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

session::SessionConfig quick_config() {
  session::SessionConfig cfg;
  cfg.learner.epochs = 150;
  cfg.learner.fine_tune_epochs = 100;
  return cfg;
}

std::unique_ptr<Service> make_service(const session::SessionConfig& cfg, std::uint64_t seed) {
  const auto task = session::cleaning_task();
  ServiceOptions opt;
  opt.port = 0;
  auto svc = std::make_unique<Service>(session::prepare_session(task, cfg, Seed{seed}), cfg, Seed{seed}, opt);
  svc->start();
  return svc;
}

const TelemetryFrame* frame_of(const Message& m) { return std::get_if<TelemetryFrame>(&m); }

}  // namespace

TEST(Service, PhaseTransitionsInOrder) {
  auto svc = make_service(quick_config(), 1);
  Client c(svc->port());
  const auto task = session::cleaning_task();
  long long seq = 0;
  c.send({++seq, StartDemo{}});
  for (int i = 0; i < 100; ++i) {
    const Vec2 p = task.point_at(i / 99.0);
    c.send({++seq, SetPose{p.x, p.y, std::nullopt}});
  }
  c.send({++seq, EndDemo{}});

  std::vector<Message> seen;
  int demo_frames = 0;
  bool back_to_idle = false;
  c.until(
      [&](const Message& m) {
        const auto* f = frame_of(m);
        if (!f) return false;
        if (f->phase == "demo1") ++demo_frames;
        back_to_idle = demo_frames > 0 && f->phase == "idle";
        return back_to_idle;
      },
      std::chrono::seconds(30), &seen);
  ASSERT_TRUE(back_to_idle);
  std::vector<std::string> phases;
  double last_t = -1.0;
  for (const auto& m : seen) {
    const auto* f = frame_of(m);
    if (!f) continue;
    EXPECT_GE(f->t, last_t);  // never reordered
    last_t = f->t;
    if (phases.empty() || phases.back() != f->phase) phases.push_back(f->phase);
  }
  EXPECT_EQ(phases, (std::vector<std::string>{"idle", "demo1", "idle"}));
  for (const auto& m : seen) EXPECT_FALSE(std::holds_alternative<ErrorMessage>(m));
  svc->stop();
}

TEST(Service, OutOfOrderSeqIsRejected) {
  auto svc = make_service(quick_config(), 2);
  Client c(svc->port());
  c.send({5, StartDemo{}});
  c.send({3, SetPose{0.0, 0.0, 0.0}});
  const auto err = c.until([](const Message& m) { return std::holds_alternative<ErrorMessage>(m); },
                           std::chrono::seconds(10));
  ASSERT_TRUE(err.has_value());
  const auto& e = std::get<ErrorMessage>(*err);
  EXPECT_EQ(e.code, "out_of_order");
  EXPECT_EQ(e.seq, 3);
  // the session still accepts the next in-order command
  c.send({6, SetPose{0.0, 0.0, 0.0}});
  const auto f = c.until(
      [](const Message& m) {
        const auto* fr = frame_of(m);
        return fr && fr->phase == "demo1" && fr->t > 0.0;
      },
      std::chrono::seconds(10));
  EXPECT_TRUE(f.has_value());
  svc->stop();
}

TEST(Service, SecondOperatorGetsBusy) {
  auto svc = make_service(quick_config(), 3);
  Client first(svc->port());
  ASSERT_TRUE(first.next().has_value());
  Client second(svc->port());
  const auto m = second.next();
  ASSERT_TRUE(m.has_value());
  ASSERT_TRUE(std::holds_alternative<StatusMessage>(*m));
  EXPECT_EQ(std::get<StatusMessage>(*m).status, "busy");
  EXPECT_FALSE(second.next().has_value());  // closed by the service
  // the first operator is unaffected
  first.send({1, StartDemo{}});
  EXPECT_TRUE(first
                  .until([](const Message& msg) {
                    const auto* f = frame_of(msg);
                    return f && f->phase == "demo1";
                  },
                         std::chrono::seconds(10))
                  .has_value());
  svc->stop();
}

TEST(Service, ReportMatchesHeadlessRun) {
  const auto cfg = quick_config();
  const auto task = session::cleaning_task();
  session::OracleTeacher oracle;
  const auto first = oracle.first_demo(task);
  const auto range = oracle.choose_range(task, {});
  const auto second = oracle.second_demo(task, range);
  const auto script = make_script(first, range, second);

  session::SessionEngine engine(session::prepare_session(task, cfg, Seed{7}), cfg, Seed{7});
  auto teacher = script_teacher(script, task);
  const auto headless = session::run_protocol(engine, teacher);
  ASSERT_FALSE(headless.fault.has_value());

  auto svc = make_service(cfg, 7);
  Client c(svc->port());
  for (const auto& cmd : script) c.send(cmd);
  const auto rep = c.until([](const Message& m) { return std::holds_alternative<ReportMessage>(m); },
                           std::chrono::seconds(120));
  ASSERT_TRUE(rep.has_value());
  EXPECT_EQ(std::get<ReportMessage>(*rep), ReportMessage::from(headless));
  svc->stop();
  const auto live = svc->report();
  ASSERT_TRUE(live.has_value());
  ASSERT_EQ(live->frames.size(), headless.frames.size());
  for (std::size_t i = 0; i < live->frames.size(); ++i) {
    EXPECT_EQ(live->frames[i].measured.psi(), headless.frames[i].measured.psi());
  }
}

TEST(Service, TelemetrySpacingTracksConfiguredRate) {
  auto cfg = quick_config();
  cfg.telemetry_hz = 20.0;
  auto svc = make_service(cfg, 4);
  Client c(svc->port());
  ASSERT_TRUE(c.next().has_value());  // greeting snapshot
  std::vector<Clock::time_point> arrivals;
  for (int i = 0; i < 60; ++i) {
    auto m = c.next();
    ASSERT_TRUE(m && frame_of(*m));
    arrivals.push_back(Clock::now());
  }
  const double period = 1.0 / cfg.telemetry_hz;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < arrivals.size(); ++i) {
    gaps.push_back(std::chrono::duration<double>(arrivals[i] - arrivals[i - 1]).count());
  }
  const double mean = (std::chrono::duration<double>(arrivals.back() - arrivals.front()).count()) / gaps.size();
  EXPECT_NEAR(mean, period, 0.2 * period);
  for (double g : gaps) {
    EXPECT_GE(g, 0.8 * period);
    EXPECT_LE(g, 1.2 * period);
  }
  svc->stop();
}
