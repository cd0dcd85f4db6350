#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>
#include <vector>

#include "cmx/broker.hpp"
#include "test_support.hpp"

using namespace cmx;
using namespace cmx::broker;
using namespace std::chrono_literals;

namespace {

ServiceRecord record(const std::string& name, const std::string& endpoint) {
  return ServiceRecord{name, endpoint, endpoint + "?wsdl", 0};
}

}  // namespace

TEST_CASE("registry keeps the most recent record per name") {
  Registry reg;
  reg.publish(record("MsgService", "http://127.0.0.1:1/ws/MsgService"));
  CHECK(reg.lookup("MsgService").endpoint_url ==
        "http://127.0.0.1:1/ws/MsgService");

  reg.publish(record("MsgService", "http://127.0.0.1:2/ws/MsgService"));
  CHECK(reg.lookup("MsgService").endpoint_url ==
        "http://127.0.0.1:2/ws/MsgService");
  CHECK(reg.size() == 1);
}

TEST_CASE("registry validation and lookup errors") {
  Registry reg;
  CHECK_THROWS_AS(reg.publish(record("", "http://x/y")), CmxError);
  CHECK_THROWS_AS(reg.publish(record("a/b", "http://x/y")), CmxError);
  CHECK_THROWS_AS(reg.publish(ServiceRecord{"S", "not-a-url", "http://x", 0}),
                  CmxError);

  try {
    reg.lookup("absent");
    FAIL("expected throw");
  } catch (const CmxError& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }
}

TEST_CASE("list is sorted and unregister removes") {
  Registry reg;
  reg.publish(record("beta", "http://h/2"));
  reg.publish(record("alpha", "http://h/1"));
  reg.publish(record("alpha", "http://h/1b"));

  const auto all = reg.list();
  REQUIRE(all.size() == 2);
  CHECK(all[0].service_name == "alpha");
  CHECK(all[1].service_name == "beta");

  reg.unregister("alpha");
  CHECK_THROWS_AS(reg.lookup("alpha"), CmxError);
  CHECK_THROWS_AS(reg.unregister("alpha"), CmxError);

  reg.publish(record("alpha", "http://h/3"));
  CHECK(reg.lookup("alpha").endpoint_url == "http://h/3");
}

TEST_CASE("registry stamps registration time") {
  Registry reg;
  const auto before = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  reg.publish(record("S", "http://h/1"));
  const auto rec = reg.lookup("S");
  CHECK(rec.registered_at_ms >= before);
  CHECK(rec.registered_at_ms <= before + 5000);
}

TEST_CASE("http api supports the full lifecycle") {
  BrokerServer server(0);
  server.start();
  BrokerClient client(server.url(), 2000ms);

  try {
    client.lookup("MsgService");
    FAIL("expected throw");
  } catch (const CmxError& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }

  client.publish(record("MsgService", "http://127.0.0.1:9/ws/MsgService"));
  ServiceRecord rec = client.lookup("MsgService");
  CHECK(rec.service_name == "MsgService");
  CHECK(rec.endpoint_url == "http://127.0.0.1:9/ws/MsgService");
  CHECK(rec.wsdl_url == "http://127.0.0.1:9/ws/MsgService?wsdl");
  CHECK(rec.registered_at_ms > 0);

  client.publish(record("MsgService", "http://127.0.0.1:10/ws/MsgService"));
  CHECK(client.lookup("MsgService").endpoint_url ==
        "http://127.0.0.1:10/ws/MsgService");

  client.publish(record("Atlas", "http://127.0.0.1:11/ws/Atlas"));
  const auto all = client.list_services();
  REQUIRE(all.size() == 2);
  CHECK(all[0].service_name == "Atlas");
  CHECK(all[1].service_name == "MsgService");

  client.unregister("Atlas");
  CHECK_THROWS_AS(client.unregister("Atlas"), CmxError);
  CHECK(client.list_services().size() == 1);

  // malformed publish is a 400 -> validation kind client-side
  try {
    client.publish(ServiceRecord{"Bad", "nope", "nope", 0});
    FAIL("expected throw");
  } catch (const CmxError& e) {
    CHECK(e.kind() == ErrorKind::validation);
  }
  server.stop();
}

TEST_CASE("empty registry lists nothing over http") {
  BrokerServer server(0);
  server.start();
  BrokerClient client(server.url(), 2000ms);
  CHECK(client.list_services().empty());
  server.stop();
}

TEST_CASE("snapshot restores records across restarts") {
  const std::string path = "broker_snapshot_test.txt";
  std::remove(path.c_str());
  int port = 0;
  {
    BrokerServer server(0, path);
    server.start();
    port = server.port();
    BrokerClient client(server.url(), 2000ms);
    client.publish(record("Persisted", "http://127.0.0.1:3/ws/P"));
    server.stop();
  }
  {
    BrokerServer server(0, path);
    server.start();
    BrokerClient client(server.url(), 2000ms);
    const auto rec = client.lookup("Persisted");
    CHECK(rec.endpoint_url == "http://127.0.0.1:3/ws/P");
    server.stop();
  }
  std::remove(path.c_str());
}

TEST_CASE("concurrent publishers and lookers stay consistent") {
  BrokerServer server(0);
  server.start();
  const std::string url = server.url();
  const std::vector<std::string> names = {"s0", "s1", "s2", "s3"};

  {
    BrokerClient seed(url, 2000ms);
    for (const auto& n : names)
      seed.publish(record(n, "http://127.0.0.1:1/" + n + "/seed"));
  }

  std::atomic<bool> stop{false};
  std::atomic<int> violations{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < 2; ++t) {
    workers.emplace_back([&, t] {
      BrokerClient client(url, 2000ms);
      testsup::Rng rng(100 + t);
      int seq = 0;
      while (!stop) {
        const auto& name = names[rng.below(names.size())];
        const std::string tag =
            name + "/w" + std::to_string(t) + "-" + std::to_string(seq++);
        client.publish(record(name, "http://127.0.0.1:1/" + tag));
      }
    });
  }
  for (int t = 0; t < 2; ++t) {
    workers.emplace_back([&, t] {
      BrokerClient client(url, 2000ms);
      testsup::Rng rng(200 + t);
      while (!stop) {
        const auto& name = names[rng.below(names.size())];
        const ServiceRecord rec = client.lookup(name);
        // endpoint and wsdl must come from the same publish
        if (rec.wsdl_url != rec.endpoint_url + "?wsdl") ++violations;
        if (rec.service_name != name) ++violations;
      }
    });
  }
  std::this_thread::sleep_for(400ms);
  stop = true;
  for (auto& w : workers) w.join();
  CHECK(violations == 0);

  // deterministic final state
  BrokerClient client(url, 2000ms);
  for (const auto& n : names)
    client.publish(record(n, "http://127.0.0.1:1/" + n + "/final"));
  for (const auto& n : names)
    CHECK(client.lookup(n).endpoint_url == "http://127.0.0.1:1/" + n + "/final");
  CHECK(client.list_services().size() == names.size());
  server.stop();
}
