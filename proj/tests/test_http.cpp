#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "curator/annotate/captioning.hpp"
#include "curator/common/http.hpp"
#include "curator/dedup/embedding.hpp"
#include "curator/filters/scorer.hpp"
#include "curator/splitter/shot_detect.hpp"

using curator::HttpEndpoint;
using curator::ServiceError;
using nlohmann::json;

namespace {

// Serves canned replies on an ephemeral port; the last request body is kept.
class FakeService {
 public:
  FakeService() {
    server_.Post(R"(/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto route = req.matches[1].str();
      last_body = json::parse(req.body);
      if (route == "fail") {
        res.status = 503;
        return;
      }
      if (route == "garbage") {
        res.set_content("not json", "text/plain");
        return;
      }
      if (route == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content(replies[route].dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  HttpEndpoint at(const std::string& route) const {
    return HttpEndpoint::parse("http://127.0.0.1:" + std::to_string(port_) + "/" + route);
  }

  std::map<std::string, json> replies;
  json last_body;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::vector<curator::frame_io::RgbImage> frames(int n, int w = 32, int h = 18) {
  return std::vector<curator::frame_io::RgbImage>(n, curator::frame_io::RgbImage(w, h));
}

ServiceError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ServiceError";
  return ServiceError::Kind::Unavailable;
}

}  // namespace

TEST(Endpoint, Parse) {
  const auto ep = HttpEndpoint::parse("http://host:8080/a/b");
  EXPECT_EQ(ep.host, "host");
  EXPECT_EQ(ep.port, 8080);
  EXPECT_EQ(ep.path, "/a/b");
  EXPECT_EQ(HttpEndpoint::parse("http://h").port, 80);
  EXPECT_EQ(HttpEndpoint::parse("http://h").path, "/");
  EXPECT_THROW(HttpEndpoint::parse("https://h/"), std::invalid_argument);
  EXPECT_THROW(HttpEndpoint::parse("http://h:xx/"), std::invalid_argument);
  EXPECT_THROW(HttpEndpoint::parse("http:///p"), std::invalid_argument);
}

TEST(Base64, Rfc4648Vectors) {
  auto enc = [](const std::string& s) {
    return curator::base64_encode(reinterpret_cast<const unsigned char*>(s.data()), s.size());
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
}

TEST(Http, ScorerSendsResizedFrames) {
  FakeService svc;
  svc.replies["score"] = {{"score", 4.25}};
  curator::filters::HttpScorer scorer(svc.at("score"));
  const auto imgs = frames(2);
  EXPECT_DOUBLE_EQ(scorer.score("c1", imgs), 4.25);
  EXPECT_EQ(svc.last_body["clip_id"], "c1");
  ASSERT_EQ(svc.last_body["frames"].size(), 2u);
  // 224*224*3 bytes in base64.
  EXPECT_EQ(svc.last_body["frames"][0].get<std::string>().size(), 224u * 224 * 3 / 3 * 4);

  svc.replies["bad"] = {{"score", "high"}};
  curator::filters::HttpScorer bad(svc.at("bad"));
  EXPECT_EQ(kind_of([&] { bad.score("c", imgs); }), ServiceError::Kind::Malformed);
}

TEST(Http, ErrorKinds) {
  FakeService svc;
  const json body = {{"x", 1}};
  EXPECT_EQ(kind_of([&] { curator::post_json(svc.at("fail"), body); }), ServiceError::Kind::Unavailable);
  EXPECT_EQ(kind_of([&] { curator::post_json(svc.at("garbage"), body); }), ServiceError::Kind::Malformed);
  EXPECT_EQ(kind_of([&] { curator::post_json(svc.at("slow"), body, std::chrono::milliseconds(100)); }),
            ServiceError::Kind::Timeout);
  // Nothing listens on port 1.
  EXPECT_EQ(kind_of([&] { curator::post_json(HttpEndpoint::parse("http://127.0.0.1:1/x"), body); }),
            ServiceError::Kind::Unavailable);
}

TEST(Http, Captioner) {
  FakeService svc;
  svc.replies["cap"] = {{"caption", "a dog runs"}};
  curator::annotate::HttpCaptioner cap(svc.at("cap"), [](const curator::annotate::CaptionRequest& r) {
    return frames(static_cast<int>(r.frame_indices.size()));
  });
  const auto req = curator::annotate::build_caption_request("c", {0, 64}, 0);
  EXPECT_EQ(cap.caption(req), "a dog runs");
  EXPECT_EQ(svc.last_body["prompt"], req.prompt);
  EXPECT_EQ(svc.last_body["frames"].size(), 8u);

  svc.replies["nocap"] = json::object();
  curator::annotate::HttpCaptioner bad(svc.at("nocap"), [](const auto&) { return frames(1); });
  EXPECT_EQ(kind_of([&] { bad.caption(req); }), ServiceError::Kind::Malformed);
}

TEST(Http, Embedder) {
  FakeService svc;
  svc.replies["video"] = {{"vector", {1.0, 0.0, 0.5}}};
  svc.replies["text"] = {{"vector", {0.0, 2.0}}};
  curator::dedup::HttpEmbedder emb(svc.at("video"), svc.at("text"));
  const auto imgs = frames(1);
  EXPECT_EQ(emb.embed("c", imgs), (std::vector<float>{1.0f, 0.0f, 0.5f}));
  EXPECT_EQ(emb.embed_text("a cat"), (std::vector<float>{0.0f, 2.0f}));
  EXPECT_EQ(svc.last_body["text"], "a cat");

  curator::dedup::HttpEmbedder video_only(svc.at("video"));
  EXPECT_EQ(kind_of([&] { video_only.embed_text("x"); }), ServiceError::Kind::Unavailable);
}

TEST(Http, BoundaryDetector) {
  FakeService svc;
  std::vector<double> probs(100, 0.0);
  probs[40] = 0.9;
  svc.replies["tn"] = probs;
  curator::splitter::HttpBoundaryDetector det(svc.at("tn"));
  const auto imgs = frames(60, 96, 54);
  const auto got = curator::splitter::neural_boundary_probe(imgs, det);
  EXPECT_EQ(got, probs);
  EXPECT_EQ(svc.last_body["frames"].size(), 100u);
  EXPECT_EQ(svc.last_body["width"], 48);
  EXPECT_EQ(svc.last_body["height"], 27);

  svc.replies["short"] = std::vector<double>(99, 0.0);
  curator::splitter::HttpBoundaryDetector short_reply(svc.at("short"));
  EXPECT_EQ(kind_of([&] { curator::splitter::neural_boundary_probe(imgs, short_reply); }),
            ServiceError::Kind::Malformed);
}
