// Copyright 2026 The tadacap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "tadacap/agnostic_captioner.hpp"
#include "tadacap/digest.hpp"
#include "tadacap/errors.hpp"
#include "tadacap/prompts.hpp"
#include "tadacap/providers.hpp"
#include "tadacap/synthgen.hpp"

// After Eigen: httplib pulls in <resolv.h>, which defines _res.
#include "local_server.hpp"

namespace tadacap {
namespace {

using prompts::ExamplePair;

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

std::vector<ExamplePair> four_pairs() {
  return {{"It grows.", "The price grows."},
          {"Is flat.", "The price is flat."},
          {"Has strong variability.", "The price shows high volatility."},
          {"Shows common jumps.", "The price shows jumps."}};
}

TEST(Prompts, IclTemplateExact) {
  const auto b = prompts::build_icl_prompt({{"It grows.", "The price grows."}}, "Is flat.", "stock price series");
  EXPECT_EQ(b.text,
            "You translate generic time-series descriptions into descriptions for the domain: stock price series.\n"
            "Generic: It grows.\nIn-domain: The price grows.\n"
            "Generic: Is flat.\nIn-domain:");
  EXPECT_EQ(b.mode, "icl");
  EXPECT_EQ(prompts::kTemplateVersion, "icl-v1");
}

TEST(Prompts, IclBlockCountsAndOrder) {
  const auto pairs = four_pairs();
  const auto b = prompts::build_icl_prompt(pairs, "It goes downward.", "stock price series");
  EXPECT_EQ(b.pairs, pairs);
  EXPECT_EQ(count(b.text, "Generic: "), 5u);
  EXPECT_EQ(count(b.text, "In-domain:"), 5u);
  EXPECT_EQ(count(b.text, "It goes downward."), 1u);
  std::size_t last = 0;
  for (const auto& p : pairs) {
    const auto at = b.text.find("Generic: " + p.agnostic + "\nIn-domain: " + p.in_domain + "\n");
    ASSERT_NE(at, std::string::npos) << p.agnostic;
    EXPECT_GT(at, last);
    last = at;
  }
  EXPECT_EQ(prompts::build_icl_prompt(pairs, "It goes downward.", "stock price series").text, b.text);
}

TEST(Prompts, NewlinesCollapsed) {
  const auto b = prompts::build_icl_prompt({{"It\ngrows\n\n fast", " The   price\tgrows "}}, "q\nq", "stock\nprices");
  EXPECT_EQ(b.pairs[0].agnostic, "It grows fast");
  EXPECT_EQ(b.pairs[0].in_domain, "The price grows");
  EXPECT_NE(b.text.find("domain: stock prices.\n"), std::string::npos);
  EXPECT_NE(b.text.find("Generic: q q\nIn-domain:"), std::string::npos);
  EXPECT_EQ(count(b.text, "\n"), 4u);
}

TEST(Prompts, IclErrors) {
  EXPECT_THROW(prompts::build_icl_prompt({}, "q", "d"), InvalidArgument);
  EXPECT_THROW(prompts::build_icl_prompt({{"", "x"}}, "q", "d"), InvalidArgument);
  EXPECT_THROW(prompts::build_icl_prompt({{"x", "  "}}, "q", "d"), InvalidArgument);
  EXPECT_THROW(prompts::build_icl_prompt(four_pairs(), "", "d"), InvalidArgument);
  EXPECT_THROW(prompts::build_icl_prompt(four_pairs(), "q", ""), InvalidArgument);
}

TEST(Prompts, ZeroShotSentence) {
  const auto b = prompts::build_zs_prompt("It grows, then is flat.", "number of Covid cases");
  EXPECT_EQ(b.text,
            "Translate the time-series description 'It grows, then is flat.' in the context of number of Covid cases.");
  EXPECT_TRUE(b.pairs.empty());
  EXPECT_EQ(b.mode, "zs");
  EXPECT_THROW(prompts::build_zs_prompt("x", ""), InvalidArgument);
  EXPECT_THROW(prompts::build_zs_prompt(" ", "d"), InvalidArgument);
}

TEST(Prompts, MultimodalSentence) {
  EXPECT_EQ(prompts::build_multimodal_prompt("stock price series").text,
            "Describe the time-series in the context of stock price series.");
  EXPECT_THROW(prompts::build_multimodal_prompt(""), InvalidArgument);
}

TEST(Postprocess, Rules) {
  EXPECT_EQ(prompts::postprocess("  The price grows.  "), "The price grows.");
  EXPECT_EQ(prompts::postprocess("In-domain: The price grows."), "The price grows.");
  EXPECT_EQ(prompts::postprocess("\"The price grows.\""), "The price grows.");
  EXPECT_EQ(prompts::postprocess("“The price grows.”"), "The price grows.");
  EXPECT_EQ(prompts::postprocess("The price\ngrows.\n\nSecond paragraph."), "The price grows.");
  EXPECT_EQ(prompts::postprocess("First.\n   \nSecond."), "First.");
  EXPECT_EQ(prompts::postprocess("line one\r\nline two"), "line one line two");
  EXPECT_EQ(prompts::postprocess("in-domain: 'quoted'"), "quoted");
  EXPECT_EQ(prompts::postprocess("   \n  "), "");
}

TEST(Postprocess, Idempotent) {
  for (const char* raw : {"In-domain: \"a  b\"\n\nc", "  x ", "'y'", "z\n\n\nw"}) {
    const auto once = prompts::postprocess(raw);
    EXPECT_EQ(prompts::postprocess(once), once) << raw;
  }
}

llm::CompletionRequest req(std::string prompt) {
  llm::CompletionRequest r;
  r.prompt = std::move(prompt);
  return r;
}

TEST(EchoLlm, ReturnsQueryLineOfIclPrompt) {
  llm::EchoLlm echo;
  const auto b = prompts::build_icl_prompt(four_pairs(), "It goes downward.", "stock price series");
  EXPECT_EQ(echo.complete(req(b.text)), "Generic: It goes downward.");
  const auto zs = prompts::build_zs_prompt("Is flat.", "stock price series");
  EXPECT_EQ(echo.complete(req(zs.text)), zs.text);
  EXPECT_EQ(echo.complete(req("\n\n")), "");
  EXPECT_EQ(echo.calls(), 3u);
}

TEST(ExtractQuery, BothTemplates) {
  EXPECT_EQ(llm::extract_query_caption(prompts::build_icl_prompt(four_pairs(), "It grows.", "d").text), "It grows.");
  EXPECT_EQ(llm::extract_query_caption(prompts::build_zs_prompt("It's flat.", "d").text), "It's flat.");
  EXPECT_EQ(llm::extract_query_caption("nothing here"), "");
}

TEST(ScriptedOracle, MapsShapePhrasesToDomainBank) {
  llm::ScriptedOracleLlm oracle;
  const auto& up = synth::find_regime("trend-up").domain;
  const auto out = oracle.complete(req(prompts::build_zs_prompt("It grows.", "stock price series").text));
  bool in_bank = false;
  for (const auto& d : up) in_bank |= out == synth::sentence(d);
  EXPECT_TRUE(in_bank) << out;
}

TEST(ScriptedOracle, PrefersPhrasesSeenInExamples) {
  llm::ScriptedOracleLlm oracle;
  std::vector<ExamplePair> pairs{{"Is climbing.", "The price of the equity is rising."}};
  const auto b = prompts::build_icl_prompt(pairs, "It grows.", "stock price series");
  EXPECT_EQ(oracle.complete(req(b.text)), "The price of the equity is rising.");
}

TEST(ScriptedOracle, OneSentencePerFeatureInOrder) {
  llm::ScriptedOracleLlm oracle;
  const auto out =
      oracle.complete(req(prompts::build_zs_prompt("It grows, then is flat. It has strong variability.", "d").text));
  // trend-up, trend-neutral, sigma-high: three groups, three sentences, in caption order.
  EXPECT_EQ(count(out, "."), 3u) << out;
  EXPECT_LT(out.find(synth::sentence(synth::find_regime("trend-up").domain.front())),
            out.find(synth::sentence(synth::find_regime("sigma-high").domain.front())));
}

TEST(ScriptedOracle, LongestMatchWins) {
  llm::ScriptedOracleLlm oracle;
  const auto out = oracle.complete(req(prompts::build_zs_prompt("It grows exponentially.", "d").text));
  const auto& v = synth::physics_catalog().find("exp-positive").velocity;
  EXPECT_EQ(out, synth::sentence(v.front()));
}

TEST(ScriptedOracle, CoversEveryRuleCaptionPhrase) {
  llm::ScriptedOracleLlm oracle;
  for (const auto& p : caption::rule_phrases()) {
    EXPECT_FALSE(oracle.complete(req(prompts::build_zs_prompt("It " + p.phrase + ".", "d").text)).empty())
        << p.phrase;
  }
  EXPECT_EQ(oracle.complete(req(prompts::build_zs_prompt("Wibble.", "d").text)), "");
}

TEST(CannedFile, ReturnsFileContent) {
  const auto path = std::filesystem::temp_directory_path() / "tadacap_canned.txt";
  std::ofstream(path) << "  The price grows.\n";
  auto client = llm::make_llm_client("mock:canned-file:" + path.string());
  EXPECT_EQ(client->complete(req("anything")), "  The price grows.\n");
  EXPECT_EQ(client->provider_tag(), "mock:canned-file");
  std::filesystem::remove(path);
  EXPECT_THROW(llm::make_llm_client("mock:canned-file:" + path.string()), ConfigError);
  EXPECT_EQ(llm::CannedFileLlm::from_text("x")->complete(req("")), "x");
}

TEST(Factory, MockSchemes) {
  EXPECT_EQ(llm::make_llm_client("mock:echo")->provider_tag(), "mock:echo");
  EXPECT_EQ(llm::make_multimodal_client("mock:scripted-oracle")->provider_tag(), "mock:scripted-oracle");
  EXPECT_THROW(llm::make_llm_client("mock:parrot"), ConfigError);
  EXPECT_TRUE(llm::is_mock_endpoint("mock:x"));
  EXPECT_FALSE(llm::is_mock_endpoint("https://x"));
}

TEST(Factory, MissingCredentialsFailBeforeRequest) {
  unsetenv(llm::kLlmKeyEnv);
  unsetenv(llm::kMultimodalKeyEnv);
  EXPECT_THROW(llm::make_llm_client("http://127.0.0.1:9/v1"), ConfigError);
  EXPECT_THROW(llm::make_multimodal_client("http://127.0.0.1:9/v1"), ConfigError);
}

TEST(HttpCompletion, WireFormatWithImage) {
  setenv(llm::kMultimodalKeyEnv, "mm-key", 1);
  std::mutex mu;
  nlohmann::json seen;
  std::string auth;
  tadacap::testing::LocalServer server([&](const httplib::Request& r, httplib::Response& res) {
    std::lock_guard lock(mu);
    seen = nlohmann::json::parse(r.body);
    auth = r.get_header_value("Authorization");
    res.set_content(R"({"text": " The price grows. "})", "application/json");
  });
  auto client = llm::make_multimodal_client(server.url("/complete"));
  llm::CompletionRequest r;
  r.model = "m1";
  r.prompt = "Describe the time-series in the context of stock price series.";
  r.temperature = 0.0;
  r.max_tokens = 64;
  r.image = {0x89, 'P', 'N', 'G'};
  EXPECT_EQ(client->complete(r), " The price grows. ");
  EXPECT_EQ(auth, "Bearer mm-key");
  EXPECT_EQ(seen["model"], "m1");
  EXPECT_EQ(seen["prompt"], r.prompt);
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["max_tokens"], 64);
  EXPECT_EQ(seen["image_b64"], base64_encode(r.image));
  EXPECT_EQ(client->provider_tag(), "http:" + server.url("/complete"));
  unsetenv(llm::kMultimodalKeyEnv);
}

TEST(HttpCompletion, TextOnlyAndBadResponse) {
  setenv(llm::kLlmKeyEnv, "k", 1);
  std::atomic<int> n{0};
  nlohmann::json first;
  tadacap::testing::LocalServer server([&](const httplib::Request& r, httplib::Response& res) {
    if (n++ == 0) {
      first = nlohmann::json::parse(r.body);
      res.set_content(R"({"text": "ok"})", "application/json");
    } else {
      res.set_content(R"({"choices": []})", "application/json");
    }
  });
  auto client = llm::make_llm_client(server.url());
  EXPECT_EQ(client->complete(req("p")), "ok");
  EXPECT_FALSE(first.contains("image_b64"));
  EXPECT_THROW(client->complete(req("p")), FormatError);
  EXPECT_EQ(client->calls(), 2u);
  unsetenv(llm::kLlmKeyEnv);
}

}  // namespace
}  // namespace tadacap
