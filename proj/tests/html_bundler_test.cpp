/* Copyright 2026 The FatBeacon Sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fatbeacon/html_bundler.hpp"
#include "test_support.hpp"

using namespace fatbeacon;
using fatbeacon::testing::reference_base64;

namespace {

Bytes bytes_of(std::string_view s)
{
    return Bytes(s.begin(), s.end());
}

Resolver map_resolver(const fatbeacon::testing::ExternalDocument& doc)
{
    return [&doc](std::string_view url) -> std::optional<ResolvedResource> {
        auto it = doc.files.find(std::string(url));
        if (it == doc.files.end()) return std::nullopt;
        return ResolvedResource{it->second.first, it->second.second};
    };
}

// 1x1 transparent PNG.
const Bytes kDotPng = {0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48, 0x44,
                       0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1F,
                       0x15, 0xC4, 0x89, 0x00, 0x00, 0x00, 0x0A, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x00,
                       0x01, 0x00, 0x00, 0x05, 0x00, 0x01, 0x0D, 0x0A, 0x2D, 0xB4, 0x00, 0x00, 0x00, 0x00, 0x49,
                       0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82};

std::size_t count_of(std::string_view hay, std::string_view needle)
{
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST(Base64, MatchesReferenceEncoder)
{
    std::mt19937_64 rng(7);
    for (int len = 0; len < 200; ++len) {
        Bytes b(static_cast<std::size_t>(len));
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        EXPECT_EQ(base64_encode(b), reference_base64(b)) << "len " << len;
    }
}

TEST(Base64, RoundTripsAndLengthLaw)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        Bytes b(rng() % 1000);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        const auto text = base64_encode(b);
        EXPECT_EQ(text.size(), (b.size() + 2) / 3 * 4);
        auto back = base64_decode(text);
        ASSERT_TRUE(back.has_value());
        EXPECT_EQ(*back, b);
    }
}

TEST(Base64, RejectsGarbage)
{
    EXPECT_FALSE(base64_decode("TWF").has_value());
    EXPECT_FALSE(base64_decode("TW!u").has_value());
    EXPECT_FALSE(base64_decode("=AAA").has_value());
    EXPECT_EQ(*base64_decode(""), Bytes{});
}

TEST(DataUri, WorkedExamples)
{
    EXPECT_EQ(encode_data_uri({}, "image/png"), "data:image/png;base64,");
    const auto man = bytes_of("Man");
    EXPECT_EQ(encode_data_uri(man, "text/plain"), "data:text/plain;base64," + reference_base64(man));
    EXPECT_EQ(encode_data_uri(man, "text/plain"), "data:text/plain;base64,TWFu");
    const auto payload = encode_data_uri(bytes_of("abc"), "text/plain").substr(std::string("data:text/plain;base64,").size());
    EXPECT_EQ(payload.size(), 4u);
    EXPECT_EQ(payload.find('='), std::string::npos);
    EXPECT_THROW(encode_data_uri(man, ""), std::invalid_argument);
}

TEST(InlineBundle, NoReferencesIsIdentity)
{
    const std::string html = "<!doctype html><html><head><title>t</title><style>a{}</style></head>"
                             "<body><a href=\"#x\">x</a><img src=\"data:image/gif;base64,R0lGOD==\"></body></html>";
    const auto out = inline_bundle(html, nullptr);
    EXPECT_EQ(out.html, html);
    EXPECT_EQ(out.size_bytes, html.size());
}

TEST(InlineBundle, ImageBecomesDataUri)
{
    const std::string html = "<html><body><img src=\"dot.png\" alt=\"dot\"></body></html>";
    const auto out = inline_bundle(html, [](std::string_view url) -> std::optional<ResolvedResource> {
        if (url == "dot.png") return ResolvedResource{kDotPng, "image/png"};
        return std::nullopt;
    });
    EXPECT_EQ(out.html, "<html><body><img src=\"data:image/png;base64," + reference_base64(kDotPng) +
                            "\" alt=\"dot\"></body></html>");
}

TEST(InlineBundle, StylesheetLandsInHead)
{
    std::string css(100, ' ');
    const std::string rule = "body{color:#123456;margin:0}";
    std::copy(rule.begin(), rule.end(), css.begin());
    css.back() = '\n';
    const std::string html = "<html><head><title>T</title></head><body>"
                             "<link rel=\"stylesheet\" href=\"site.css\"><p>hi</p></body></html>";
    const auto out = inline_bundle(html, [&](std::string_view url) -> std::optional<ResolvedResource> {
        if (url == "site.css") return ResolvedResource{bytes_of(css), "text/css"};
        return std::nullopt;
    });
    EXPECT_EQ(count_of(out.html, "<style"), 1u);
    const auto head_end = out.html.find("</head>");
    const auto open = out.html.find("<style>");
    ASSERT_NE(open, std::string::npos);
    EXPECT_LT(open, head_end);
    const auto close = out.html.find("</style>", open);
    EXPECT_EQ(out.html.substr(open + 7, close - open - 7), css);
    EXPECT_EQ(out.html.find("<link"), std::string::npos);
}

TEST(InlineBundle, SynthesizesHeadWhenMissing)
{
    const std::string html = "<!DOCTYPE html><html><body><script src=\"a.js\"></script></body></html>";
    const auto out = inline_bundle(html, [](std::string_view) -> std::optional<ResolvedResource> {
        return ResolvedResource{bytes_of("let a = 1;"), "text/javascript"};
    });
    EXPECT_NE(out.html.find("<head><script>let a = 1;</script></head>"), std::string::npos) << out.html;
    EXPECT_TRUE(validate_atomic(out).empty());
}

TEST(InlineBundle, EscapesClosingTagInScript)
{
    const std::string html = "<html><head><script src=\"a.js\"></script></head><body></body></html>";
    const auto out = inline_bundle(html, [](std::string_view) -> std::optional<ResolvedResource> {
        return ResolvedResource{bytes_of("s = '</script>';"), "text/javascript"};
    });
    EXPECT_NE(out.html.find("s = '<\\/script>';"), std::string::npos);
    EXPECT_TRUE(validate_atomic(out).empty());
}

TEST(InlineBundle, Errors)
{
    const std::string html = "<html><body><img src=\"missing.png\"></body></html>";
    try {
        inline_bundle(html, [](std::string_view) { return std::optional<ResolvedResource>{}; });
        FAIL();
    } catch (const BundleError& e) {
        EXPECT_EQ(e.kind(), BundleError::Kind::UnresolvedResource);
        EXPECT_EQ(e.detail(), "missing.png");
    }
    try {
        inline_bundle("<img src=\"x\">", [](std::string_view) -> std::optional<ResolvedResource> {
            return ResolvedResource{bytes_of("body{}"), "text/css"};
        });
        FAIL();
    } catch (const BundleError& e) {
        EXPECT_EQ(e.kind(), BundleError::Kind::MimeMismatch);
    }
    try {
        inline_bundle("<html><body><p class=\"x></body></html>", nullptr);
        FAIL();
    } catch (const BundleError& e) {
        EXPECT_EQ(e.kind(), BundleError::Kind::MalformedHtml);
    }
    try {
        inline_bundle("<script src=\"a.js\"></script>", [](std::string_view) -> std::optional<ResolvedResource> {
            return ResolvedResource{Bytes{0xFF, 0xFE}, "text/javascript"};
        });
        FAIL();
    } catch (const BundleError& e) {
        EXPECT_EQ(e.kind(), BundleError::Kind::InvalidTextResource);
    }
}

TEST(InlineBundle, RandomDocumentsBecomeAtomicAndStayFixed)
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 60; ++i) {
        const auto doc = fatbeacon::testing::make_external_document(rng, i);
        EXPECT_FALSE(validate_atomic(doc.html).empty());
        const auto once = inline_bundle(doc.html, map_resolver(doc));
        EXPECT_TRUE(validate_atomic(once).empty()) << once.html;
        const auto twice = inline_bundle(once.html, map_resolver(doc));
        EXPECT_EQ(twice.html, once.html);
        EXPECT_EQ(twice.content_hash, once.content_hash);
        EXPECT_EQ(find_resources(once.html).size(), 0u);
    }
}

TEST(InlineBundle, DirectoryResolver)
{
    const auto root = std::filesystem::temp_directory_path() / ("fb_bundle_" + std::to_string(::getpid()));
    std::filesystem::create_directories(root / "css");
    std::ofstream(root / "css" / "a.css") << "h1{font-size:2em}";
    const auto resolver = directory_resolver(root);
    ASSERT_TRUE(resolver("css/a.css").has_value());
    EXPECT_EQ(resolver("css/a.css")->mime, "text/css");
    EXPECT_FALSE(resolver("../etc/passwd").has_value());
    EXPECT_FALSE(resolver("http://example.com/a.css").has_value());
    EXPECT_FALSE(resolver("//cdn/a.css").has_value());
    EXPECT_FALSE(resolver("css/none.css").has_value());
    std::filesystem::remove_all(root);
}

TEST(ValidateAtomic, Examples)
{
    const auto v = validate_atomic(std::string_view("<p><img src=\"http://x/y.png\"></p>"));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0], (AtomicityViolation{"img", "http://x/y.png"}));
    EXPECT_TRUE(validate_atomic(std::string_view("<style>p{}</style><script>go()</script>"
                                                 "<img src=\"data:image/png;base64,AAAA\"><a href=\"mailto:a@b\">m</a>"))
                    .empty());
    EXPECT_EQ(validate_atomic(std::string_view("<div style=\"background:url(bg.png)\"></div>")).size(), 1u);
    EXPECT_EQ(validate_atomic(std::string_view("<style>@import 'x.css';</style>")).size(), 1u);
    const auto broken = validate_atomic(std::string_view("<p title='unterminated>"));
    ASSERT_EQ(broken.size(), 1u);
    EXPECT_EQ(broken[0].tag, "#document");
}

TEST(Corpus, ExactSizesAndDeterminism)
{
    const int one[] = {10};
    const auto single = generate_corpus(one);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_GE(single[0].size_bytes, 10138u);
    EXPECT_LE(single[0].size_bytes, 10342u);

    const int ladder[] = {10, 20, 40, 100, 200};
    const auto corpus = generate_corpus(ladder);
    ASSERT_EQ(corpus.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(corpus[i].size_bytes, static_cast<std::size_t>(ladder[i]) * 1024);
        EXPECT_EQ(corpus[i].html.size(), corpus[i].size_bytes);
        EXPECT_TRUE(validate_atomic(corpus[i]).empty());
        EXPECT_EQ(corpus[i].title, "Corpus " + std::to_string(ladder[i]) + " KB");
    }
    EXPECT_EQ(generate_corpus(ladder)[2].content_hash, corpus[2].content_hash);
    EXPECT_TRUE(generate_corpus(std::span<const int>{}).empty());
}

TEST(Metadata, TitleAndHash)
{
    const auto b = ContentBundle::from_html("<html><head><title>  Sendero de los Sentidos, Laurisilva de Canarias </title>");
    EXPECT_EQ(b.title.size(), 26u);
    EXPECT_EQ(b.title, "Sendero de los Sentidos, L");
    EXPECT_EQ(to_hex(sha256(std::string_view("abc"))),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Truncation never splits a multi-byte sequence.
    const std::string accents = "\xC3\xA1\xC3\xA9\xC3\xAD";
    EXPECT_EQ(truncate_utf8(accents, 3), "\xC3\xA1");
    EXPECT_TRUE(is_valid_utf8(truncate_utf8(accents, 5)));
    EXPECT_FALSE(is_valid_utf8("\xC3"));
    EXPECT_EQ(extract_title("<p>no title</p>"), "");
}
