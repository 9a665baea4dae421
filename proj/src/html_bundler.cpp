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

#include "fatbeacon/html_bundler.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "html_scan.hpp"

namespace fatbeacon {

using detail::Tag;

BundleError::BundleError(Kind kind, std::string detail)
    : std::runtime_error([&] {
          switch (kind) {
          case Kind::UnresolvedResource: return "unresolved resource: " + detail;
          case Kind::MalformedHtml: return "malformed html: " + detail;
          case Kind::MimeMismatch: return "mime type does not match element: " + detail;
          case Kind::InvalidTextResource: return "resource is not valid UTF-8 text: " + detail;
          }
          return detail;
      }()),
      kind_(kind),
      detail_(std::move(detail))
{
}

// ---------------------------------------------------------------------------
// base64

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int sextet(char c)
{
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t group = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
        out.push_back(kAlphabet[(group >> 18) & 0x3F]);
        out.push_back(kAlphabet[(group >> 12) & 0x3F]);
        out.push_back(kAlphabet[(group >> 6) & 0x3F]);
        out.push_back(kAlphabet[group & 0x3F]);
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t group = std::uint32_t{bytes[i]} << 16;
        out.push_back(kAlphabet[(group >> 18) & 0x3F]);
        out.push_back(kAlphabet[(group >> 12) & 0x3F]);
        out.append("==");
    } else if (rest == 2) {
        const std::uint32_t group = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
        out.push_back(kAlphabet[(group >> 18) & 0x3F]);
        out.push_back(kAlphabet[(group >> 12) & 0x3F]);
        out.push_back(kAlphabet[(group >> 6) & 0x3F]);
        out.push_back('=');
    }
    return out;
}

std::optional<Bytes> base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0) {
        return std::nullopt;
    }
    Bytes out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        const bool last = i + 4 == text.size();
        int v[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && last && k >= 2) {
                v[k] = 0;
                ++pad;
                continue;
            }
            if (pad > 0) {
                return std::nullopt;
            }
            v[k] = sextet(c);
            if (v[k] < 0) {
                return std::nullopt;
            }
        }
        const std::uint32_t group = (std::uint32_t(v[0]) << 18) | (std::uint32_t(v[1]) << 12) |
                                    (std::uint32_t(v[2]) << 6) | std::uint32_t(v[3]);
        out.push_back(static_cast<std::uint8_t>(group >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(group >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(group));
    }
    return out;
}

std::string encode_data_uri(std::span<const std::uint8_t> bytes, std::string_view mime)
{
    if (mime.empty()) {
        throw std::invalid_argument("encode_data_uri: empty mime type");
    }
    std::string uri = "data:";
    uri.append(mime);
    uri.append(";base64,");
    uri.append(base64_encode(bytes));
    return uri;
}

// ---------------------------------------------------------------------------
// hashing, text helpers

Digest sha256(std::span<const std::uint8_t> bytes)
{
    Digest digest{};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1 ||
        length != digest.size()) {
        throw std::runtime_error("sha256: digest failed");
    }
    return digest;
}

Digest sha256(std::string_view text)
{
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

bool is_valid_utf8(std::string_view text)
{
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= text.size()) {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) {
                return false;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong forms, surrogates, out of range.
        static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
        if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string truncate_utf8(std::string_view text, std::size_t max_bytes)
{
    if (text.size() <= max_bytes) {
        return std::string(text);
    }
    std::size_t cut = max_bytes;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
        --cut;
    }
    return std::string(text.substr(0, cut));
}

std::string extract_title(std::string_view html)
{
    std::vector<Tag> tags;
    try {
        tags = detail::scan_tags(html);
    } catch (const BundleError&) {
        return {};
    }
    for (const auto& tag : tags) {
        if (!tag.closing && tag.name == "title" && tag.text_end >= tag.text_begin) {
            return std::string(detail::trim(html.substr(tag.text_begin, tag.text_end - tag.text_begin)));
        }
    }
    return {};
}

ContentBundle ContentBundle::from_html(std::string html)
{
    ContentBundle bundle;
    bundle.size_bytes = html.size();
    bundle.content_hash = sha256(std::string_view(html));
    bundle.title = truncate_utf8(extract_title(html), kMaxAdvertTitleBytes);
    bundle.html = std::move(html);
    return bundle;
}

// ---------------------------------------------------------------------------
// resource discovery and inlining

namespace {

bool is_stylesheet_link(const Tag& tag)
{
    if (tag.name != "link") {
        return false;
    }
    const auto* rel = tag.attribute("rel");
    if (rel == nullptr) {
        return false;
    }
    std::istringstream tokens(detail::to_lower(rel->value));
    std::string token;
    while (tokens >> token) {
        if (token == "stylesheet") {
            return true;
        }
    }
    return false;
}

// The attribute holding an external URL that inlining replaces, if any.
const detail::Attribute* inlinable_reference(const Tag& tag, ResourceKind& kind)
{
    if (tag.closing) {
        return nullptr;
    }
    const detail::Attribute* attr = nullptr;
    if (is_stylesheet_link(tag)) {
        attr = tag.attribute("href");
        kind = ResourceKind::Stylesheet;
    } else if (tag.name == "script") {
        attr = tag.attribute("src");
        kind = ResourceKind::Script;
    } else if (tag.name == "img") {
        attr = tag.attribute("src");
        kind = ResourceKind::Image;
    }
    if (attr == nullptr || !attr->has_value || detail::is_local_reference(attr->value)) {
        return nullptr;
    }
    return attr;
}

std::string escape_raw_text(std::string_view text, std::string_view element)
{
    const std::string needle = "</" + std::string(element);
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '<' && i + needle.size() <= text.size() &&
            detail::to_lower(text.substr(i, needle.size())) == needle) {
            out.append("<\\/");
            ++i;  // skip '/'
            continue;
        }
        out.push_back(text[i]);
    }
    return out;
}

std::string render_attribute(const detail::Attribute& attr)
{
    std::string out = " " + attr.name;
    if (attr.has_value) {
        const char quote = attr.value.find('"') == std::string::npos ? '"' : '\'';
        out.push_back('=');
        out.push_back(quote);
        out.append(attr.value);
        out.push_back(quote);
    }
    return out;
}

struct Edit {
    std::size_t begin;
    std::size_t end;
    std::string replacement;
};

struct HeadLayout {
    const Tag* html_open = nullptr;
    const Tag* head_open = nullptr;
    std::size_t head_begin = 0;
    std::size_t head_end = 0;  // insertion point for moved elements
    std::size_t doctype_end = 0;
};

HeadLayout locate_head(std::string_view html, const std::vector<Tag>& tags)
{
    HeadLayout layout;
    const Tag* body_open = nullptr;
    for (const auto& tag : tags) {
        if (tag.closing) {
            if (tag.name == "head" && layout.head_open != nullptr && layout.head_end == 0) {
                layout.head_end = tag.begin;
            }
            continue;
        }
        if (tag.name == "html" && layout.html_open == nullptr) layout.html_open = &tag;
        if (tag.name == "head" && layout.head_open == nullptr) layout.head_open = &tag;
        if (tag.name == "body" && body_open == nullptr) body_open = &tag;
    }
    if (layout.head_open != nullptr) {
        layout.head_begin = layout.head_open->end;
        if (layout.head_end == 0) {
            // No </head>: the head ends where the body starts.
            layout.head_end = body_open != nullptr && body_open->begin > layout.head_begin ? body_open->begin
                                                                                          : layout.head_begin;
        }
    }
    const auto lowered = detail::to_lower(html.substr(0, std::min<std::size_t>(html.size(), 512)));
    const auto doctype = lowered.find("<!doctype");
    if (doctype != std::string::npos) {
        const auto gt = html.find('>', doctype);
        if (gt != std::string_view::npos) {
            layout.doctype_end = gt + 1;
        }
    }
    return layout;
}

std::vector<Tag> scan_utf8(std::string_view html)
{
    if (!is_valid_utf8(html)) {
        throw BundleError(BundleError::Kind::MalformedHtml, "document is not valid UTF-8");
    }
    return detail::scan_tags(html);
}

std::string_view as_text(const Bytes& bytes)
{
    return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

std::vector<ResourceRef> find_resources(std::string_view html)
{
    std::vector<ResourceRef> refs;
    for (const auto& tag : scan_utf8(html)) {
        ResourceKind kind{};
        if (const auto* attr = inlinable_reference(tag, kind)) {
            refs.push_back(ResourceRef{kind, std::string(detail::trim(attr->value)), std::nullopt, {}});
        }
    }
    return refs;
}

ContentBundle inline_bundle(std::string_view html, const Resolver& resolver)
{
    const auto tags = scan_utf8(html);
    const auto layout = locate_head(html, tags);

    std::vector<Edit> edits;
    std::string moved;

    for (const auto& tag : tags) {
        ResourceKind kind{};
        const auto* attr = inlinable_reference(tag, kind);
        if (attr == nullptr) {
            continue;
        }
        ResourceRef ref{kind, std::string(detail::trim(attr->value)), std::nullopt, {}};
        auto resolved = resolver ? resolver(ref.url) : std::nullopt;
        if (!resolved) {
            throw BundleError(BundleError::Kind::UnresolvedResource, ref.url);
        }
        ref.resolved_bytes = std::move(resolved->bytes);
        ref.mime = std::move(resolved->mime);

        if (kind == ResourceKind::Image) {
            if (!ref.mime.starts_with("image/")) {
                throw BundleError(BundleError::Kind::MimeMismatch, ref.url + " (" + ref.mime + ")");
            }
            edits.push_back({attr->value_begin, attr->value_end, encode_data_uri(*ref.resolved_bytes, ref.mime)});
            continue;
        }

        const auto text = as_text(*ref.resolved_bytes);
        if (!is_valid_utf8(text)) {
            throw BundleError(BundleError::Kind::InvalidTextResource, ref.url);
        }
        std::string element;
        if (kind == ResourceKind::Stylesheet) {
            element = "<style";
            if (const auto* media = tag.attribute("media")) {
                element += render_attribute(*media);
            }
            element += ">" + escape_raw_text(text, "style") + "</style>";
        } else {
            element = "<script";
            for (const auto& a : tag.attributes) {
                if (a.name != "src") {
                    element += render_attribute(a);
                }
            }
            element += ">" + escape_raw_text(text, "script") + "</script>";
        }

        const bool in_head = layout.head_open != nullptr && tag.begin >= layout.head_begin && tag.begin < layout.head_end;
        if (in_head) {
            edits.push_back({tag.begin, tag.element_end, std::move(element)});
        } else {
            edits.push_back({tag.begin, tag.element_end, {}});
            moved += element;
        }
    }

    if (edits.empty()) {
        return ContentBundle::from_html(std::string(html));
    }

    if (!moved.empty()) {
        if (layout.head_open != nullptr) {
            edits.push_back({layout.head_end, layout.head_end, std::move(moved)});
        } else {
            const std::size_t at = layout.html_open != nullptr ? layout.html_open->end : layout.doctype_end;
            edits.push_back({at, at, "<head>" + moved + "</head>"});
        }
    }

    // Insertions sort ahead of a replacement starting at the same offset.
    std::stable_sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        return (a.end == a.begin) && (b.end != b.begin);
    });

    std::string out;
    out.reserve(html.size() * 2);
    std::size_t cursor = 0;
    for (const auto& edit : edits) {
        out.append(html.substr(cursor, edit.begin - cursor));
        out.append(edit.replacement);
        cursor = edit.end;
    }
    out.append(html.substr(cursor));
    return ContentBundle::from_html(std::move(out));
}

std::vector<AtomicityViolation> validate_atomic(std::string_view html)
{
    std::vector<AtomicityViolation> violations;
    std::vector<Tag> tags;
    try {
        tags = detail::scan_tags(html);
    } catch (const BundleError& e) {
        violations.push_back({"#document", e.detail()});
        return violations;
    }
    for (const auto& tag : tags) {
        if (tag.closing) {
            continue;
        }
        for (const auto& attr : tag.attributes) {
            if ((attr.name == "src" || attr.name == "href") && attr.has_value &&
                !detail::is_local_reference(attr.value)) {
                violations.push_back({tag.name, std::string(detail::trim(attr.value))});
            } else if (attr.name == "style" && attr.has_value) {
                for (auto& url : detail::css_references(attr.value)) {
                    if (!detail::is_local_reference(url)) {
                        violations.push_back({tag.name, std::move(url)});
                    }
                }
            }
        }
        if (tag.name == "style" && tag.text_end > tag.text_begin) {
            for (auto& url : detail::css_references(html.substr(tag.text_begin, tag.text_end - tag.text_begin))) {
                if (!detail::is_local_reference(url)) {
                    violations.push_back({"style", std::move(url)});
                }
            }
        }
    }
    return violations;
}

std::vector<AtomicityViolation> validate_atomic(const ContentBundle& bundle)
{
    return validate_atomic(std::string_view(bundle.html));
}

// ---------------------------------------------------------------------------
// corpus

namespace {

constexpr std::array<std::string_view, 24> kWords = {
    "trail",  "beacon",  "forest", "path",    "laurel", "signal", "visitor", "guide",
    "island", "route",   "sense",  "shade",   "stone",  "water",  "light",   "bird",
    "moss",   "meadow",  "summit", "valley",  "fern",   "wind",   "cedar",   "viewpoint",
};

std::string filler_paragraph(std::mt19937_64& rng)
{
    const std::size_t words = 12 + rng() % 24;
    std::string text = "<p>";
    for (std::size_t i = 0; i < words; ++i) {
        if (i > 0) text.push_back(' ');
        text.append(kWords[rng() % kWords.size()]);
    }
    text.append(".</p>\n");
    return text;
}

}  // namespace

std::vector<ContentBundle> generate_corpus(std::span<const int> target_sizes_kb)
{
    std::vector<ContentBundle> corpus;
    corpus.reserve(target_sizes_kb.size());
    for (const int size_kb : target_sizes_kb) {
        if (size_kb < 1) {
            throw std::invalid_argument("generate_corpus: target size must be at least 1 KB");
        }
        const std::size_t target = static_cast<std::size_t>(size_kb) * 1024;
        const std::string label = "Corpus " + std::to_string(size_kb) + " KB";
        const std::string head = "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" + label +
                                 "</title>\n<style>body{font-family:sans-serif;margin:1em}</style>\n</head>\n<body>\n<h1>" +
                                 label + "</h1>\n";
        const std::string tail = "</body>\n</html>\n";
        constexpr std::size_t kCommentOverhead = 7;  // "<!--" + "-->"

        std::mt19937_64 rng(0xFA7BEAC0ULL ^ static_cast<std::uint64_t>(size_kb));
        std::string body;
        while (true) {
            auto paragraph = filler_paragraph(rng);
            if (head.size() + body.size() + paragraph.size() + kCommentOverhead + tail.size() > target) {
                break;
            }
            body += paragraph;
        }
        std::string html = head + body;
        const std::size_t used = html.size() + tail.size();
        if (used + kCommentOverhead <= target) {
            html += "<!--" + std::string(target - used - kCommentOverhead, '.') + "-->";
        } else {
            html += std::string(target - used, '\n');
        }
        html += tail;
        corpus.push_back(ContentBundle::from_html(std::move(html)));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// filesystem resolver

std::string mime_for_path(const std::filesystem::path& path)
{
    const auto ext = detail::to_lower(path.extension().string());
    if (ext == ".css") return "text/css";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".webp") return "image/webp";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".html" || ext == ".htm") return "text/html";
    return "application/octet-stream";
}

Resolver directory_resolver(std::filesystem::path root)
{
    namespace fs = std::filesystem;
    return [root = fs::weakly_canonical(std::move(root))](std::string_view url) -> std::optional<ResolvedResource> {
        std::string_view path = url.substr(0, url.find_first_of("?#"));
        if (path.find("://") != std::string_view::npos || path.starts_with("//")) {
            return std::nullopt;
        }
        while (!path.empty() && path.front() == '/') {
            path.remove_prefix(1);
        }
        const auto file = fs::weakly_canonical(root / fs::path(std::string(path)));
        const auto rel = file.lexically_relative(root);
        if (rel.empty() || *rel.begin() == "..") {
            return std::nullopt;
        }
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            return std::nullopt;
        }
        Bytes bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        return ResolvedResource{std::move(bytes), mime_for_path(file)};
    };
}

}  // namespace fatbeacon
