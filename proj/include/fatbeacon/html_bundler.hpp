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

#ifndef FATBEACON_HTML_BUNDLER_HPP
#define FATBEACON_HTML_BUNDLER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fatbeacon {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

/// Maximum byte length of a title carried in a FatBeacon advertisement.
inline constexpr std::size_t kMaxAdvertTitleBytes = 26;

enum class ResourceKind { Stylesheet, Script, Image };

/// An external resource referenced by a document.
struct ResourceRef {
    ResourceKind kind;
    std::string url;
    std::optional<Bytes> resolved_bytes;
    std::string mime;
};

/// What a resolver hands back for one URL.
struct ResolvedResource {
    Bytes bytes;
    std::string mime;
};

using Resolver = std::function<std::optional<ResolvedResource>(std::string_view url)>;

/// A self-contained HTML document ready to be served by a beacon.
struct ContentBundle {
    std::string html;
    std::size_t size_bytes = 0;
    Digest content_hash{};
    std::string title;

    /// Builds the size, hash and title metadata from the document text.
    static ContentBundle from_html(std::string html);
};

/// One external reference left in a document.
struct AtomicityViolation {
    std::string tag;
    std::string url;

    bool operator==(const AtomicityViolation&) const = default;
};

class BundleError : public std::runtime_error {
public:
    enum class Kind { UnresolvedResource, MalformedHtml, MimeMismatch, InvalidTextResource };

    BundleError(Kind kind, std::string detail);

    Kind kind() const noexcept { return kind_; }
    /// The offending URL, or the parse failure description.
    const std::string& detail() const noexcept { return detail_; }

private:
    Kind kind_;
    std::string detail_;
};

// RFC 4648 base64, standard alphabet with padding.
std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> base64_decode(std::string_view text);

/// Returns `data:<mime>;base64,<payload>`. Throws std::invalid_argument on an empty mime.
std::string encode_data_uri(std::span<const std::uint8_t> bytes, std::string_view mime);

/// Lists the stylesheet, script and image references that inlining would replace.
/// Throws BundleError(MalformedHtml) when the document cannot be tokenized.
std::vector<ResourceRef> find_resources(std::string_view html);

/**
 * Rewrites a document so it needs no network fetches.
 *
 * Stylesheet links become `<style>` elements and external scripts become
 * inline `<script>` elements, both placed in `<head>` (synthesized when the
 * document has none). Images keep their position and get a `data:` URI.
 * A document with nothing to inline is returned unchanged.
 */
ContentBundle inline_bundle(std::string_view html, const Resolver& resolver);

/// Every src/href (and CSS url()) in the bundle that would need a fetch.
std::vector<AtomicityViolation> validate_atomic(const ContentBundle& bundle);
std::vector<AtomicityViolation> validate_atomic(std::string_view html);

/// Deterministic filler documents, one per size, each exactly size_kb * 1024 bytes.
std::vector<ContentBundle> generate_corpus(std::span<const int> target_sizes_kb);

/// Text of the first <title> element, whitespace-trimmed; empty when absent.
std::string extract_title(std::string_view html);

/// Longest prefix of `text` no longer than `max_bytes` that ends on a UTF-8 boundary.
std::string truncate_utf8(std::string_view text, std::size_t max_bytes);

bool is_valid_utf8(std::string_view text);

/// SHA-256 over the given bytes.
Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Resolves relative URLs against a directory; refuses paths escaping it.
Resolver directory_resolver(std::filesystem::path root);

/// Guesses a MIME type from a file extension.
std::string mime_for_path(const std::filesystem::path& path);

}  // namespace fatbeacon

#endif  // FATBEACON_HTML_BUNDLER_HPP
