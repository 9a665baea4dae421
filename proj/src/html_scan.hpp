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

// Tolerant tag scanner shared by the bundler and the atomicity checker.
// Not an HTML5 tree builder: it only reports tags, attributes and the byte
// ranges they occupy.

#ifndef FATBEACON_SRC_HTML_SCAN_HPP
#define FATBEACON_SRC_HTML_SCAN_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fatbeacon::detail {

struct Attribute {
    std::string name;  // lowercased
    std::string value;
    bool has_value = false;
    std::size_t value_begin = 0;  // raw value span, quotes excluded
    std::size_t value_end = 0;
};

struct Tag {
    std::string name;  // lowercased
    bool closing = false;
    bool self_closing = false;
    std::size_t begin = 0;  // offset of '<'
    std::size_t end = 0;    // one past '>'
    std::vector<Attribute> attributes;

    // Raw-text elements (script, style, title, textarea): the text between the
    // opening tag and its closing tag, and the end of the closing tag.
    std::size_t text_begin = 0;
    std::size_t text_end = 0;
    std::size_t element_end = 0;

    const Attribute* attribute(std::string_view attr_name) const;
};

/// Scans the whole document. Throws BundleError(MalformedHtml) on an
/// unterminated tag, quote, comment or raw-text element.
std::vector<Tag> scan_tags(std::string_view html);

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);

/// True for URLs that resolve without a network fetch: empty, fragment,
/// `data:` and `mailto:`.
bool is_local_reference(std::string_view url);

/// url(...) and @import targets inside a CSS text.
std::vector<std::string> css_references(std::string_view css);

}  // namespace fatbeacon::detail

#endif  // FATBEACON_SRC_HTML_SCAN_HPP
