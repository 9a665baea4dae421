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

#include "html_scan.hpp"

#include <algorithm>
#include <cctype>

#include "fatbeacon/html_bundler.hpp"

namespace fatbeacon::detail {

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

bool is_alpha(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

bool is_raw_text(std::string_view name)
{
    return name == "script" || name == "style" || name == "title" || name == "textarea";
}

[[noreturn]] void malformed(std::string what, std::size_t offset)
{
    throw BundleError(BundleError::Kind::MalformedHtml, what + " at offset " + std::to_string(offset));
}

// Case-insensitive search for "</name" starting at `from`.
std::size_t find_close(std::string_view html, std::string_view name, std::size_t from)
{
    const std::string needle = "</" + std::string(name);
    for (std::size_t i = from; i + needle.size() <= html.size(); ++i) {
        if (html[i] != '<') {
            continue;
        }
        bool match = true;
        for (std::size_t k = 1; k < needle.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(html[i + k])) != needle[k]) {
                match = false;
                break;
            }
        }
        if (!match) {
            continue;
        }
        const std::size_t after = i + needle.size();
        if (after == html.size() || is_space(html[after]) || html[after] == '>' || html[after] == '/') {
            return i;
        }
    }
    return std::string_view::npos;
}

class Scanner {
public:
    explicit Scanner(std::string_view html) : html_(html) {}

    std::vector<Tag> run()
    {
        std::vector<Tag> tags;
        while (pos_ < html_.size()) {
            const std::size_t lt = html_.find('<', pos_);
            if (lt == std::string_view::npos) {
                break;
            }
            pos_ = lt;
            if (html_.substr(lt, 4) == "<!--") {
                const std::size_t close = html_.find("-->", lt + 4);
                if (close == std::string_view::npos) {
                    malformed("unterminated comment", lt);
                }
                pos_ = close + 3;
                continue;
            }
            if (lt + 1 < html_.size() && (html_[lt + 1] == '!' || html_[lt + 1] == '?')) {
                const std::size_t gt = html_.find('>', lt);
                if (gt == std::string_view::npos) {
                    malformed("unterminated declaration", lt);
                }
                pos_ = gt + 1;
                continue;
            }
            const bool closing = lt + 1 < html_.size() && html_[lt + 1] == '/';
            const std::size_t name_at = lt + (closing ? 2 : 1);
            if (name_at >= html_.size() || !is_alpha(html_[name_at])) {
                // A bare '<' in text.
                pos_ = lt + 1;
                continue;
            }
            Tag tag = parse_tag(lt, name_at, closing);
            if (!tag.closing && !tag.self_closing && is_raw_text(tag.name)) {
                const std::size_t close = find_close(html_, tag.name, tag.end);
                if (close == std::string_view::npos) {
                    malformed("unterminated <" + tag.name + ">", tag.begin);
                }
                const std::size_t gt = html_.find('>', close);
                if (gt == std::string_view::npos) {
                    malformed("unterminated </" + tag.name + ">", close);
                }
                tag.text_begin = tag.end;
                tag.text_end = close;
                tag.element_end = gt + 1;
                pos_ = gt + 1;
            } else {
                tag.element_end = tag.end;
                pos_ = tag.end;
            }
            tags.push_back(std::move(tag));
        }
        return tags;
    }

private:
    Tag parse_tag(std::size_t lt, std::size_t name_at, bool closing)
    {
        Tag tag;
        tag.begin = lt;
        tag.closing = closing;
        std::size_t i = name_at;
        while (i < html_.size() && !is_space(html_[i]) && html_[i] != '>' && html_[i] != '/') {
            ++i;
        }
        tag.name = to_lower(html_.substr(name_at, i - name_at));

        while (true) {
            while (i < html_.size() && is_space(html_[i])) {
                ++i;
            }
            if (i >= html_.size()) {
                malformed("unterminated tag <" + tag.name, lt);
            }
            if (html_[i] == '>') {
                tag.end = i + 1;
                return tag;
            }
            if (html_[i] == '/') {
                if (i + 1 < html_.size() && html_[i + 1] == '>') {
                    tag.self_closing = true;
                    tag.end = i + 2;
                    return tag;
                }
                ++i;
                continue;
            }
            if (html_[i] == '<') {
                malformed("unterminated tag <" + tag.name, lt);
            }

            Attribute attr;
            const std::size_t name_begin = i;
            while (i < html_.size() && !is_space(html_[i]) && html_[i] != '>' && html_[i] != '=' &&
                   !(html_[i] == '/' && i + 1 < html_.size() && html_[i + 1] == '>')) {
                ++i;
            }
            attr.name = to_lower(html_.substr(name_begin, i - name_begin));
            std::size_t j = i;
            while (j < html_.size() && is_space(html_[j])) {
                ++j;
            }
            if (j < html_.size() && html_[j] == '=') {
                ++j;
                while (j < html_.size() && is_space(html_[j])) {
                    ++j;
                }
                if (j >= html_.size()) {
                    malformed("unterminated attribute", name_begin);
                }
                attr.has_value = true;
                if (html_[j] == '"' || html_[j] == '\'') {
                    const char quote = html_[j];
                    const std::size_t close = html_.find(quote, j + 1);
                    if (close == std::string_view::npos) {
                        malformed("unterminated quoted attribute", j);
                    }
                    attr.value_begin = j + 1;
                    attr.value_end = close;
                    i = close + 1;
                } else {
                    std::size_t k = j;
                    while (k < html_.size() && !is_space(html_[k]) && html_[k] != '>') {
                        ++k;
                    }
                    attr.value_begin = j;
                    attr.value_end = k;
                    i = k;
                }
                attr.value = std::string(html_.substr(attr.value_begin, attr.value_end - attr.value_begin));
            }
            if (!attr.name.empty()) {
                tag.attributes.push_back(std::move(attr));
            }
        }
    }

    std::string_view html_;
    std::size_t pos_ = 0;
};

}  // namespace

const Attribute* Tag::attribute(std::string_view attr_name) const
{
    const auto it = std::find_if(attributes.begin(), attributes.end(),
                                 [&](const Attribute& a) { return a.name == attr_name; });
    return it == attributes.end() ? nullptr : &*it;
}

std::vector<Tag> scan_tags(std::string_view html)
{
    return Scanner(html).run();
}

std::string to_lower(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view text)
{
    while (!text.empty() && is_space(text.front())) {
        text.remove_prefix(1);
    }
    while (!text.empty() && is_space(text.back())) {
        text.remove_suffix(1);
    }
    return text;
}

bool is_local_reference(std::string_view url)
{
    const std::string lowered = to_lower(trim(url));
    return lowered.empty() || lowered.front() == '#' || lowered.starts_with("data:") ||
           lowered.starts_with("mailto:");
}

std::vector<std::string> css_references(std::string_view css)
{
    std::vector<std::string> refs;
    const std::string lowered = to_lower(css);

    for (std::size_t at = lowered.find("url("); at != std::string::npos; at = lowered.find("url(", at + 4)) {
        std::size_t begin = at + 4;
        const std::size_t close = lowered.find(')', begin);
        if (close == std::string::npos) {
            break;
        }
        std::string_view target = trim(css.substr(begin, close - begin));
        if (target.size() >= 2 && (target.front() == '"' || target.front() == '\'') && target.back() == target.front()) {
            target = target.substr(1, target.size() - 2);
        }
        refs.emplace_back(target);
    }

    for (std::size_t at = lowered.find("@import"); at != std::string::npos; at = lowered.find("@import", at + 7)) {
        std::size_t i = at + 7;
        while (i < css.size() && is_space(css[i])) {
            ++i;
        }
        if (i < css.size() && (css[i] == '"' || css[i] == '\'')) {
            const std::size_t close = css.find(css[i], i + 1);
            if (close != std::string_view::npos) {
                refs.emplace_back(css.substr(i + 1, close - i - 1));
            }
        }
        // @import url(...) is already covered by the url( pass.
    }
    return refs;
}

}  // namespace fatbeacon::detail
