#include "alignforge/text.hpp"

namespace alignforge {

std::vector<char32_t> utf8_codepoints(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    size_t i = 0;
    const auto bad = char32_t(0xFFFD);
    while (i < s.size()) {
        unsigned char c = s[i];
        if (c < 0x80) {
            out.push_back(c);
            i++;
            continue;
        }
        int len = 0;
        char32_t cp = 0;
        if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
        else { out.push_back(bad); i++; continue; }

        if (i + len > s.size()) { out.push_back(bad); i++; continue; }
        bool ok = true;
        for (int j = 1; j < len; j++) {
            unsigned char cc = s[i + j];
            if ((cc & 0xC0) != 0x80) { ok = false; break; }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok || cp > 0x10FFFF) { out.push_back(bad); i++; continue; }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string utf8_encode(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += char(cp);
    } else if (cp < 0x800) {
        out += char(0xC0 | (cp >> 6));
        out += char(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += char(0xE0 | (cp >> 12));
        out += char(0x80 | ((cp >> 6) & 0x3F));
        out += char(0x80 | (cp & 0x3F));
    } else {
        out += char(0xF0 | (cp >> 18));
        out += char(0x80 | ((cp >> 12) & 0x3F));
        out += char(0x80 | ((cp >> 6) & 0x3F));
        out += char(0x80 | (cp & 0x3F));
    }
    return out;
}

bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||   // unified ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||   // extension A
           (cp >= 0xF900 && cp <= 0xFAFF);     // compatibility ideographs
}

std::string_view trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    auto is_ws = [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (b < e && is_ws(s[b])) b++;
    while (e > b && is_ws(s[e - 1])) e--;
    return s.substr(b, e - b);
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
    return out;
}

std::string detect_lang(std::string_view instruction) {
    auto cps = utf8_codepoints(instruction);
    if (cps.empty()) return "other";
    size_t cjk = 0;
    size_t alnum = 0;
    for (char32_t cp : cps) {
        if (is_cjk(cp)) cjk++;
        else if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9')) alnum++;
    }
    if (double(cjk) / double(cps.size()) > 0.3) return "zh";
    if (cjk == 0 && alnum > 0) return "en";
    return "other";
}

} // namespace alignforge
