#include "kcmlab/family.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace kcmlab {

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw FamilyParseError("line " + std::to_string(line_no) + ": " + what);
}

std::int64_t parse_int(const std::string& tok, int line_no) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
        fail(line_no, "malformed integer '" + tok + "'");
    }
    if (pos != tok.size()) fail(line_no, "malformed integer '" + tok + "'");
    return v;
}

UpdateRule parse_rule_body(const std::string& body, int line_no) {
    UpdateRule rule;
    std::istringstream words(body);
    std::string word;
    while (words >> word) {
        auto comma = word.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == word.size())
            fail(line_no, "malformed offset '" + word + "' (expected dx,dy)");
        Vec off{parse_int(word.substr(0, comma), line_no),
                parse_int(word.substr(comma + 1), line_no)};
        if (off == Vec{0, 0}) fail(line_no, "offset at origin");
        if (norm_inf(off) > kMaxRuleRadius)
            fail(line_no, "offset exceeds maximum radius " + std::to_string(kMaxRuleRadius));
        rule.offsets.push_back(off);
    }
    if (rule.offsets.empty()) fail(line_no, "empty rule");
    std::sort(rule.offsets.begin(), rule.offsets.end());
    auto dup = std::adjacent_find(rule.offsets.begin(), rule.offsets.end());
    if (dup != rule.offsets.end())
        fail(line_no, "duplicate offset " + to_string(*dup) + " in rule");
    return rule;
}

}  // namespace

std::int64_t UpdateFamily::radius() const {
    std::int64_t r = 0;
    for (const auto& rule : rules)
        for (Vec off : rule.offsets) r = std::max(r, norm_inf(off));
    return r;
}

UpdateFamily parse_family(const std::string& text) {
    UpdateFamily fam;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (header_allowed && line.rfind("name:", 0) == 0) {
            fam.name = trim(line.substr(5));
            if (fam.name.empty()) fail(line_no, "empty family name");
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        if (line.rfind("rule:", 0) != 0)
            fail(line_no, "expected 'rule:' line, got '" + line + "'");
        UpdateRule rule = parse_rule_body(line.substr(5), line_no);
        if (std::find(fam.rules.begin(), fam.rules.end(), rule) != fam.rules.end())
            fail(line_no, "duplicate rule");
        fam.rules.push_back(rule);
    }
    if (fam.rules.empty()) throw FamilyParseError("family has no rules");
    std::sort(fam.rules.begin(), fam.rules.end());
    return fam;
}

std::string serialize_family(const UpdateFamily& f) {
    std::ostringstream out;
    if (!f.name.empty()) out << "name: " << f.name << "\n";
    for (const auto& rule : f.rules) {
        out << "rule:";
        for (Vec off : rule.offsets) out << " " << off.x << "," << off.y;
        out << "\n";
    }
    return out.str();
}

UpdateFamily load_family_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FamilyParseError("cannot open family file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_family(buf.str());
}

namespace {

UpdateFamily make_family(std::string name, std::vector<UpdateRule> rules) {
    UpdateFamily f{std::move(name), std::move(rules)};
    for (auto& rule : f.rules) std::sort(rule.offsets.begin(), rule.offsets.end());
    std::sort(f.rules.begin(), f.rules.end());
    return f;
}

// All size-k subsets of the given offsets, one rule per subset.
std::vector<UpdateRule> all_subsets_of_size(const std::vector<Vec>& offsets, std::size_t k) {
    std::vector<UpdateRule> rules;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        UpdateRule r;
        for (std::size_t i : idx) r.offsets.push_back(offsets[i]);
        rules.push_back(std::move(r));
        std::size_t j = k;
        while (j > 0 && idx[j - 1] == offsets.size() - k + (j - 1)) --j;
        if (j == 0) break;
        ++idx[j - 1];
        for (std::size_t i = j; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
    return rules;
}

}  // namespace

UpdateFamily builtin_family(const std::string& name) {
    const Vec e1{1, 0}, e2{0, 1};
    if (name == "east1d-embedded") return make_family(name, {{{-e1}}});
    if (name == "east2d") return make_family(name, {{{-e1}}, {{-e2}}});
    if (name == "fa1f") return make_family(name, {{{e1}}, {{-e1}}, {{e2}}, {{-e2}}});
    if (name == "fa2f")
        return make_family(name, all_subsets_of_size({-e1, -e2, e2, e1}, 2));
    if (name == "duarte")
        return make_family(name, {{{-e1, e2}}, {{-e1, -e2}}, {{e2, -e2}}});
    if (name == "anisotropic")
        return make_family(
            name, all_subsets_of_size({{-2, 0}, {-1, 0}, {1, 0}, {2, 0}, {0, 1}, {0, -1}}, 3));
    std::string names;
    for (const auto& n : builtin_family_names()) names += (names.empty() ? "" : ", ") + n;
    throw FamilyParseError("unknown builtin family '" + name + "' (available: " + names + ")");
}

std::vector<std::string> builtin_family_names() {
    return {"east1d-embedded", "east2d", "fa1f", "fa2f", "duarte", "anisotropic"};
}

}  // namespace kcmlab
