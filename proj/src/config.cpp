#include "seqtag/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "seqtag/error.hpp"

namespace seqtag {

namespace {

enum class Kind { count, positive_count, seed, positive_real, nonneg_real, unit_real, flag, text };

struct KeySpec {
    const char* name;
    Kind kind;
    const char* fallback;
};

// defaults mirror TrainConfig / CorruptionConfig
constexpr KeySpec key_specs[] = {
    {"case_feature", Kind::flag, "true"},
    {"clip", Kind::nonneg_real, "0"},
    {"emb_init", Kind::text, ""},
    {"embed_dim", Kind::positive_count, "100"},
    {"epochs", Kind::count, "20"},
    {"exclude_unk", Kind::flag, "true"},
    {"frequency_replacement", Kind::flag, "false"},
    {"hidden", Kind::positive_count, "100"},
    {"lr", Kind::positive_real, "0.01"},
    {"max_common", Kind::count, "100000"},
    {"patience", Kind::count, "5"},
    {"peepholes", Kind::flag, "true"},
    {"replace_rate", Kind::unit_real, "0.2"},
    {"seed", Kind::seed, "1"},
    {"shuffle", Kind::flag, "true"},
    {"suffix2", Kind::flag, "false"},
};

const KeySpec* find_spec(std::string_view key) {
    for (const auto& s : key_specs) {
        if (key == s.name) return &s;
    }
    return nullptr;
}

std::string canonical_key(std::string_view key) {
    std::string k(key);
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

bool parse_flag(std::string_view s, bool& out) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        out = false;
        return true;
    }
    return false;
}

Error bad_value(const std::string& key, std::string_view value, const char* expected) {
    return Error(ErrorCode::invalid_argument,
                 "invalid value '" + std::string(value) + "' for " + key + ": expected " + expected);
}

void validate(const KeySpec& spec, const std::string& key, std::string_view value) {
    std::uint64_t u = 0;
    double d = 0;
    bool b = false;
    switch (spec.kind) {
    case Kind::count:
    case Kind::seed:
        if (!parse_u64(value, u)) throw bad_value(key, value, "a non-negative integer");
        break;
    case Kind::positive_count:
        if (!parse_u64(value, u) || u == 0) throw bad_value(key, value, "a positive integer");
        break;
    case Kind::positive_real:
        if (!parse_real(value, d) || d <= 0) throw bad_value(key, value, "a positive number");
        break;
    case Kind::nonneg_real:
        if (!parse_real(value, d) || d < 0) throw bad_value(key, value, "a non-negative number");
        break;
    case Kind::unit_real:
        if (!parse_real(value, d) || d < 0 || d > 1) throw bad_value(key, value, "a number in [0, 1]");
        break;
    case Kind::flag:
        if (!parse_flag(value, b)) throw bad_value(key, value, "true or false");
        break;
    case Kind::text:
        break;
    }
}

}  // namespace

RunConfig::RunConfig() {
    for (const auto& s : key_specs) values_.emplace(s.name, s.fallback);
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& s : key_specs) v.emplace_back(s.name);
        return v;
    }();
    return names;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    const std::string k = canonical_key(key);
    const KeySpec* spec = find_spec(k);
    if (!spec) throw Error(ErrorCode::unknown_key, "unknown configuration key '" + std::string(key) + "'");
    validate(*spec, k, value);
    values_[k] = std::string(value);
}

const std::string& RunConfig::get(std::string_view key) const {
    auto it = values_.find(canonical_key(key));
    if (it == values_.end())
        throw Error(ErrorCode::unknown_key, "unknown configuration key '" + std::string(key) + "'");
    return it->second;
}

void RunConfig::load(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::invalid_argument,
                        "config line " + std::to_string(lineno) + ": expected 'key = value'");
        set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open config " + path);
    load(in);
}

TrainConfig RunConfig::train_config() const {
    auto u = [&](const char* k) {
        std::uint64_t v = 0;
        parse_u64(get(k), v);
        return v;
    };
    auto d = [&](const char* k) {
        double v = 0;
        parse_real(get(k), v);
        return v;
    };
    auto b = [&](const char* k) {
        bool v = false;
        parse_flag(get(k), v);
        return v;
    };
    TrainConfig cfg;
    cfg.learning_rate = d("lr");
    cfg.max_epochs = u("epochs");
    cfg.hidden_size = u("hidden");
    cfg.embed_dim = u("embed_dim");
    cfg.seed = u("seed");
    cfg.patience = u("patience");
    cfg.shuffle = b("shuffle");
    cfg.case_feature = b("case_feature");
    cfg.suffix2 = b("suffix2");
    cfg.peepholes = b("peepholes");
    cfg.clip = d("clip");
    cfg.embedding_init = get("emb_init");
    return cfg;
}

CorruptionConfig RunConfig::corruption_config() const {
    CorruptionConfig cfg;
    double rate = 0;
    parse_real(get("replace_rate"), rate);
    cfg.replace_rate = rate;
    std::uint64_t seed = 0;
    parse_u64(get("seed"), seed);
    cfg.seed = seed;
    parse_flag(get("exclude_unk"), cfg.exclude_unk);
    parse_flag(get("frequency_replacement"), cfg.frequency_weighted);
    return cfg;
}

std::size_t RunConfig::max_common() const {
    std::uint64_t v = 0;
    parse_u64(get("max_common"), v);
    return v;
}

std::string RunConfig::describe() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        if (!out.empty()) out += ' ';
        out += k + "=" + v;
    }
    return out;
}

}  // namespace seqtag
