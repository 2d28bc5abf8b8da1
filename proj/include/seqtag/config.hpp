#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "seqtag/pretrain.hpp"
#include "seqtag/train.hpp"

namespace seqtag {

/// Flat key/value run configuration. Values are validated when set, so a
/// RunConfig always converts cleanly into TrainConfig / CorruptionConfig.
///
/// File format: one `key = value` per line; blank lines and lines whose first
/// non-blank character is `#` are ignored. Dashes in keys are read as
/// underscores, so `embed-dim` and `embed_dim` name the same entry.
class RunConfig {
public:
    RunConfig();

    /// Throws unknown_key for keys outside keys(), invalid_argument for values
    /// that do not parse or violate the field's range.
    void set(std::string_view key, std::string_view value);
    const std::string& get(std::string_view key) const;

    void load(std::istream& in);
    void load_file(const std::string& path);

    TrainConfig train_config() const;
    CorruptionConfig corruption_config() const;
    std::size_t max_common() const;

    /// "key=value" pairs in key order, space separated.
    std::string describe() const;

    static const std::vector<std::string>& keys();

private:
    std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace seqtag
