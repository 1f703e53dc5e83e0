#ifndef CELLPOP_CONFIG_JSON_HPP
#define CELLPOP_CONFIG_JSON_HPP

#include "cellpop/error.hpp"
#include "cellpop/model.hpp"

#include "json.hpp"

#include <vector>

// Canonical JSON form of ViewConfig. Field names follow the struct members;
// enums are lowercase strings. Sort fields are either the strings
// "count_total" / "alphabetical" or the objects {"metadata": name} /
// {"hierarchy_level": i}.

namespace cellpop {

/// Raised when a config document is malformed; carries one violation per bad field.
class ConfigError : public Error {
  public:
    explicit ConfigError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

  private:
    std::vector<Violation> violations_;
};

nlohmann::json to_json(const ViewConfig& config);
nlohmann::json to_json(const SortKey& key);
nlohmann::json to_json(const FilterPredicate& predicate);
nlohmann::json to_json(const std::vector<Violation>& violations);

/// Shallow top-level merge of `patch` over `base`. Keys present in the patch
/// replace the base value wholesale (lists and maps included); `null` resets
/// optional fields. Unknown keys and ill-typed values raise ConfigError.
ViewConfig merge_config(const ViewConfig& base, const nlohmann::json& patch);

/// A full or partial document over `base`; same as merge_config.
inline ViewConfig config_from_json(const nlohmann::json& doc, const ViewConfig& base) {
    return merge_config(base, doc);
}

} // namespace cellpop

#endif
