#ifndef HERGM_CONFIG_HPP
#define HERGM_CONFIG_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "hergm/errors.hpp"
#include "hergm/fit.hpp"
#include "hergm/lsm.hpp"
#include "hergm/sampler.hpp"
#include "hergm/spectral.hpp"

namespace hergm {

/// Read-only view of one JSON object in a config file. Errors name the
/// offending field by its dotted path; unknown keys are rejected by
/// finish().
class ConfigReader {
public:
    ConfigReader(const nlohmann::json& j, std::string path);

    static ConfigReader load(const std::string& file);

    bool has(const std::string& key) const;
    ConfigReader child(const std::string& key) const;
    std::vector<ConfigReader> children(const std::string& key) const;

    template <class T>
    T get(const std::string& key) const {
        mark(key);
        if (!j_.contains(key))
            throw validation_error("config field '" + field(key) + "' is required");
        return convert<T>(j_.at(key), key);
    }

    template <class T>
    T get(const std::string& key, T fallback) const {
        mark(key);
        if (!j_.contains(key))
            return fallback;
        return convert<T>(j_.at(key), key);
    }

    /// Throws if the object holds keys nobody asked for.
    void finish() const;

    const std::string& path() const { return path_; }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    template <class T>
    T convert(const nlohmann::json& v, const std::string& key) const {
        try {
            if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
                if (!v.is_number_unsigned())
                    throw validation_error("config field '" + field(key) + "' must be a non-negative integer");
            }
            if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
                for (const auto& x : v)
                    if (!x.is_number_unsigned())
                        throw validation_error("config field '" + field(key) +
                                               "' must hold non-negative integers");
            }
            return v.get<T>();
        } catch (const nlohmann::json::exception&) {
            throw validation_error("config field '" + field(key) + "' has the wrong type");
        }
    }

    void mark(const std::string& key) const { used_->insert(key); }

    nlohmann::json j_;
    std::string path_;
    std::shared_ptr<std::set<std::string>> used_;
};

/// {"between_p": p, "clusters": [{"n", "spec", "theta"} | {"n", "bernoulli"}]}
HergmSpec read_hergm_spec(const ConfigReader& r);
/// Fields of SamplerControls except keep_graphs; absent fields keep `base`.
SamplerControls read_sampler(const ConfigReader& r, SamplerControls base);
LsmControls read_lsm_controls(const ConfigReader& r, LsmControls base);
McmleControls read_mcmle_controls(const ConfigReader& r, McmleControls base);
ScoreControls read_score_controls(const ConfigReader& r, ScoreControls base);

ThetaVector theta_from_list(const std::vector<double>& v);

}  // namespace hergm

#endif
