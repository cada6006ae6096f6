#include "hergm/config.hpp"

#include <fstream>

namespace hergm {

ConfigReader::ConfigReader(const nlohmann::json& j, std::string path)
    : j_(j), path_(std::move(path)), used_(std::make_shared<std::set<std::string>>()) {
    if (!j_.is_object())
        throw validation_error("config " + (path_.empty() ? std::string("root") : "field '" + path_ + "'") +
                               " must be an object");
}

ConfigReader ConfigReader::load(const std::string& file) {
    std::ifstream in(file);
    if (!in)
        throw validation_error("cannot open config '" + file + "'");
    try {
        return ConfigReader(nlohmann::json::parse(in), "");
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("config '" + file + "' is not valid JSON: " + e.what());
    }
}

bool ConfigReader::has(const std::string& key) const { return j_.contains(key); }

ConfigReader ConfigReader::child(const std::string& key) const {
    mark(key);
    if (!j_.contains(key))
        return ConfigReader(nlohmann::json::object(), field(key));
    return ConfigReader(j_.at(key), field(key));
}

std::vector<ConfigReader> ConfigReader::children(const std::string& key) const {
    mark(key);
    if (!j_.contains(key))
        throw validation_error("config field '" + field(key) + "' is required");
    const auto& a = j_.at(key);
    if (!a.is_array())
        throw validation_error("config field '" + field(key) + "' must be an array");
    std::vector<ConfigReader> out;
    for (std::size_t i = 0; i < a.size(); ++i)
        out.emplace_back(a[i], field(key) + "[" + std::to_string(i) + "]");
    return out;
}

void ConfigReader::finish() const {
    for (const auto& [key, value] : j_.items())
        if (!used_->count(key))
            throw validation_error("config field '" + field(key) + "' is not recognized");
}

ThetaVector theta_from_list(const std::vector<double>& v) {
    ThetaVector t(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        t[static_cast<Eigen::Index>(i)] = v[i];
    return t;
}

HergmSpec read_hergm_spec(const ConfigReader& r) {
    HergmSpec h;
    h.between_p = r.get<double>("between_p", h.between_p);
    for (const auto& c : r.children("clusters")) {
        BlockModel b;
        b.n = c.get<std::size_t>("n");
        if (c.has("bernoulli")) {
            b.bernoulli = c.get<double>("bernoulli");
        } else {
            try {
                b.spec = StatisticSpec::parse(c.get<std::string>("spec"));
            } catch (const validation_error& e) {
                throw validation_error("config field '" + c.field("spec") + "': " + e.what());
            }
            b.theta = theta_from_list(c.get<std::vector<double>>("theta"));
            if (std::size_t(b.theta.size()) != b.spec.size())
                throw validation_error("config field '" + c.field("theta") + "' has " +
                                       std::to_string(b.theta.size()) + " values for " +
                                       std::to_string(b.spec.size()) + " terms");
        }
        c.finish();
        h.clusters.push_back(std::move(b));
    }
    r.finish();
    try {
        h.validate();
    } catch (const validation_error& e) {
        throw validation_error("config field '" + r.path() + "': " + e.what());
    }
    return h;
}

SamplerControls read_sampler(const ConfigReader& r, SamplerControls base) {
    base.burnin_sweeps = r.get<std::size_t>("burnin_sweeps", base.burnin_sweeps);
    base.thin_sweeps = r.get<std::size_t>("thin_sweeps", base.thin_sweeps);
    base.n_samples = r.get<std::size_t>("n_samples", base.n_samples);
    r.finish();
    return base;
}

LsmControls read_lsm_controls(const ConfigReader& r, LsmControls base) {
    base.burnin = r.get<std::size_t>("burnin", base.burnin);
    base.samples = r.get<std::size_t>("samples", base.samples);
    base.thin = r.get<std::size_t>("thin", base.thin);
    base.intercept = r.get<bool>("intercept", base.intercept);
    r.finish();
    base.validate();
    return base;
}

McmleControls read_mcmle_controls(const ConfigReader& r, McmleControls base) {
    base.sample_size = r.get<std::size_t>("sample_size", base.sample_size);
    base.max_sample_size = r.get<std::size_t>("max_sample_size", base.max_sample_size);
    base.burnin_sweeps = r.get<std::size_t>("burnin_sweeps", base.burnin_sweeps);
    base.thin_sweeps = r.get<std::size_t>("thin_sweeps", base.thin_sweeps);
    base.max_iterations = r.get<std::size_t>("max_iterations", base.max_iterations);
    r.finish();
    return base;
}

ScoreControls read_score_controls(const ConfigReader& r, ScoreControls base) {
    base.truncation = r.get<double>("truncation", base.truncation);
    base.restarts = r.get<std::size_t>("restarts", base.restarts);
    base.max_iter = r.get<std::size_t>("max_iter", base.max_iter);
    r.finish();
    return base;
}

}  // namespace hergm
