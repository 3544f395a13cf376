#include "hyts/serialize.hpp"

#include <cstring>

#include "hyts/errors.hpp"

namespace hyts {

namespace {

std::vector<double> to_std(const Vec& v) {
    return {v.data(), v.data() + v.size()};
}

Vec from_std(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
}

void hash_doubles(std::uint64_t& h, const double* data, Eigen::Index n) {
    hash_bytes(h, data, static_cast<std::size_t>(n) * sizeof(double));
}

}  // namespace

nlohmann::json instance_to_json(const HybridInstance& instance) {
    const InstanceView& v = instance.view();
    nlohmann::json j;
    j["arms"] = nlohmann::json::array();
    for (int i = 0; i < v.num_arms(); ++i)
        j["arms"].push_back(to_std(v.arm(i)));
    j["theta_star"] = to_std(instance.theta_star());
    j["S"] = v.radius();
    j["family_reward"] = family_name(v.reward_family().id());
    j["family_dueling"] = family_name(v.dueling_family().id());
    j["dispersion_reward"] = v.reward_family().dispersion_scale();
    j["dispersion_dueling"] = v.dueling_family().dispersion_scale();
    std::vector<double> reward, dueling;
    for (std::size_t a = 0; a < v.num_actions(); ++a)
        (v.action(a).is_reward() ? reward : dueling).push_back(v.cost(a));
    j["costs"] = {{"reward", reward}, {"dueling", dueling}};
    return j;
}

InstanceData instance_data_from_json(const nlohmann::json& j) {
    try {
        InstanceData out;
        const auto arms = j.at("arms").get<std::vector<std::vector<double>>>();
        if (arms.size() < 2)
            throw InvalidArgument("instance needs at least two arms");
        const auto d = static_cast<Eigen::Index>(arms.front().size());
        out.arms.resize(d, static_cast<Eigen::Index>(arms.size()));
        for (std::size_t i = 0; i < arms.size(); ++i) {
            if (static_cast<Eigen::Index>(arms[i].size()) != d)
                throw InvalidArgument("arms have different dimensions");
            out.arms.col(static_cast<Eigen::Index>(i)) = from_std(arms[i]);
        }
        out.theta_star = from_std(j.at("theta_star").get<std::vector<double>>());
        out.radius = j.at("S").get<double>();
        out.reward_family = GlmFamily::canonical(parse_family(j.at("family_reward").get<std::string>()),
                                                 j.value("dispersion_reward", 1.0));
        out.dueling_family = GlmFamily::canonical(parse_family(j.at("family_dueling").get<std::string>()),
                                                  j.value("dispersion_dueling", 1.0));
        if (j.contains("costs")) {
            const auto reward = j.at("costs").at("reward").get<std::vector<double>>();
            const auto dueling = j.at("costs").at("dueling").get<std::vector<double>>();
            const std::size_t K = arms.size();
            if (reward.size() != K || dueling.size() != K * (K - 1) / 2)
                throw InvalidArgument("cost lists do not match the number of actions");
            Vec c(static_cast<Eigen::Index>(K + dueling.size()));
            for (std::size_t i = 0; i < K; ++i)
                c(static_cast<Eigen::Index>(i)) = reward[i];
            for (std::size_t i = 0; i < dueling.size(); ++i)
                c(static_cast<Eigen::Index>(K + i)) = dueling[i];
            out.costs = c;
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed instance JSON: ") + e.what());
    }
}

HybridInstance instance_from_json(const nlohmann::json& j) {
    InstanceData data = instance_data_from_json(j);
    return {InstanceView(std::move(data.arms), data.radius, data.reward_family, data.dueling_family, data.costs),
            std::move(data.theta_star)};
}

std::string instance_to_string(const HybridInstance& instance) {
    return instance_to_json(instance).dump(2);
}

HybridInstance instance_from_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("instance JSON does not parse: ") + e.what());
    }
    return instance_from_json(j);
}

std::uint64_t instance_hash(const HybridInstance& instance) {
    const InstanceView& v = instance.view();
    std::uint64_t h = 1469598103934665603ULL;
    hash_doubles(h, v.arms().data(), v.arms().size());
    hash_doubles(h, instance.theta_star().data(), instance.theta_star().size());
    const double S = v.radius();
    hash_bytes(h, &S, sizeof S);
    for (const GlmFamily* f : {&v.reward_family(), &v.dueling_family()}) {
        const int id = static_cast<int>(f->id());
        const double disp = f->dispersion_scale();
        const double sc = f->sc_constant();
        hash_bytes(h, &id, sizeof id);
        hash_bytes(h, &disp, sizeof disp);
        hash_bytes(h, &sc, sizeof sc);
    }
    hash_doubles(h, v.costs().data(), v.costs().size());
    return h;
}

}  // namespace hyts
