#pragma once

#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgecache/generator.hpp"
#include "edgecache/io.hpp"
#include "edgecache/sim.hpp"

namespace edgecache {

/// `key = value` lines; `#` starts a comment. Later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in)
{
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (csv::is_blank(line))
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        auto key = csv::trim(std::string_view(line).substr(0, eq));
        auto value = csv::trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        kv[std::string(key)] = std::string(value);
    }
    return kv;
}

namespace detail {

// An empty value is an empty list.
inline std::vector<double> parse_numbers(const std::string& key, const std::string& value)
{
    std::vector<double> out;
    if (csv::is_blank(value))
        return out;
    for (auto f : csv::split(value)) {
        auto v = csv::parse_double(f);
        if (!v)
            throw UsageError("config key '" + key + "': '" + std::string(f) + "' is not a number");
        out.push_back(*v);
    }
    return out;
}

inline double parse_real(const std::string& key, const std::string& value)
{
    auto v = csv::parse_double(csv::trim(value));
    if (!v || !std::isfinite(*v))
        throw UsageError("config key '" + key + "': '" + value + "' is not a number");
    return *v;
}

inline std::int64_t parse_integer(const std::string& key, const std::string& value)
{
    auto v = csv::parse_int(csv::trim(value));
    if (!v)
        throw UsageError("config key '" + key + "': '" + value + "' is not an integer");
    return *v;
}

inline bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1")
        return true;
    if (value == "false" || value == "0")
        return false;
    throw UsageError("config key '" + key + "': expected true or false");
}

inline std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + csv::format_double(v[i]);
    return s;
}

// Getter/setter pair per config key, shared by parsing and manifests.
template <class Config>
struct Field {
    std::function<void(Config&, const std::string&, const std::string&)> set;
    std::function<nlohmann::json(const Config&)> get;
};

template <class Config, class T>
Field<Config> integer_field(T Config::*m)
{
    return {[m](Config& c, const std::string& k, const std::string& v) { c.*m = static_cast<T>(parse_integer(k, v)); },
        [m](const Config& c) { return nlohmann::json(c.*m); }};
}

template <class Config>
Field<Config> real_field(double Config::*m)
{
    return {[m](Config& c, const std::string& k, const std::string& v) { c.*m = parse_real(k, v); },
        [m](const Config& c) { return nlohmann::json(c.*m); }};
}

template <class Config>
Field<Config> bool_field(bool Config::*m)
{
    return {[m](Config& c, const std::string& k, const std::string& v) { c.*m = parse_bool(k, v); },
        [m](const Config& c) { return nlohmann::json(c.*m); }};
}

template <class Config>
Field<Config> list_field(std::vector<double> Config::*m)
{
    return {[m](Config& c, const std::string& k, const std::string& v) { c.*m = parse_numbers(k, v); },
        [m](const Config& c) { return nlohmann::json(c.*m); }};
}

template <class Config>
void apply(Config& c, const KeyValues& kv, const std::map<std::string, Field<Config>>& fields)
{
    for (const auto& [k, v] : kv) {
        auto it = fields.find(k);
        if (it == fields.end()) {
            std::string valid;
            for (const auto& [name, f] : fields)
                valid += (valid.empty() ? "" : ", ") + name;
            throw UsageError("unknown config key '" + k + "' (valid keys: " + valid + ")");
        }
        it->second.set(c, k, v);
    }
}

template <class Config>
nlohmann::json dump(const Config& c, const std::map<std::string, Field<Config>>& fields)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, f] : fields)
        j[k] = f.get(c);
    return j;
}

} // namespace detail

inline const std::map<std::string, detail::Field<TraceConfig>>& trace_config_fields()
{
    using C = TraceConfig;
    using detail::Field;
    static const std::map<std::string, Field<C>> fields = [] {
        std::map<std::string, Field<C>> f;
        f["n_users"] = detail::integer_field(&C::n_users);
        f["n_videos"] = detail::integer_field(&C::n_videos);
        f["days"] = detail::integer_field(&C::days);
        f["zipf_exponent"] = detail::real_field(&C::zipf_exponent);
        f["seed"] = detail::integer_field(&C::seed);
        f["start_epoch"] = detail::integer_field(&C::start_epoch);
        f["utc_offset_hours"] = detail::integer_field(&C::utc_offset_hours);
        f["multi_location_fraction"] = detail::real_field(&C::multi_location_fraction);
        f["repeat_trip_prob"] = detail::real_field(&C::repeat_trip_prob);
        f["max_movements"] = detail::integer_field(&C::max_movements);
        f["evening_boost"] = detail::real_field(&C::evening_boost);
        f["min_daily_requests"] = detail::integer_field(&C::min_daily_requests);
        f["mean_extra_requests"] = detail::real_field(&C::mean_extra_requests);
        f["grid_rows"] = detail::integer_field(&C::grid_rows);
        f["grid_cols"] = detail::integer_field(&C::grid_cols);
        f["origin_lat"] = detail::real_field(&C::origin_lat);
        f["origin_lon"] = detail::real_field(&C::origin_lon);
        f["cell_weight_sigma"] = detail::real_field(&C::cell_weight_sigma);
        f["n_sites"] = detail::integer_field(&C::n_sites);
        f["min_site_separation_m"] = detail::real_field(&C::min_site_separation_m);
        f["p_site"] = detail::real_field(&C::p_site);
        f["p_cell"] = detail::real_field(&C::p_cell);
        f["site_favorites"] = detail::integer_field(&C::site_favorites);
        f["spread_decay"] = detail::real_field(&C::spread_decay);
        f["n_categories"] = detail::integer_field(&C::n_categories);
        f["category_weights"] = detail::list_field(&C::category_weights);
        f["category_decay"] = detail::list_field(&C::category_decay);
        f["release_spread"] = detail::real_field(&C::release_spread);
        f["ap_jitter_m"] = detail::real_field(&C::ap_jitter_m);
        f["n_bs"] = detail::integer_field(&C::n_bs);
        f["bs_mismatch"] = detail::real_field(&C::bs_mismatch);
        f["migration_matrix"] = {[](C& c, const std::string& k, const std::string& v) {
                                     auto x = detail::parse_numbers(k, v);
                                     if (x.size() != kPoiCount * kPoiCount)
                                         throw UsageError("config key 'migration_matrix': expected 49 numbers, row major");
                                     for (std::size_t i = 0; i < x.size(); ++i)
                                         c.migration_matrix[i / kPoiCount][i % kPoiCount] = x[i];
                                 },
            [](const C& c) { return nlohmann::json(c.migration_matrix); }};
        f["location_count_probs"] = {[](C& c, const std::string& k, const std::string& v) {
                                         auto x = detail::parse_numbers(k, v);
                                         if (x.size() != c.location_count_probs.size())
                                             throw UsageError("config key 'location_count_probs': expected 5 numbers");
                                         std::copy(x.begin(), x.end(), c.location_count_probs.begin());
                                     },
            [](const C& c) { return nlohmann::json(c.location_count_probs); }};
        f["diurnal_weights"] = {[](C& c, const std::string& k, const std::string& v) {
                                    auto x = detail::parse_numbers(k, v);
                                    if (x.size() != 3 * kPoiCount)
                                        throw UsageError("config key 'diurnal_weights': expected 21 numbers (a24,a12,a8 per category)");
                                    for (std::size_t p = 0; p < kPoiCount; ++p)
                                        c.diurnal_weights[p] = {x[3 * p], x[3 * p + 1], x[3 * p + 2]};
                                },
            [](const C& c) {
                auto j = nlohmann::json::array();
                for (const auto& w : c.diurnal_weights)
                    j.push_back({w.a24, w.a12, w.a8});
                return j;
            }};
        return f;
    }();
    return fields;
}

inline const std::map<std::string, detail::Field<SimConfig>>& sim_config_fields()
{
    using C = SimConfig;
    using detail::Field;
    static const std::map<std::string, Field<C>> fields = [] {
        std::map<std::string, Field<C>> f;
        f["strategy"] = {[](C& c, const std::string& k, const std::string& v) {
                             auto s = parse_strategy(v);
                             if (!s)
                                 throw UsageError("config key '" + k + "': expected lru, lfu, rr or geocollab");
                             c.strategy = *s;
                         },
            [](const C& c) { return nlohmann::json(std::string(to_string(c.strategy))); }};
        f["kind"] = {[](C& c, const std::string& k, const std::string& v) {
                         auto s = parse_node_kind(v);
                         if (!s)
                             throw UsageError("config key '" + k + "': expected ap or bs");
                         c.kind = *s;
                     },
            [](const C& c) { return nlohmann::json(std::string(to_string(c.kind))); }};
        f["capacity"] = detail::integer_field(&C::capacity);
        f["ap_concurrency"] = detail::integer_field(&C::ap_concurrency);
        f["bs_concurrency"] = detail::integer_field(&C::bs_concurrency);
        f["ap_bandwidth"] = detail::integer_field(&C::ap_bandwidth);
        f["bs_bandwidth"] = detail::integer_field(&C::bs_bandwidth);
        f["ap_radius"] = detail::real_field(&C::ap_radius);
        f["bs_radius"] = detail::real_field(&C::bs_radius);
        f["video_size"] = detail::integer_field(&C::video_size);
        f["slot_seconds"] = detail::integer_field(&C::slot_seconds);
        f["replan_days"] = detail::integer_field(&C::replan_days);
        f["utc_offset_hours"] = detail::integer_field(&C::utc_offset_hours);
        f["seed"] = detail::integer_field(&C::seed);
        f["online_fill"] = detail::bool_field(&C::online_fill);
        f["lfu_keep_counts"] = detail::bool_field(&C::lfu_keep_counts);
        f["default_decay"] = detail::real_field(&C::default_decay);
        f["category_decay"] = detail::list_field(&C::category_decay);
        f["warmup_days"] = detail::integer_field(&C::warmup_days);
        f["top_fraction"] = detail::real_field(&C::top_fraction);
        f["immobile_counterfactual"] = detail::bool_field(&C::immobile_counterfactual);
        return f;
    }();
    return fields;
}

inline void apply_config(TraceConfig& c, const KeyValues& kv) { detail::apply(c, kv, trace_config_fields()); }
inline void apply_config(SimConfig& c, const KeyValues& kv) { detail::apply(c, kv, sim_config_fields()); }
inline nlohmann::json to_json(const TraceConfig& c) { return detail::dump(c, trace_config_fields()); }
inline nlohmann::json to_json(const SimConfig& c) { return detail::dump(c, sim_config_fields()); }

/// Splits a key-value set into the keys each config understands. Keys known
/// to neither are an error.
inline std::pair<KeyValues, KeyValues> split_config(const KeyValues& kv)
{
    KeyValues trace, sim;
    for (const auto& [k, v] : kv) {
        const bool t = trace_config_fields().count(k) != 0;
        const bool s = sim_config_fields().count(k) != 0;
        if (!t && !s)
            throw UsageError("unknown config key '" + k + "'");
        if (t)
            trace[k] = v;
        if (s)
            sim[k] = v;
    }
    return {trace, sim};
}

} // namespace edgecache
