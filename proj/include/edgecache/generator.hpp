#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "edgecache/error.hpp"
#include "edgecache/geo.hpp"
#include "edgecache/rng.hpp"
#include "edgecache/trace.hpp"

namespace edgecache {

using PoiMatrix = std::array<std::array<double, kPoiCount>, kPoiCount>;

/// Migration counts between PoI categories measured on the Beijing trace
/// (rows: from, columns: to; category order as PoiLabel).
inline constexpr std::array<std::array<double, kPoiCount>, kPoiCount> kMeasuredMigrations = {{
    {4908, 2205, 5114, 1379, 595, 1082, 657},
    {2223, 1741, 3479, 802, 394, 698, 360},
    {5145, 3425, 9994, 1787, 995, 1727, 907},
    {1369, 797, 1743, 843, 230, 367, 222},
    {596, 399, 984, 215, 183, 187, 123},
    {1101, 692, 1671, 358, 234, 494, 169},
    {616, 367, 928, 214, 114, 202, 213},
}};

inline PoiMatrix row_normalized(const PoiMatrix& m)
{
    PoiMatrix out {};
    for (std::size_t i = 0; i < kPoiCount; ++i) {
        double s = 0.0;
        for (double v : m[i])
            s += v;
        for (std::size_t j = 0; j < kPoiCount; ++j)
            out[i][j] = s > 0.0 ? m[i][j] / s : 0.0;
    }
    return out;
}

inline PoiMatrix default_migration_matrix() { return row_normalized(kMeasuredMigrations); }

/// Amplitudes of the 24 h, 12 h and 8 h components of a category's hourly profile.
struct DiurnalWeights {
    double a24 = 0.0;
    double a12 = 0.0;
    double a8 = 0.0;
};

inline std::array<DiurnalWeights, kPoiCount> default_diurnal_weights()
{
    return {{
        {0.6, 0.35, 0.15}, // business
        {0.5, 0.30, 0.15}, // hospital
        {1.0, 0.30, 0.15}, // resident
        {0.8, 0.35, 0.20}, // campus
        {0.6, 0.30, 0.10}, // scenery
        {0.8, 0.25, 0.15}, // shopping
        {1.0, 0.25, 0.10}, // hotel
    }};
}

struct TraceConfig {
    // Population and catalogue.
    std::int64_t n_users = 5000;
    std::int64_t n_videos = 3000;
    std::int64_t days = 7;
    double zipf_exponent = 0.8;
    std::uint64_t seed = 1;
    std::int64_t start_epoch = 1'420'041'600; ///< local midnight of day 0
    int utc_offset_hours = kDefaultUtcOffsetHours;

    // Mobility.
    double multi_location_fraction = 0.30;
    PoiMatrix migration_matrix = default_migration_matrix();
    /// P(2..6 distinct locations) for a multi-location user-day.
    std::array<double, 5> location_count_probs = {0.5, 0.3, 0.12, 0.05, 0.03};
    double repeat_trip_prob = 0.25; ///< chance of one more trip to an already visited place
    std::int64_t max_movements = 30;

    // Daily rhythm.
    std::array<DiurnalWeights, kPoiCount> diurnal_weights = default_diurnal_weights();
    double evening_boost = 1.74; ///< requests in [18h,24h) over requests in [12h,18h)
    std::int64_t min_daily_requests = 10;
    double mean_extra_requests = 4.0;

    // City layout.
    std::int64_t grid_rows = 8;
    std::int64_t grid_cols = 8;
    double origin_lat = 39.90;
    double origin_lon = 116.30;
    double cell_weight_sigma = 1.0; ///< log-normal spread of cell attractiveness
    std::int64_t n_sites = 400;
    double min_site_separation_m = 100.0;

    // Interests.
    double p_site = 0.25;        ///< request drawn from the home site's favourites
    double p_cell = 0.35;        ///< request drawn from the home cell's local kernel
    std::int64_t site_favorites = 30;
    double spread_decay = 0.85;  ///< geometric weight ratio across a video's cells

    // Popularity dynamics.
    std::int64_t n_categories = 5;
    std::vector<double> category_weights = {1, 1, 1, 1, 1};
    std::vector<double> category_decay = {0.0, 0.1, 0.3, 0.6, 1.0};
    double release_spread = 0.5; ///< share of videos released after day 0

    // Infrastructure.
    double ap_jitter_m = 25.0;
    std::int64_t n_bs = 120;
    double bs_mismatch = 1.0; ///< BS count per cell follows population^mismatch

    void validate() const
    {
        auto fail = [](const std::string& m) { throw UsageError("infeasible trace config: " + m); };
        if (n_users < 0)
            fail("n_users must be non-negative");
        if (n_videos < 1)
            fail("n_videos must be positive");
        if (days < 1)
            fail("days must be positive");
        if (!(zipf_exponent > 0.0))
            fail("zipf_exponent must be positive");
        if (!(multi_location_fraction >= 0.0 && multi_location_fraction <= 1.0))
            fail("multi_location_fraction must be in [0,1]");
        for (std::size_t i = 0; i < kPoiCount; ++i) {
            double s = 0.0;
            for (double v : migration_matrix[i]) {
                if (!(v >= 0.0))
                    fail("migration_matrix entries must be non-negative");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-9)
                fail("migration_matrix rows must sum to 1");
        }
        double ps = 0.0;
        for (double p : location_count_probs) {
            if (!(p >= 0.0))
                fail("location_count_probs must be non-negative");
            ps += p;
        }
        if (std::abs(ps - 1.0) > 1e-9)
            fail("location_count_probs must sum to 1");
        if (!(repeat_trip_prob >= 0.0 && repeat_trip_prob < 1.0))
            fail("repeat_trip_prob must be in [0,1)");
        if (max_movements < 2 * 5)
            fail("max_movements must allow a six-location day");
        for (const auto& w : diurnal_weights)
            if (!(w.a24 >= 0.0 && w.a12 >= 0.0 && w.a8 >= 0.0))
                fail("diurnal weights must be non-negative");
        if (!(evening_boost > 0.0))
            fail("evening_boost must be positive");
        if (min_daily_requests < 1 || !(mean_extra_requests >= 0.0))
            fail("daily request counts must be positive");
        if (grid_rows < 1 || grid_cols < 1 || grid_rows * grid_cols < 2 * static_cast<std::int64_t>(kPoiCount))
            fail("grid must have at least 14 cells");
        if (!is_valid({origin_lat, origin_lon})
            || !is_valid({origin_lat + static_cast<double>(grid_rows) * kCellDegrees,
                origin_lon + static_cast<double>(grid_cols) * kCellDegrees}))
            fail("grid lies outside valid coordinates");
        if (!(cell_weight_sigma >= 0.0))
            fail("cell_weight_sigma must be non-negative");
        if (n_sites < grid_rows * grid_cols)
            fail("n_sites must be at least one per cell");
        if (!(min_site_separation_m >= 0.0))
            fail("min_site_separation_m must be non-negative");
        if (!(p_site >= 0.0 && p_cell >= 0.0 && p_site + p_cell <= 1.0))
            fail("p_site and p_cell must be non-negative with sum at most 1");
        if (site_favorites < 1)
            fail("site_favorites must be positive");
        if (!(spread_decay > 0.0 && spread_decay <= 1.0))
            fail("spread_decay must be in (0,1]");
        if (n_categories < 1 || category_weights.size() != static_cast<std::size_t>(n_categories)
            || category_decay.size() != static_cast<std::size_t>(n_categories))
            fail("category_weights and category_decay need n_categories entries");
        double cw = 0.0;
        for (std::size_t c = 0; c < category_weights.size(); ++c) {
            if (!(category_weights[c] >= 0.0) || !(category_decay[c] >= 0.0))
                fail("category weights and decays must be non-negative");
            cw += category_weights[c];
        }
        if (!(cw > 0.0))
            fail("category_weights sum to zero");
        if (!(release_spread >= 0.0 && release_spread <= 1.0))
            fail("release_spread must be in [0,1]");
        if (!(ap_jitter_m >= 0.0) || n_bs < 0 || !(bs_mismatch >= 0.0))
            fail("infrastructure parameters must be non-negative");
    }
};

struct SyntheticTrace {
    std::vector<RequestRecord> records; ///< sorted by (timestamp, user_id)
    std::vector<InfrastructureNode> nodes;
    std::map<CellId, PoiLabel> cell_labels;
    std::map<std::string, int> video_categories;
    std::map<CellId, double> cell_weights;
    double evening_scale = 0.0; ///< multiplier applied to every 24 h amplitude
};

namespace detail {

inline double standard_normal(Rng& rng)
{
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::string numbered(const char* prefix, std::int64_t n, int width)
{
    auto digits = std::to_string(n);
    if (digits.size() < static_cast<std::size_t>(width))
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

inline int digits(std::int64_t n)
{
    int d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

/// Stationary distribution of a row-stochastic matrix by power iteration.
inline std::array<double, kPoiCount> stationary(const PoiMatrix& m)
{
    std::array<double, kPoiCount> pi;
    pi.fill(1.0 / static_cast<double>(kPoiCount));
    for (int it = 0; it < 10'000; ++it) {
        std::array<double, kPoiCount> next {};
        for (std::size_t i = 0; i < kPoiCount; ++i)
            for (std::size_t j = 0; j < kPoiCount; ++j)
                next[j] += pi[i] * m[i][j];
        double s = 0.0, diff = 0.0;
        for (double v : next)
            s += v;
        for (std::size_t j = 0; j < kPoiCount; ++j) {
            next[j] /= s;
            diff += std::abs(next[j] - pi[j]);
        }
        pi = next;
        if (diff < 1e-15)
            break;
    }
    return pi;
}

// Relative request intensity at local minute m for a category.
inline double diurnal_intensity(const DiurnalWeights& w, double scale, double minute)
{
    const double h = minute / 60.0;
    const double tau = 2.0 * std::numbers::pi;
    const double v = 1.0 + scale * w.a24 * std::cos(tau * (h - 21.0) / 24.0) + w.a12 * std::cos(tau * (h - 9.0) / 12.0)
        + w.a8 * std::cos(tau * (h - 5.0) / 8.0);
    return std::max(v, 0.02);
}

inline double evening_ratio(const TraceConfig& c, std::span<const double> share, double scale)
{
    double evening = 0.0, afternoon = 0.0;
    for (std::size_t p = 0; p < kPoiCount; ++p) {
        if (share[p] <= 0.0)
            continue;
        for (int m = 12 * 60; m < 24 * 60; ++m) {
            const double v = share[p] * diurnal_intensity(c.diurnal_weights[p], scale, m + 0.5);
            (m >= 18 * 60 ? evening : afternoon) += v;
        }
    }
    return evening / afternoon;
}

// Scale of the 24 h component that gives the configured evening boost.
inline double solve_evening_scale(const TraceConfig& c, std::span<const double> share)
{
    double lo = -20.0, hi = 20.0;
    if (evening_ratio(c, share, lo) > c.evening_boost || evening_ratio(c, share, hi) < c.evening_boost)
        throw UsageError("infeasible trace config: evening_boost out of reach of the diurnal weights");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (evening_ratio(c, share, mid) < c.evening_boost ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Index drawn from a discrete distribution by inverse CDF at u in [0,1).
inline std::size_t inverse_cdf(std::span<const double> p, double u)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc)
            return i;
    }
    for (std::size_t i = p.size(); i-- > 0;)
        if (p[i] > 0.0)
            return i;
    return 0;
}

// Sampler over a subset of videos.
struct SubsetSampler {
    std::vector<std::uint32_t> items;
    DiscreteSampler sampler;

    bool empty() const { return items.empty(); }
    std::uint32_t operator()(Rng& rng) const { return items[sampler(rng)]; }
};

inline SubsetSampler make_subset_sampler(std::vector<std::uint32_t> items, std::vector<double> weights)
{
    SubsetSampler s;
    std::vector<std::uint32_t> kept;
    std::vector<double> w;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (weights[i] > 0.0) {
            kept.push_back(items[i]);
            w.push_back(weights[i]);
        }
    if (!kept.empty()) {
        s.items = std::move(kept);
        s.sampler = DiscreteSampler(w);
    }
    return s;
}

struct Site {
    std::size_t cell = 0; // index into the grid's cell list
    GeoPoint pos;
};

} // namespace detail

/// Synthetic city trace with matching infrastructure. Deterministic for a
/// given config: world layout, daily trip selection and each user's timeline
/// draw from separate seeded streams.
inline SyntheticTrace generate_trace(const TraceConfig& c)
{
    c.validate();
    SyntheticTrace out;
    Rng world(derive_seed(c.seed, 0));

    // Cells and their attractiveness.
    const CellId origin = cell_of({c.origin_lat, c.origin_lon});
    std::vector<CellId> cells;
    std::vector<double> weight;
    for (std::int64_t r = 0; r < c.grid_rows; ++r)
        for (std::int64_t q = 0; q < c.grid_cols; ++q) {
            cells.push_back({origin.row + r, origin.col + q});
            weight.push_back(std::exp(c.cell_weight_sigma * detail::standard_normal(world)));
        }
    const std::size_t n_cells = cells.size();
    for (std::size_t k = 0; k < n_cells; ++k)
        out.cell_weights[cells[k]] = weight[k];

    // Sites: one per cell, the rest by attractiveness, kept apart.
    std::vector<detail::Site> sites;
    std::vector<std::vector<std::size_t>> sites_in(n_cells);
    const DiscreteSampler cell_pick(weight);
    auto place = [&](std::size_t cell) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const GeoPoint p {(static_cast<double>(cells[cell].row) + world.uniform()) * kCellDegrees,
                (static_cast<double>(cells[cell].col) + world.uniform()) * kCellDegrees};
            if (cell_of(p) != cells[cell])
                continue;
            bool ok = true;
            for (const auto& s : sites)
                if (haversine(s.pos, p) < c.min_site_separation_m) {
                    ok = false;
                    break;
                }
            if (ok) {
                sites_in[cell].push_back(sites.size());
                sites.push_back({cell, p});
                return true;
            }
        }
        return false;
    };
    for (std::size_t k = 0; k < n_cells; ++k)
        if (!place(k))
            throw UsageError("infeasible trace config: min_site_separation_m too large for the grid");
    for (int guard = 0; static_cast<std::int64_t>(sites.size()) < c.n_sites; ++guard) {
        if (guard > 100 * c.n_sites)
            throw UsageError("infeasible trace config: cannot place n_sites with the given separation");
        place(cell_pick(world));
    }

    // Labels: largest cells first to the category furthest below its share
    // of the stationary flow; every category ends up with at least two cells.
    const auto pi = detail::stationary(c.migration_matrix);
    std::vector<std::size_t> by_size(n_cells);
    std::iota(by_size.begin(), by_size.end(), std::size_t {0});
    std::stable_sort(by_size.begin(), by_size.end(),
        [&](std::size_t a, std::size_t b) { return sites_in[a].size() > sites_in[b].size(); });
    std::vector<PoiLabel> label(n_cells, PoiLabel::Unlabeled);
    std::array<double, kPoiCount> assigned {};
    std::array<int, kPoiCount> label_cells {};
    const auto total_sites = static_cast<double>(sites.size());
    for (std::size_t n = 0; n < n_cells; ++n) {
        const std::size_t k = by_size[n];
        std::size_t missing = 0;
        for (auto v : label_cells)
            missing += v < 2 ? static_cast<std::size_t>(2 - v) : 0;
        const bool forced = n_cells - n <= missing;
        std::size_t best = kPoiCount;
        for (std::size_t p = 0; p < kPoiCount; ++p) {
            if (forced && label_cells[p] >= 2)
                continue;
            if (best == kPoiCount || pi[p] * total_sites - assigned[p] > pi[best] * total_sites - assigned[best])
                best = p;
        }
        label[k] = kAllPoi[best];
        assigned[best] += static_cast<double>(sites_in[k].size());
        ++label_cells[best];
    }
    for (std::size_t k = 0; k < n_cells; ++k)
        out.cell_labels[cells[k]] = label[k];
    auto label_of_site = [&](std::size_t s) { return poi_index(label[sites[s].cell]); };

    // Users live at sites; travel rates per home category make trip origins
    // follow the stationary flow.
    const auto n_users = static_cast<std::size_t>(c.n_users);
    std::vector<std::size_t> home(n_users);
    std::array<double, kPoiCount> pop {};
    for (auto& h : home) {
        h = static_cast<std::size_t>(world.below(sites.size()));
        pop[label_of_site(h)] += 1.0;
    }
    std::array<double, kPoiCount> share {};
    for (std::size_t p = 0; p < kPoiCount; ++p)
        share[p] = n_users ? pop[p] / static_cast<double>(n_users) : pi[p];
    std::array<double, kPoiCount> travel {};
    for (std::size_t p = 0; p < kPoiCount; ++p)
        travel[p] = share[p] > 0.0 ? std::min(1.0, c.multi_location_fraction * pi[p] / share[p]) : 0.0;

    // Out-and-back trips from home: destination x of a category-i traveller
    // with probability T_ix / pi_i, T the symmetrised stationary flow. Both
    // legs together then reproduce the matrix rows.
    PoiMatrix dest {};
    for (std::size_t i = 0; i < kPoiCount; ++i)
        for (std::size_t x = 0; x < kPoiCount; ++x)
            dest[i][x] = 0.5 * (pi[i] * c.migration_matrix[i][x] + pi[x] * c.migration_matrix[x][i]) / pi[i];

    const double evening_scale = detail::solve_evening_scale(c, share);
    out.evening_scale = evening_scale;
    std::array<DiscreteSampler, kPoiCount> minute_of_day;
    for (std::size_t p = 0; p < kPoiCount; ++p) {
        std::vector<double> w(24 * 60);
        for (int m = 0; m < 24 * 60; ++m)
            w[static_cast<std::size_t>(m)] = detail::diurnal_intensity(c.diurnal_weights[p], evening_scale, m + 0.5);
        minute_of_day[p] = DiscreteSampler(w);
    }

    // Persistent destinations ("anchors"), five per user. Labels are assigned
    // by systematic sampling within each (home category, slot) so the mix of
    // destinations matches dest[i] closely even for small categories.
    constexpr std::size_t kSlots = 5;
    std::vector<std::array<std::size_t, kSlots>> anchor(n_users);
    std::array<std::vector<std::size_t>, kPoiCount> users_of;
    for (std::size_t u = 0; u < n_users; ++u)
        users_of[label_of_site(home[u])].push_back(u);
    std::array<std::vector<std::size_t>, kPoiCount> cells_of;
    for (std::size_t k = 0; k < n_cells; ++k)
        cells_of[poi_index(label[k])].push_back(k);
    for (std::size_t i = 0; i < kPoiCount; ++i) {
        auto members = users_of[i];
        for (std::size_t s = 0; s < kSlots; ++s) {
            world.shuffle(members);
            const double offset = world.uniform();
            for (std::size_t k = 0; k < members.size(); ++k) {
                const auto u = members[k];
                const double x = (static_cast<double>(k) + offset) / static_cast<double>(members.size());
                const auto lab = detail::inverse_cdf(dest[i], x);
                const auto home_cell = sites[home[u]].cell;
                std::size_t chosen = sites.size();
                for (int attempt = 0; attempt < 50 && chosen == sites.size(); ++attempt) {
                    const auto& pool = cells_of[lab];
                    std::vector<double> w;
                    for (auto k2 : pool)
                        w.push_back(k2 == home_cell ? 0.0 : static_cast<double>(sites_in[k2].size()));
                    const auto cell = pool[DiscreteSampler(w)(world)];
                    bool clash = false;
                    for (std::size_t s2 = 0; s2 < s; ++s2)
                        clash = clash || sites[anchor[u][s2]].cell == cell;
                    if (clash && attempt < 49)
                        continue;
                    chosen = sites_in[cell][world.below(sites_in[cell].size())];
                }
                anchor[u][s] = chosen;
            }
        }
    }

    // Videos: Zipf weight by popularity rank, shuffled ids, a category, a
    // release day, and a set of cells around an anchor cell.
    const auto n_videos = static_cast<std::size_t>(c.n_videos);
    std::vector<std::uint32_t> id_of_rank(n_videos);
    std::iota(id_of_rank.begin(), id_of_rank.end(), 0u);
    world.shuffle(id_of_rank);
    std::vector<std::string> video_name(n_videos);
    const int vw = std::max(5, detail::digits(c.n_videos));
    for (std::size_t r = 0; r < n_videos; ++r)
        video_name[r] = detail::numbered("v", id_of_rank[r], vw);
    std::vector<double> zipf(n_videos);
    for (std::size_t r = 0; r < n_videos; ++r)
        zipf[r] = std::pow(static_cast<double>(r + 1), -c.zipf_exponent);
    const DiscreteSampler category_pick(c.category_weights);
    const auto days = static_cast<std::size_t>(c.days);
    std::vector<std::vector<double>> lifecycle(n_videos, std::vector<double>(days, 0.0));
    for (std::size_t r = 0; r < n_videos; ++r) {
        const auto cat = category_pick(world);
        out.video_categories[video_name[r]] = static_cast<int>(cat);
        std::size_t release = 0;
        if (days > 1 && world.bernoulli(c.release_spread))
            release = 1 + static_cast<std::size_t>(world.below(days - 1));
        double mean = 0.0;
        for (std::size_t d = release; d < days; ++d) {
            lifecycle[r][d] = std::exp(-c.category_decay[cat] * static_cast<double>(d - release));
            mean += lifecycle[r][d];
        }
        mean /= static_cast<double>(days);
        for (auto& h : lifecycle[r])
            h /= mean;
    }

    // Spread kernel: popular videos reach more cells, with geometric weights
    // falling off from the anchor cell outwards.
    std::vector<double> population(n_cells);
    for (std::size_t k = 0; k < n_cells; ++k)
        population[k] = static_cast<double>(sites_in[k].size());
    const DiscreteSampler anchor_pick(population);
    const double kappa = n_videos > 1 ? static_cast<double>(n_cells - 1) / std::log(static_cast<double>(n_videos)) : 0.0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> kernel_of_cell(n_cells); // (rank, weight)
    for (std::size_t r = 0; r < n_videos; ++r) {
        const auto a = anchor_pick(world);
        const auto reach = std::min(n_cells,
            1 + static_cast<std::size_t>(std::floor(kappa * std::log(static_cast<double>(n_videos) / static_cast<double>(r + 1)))));
        std::vector<std::pair<double, std::size_t>> near;
        for (std::size_t k = 0; k < n_cells; ++k)
            near.emplace_back(haversine(cell_center(cells[a]), cell_center(cells[k])) + world.uniform(), k);
        std::sort(near.begin(), near.end());
        double norm = 0.0;
        for (std::size_t j = 0; j < reach; ++j)
            norm += std::pow(c.spread_decay, static_cast<double>(j));
        for (std::size_t j = 0; j < reach; ++j)
            kernel_of_cell[near[j].second].emplace_back(
                static_cast<std::uint32_t>(r), zipf[r] * std::pow(c.spread_decay, static_cast<double>(j)) / norm);
    }

    // Site favourites, drawn from the site's cell kernel.
    const auto n_fav = static_cast<std::size_t>(c.site_favorites);
    std::vector<std::vector<std::uint32_t>> favorites(sites.size());
    for (std::size_t s = 0; s < sites.size(); ++s) {
        const auto& kern = kernel_of_cell[sites[s].cell];
        std::vector<double> w;
        for (const auto& [r, x] : kern)
            w.push_back(x);
        auto& fav = favorites[s];
        for (std::size_t k = 0; k < std::min(n_fav, kern.size()); ++k) {
            const auto pick = DiscreteSampler(w)(world);
            fav.push_back(kern[pick].first);
            w[pick] = 0.0;
        }
    }

    // Per-day samplers with each video's lifecycle applied.
    std::vector<detail::SubsetSampler> global(days);
    std::vector<std::vector<detail::SubsetSampler>> cell_kernel(days, std::vector<detail::SubsetSampler>(n_cells));
    std::vector<std::vector<detail::SubsetSampler>> site_fav(days, std::vector<detail::SubsetSampler>(sites.size()));
    for (std::size_t d = 0; d < days; ++d) {
        std::vector<std::uint32_t> all(n_videos);
        std::iota(all.begin(), all.end(), 0u);
        std::vector<double> w(n_videos);
        for (std::size_t r = 0; r < n_videos; ++r)
            w[r] = zipf[r] * lifecycle[r][d];
        global[d] = detail::make_subset_sampler(all, w);
        if (global[d].empty())
            throw UsageError("infeasible trace config: no video released on day " + std::to_string(d));
        for (std::size_t k = 0; k < n_cells; ++k) {
            std::vector<std::uint32_t> items;
            std::vector<double> kw;
            for (const auto& [r, x] : kernel_of_cell[k]) {
                items.push_back(r);
                kw.push_back(x * lifecycle[r][d]);
            }
            cell_kernel[d][k] = detail::make_subset_sampler(items, kw);
        }
        for (std::size_t s = 0; s < sites.size(); ++s) {
            std::vector<double> fw;
            for (auto r : favorites[s])
                fw.push_back(zipf[r] * lifecycle[r][d]);
            site_fav[d][s] = detail::make_subset_sampler(favorites[s], fw);
        }
    }

    // Who travels on which day: systematic selection within groups of equal
    // home category and first destination category.
    std::vector<std::vector<bool>> travels(days, std::vector<bool>(n_users, false));
    {
        std::vector<std::size_t> order(n_users);
        std::iota(order.begin(), order.end(), std::size_t {0});
        Rng daily(derive_seed(c.seed, 1));
        for (std::size_t d = 0; d < days; ++d) {
            daily.shuffle(order);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const auto ka = label_of_site(home[a]) * kPoiCount + label_of_site(anchor[a][0]);
                const auto kb = label_of_site(home[b]) * kPoiCount + label_of_site(anchor[b][0]);
                return ka < kb;
            });
            double acc = daily.uniform();
            for (auto u : order) {
                const double before = std::floor(acc);
                acc += travel[label_of_site(home[u])];
                travels[d][u] = std::floor(acc) > before;
            }
        }
    }

    // Timelines, one independent stream per user.
    const int uw = std::max(6, detail::digits(c.n_users));
    const double extra_p = 1.0 / (1.0 + c.mean_extra_requests);
    const auto max_trips = static_cast<std::size_t>(c.max_movements / 2);
    for (std::size_t u = 0; u < n_users; ++u) {
        Rng rng(derive_seed(c.seed, 1000 + u));
        const std::string uid = detail::numbered("u", static_cast<std::int64_t>(u), uw);
        const auto hs = home[u];
        const auto hp = label_of_site(hs);
        const auto hc = sites[hs].cell;
        for (std::size_t d = 0; d < days; ++d) {
            auto n_req = static_cast<std::size_t>(c.min_daily_requests) + static_cast<std::size_t>(rng.geometric(extra_p));
            std::vector<std::size_t> trips;
            if (travels[d][u]) {
                const auto n_loc = 2 + detail::inverse_cdf(c.location_count_probs, rng.uniform());
                for (std::size_t s = 0; s + 1 < n_loc; ++s)
                    trips.push_back(anchor[u][s]);
                while (trips.size() < max_trips && rng.bernoulli(c.repeat_trip_prob))
                    trips.push_back(trips[rng.below(n_loc - 1)]);
                rng.shuffle(trips);
            }
            const std::size_t segments = 2 * trips.size() + 1;
            n_req = std::max(n_req, segments);
            std::vector<std::int64_t> times(n_req);
            const std::int64_t day_start = c.start_epoch + static_cast<std::int64_t>(d) * kSecondsPerDay;
            for (auto& t : times)
                t = day_start + static_cast<std::int64_t>(minute_of_day[hp](rng)) * 60 + static_cast<std::int64_t>(rng.below(60));
            std::sort(times.begin(), times.end());
            // Segment boundaries: segments-1 distinct cut points among the n_req-1 gaps.
            std::vector<std::size_t> gaps(n_req - 1);
            std::iota(gaps.begin(), gaps.end(), std::size_t {1});
            for (std::size_t k = 0; k + 1 < segments; ++k)
                std::swap(gaps[k], gaps[k + rng.below(gaps.size() - k)]);
            std::vector<std::size_t> cuts(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(segments - 1));
            std::sort(cuts.begin(), cuts.end());
            std::size_t seg = 0;
            for (std::size_t k = 0; k < n_req; ++k) {
                while (seg < cuts.size() && k >= cuts[seg])
                    ++seg;
                const auto site = seg % 2 == 0 ? hs : trips[seg / 2];
                const double x = rng.uniform();
                std::uint32_t rank = 0;
                if (x < c.p_site && !site_fav[d][hs].empty())
                    rank = site_fav[d][hs](rng);
                else if (x < c.p_site + c.p_cell && !cell_kernel[d][hc].empty())
                    rank = cell_kernel[d][hc](rng);
                else
                    rank = global[d](rng);
                out.records.push_back({uid, times[k], sites[site].pos, video_name[rank]});
            }
        }
    }
    std::sort(out.records.begin(), out.records.end(), [](const RequestRecord& a, const RequestRecord& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.user_id < b.user_id;
    });

    // Infrastructure: one AP per site, BSs spread by population.
    const double m_per_deg_lat = kEarthRadiusMeters * std::numbers::pi / 180.0;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        const double rr = c.ap_jitter_m * std::sqrt(world.uniform());
        const double th = 2.0 * std::numbers::pi * world.uniform();
        GeoPoint p = sites[s].pos;
        p.lat += rr * std::sin(th) / m_per_deg_lat;
        p.lon += rr * std::cos(th) / (m_per_deg_lat * std::cos(to_radians(p.lat)));
        out.nodes.push_back(make_node(detail::numbered("ap", static_cast<std::int64_t>(s + 1), 5), NodeKind::WiFiAP, p,
            label[sites[s].cell]));
    }
    std::vector<double> want(n_cells);
    double want_total = 0.0;
    for (std::size_t k = 0; k < n_cells; ++k) {
        want[k] = std::pow(population[k], c.bs_mismatch);
        want_total += want[k];
    }
    std::vector<std::int64_t> bs_count(n_cells, 0);
    std::vector<std::pair<double, std::size_t>> remainder;
    std::int64_t placed = 0;
    for (std::size_t k = 0; k < n_cells; ++k) {
        const double exact = static_cast<double>(c.n_bs) * want[k] / want_total;
        bs_count[k] = static_cast<std::int64_t>(std::floor(exact));
        placed += bs_count[k];
        remainder.emplace_back(-(exact - std::floor(exact)), k);
    }
    std::sort(remainder.begin(), remainder.end());
    for (std::size_t k = 0; placed < c.n_bs; ++k, ++placed)
        ++bs_count[remainder[k % n_cells].second];
    std::int64_t bs_id = 0;
    for (std::size_t k = 0; k < n_cells; ++k)
        for (std::int64_t b = 0; b < bs_count[k]; ++b) {
            const GeoPoint p {(static_cast<double>(cells[k].row) + world.uniform()) * kCellDegrees,
                (static_cast<double>(cells[k].col) + world.uniform()) * kCellDegrees};
            out.nodes.push_back(make_node(detail::numbered("bs", ++bs_id, 5), NodeKind::CellularBS, p, label[k]));
        }
    return out;
}

} // namespace edgecache
