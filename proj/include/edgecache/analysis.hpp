#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "edgecache/geo.hpp"
#include "edgecache/trace.hpp"

namespace edgecache {

// ---------------------------------------------------------------------------
// Popularity
// ---------------------------------------------------------------------------

struct RankCount {
    std::string video_id;
    std::uint64_t count = 0;
};

struct PopularityReport {
    std::vector<RankCount> ranking; ///< descending count, ties by id
    std::optional<double> slope;    ///< log-log slope; empty when degenerate

    bool degenerate() const { return !slope; }
};

namespace detail {

inline double least_squares_slope(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace detail

/// Slope of log(count) against log(rank) over ranks [10, 0.9 * max rank].
/// `counts` must be in descending order. Empty when fewer than two distinct
/// ranks fall in the window.
inline std::optional<double> power_law_slope(std::span<const std::uint64_t> counts)
{
    const std::size_t lo = 10;
    const auto hi = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(counts.size())));
    std::vector<double> x, y;
    for (std::size_t r = lo; r <= hi; ++r) {
        const auto c = counts[r - 1];
        if (c == 0)
            continue;
        x.push_back(std::log(static_cast<double>(r)));
        y.push_back(std::log(static_cast<double>(c)));
    }
    if (x.size() < 2)
        return std::nullopt;
    return detail::least_squares_slope(x, y);
}

inline PopularityReport popularity_histogram(std::span<const RequestRecord> records)
{
    if (records.empty())
        throw InputError("popularity histogram needs at least one request");
    std::unordered_map<std::string_view, std::uint64_t> counts;
    for (const auto& r : records)
        ++counts[r.video_id];
    PopularityReport rep;
    rep.ranking.reserve(counts.size());
    for (const auto& [v, c] : counts)
        rep.ranking.push_back({std::string(v), c});
    std::sort(rep.ranking.begin(), rep.ranking.end(), [](const RankCount& a, const RankCount& b) {
        return a.count != b.count ? a.count > b.count : a.video_id < b.video_id;
    });
    std::vector<std::uint64_t> sorted;
    sorted.reserve(rep.ranking.size());
    for (const auto& rc : rep.ranking)
        sorted.push_back(rc.count);
    rep.slope = power_law_slope(sorted);
    return rep;
}

struct LocalRankReport {
    /// Globally top-n videos with their mean local rank percentile (rank / videos in cell).
    std::vector<std::pair<std::string, double>> mean_percentile;
    std::vector<CdfPoint> cdf;
};

/// How the globally most popular videos rank inside the cells that request them.
inline LocalRankReport local_global_rank(std::span<const RequestRecord> records, std::size_t top_n)
{
    const auto pop = popularity_histogram(records);
    if (top_n == 0 || top_n > pop.ranking.size())
        throw UsageError("top_n must be in [1, number of distinct videos]");
    std::unordered_map<CellId, std::unordered_map<std::string_view, std::uint64_t>, CellIdHash> per_cell;
    for (const auto& r : records)
        ++per_cell[cell_of(r.position)][r.video_id];
    std::unordered_map<std::string_view, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < top_n; ++i)
        acc[pop.ranking[i].video_id] = {0.0, 0};
    for (const auto& [cell, counts] : per_cell) {
        std::vector<std::pair<std::string_view, std::uint64_t>> ranked(counts.begin(), counts.end());
        std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
        const auto n = static_cast<double>(ranked.size());
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            auto it = acc.find(ranked[k].first);
            if (it == acc.end())
                continue;
            it->second.first += static_cast<double>(k + 1) / n;
            ++it->second.second;
        }
    }
    LocalRankReport rep;
    std::vector<double> values;
    for (std::size_t i = 0; i < top_n; ++i) {
        const auto& id = pop.ranking[i].video_id;
        const auto& [sum, cells] = acc[id];
        const double mean = sum / static_cast<double>(cells);
        rep.mean_percentile.emplace_back(id, mean);
        values.push_back(mean);
    }
    rep.cdf = empirical_cdf(values);
    return rep;
}

// ---------------------------------------------------------------------------
// Spectral analysis
// ---------------------------------------------------------------------------

using Complex = std::complex<double>;

namespace detail {

inline Complex unit_root(std::size_t num, std::size_t n)
{
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(num % n) / static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
}

// Forward transform Y[k] = sum_{j=0..N-1} x_j exp(-2 pi i k j / N) via FFTW.
// FFTW planning is not thread-safe, execution is.
inline std::vector<Complex> fft(const std::vector<Complex>& x)
{
    static std::mutex planner;
    const auto n = static_cast<int>(x.size());
    std::vector<Complex> in(x), out(x.size());
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(planner);
        plan = fftw_plan_dft_1d(n, pin, pout, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (!plan)
        throw Error(Error::Kind::Internal, "fftw planning failed");
    fftw_execute(plan);
    {
        std::lock_guard lock(planner);
        fftw_destroy_plan(plan);
    }
    return out;
}

} // namespace detail

struct Spectrum {
    std::vector<Complex> coefficients; ///< X[k], k = 0..N-1

    std::size_t size() const { return coefficients.size(); }
    double amplitude(std::size_t k) const { return std::abs(coefficients[k]); }
    double phase(std::size_t k) const { return std::arg(coefficients[k]); }
};

/// X[k] = sum_{n=1..N} x_n exp(-2 pi i k n / N), with the sample index
/// starting at one.
inline Spectrum dft_spectrum(std::span<const double> series)
{
    if (series.empty())
        throw UsageError("series must have at least one sample");
    std::vector<Complex> x(series.begin(), series.end());
    auto y = detail::fft(x);
    const std::size_t n = series.size();
    for (std::size_t k = 0; k < n; ++k)
        y[k] *= detail::unit_root(k, n);
    return {std::move(y)};
}

struct DominantPeriod {
    std::size_t k = 0;
    double period_hours = 0.0;
    double amplitude = 0.0;
};

/// Strongest non-DC frequencies of an hourly series, mirror images folded onto
/// k <= N/2, by descending amplitude (ties by smaller k), at most `count` entries.
inline std::vector<DominantPeriod> dominant_periods(const Spectrum& s, std::size_t count)
{
    const std::size_t n = s.size();
    std::vector<DominantPeriod> out;
    for (std::size_t k = 1; k <= n / 2; ++k)
        out.push_back({k, static_cast<double>(n) / static_cast<double>(k), s.amplitude(k)});
    std::stable_sort(out.begin(), out.end(),
        [](const DominantPeriod& a, const DominantPeriod& b) { return a.amplitude > b.amplitude; });
    if (out.size() > count)
        out.resize(count);
    return out;
}

/// Requests per local hour from local midnight of `first_day` for `days` days.
/// Records outside the window or rejected by `keep` are ignored.
inline std::vector<double> hourly_series(std::span<const RequestRecord> records, std::int64_t first_day, std::size_t days,
    int utc_offset_hours = kDefaultUtcOffsetHours, const std::function<bool(const RequestRecord&)>& keep = {})
{
    std::vector<double> out(days * 24, 0.0);
    const std::int64_t start = first_day * kSecondsPerDay - utc_offset_hours * kSecondsPerHour;
    for (const auto& r : records) {
        if (keep && !keep(r))
            continue;
        const auto h = floor_div(r.timestamp - start, kSecondsPerHour);
        if (h >= 0 && h < static_cast<std::int64_t>(out.size()))
            out[static_cast<std::size_t>(h)] += 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Entropies
// ---------------------------------------------------------------------------

struct EntropyReport {
    double raw = 0.0;        ///< nats
    double normalized = 0.0; ///< raw / ln(support), 0 for a single-element support
    std::size_t support_size = 0;
};

/// Shannon entropy of a count vector; zero entries are outside the support.
inline EntropyReport entropy_of_counts(std::span<const double> counts)
{
    double total = 0.0;
    std::size_t support = 0;
    for (double c : counts) {
        if (c < 0.0 || !std::isfinite(c))
            throw InputError("counts must be finite and non-negative");
        if (c > 0.0) {
            total += c;
            ++support;
        }
    }
    EntropyReport rep;
    rep.support_size = support;
    if (support == 0)
        return rep;
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log(p);
        }
    rep.raw = std::max(0.0, h);
    if (support >= 2)
        rep.normalized = std::clamp(rep.raw / std::log(static_cast<double>(support)), 0.0, 1.0);
    return rep;
}

/// Video x cell request counts for the entropy measures.
class RequestCounts {
  public:
    explicit RequestCounts(std::span<const RequestRecord> records)
    {
        for (const auto& r : records) {
            const auto c = cell_of(r.position);
            ++by_video_[r.video_id][c];
            ++by_cell_[c][r.video_id];
        }
    }

    const auto& by_video() const { return by_video_; }
    const auto& by_cell() const { return by_cell_; }

    /// Entropy of the video's requests over cells.
    EntropyReport video_entropy(const std::string& video) const
    {
        auto it = by_video_.find(video);
        if (it == by_video_.end())
            throw InputError("unknown video '" + video + "'");
        std::vector<double> counts;
        for (const auto& [c, n] : it->second)
            counts.push_back(static_cast<double>(n));
        return entropy_of_counts(counts);
    }

    /// Entropy of the cell's requests over videos.
    EntropyReport location_entropy(CellId cell) const
    {
        auto it = by_cell_.find(cell);
        if (it == by_cell_.end())
            throw InputError("unknown cell");
        std::vector<double> counts;
        for (const auto& [v, n] : it->second)
            counts.push_back(static_cast<double>(n));
        return entropy_of_counts(counts);
    }

    std::uint64_t video_requests(const std::string& video) const
    {
        auto it = by_video_.find(video);
        std::uint64_t t = 0;
        if (it != by_video_.end())
            for (const auto& [c, n] : it->second)
                t += n;
        return t;
    }

  private:
    std::map<std::string, std::map<CellId, std::uint64_t>> by_video_;
    std::map<CellId, std::map<std::string, std::uint64_t>> by_cell_;
};

inline EntropyReport video_entropy(std::span<const RequestRecord> records, const std::string& video)
{
    return RequestCounts(records).video_entropy(video);
}

inline EntropyReport location_entropy(std::span<const RequestRecord> records, CellId cell)
{
    return RequestCounts(records).location_entropy(cell);
}

struct GradeEntropy {
    std::size_t grade = 0; ///< 0 = least popular
    std::size_t videos = 0;
    double mean_raw = 0.0;
    double mean_normalized = 0.0;
};

/// Mean video entropy per popularity grade; grades split the videos sorted by
/// request count into `grades` equal-sized groups.
inline std::vector<GradeEntropy> video_entropy_by_grade(const RequestCounts& counts, std::size_t grades = 4)
{
    if (grades == 0)
        throw UsageError("grades must be positive");
    std::vector<std::pair<std::uint64_t, std::string>> videos;
    for (const auto& [v, cells] : counts.by_video()) {
        std::uint64_t t = 0;
        for (const auto& [c, n] : cells)
            t += n;
        videos.emplace_back(t, v);
    }
    std::sort(videos.begin(), videos.end());
    std::vector<GradeEntropy> out(grades);
    for (std::size_t g = 0; g < grades; ++g)
        out[g].grade = g;
    for (std::size_t i = 0; i < videos.size(); ++i) {
        auto& ge = out[std::min(grades - 1, i * grades / videos.size())];
        const auto e = counts.video_entropy(videos[i].second);
        ++ge.videos;
        ge.mean_raw += e.raw;
        ge.mean_normalized += e.normalized;
    }
    for (auto& ge : out)
        if (ge.videos) {
            ge.mean_raw /= static_cast<double>(ge.videos);
            ge.mean_normalized /= static_cast<double>(ge.videos);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Curve fits
// ---------------------------------------------------------------------------

struct FitResult {
    std::vector<double> coefficients; ///< quadratic: a, b, c; log-linear: a, b
    double residual_ss = 0.0;
};

namespace detail {

// Householder QR least squares for a small dense design matrix (row major).
inline std::vector<double> least_squares(std::vector<std::vector<double>> a, std::vector<double> y)
{
    const std::size_t m = a.size();
    const std::size_t n = a.empty() ? 0 : a[0].size();
    if (m < n)
        throw InputError("rank-deficient design");
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row)
            scale = std::max(scale, std::abs(v));
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < m; ++i)
            norm += a[i][j] * a[i][j];
        norm = std::sqrt(norm);
        if (norm <= 1e-10 * std::max(scale, 1.0))
            throw InputError("rank-deficient design");
        const double alpha = a[j][j] > 0.0 ? -norm : norm;
        std::vector<double> v(m, 0.0);
        for (std::size_t i = j; i < m; ++i)
            v[i] = a[i][j];
        v[j] -= alpha;
        double vnorm = 0.0;
        for (std::size_t i = j; i < m; ++i)
            vnorm += v[i] * v[i];
        if (vnorm == 0.0)
            continue;
        for (std::size_t c = j; c < n; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < m; ++i)
                dot += v[i] * a[i][c];
            const double f = 2.0 * dot / vnorm;
            for (std::size_t i = j; i < m; ++i)
                a[i][c] -= f * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = j; i < m; ++i)
            dot += v[i] * y[i];
        const double f = 2.0 * dot / vnorm;
        for (std::size_t i = j; i < m; ++i)
            y[i] -= f * v[i];
    }
    std::vector<double> beta(n, 0.0);
    for (std::size_t jj = n; jj-- > 0;) {
        double s = y[jj];
        for (std::size_t c = jj + 1; c < n; ++c)
            s -= a[jj][c] * beta[c];
        beta[jj] = s / a[jj][jj];
    }
    return beta;
}

inline std::size_t distinct_x(std::span<const std::pair<double, double>> samples)
{
    std::set<double> xs;
    for (const auto& [x, y] : samples)
        xs.insert(x);
    return xs.size();
}

} // namespace detail

/// Least-squares y = a x^2 + b x + c. Needs at least three distinct x values.
inline FitResult fit_quadratic(std::span<const std::pair<double, double>> samples)
{
    if (detail::distinct_x(samples) < 3)
        throw InputError("rank-deficient design: quadratic fit needs three distinct x values");
    std::vector<std::vector<double>> a;
    std::vector<double> y;
    for (const auto& [xv, yv] : samples) {
        a.push_back({xv * xv, xv, 1.0});
        y.push_back(yv);
    }
    FitResult r;
    r.coefficients = detail::least_squares(a, y);
    for (const auto& [xv, yv] : samples) {
        const double e = yv - (r.coefficients[0] * xv * xv + r.coefficients[1] * xv + r.coefficients[2]);
        r.residual_ss += e * e;
    }
    return r;
}

/// Least-squares y = a ln(x) + b. Every x must be positive.
inline FitResult fit_log_linear(std::span<const std::pair<double, double>> samples)
{
    for (const auto& [x, y] : samples)
        if (!(x > 0.0))
            throw InputError("log-linear fit needs positive x values");
    if (detail::distinct_x(samples) < 2)
        throw InputError("rank-deficient design: log-linear fit needs two distinct x values");
    std::vector<std::vector<double>> a;
    std::vector<double> y;
    for (const auto& [xv, yv] : samples) {
        a.push_back({std::log(xv), 1.0});
        y.push_back(yv);
    }
    FitResult r;
    r.coefficients = detail::least_squares(a, y);
    for (const auto& [xv, yv] : samples) {
        const double e = yv - (r.coefficients[0] * std::log(xv) + r.coefficients[1]);
        r.residual_ss += e * e;
    }
    return r;
}

inline FitResult entropy_poi_fit(std::span<const std::pair<double, double>> samples) { return fit_quadratic(samples); }

inline FitResult entropy_mobility_fit(std::span<const std::pair<double, double>> samples)
{
    return fit_log_linear(samples);
}

// ---------------------------------------------------------------------------
// Divergence and similarity
// ---------------------------------------------------------------------------

inline constexpr double kKlSmoothing = 1e-6;

/// D(P || Q) in nats after additive smoothing of both distributions.
inline double kl_divergence(std::span<const double> p, std::span<const double> q, double epsilon = kKlSmoothing)
{
    if (p.empty() || p.size() != q.size())
        throw InputError("invalid distributions: sizes differ or empty");
    auto check = [](std::span<const double> d) {
        double s = 0.0;
        for (double v : d) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InputError("invalid distributions: negative or non-finite mass");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw InputError("invalid distributions: mass does not sum to 1");
    };
    check(p);
    check(q);
    const double norm = 1.0 + epsilon * static_cast<double>(p.size());
    double d = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
        const double ps = (p[t] + epsilon) / norm;
        const double qs = (q[t] + epsilon) / norm;
        d += ps * std::log(ps / qs);
    }
    return std::max(0.0, d);
}

/// Normalises non-negative counts into a distribution; all-zero input is an error.
inline std::vector<double> to_distribution(std::span<const double> counts)
{
    double s = 0.0;
    for (double c : counts)
        s += c;
    if (!(s > 0.0))
        throw InputError("empty distribution");
    std::vector<double> out(counts.begin(), counts.end());
    for (auto& v : out)
        v /= s;
    return out;
}

/// |A n B| / |A u B|; two empty sets give 0.
template <class T, class Cmp>
double jaccard(const std::set<T, Cmp>& a, const std::set<T, Cmp>& b)
{
    if (a.empty() && b.empty())
        return 0.0;
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    const auto& cmp = a.key_comp();
    while (ia != a.end() && ib != b.end()) {
        if (cmp(*ia, *ib))
            ++ia;
        else if (cmp(*ib, *ia))
            ++ib;
        else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    const auto uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Temporal decay
// ---------------------------------------------------------------------------

struct DecayProfile {
    std::int64_t first_day = 0;
    std::vector<double> normalized; ///< daily totals divided by the first day's total
    double decay_rate = 0.0;        ///< mu-hat: minus the slope of ln(count) per day
};

/// Daily request volume of the videos selected by `in_category`, with an
/// exponential decay rate fitted to the days that have requests.
inline DecayProfile category_decay_profile(std::span<const RequestRecord> records,
    const std::function<bool(const std::string&)>& in_category, int utc_offset_hours = kDefaultUtcOffsetHours)
{
    std::map<std::int64_t, double> daily;
    for (const auto& r : records)
        if (in_category(r.video_id))
            daily[day_index(r.timestamp, utc_offset_hours)] += 1.0;
    if (daily.size() < 2)
        throw InputError("category decay needs requests on at least two days");
    DecayProfile p;
    p.first_day = daily.begin()->first;
    const auto last = daily.rbegin()->first;
    const double base = daily.begin()->second;
    std::vector<double> xs, ys;
    for (std::int64_t d = p.first_day; d <= last; ++d) {
        auto it = daily.find(d);
        const double v = it == daily.end() ? 0.0 : it->second;
        p.normalized.push_back(v / base);
        if (v > 0.0) {
            xs.push_back(static_cast<double>(d - p.first_day));
            ys.push_back(std::log(v));
        }
    }
    p.decay_rate = -detail::least_squares_slope(xs, ys);
    return p;
}

// ---------------------------------------------------------------------------
// Mobility intensity
// ---------------------------------------------------------------------------

/// Per cell: mean number of distinct multi-location users per day among the
/// users requesting there. Cells that never see a multi-location user are left out.
inline std::map<CellId, double> mobility_intensity(std::span<const RequestRecord> records,
    std::span<const LocationId> assignment, int utc_offset_hours = kDefaultUtcOffsetHours)
{
    const auto classes = classify_users(records, assignment, utc_offset_hours);
    std::set<std::pair<std::string_view, std::int64_t>> multi;
    for (const auto& c : classes)
        if (c.cls == DayClass::MultiLocation)
            multi.emplace(c.user_id, c.day);
    std::map<CellId, std::map<std::int64_t, std::set<std::string_view>>> seen;
    std::map<CellId, std::set<std::int64_t>> active_days;
    for (const auto& r : records) {
        const auto c = cell_of(r.position);
        const auto d = day_index(r.timestamp, utc_offset_hours);
        active_days[c].insert(d);
        if (multi.count({r.user_id, d}))
            seen[c][d].insert(r.user_id);
    }
    std::map<CellId, double> out;
    for (const auto& [c, days] : seen) {
        double total = 0.0;
        for (const auto& [d, users] : days)
            total += static_cast<double>(users.size());
        out[c] = total / static_cast<double>(active_days[c].size());
    }
    return out;
}

} // namespace edgecache
