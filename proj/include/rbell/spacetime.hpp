#pragma once

// Measurement events in flat spacetime (c = 1) and the time orders that
// hyperplane foliations assign to them.
//
// Events live in 2+1 dimensions (t, x, y); y defaults to 0, so purely 1+1
// geometries need not mention it. A foliation is the rest frame of an
// observer boosted with the given rapidity along the direction angle in the
// x-y plane; its time coordinate is
//
//     t' = cosh(r) t - sinh(r) (cos(theta) x + sin(theta) y).
//
// Three collinear events admit at most four distinct orders under such
// foliations. All six need the events off a common line, with a frame in
// which the three are simultaneous.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbell/errors.hpp"

namespace rbell {

enum class EventLabel { alice, bob, vicky, source };

constexpr std::string_view to_string(EventLabel l) noexcept {
    switch (l) {
        case EventLabel::alice: return "Alice";
        case EventLabel::bob: return "Bob";
        case EventLabel::vicky: return "Vicky";
        case EventLabel::source: return "source";
    }
    return "?";
}

inline std::optional<EventLabel> parse_event_label(std::string_view s) {
    for (EventLabel l : {EventLabel::alice, EventLabel::bob, EventLabel::vicky, EventLabel::source})
        if (to_string(l) == s) return l;
    return std::nullopt;
}

struct SpacetimePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// A point event, or an extended measurement at fixed position running from
/// t to t_end.
struct SpacetimeEvent {
    EventLabel label = EventLabel::vicky;
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    std::optional<double> t_end;

    void validate() const {
        if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y) || (t_end && !std::isfinite(*t_end)))
            throw InvalidInput("event coordinates must be finite");
        if (t_end && *t_end < t) throw InvalidInput("extended event must have t <= t_end");
    }

    SpacetimePoint start() const { return {t, x, y}; }
    SpacetimePoint end() const { return {t_end.value_or(t), x, y}; }
    bool extended() const { return t_end.has_value() && *t_end > t; }
};

enum class CausalRelation { timelike_past, timelike_future, lightlike, spacelike };

constexpr std::string_view to_string(CausalRelation r) noexcept {
    switch (r) {
        case CausalRelation::timelike_past: return "timelike-past";
        case CausalRelation::timelike_future: return "timelike-future";
        case CausalRelation::lightlike: return "lightlike";
        case CausalRelation::spacelike: return "spacelike";
    }
    return "?";
}

/// Relation of `b` as seen from `a`: timelike_future means b lies inside a's
/// future light cone.
inline CausalRelation causal_relation(const SpacetimePoint& a, const SpacetimePoint& b) {
    const double dt = b.t - a.t;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double space2 = dx * dx + dy * dy;
    const double interval = dt * dt - space2;
    const double scale = std::max(1.0, dt * dt + space2);
    if (std::abs(interval) <= 1e-12 * scale) return CausalRelation::lightlike;
    if (interval < 0.0) return CausalRelation::spacelike;
    return dt > 0.0 ? CausalRelation::timelike_future : CausalRelation::timelike_past;
}

inline CausalRelation causal_relation(const SpacetimeEvent& a, const SpacetimeEvent& b) {
    return causal_relation(a.start(), b.start());
}

class Foliation {
public:
    constexpr Foliation() = default;

    Foliation(double rapidity, double direction = 0.0) : rapidity_(rapidity), direction_(direction) {
        if (!std::isfinite(rapidity) || !std::isfinite(direction)) throw InvalidInput("foliation parameters must be finite");
    }

    static Foliation from_velocity(double vx, double vy = 0.0) {
        const double speed = std::hypot(vx, vy);
        if (!(speed < 1.0)) throw InvalidInput("foliation velocity must be below light speed");
        if (speed == 0.0) return Foliation(0.0, 0.0);
        return Foliation(std::atanh(speed), std::atan2(vy, vx));
    }

    double rapidity() const noexcept { return rapidity_; }
    double direction() const noexcept { return direction_; }
    double speed() const { return std::tanh(rapidity_); }
    double vx() const { return speed() * std::cos(direction_); }
    double vy() const { return speed() * std::sin(direction_); }

    /// Foliation time of a point.
    double time_of(const SpacetimePoint& p) const {
        return std::cosh(rapidity_) * p.t - std::sinh(rapidity_) * (std::cos(direction_) * p.x + std::sin(direction_) * p.y);
    }

private:
    double rapidity_ = 0.0;
    double direction_ = 0.0;
};

/// Groups of simultaneous labels in increasing foliation time.
using Ordering = std::vector<std::vector<EventLabel>>;
/// A strict order (no ties).
using Permutation = std::vector<EventLabel>;

namespace detail {
inline bool same_time(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace detail

/// Orders events by the foliation time of their start points.
inline Ordering foliation_order(std::span<const SpacetimeEvent> events, const Foliation& f) {
    std::vector<std::pair<double, EventLabel>> ts;
    for (const auto& e : events) {
        e.validate();
        ts.emplace_back(f.time_of(e.start()), e.label);
    }
    std::stable_sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Ordering out;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (k > 0 && detail::same_time(ts[k - 1].first, ts[k].first))
            out.back().push_back(ts[k].second);
        else
            out.push_back({ts[k].second});
    }
    return out;
}

inline std::optional<Permutation> as_permutation(const Ordering& o) {
    Permutation p;
    for (const auto& g : o) {
        if (g.size() != 1) return std::nullopt;
        p.push_back(g.front());
    }
    return p;
}

/// Rapidities min..max (inclusive, by step) for each of `directions`
/// equally spaced boost directions in [0, pi). One direction gives the 1+1
/// family along x.
inline std::vector<Foliation> rapidity_grid(double min = -5.0, double max = 5.0, double step = 0.01,
                                            int directions = 1) {
    if (!(step > 0.0) || max < min || directions < 1) throw InvalidInput("bad rapidity grid");
    std::vector<Foliation> out;
    const auto n = static_cast<long>(std::floor((max - min) / step + 1e-9));
    for (int d = 0; d < directions; ++d) {
        const double theta = std::numbers::pi * d / directions;
        for (long k = 0; k <= n; ++k) out.emplace_back(min + step * static_cast<double>(k), theta);
    }
    return out;
}

/// Distinct strict orders found on the grid, each with the first foliation
/// that produced it.
inline std::map<Permutation, Foliation> enumerate_orderings(std::span<const SpacetimeEvent> events,
                                                            std::span<const Foliation> grid) {
    std::map<Permutation, Foliation> out;
    for (const auto& f : grid)
        if (auto p = as_permutation(foliation_order(events, f))) out.emplace(*p, f);
    return out;
}

namespace detail {

struct Line {
    // n . v = c in velocity space
    double nx, ny, c;
};

inline double line_distance(const Line& l, double vx, double vy) {
    return std::abs(l.nx * vx + l.ny * vy - l.c) / std::hypot(l.nx, l.ny);
}

/// Velocities that hit every open cell of the arrangement of "equal foliation
/// time" lines inside the unit disk.
inline std::vector<std::array<double, 2>> arrangement_witnesses(std::span<const SpacetimePoint> pts) {
    std::vector<Line> lines;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double nx = pts[i].x - pts[j].x;
            const double ny = pts[i].y - pts[j].y;
            if (std::hypot(nx, ny) < 1e-15) continue;
            lines.push_back({nx, ny, pts[i].t - pts[j].t});
        }

    std::vector<std::array<double, 2>> out = {{0.0, 0.0}};
    auto inside = [](double vx, double vy) { return std::hypot(vx, vy) < 1.0; };
    auto clearance = [&](double vx, double vy, const std::vector<std::size_t>& through) {
        double d = 1.0 - std::hypot(vx, vy);
        for (std::size_t k = 0; k < lines.size(); ++k) {
            if (std::find(through.begin(), through.end(), k) != through.end()) continue;
            const double dist = line_distance(lines[k], vx, vy);
            if (dist > 1e-13) d = std::min(d, dist);
        }
        return 0.5 * d;
    };

    // Both sides of every chord, at its midpoint.
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const Line& l = lines[k];
        const double nn = std::hypot(l.nx, l.ny);
        const double ux = l.nx / nn, uy = l.ny / nn;
        const double off = l.c / nn;  // signed distance of the line from the origin
        if (std::abs(off) >= 1.0) continue;
        const double mx = ux * off, my = uy * off;
        std::vector<std::size_t> through;
        for (std::size_t q = 0; q < lines.size(); ++q)
            if (line_distance(lines[q], mx, my) <= 1e-13) through.push_back(q);
        const double eps = clearance(mx, my, through);
        out.push_back({mx + eps * ux, my + eps * uy});
        out.push_back({mx - eps * ux, my - eps * uy});
    }

    // Around every vertex, one point per angular sector.
    for (std::size_t a = 0; a < lines.size(); ++a)
        for (std::size_t b = a + 1; b < lines.size(); ++b) {
            const Line& p = lines[a];
            const Line& q = lines[b];
            const double det = p.nx * q.ny - p.ny * q.nx;
            if (std::abs(det) < 1e-15) continue;
            const double vx = (p.c * q.ny - p.ny * q.c) / det;
            const double vy = (p.nx * q.c - p.c * q.nx) / det;
            if (!inside(vx, vy)) continue;
            std::vector<std::size_t> through;
            std::vector<double> angles;
            for (std::size_t k = 0; k < lines.size(); ++k)
                if (line_distance(lines[k], vx, vy) <= 1e-12) {
                    through.push_back(k);
                    const double dir = std::atan2(lines[k].nx, -lines[k].ny);  // along the line
                    angles.push_back(dir);
                    angles.push_back(dir + std::numbers::pi);
                }
            for (double& ang : angles) ang = std::remainder(ang, 2.0 * std::numbers::pi);
            std::sort(angles.begin(), angles.end());
            const double eps = clearance(vx, vy, through);
            for (std::size_t k = 0; k < angles.size(); ++k) {
                const double next = k + 1 < angles.size() ? angles[k + 1] : angles.front() + 2.0 * std::numbers::pi;
                const double mid = 0.5 * (angles[k] + next);
                out.push_back({vx + eps * std::cos(mid), vy + eps * std::sin(mid)});
            }
        }

    std::erase_if(out, [&](const auto& v) { return !inside(v[0], v[1]); });
    return out;
}

inline std::vector<SpacetimePoint> endpoints(std::span<const SpacetimeEvent> events) {
    std::vector<SpacetimePoint> pts;
    for (const auto& e : events) {
        e.validate();
        pts.push_back(e.start());
        if (e.extended()) pts.push_back(e.end());
    }
    return pts;
}

}  // namespace detail

/// Every strict order any hyperplane foliation can give the events' start
/// points, each with a witness foliation. Computed from the arrangement of
/// simultaneity thresholds rather than a grid.
inline std::map<Permutation, Foliation> enumerate_orderings_exact(std::span<const SpacetimeEvent> events) {
    std::vector<SpacetimePoint> pts;
    for (const auto& e : events) {
        e.validate();
        pts.push_back(e.start());
    }
    std::map<Permutation, Foliation> out;
    for (const auto& v : detail::arrangement_witnesses(pts)) {
        const Foliation f = Foliation::from_velocity(v[0], v[1]);
        if (auto p = as_permutation(foliation_order(events, f))) out.emplace(*p, f);
    }
    return out;
}

/// Velocity (as a foliation) at which the foliation order of two spacelike
/// separated points flips relative to the rest frame; nullopt if the pair is
/// not spacelike.
inline std::optional<Foliation> reversing_foliation(const SpacetimePoint& a, const SpacetimePoint& b) {
    if (causal_relation(a, b) != CausalRelation::spacelike) return std::nullopt;
    const double dt = b.t - a.t;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double dr = std::hypot(dx, dy);
    const double threshold = dt / dr;
    const double s = dt == 0.0 ? 0.5 : 0.5 * (threshold + (dt > 0.0 ? 1.0 : -1.0));
    return Foliation::from_velocity(s * dx / dr, s * dy / dr);
}

// --------------------------------------------------------------------------
// Pre- vs postselection
// --------------------------------------------------------------------------

enum class SelectionVerdict { preselection, postselection, interleaved };

constexpr std::string_view to_string(SelectionVerdict v) noexcept {
    switch (v) {
        case SelectionVerdict::preselection: return "preselection";
        case SelectionVerdict::postselection: return "postselection";
        case SelectionVerdict::interleaved: return "interleaved";
    }
    return "?";
}

namespace detail {
inline const SpacetimeEvent& find_event(std::span<const SpacetimeEvent> events, EventLabel l) {
    for (const auto& e : events)
        if (e.label == l) return e;
    throw InvalidInput("event set has no " + std::string(to_string(l)) + " event");
}
}  // namespace detail

/// Preselection iff Vicky's measurement ends before both Alice's and Bob's
/// begin; postselection iff it begins after both have ended.
inline SelectionVerdict selection_verdict(std::span<const SpacetimeEvent> events, const Foliation& f) {
    const SpacetimeEvent& v = detail::find_event(events, EventLabel::vicky);
    const SpacetimeEvent& a = detail::find_event(events, EventLabel::alice);
    const SpacetimeEvent& b = detail::find_event(events, EventLabel::bob);
    for (const auto* e : {&v, &a, &b}) e->validate();
    const double v0 = f.time_of(v.start()), v1 = f.time_of(v.end());
    bool before_both = true, after_both = true;
    for (const auto* w : {&a, &b}) {
        const double w0 = f.time_of(w->start()), w1 = f.time_of(w->end());
        before_both = before_both && v1 < w0 && !detail::same_time(v1, w0);
        after_both = after_both && v0 > w1 && !detail::same_time(v0, w1);
    }
    if (before_both) return SelectionVerdict::preselection;
    if (after_both) return SelectionVerdict::postselection;
    return SelectionVerdict::interleaved;
}

/// Every verdict some hyperplane foliation produces, with a witness.
inline std::map<SelectionVerdict, Foliation> achievable_verdicts(std::span<const SpacetimeEvent> events) {
    const std::vector<SpacetimePoint> pts = detail::endpoints(events);
    std::map<SelectionVerdict, Foliation> out;
    for (const auto& v : detail::arrangement_witnesses(pts)) {
        const Foliation f = Foliation::from_velocity(v[0], v[1]);
        out.emplace(selection_verdict(events, f), f);
    }
    return out;
}

// --------------------------------------------------------------------------
// Shipped geometries (coordinates are representative; c = 1)
// --------------------------------------------------------------------------

namespace geometries {

/// Delayed-choice swapping: Vicky inside both future light cones.
inline std::vector<SpacetimeEvent> timelike_swap() {
    return {{EventLabel::alice, 0.0, -1.0, 0.0, {}},
            {EventLabel::bob, 0.0, 1.0, 0.0, {}},
            {EventLabel::vicky, 5.0, 0.0, 0.0, {}}};
}

/// All three measurements pairwise spacelike, Vicky off the Alice-Bob line.
/// Rest frame: Vicky first. A frame where all three are simultaneous exists.
inline std::vector<SpacetimeEvent> pairwise_spacelike() {
    return {{EventLabel::vicky, 0.0, 0.0, 6.0, {}},
            {EventLabel::alice, 0.2, -8.0, 0.0, {}},
            {EventLabel::bob, 0.4, 8.0, 0.0, {}}};
}

/// Alice's and Bob's measurements begin spacelike to Vicky's and end inside
/// its future light cone.
inline std::vector<SpacetimeEvent> extended_epr() {
    return {{EventLabel::vicky, 0.0, 0.0, 0.0, {}},
            {EventLabel::alice, 2.0, -10.0, 0.0, 15.0},
            {EventLabel::bob, 3.0, 10.0, 0.0, 14.0}};
}

}  // namespace geometries

}  // namespace rbell
