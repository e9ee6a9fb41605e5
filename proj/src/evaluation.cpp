#include "unrestcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace unrestcast::evaluation {

namespace {

using harness::ForecastTrack;

bool same_weeks(const ForecastTrack& a, const ForecastTrack& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (std::size_t k = 0; k < a.entries.size(); ++k) {
        if (a.entries[k].week != b.entries[k].week) return false;
    }
    return true;
}

double mean_abs_error(const ForecastTrack& track) {
    double acc = 0.0;
    for (const auto& e : track.entries) acc += std::fabs(e.y_true - e.y_pred);
    return acc / static_cast<double>(track.entries.size());
}

int model_rank(harness::Model m) { return static_cast<int>(m); }

}  // namespace

BinaryMetrics confusion_rates(const ForecastTrack& track) {
    BinaryMetrics m;
    for (const auto& e : track.entries) {
        const bool truth = e.y_true == 1.0;
        const bool pred = e.y_pred == 1.0;
        if (truth && pred) ++m.tp;
        else if (truth) ++m.fn;
        else if (pred) ++m.fp;
        else ++m.tn;
    }
    if (m.tp + m.fn > 0) m.tpr = static_cast<double>(m.tp) / (m.tp + m.fn);
    if (m.tn + m.fp > 0) m.tnr = static_cast<double>(m.tn) / (m.tn + m.fp);
    if (m.tpr && m.tnr) m.bac = (*m.tpr + *m.tnr) / 2.0;
    return m;
}

std::optional<double> pearson_r2(const ForecastTrack& track, int shift) {
    if (shift < 0) throw std::invalid_argument("shift must be non-negative");
    const auto n = track.entries.size();
    if (n < static_cast<std::size_t>(shift) + 3) return std::nullopt;
    std::vector<double> f;
    std::vector<double> y;
    for (std::size_t k = static_cast<std::size_t>(shift); k < n; ++k) {
        const auto& now = track.entries[k];
        const auto& earlier = track.entries[k - static_cast<std::size_t>(shift)];
        if (now.week - earlier.week != shift) throw std::invalid_argument("track weeks are not contiguous");
        f.push_back(now.y_pred);
        y.push_back(earlier.y_true);
    }
    const double count = static_cast<double>(f.size());
    double mf = 0.0, my = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        mf += f[k];
        my += y[k];
    }
    mf /= count;
    my /= count;
    double sff = 0.0, syy = 0.0, sfy = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        sff += (f[k] - mf) * (f[k] - mf);
        syy += (y[k] - my) * (y[k] - my);
        sfy += (f[k] - mf) * (y[k] - my);
    }
    if (!(sff > 0.0) || !(syy > 0.0)) return std::nullopt;
    return std::min(1.0, sfy * sfy / (sff * syy));
}

std::optional<double> mase(const ForecastTrack& track, const ForecastTrack& naive) {
    if (!same_weeks(track, naive)) throw std::invalid_argument("model and naive tracks cover different weeks");
    if (track.entries.empty()) return std::nullopt;
    for (std::size_t k = 0; k < track.entries.size(); ++k) {
        if (track.entries[k].y_true != naive.entries[k].y_true) {
            throw std::invalid_argument("model and naive tracks disagree on truth");
        }
    }
    const double scale = mean_abs_error(naive);
    if (!(scale > 0.0)) return std::nullopt;
    return mean_abs_error(track) / scale;
}

std::optional<double> mase(const ForecastTrack& track, const WeeklySeries& truth, int horizon) {
    if (track.entries.empty()) return std::nullopt;
    const auto naive = harness::naive_forecast(truth, horizon, harness::Outcome::count,
                                               WeekRange{track.entries.front().week, track.entries.back().week});
    return mase(track, naive);
}

CountMetrics count_metrics(const ForecastTrack& track, const ForecastTrack& naive) {
    CountMetrics m;
    m.r2_shift0 = pearson_r2(track, 0);
    m.r2_shift1 = pearson_r2(track, 1);
    m.r2_shift2 = pearson_r2(track, 2);
    m.mase = mase(track, naive);
    if (!track.entries.empty()) {
        m.mae = mean_abs_error(track);
        m.naive_mae = mean_abs_error(naive);
    }
    return m;
}

std::vector<ReportRow> build_report(std::span<const ForecastTrack> tracks) {
    using Key = std::tuple<std::string, int, int>;
    std::map<Key, const ForecastTrack*> naive_by_key;
    for (const auto& t : tracks) {
        if (t.plan.model != harness::Model::naive) continue;
        const Key key{t.plan.region, static_cast<int>(t.plan.outcome), t.plan.horizon};
        if (!naive_by_key.emplace(key, &t).second) {
            throw std::invalid_argument(fmt::format("duplicate naive track for {} h={}", t.plan.region, t.plan.horizon));
        }
    }

    std::vector<const ForecastTrack*> order;
    for (const auto& t : tracks) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](const ForecastTrack* a, const ForecastTrack* b) {
        return std::tuple(a->plan.region, static_cast<int>(a->plan.outcome), a->plan.horizon, model_rank(a->plan.model)) <
               std::tuple(b->plan.region, static_cast<int>(b->plan.outcome), b->plan.horizon, model_rank(b->plan.model));
    });

    std::vector<ReportRow> rows;
    for (const auto* t : order) {
        const auto& p = t->plan;
        auto it = naive_by_key.find(Key{p.region, static_cast<int>(p.outcome), p.horizon});
        if (it == naive_by_key.end()) {
            throw std::invalid_argument(fmt::format("missing naive baseline for {} {} h={}", p.region,
                                                    harness::to_string(p.outcome), p.horizon));
        }
        const auto& naive = *it->second;
        if (!same_weeks(*t, naive)) {
            throw std::invalid_argument(fmt::format("{} track for {} h={} spans different weeks than naive",
                                                    harness::to_string(p.model), p.region, p.horizon));
        }
        auto emit = [&](std::string metric, std::optional<double> value) {
            rows.push_back({p.region, p.horizon, p.outcome, p.model, std::move(metric), value});
        };
        if (p.outcome == harness::Outcome::binary) {
            const auto m = confusion_rates(*t);
            emit("tpr", m.tpr);
            emit("tnr", m.tnr);
            emit("bac", m.bac);
        } else {
            const auto m = count_metrics(*t, naive);
            emit("r2_s0", m.r2_shift0);
            emit("r2_s1", m.r2_shift1);
            emit("r2_s2", m.r2_shift2);
            emit("mase", m.mase);
        }
    }
    return rows;
}

}  // namespace unrestcast::evaluation
