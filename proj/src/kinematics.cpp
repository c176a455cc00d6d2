#include "mobisynth/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <vector>

#include "mobisynth/errors.hpp"

namespace mobisynth {
namespace {

// Accelerations live on a 1/256 m/s^2 lattice. At trajectory magnitudes every
// partial sum of lattice values is exactly representable, so the signed
// accelerations of a step cancel to exactly zero and the exit speed equals the
// entry speed bit for bit. Chained steps then stay continuous without any
// epsilon comparisons.
constexpr double kQuantum = 1.0 / 256.0;

// Shape knobs for the synthesized acceleration mix. Ramp increments follow
// A * (kRampShapeMin + Exp(kRampShapeSpread)) so ramp samples spread around
// the nominal slope instead of forming a point mass; cruise "carpet" samples
// target kCarpetMean with occasional larger paired swings sized near
// kSpikeSize when the per-route mean demands more activity than the carpet
// provides. Values were calibrated against the pooled |a| targets.
constexpr double kRampShapeMin = 0.55;
constexpr double kRampShapeSpread = 0.45;
constexpr double kCarpetMean = 0.27;
constexpr double kSpikeSize = 1.7;

double quantize(double x) { return std::round(x * 256.0) * kQuantum; }

struct BuildResult {
    std::vector<double> accel;
    double objective = 0.0;
};

std::vector<double> speeds_from(double v0, const std::vector<double>& accel) {
    std::vector<double> v(accel.size());
    double cur = v0;
    for (std::size_t j = 0; j < accel.size(); ++j) {
        cur += accel[j];
        v[j] = cur;
    }
    return v;
}

double mean_abs(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += std::fabs(x);
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

double std_abs(const std::vector<double>& a) {
    if (a.empty()) return 0.0;
    double m = mean_abs(a);
    double q = 0.0;
    for (double x : a) q += x * x;
    q /= static_cast<double>(a.size());
    double var = q - m * m;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

// Hard-constraint check used to accept an attempt. The objective threshold is
// handled by the caller; this covers everything else.
bool satisfies_constraints(const std::vector<double>& accel, double v0,
                           const std::pair<double, double>& mean_range,
                           const DrivingStats& stats) {
    double sum = 0.0;
    double cur = v0;
    for (double x : accel) {
        if (x < stats.accel_bounds.first - 1e-12 || x > stats.accel_bounds.second + 1e-12)
            return false;
        sum += x;
        cur += x;
        if (cur < -1e-12) return false;
    }
    std::size_t n = accel.size();
    if (std::fabs(sum) / static_cast<double>(n) > 1e-9) return false;
    double m = mean_abs(accel);
    double s = std_abs(accel);
    if (m < mean_range.first - 1e-9 || m > mean_range.second + 1e-9) return false;
    if (s < stats.std_abs_bounds.first - 1e-9 || s > stats.std_abs_bounds.second + 1e-9)
        return false;
    if (s < m - 1e-9) return false;
    return true;
}

// Scales raw positive draws so their sum is exactly `target` on the lattice.
// The largest element absorbs the quantization residue.
bool scale_to_lattice_sum(std::vector<double>& vals, double target, double cap) {
    if (vals.empty()) return target == 0.0;
    double raw = 0.0;
    for (double v : vals) raw += v;
    if (raw <= 0.0) return false;
    double target_q = quantize(target);
    if (target_q <= 0.0) return false;
    double scale = target_q / raw;
    double sum = 0.0;
    std::size_t top = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        vals[i] = std::max(kQuantum, quantize(vals[i] * scale));
        if (vals[i] > vals[top]) top = i;
        sum += vals[i];
    }
    double diff = target_q - sum;
    double fixed = vals[top] + diff;
    if (fixed < kQuantum || fixed > cap) return false;
    vals[top] = fixed;
    for (double v : vals)
        if (v > cap) return false;
    return true;
}

// One constructive attempt: trapezoid speed excursion with spread ramp
// increments plus paired cruise swings that carry the |a| statistics. Pair
// signs double as a trim knob steering mean(v) onto the step target.
bool try_build(int n, double vbar, double v0, const std::pair<double, double>& mean_range,
               const DrivingStats& stats, Rng& rng, int adjust_budget, BuildResult& out) {
    const double a_cap = std::min(stats.accel_bounds.second, -stats.accel_bounds.first);
    const double m_lo = mean_range.first;
    const double m_hi = mean_range.second;
    const double s_lo = stats.std_abs_bounds.first;
    const double s_hi = stats.std_abs_bounds.second;

    double excursion = vbar - v0;
    double dir = excursion >= 0.0 ? 1.0 : -1.0;
    double e = std::fabs(excursion);

    int r = 0;
    std::vector<double> up, down;
    if (e > 1e-9) {
        double a_t = rng.uniform(1.0, 2.5);
        double a_min = 4.4 * e / static_cast<double>(n);
        a_t = std::max(a_t, a_min);
        if (a_t > a_cap) return false;
        double disc = static_cast<double>(n) * n - 4.0 * e * n / a_t;
        if (disc < 0.0) return false;
        r = static_cast<int>(std::lround((n - std::sqrt(disc)) / 2.0));
        r = std::max(1, std::min(r, (n - 2) / 2));
        up.resize(static_cast<std::size_t>(r));
        down.resize(static_cast<std::size_t>(r));
        for (auto& g : up) g = kRampShapeMin + rng.exponential(kRampShapeSpread);
        for (auto& h : down) h = kRampShapeMin + rng.exponential(kRampShapeSpread);
    }

    // Assemble the base excursion and rescale it so the integrated speed hits
    // the target mean exactly before quantization.
    auto base_speed_sum = [&](const std::vector<double>& g, const std::vector<double>& h) {
        double gsum = 0.0;
        for (double x : g) gsum += x;
        double s = 0.0;
        double cur = 0.0;
        for (int j = 0; j < r; ++j) {
            cur += g[static_cast<std::size_t>(j)];
            s += cur;
        }
        s += gsum * static_cast<double>(n - 2 * r);
        cur = gsum;
        for (int j = 0; j < r; ++j) {
            cur -= h[static_cast<std::size_t>(j)];
            s += cur;
        }
        return s;
    };

    if (r > 0) {
        double hsum = 0.0;
        for (double x : down) hsum += x;
        double gsum = 0.0;
        for (double x : up) gsum += x;
        // Normalize the down ramp to the up ramp's height first.
        for (auto& h : down) h *= gsum / hsum;
        double s = base_speed_sum(up, down);
        if (s <= 0.0) return false;
        double kappa = e * static_cast<double>(n) / s;
        for (auto& g : up) g *= kappa;
        for (auto& h : down) h *= kappa;
        gsum = 0.0;
        for (double x : up) gsum += x;
        if (!scale_to_lattice_sum(up, gsum, a_cap)) return false;
        double gq = 0.0;
        for (double x : up) gq += x;
        if (!scale_to_lattice_sum(down, gq, a_cap)) return false;
        double height = gq;
        if (dir < 0.0 && height > v0 + 1e-12) return false;  // would dip below zero
    }

    double height = 0.0;
    for (double x : up) height += x;
    double v_cruise = v0 + dir * height;
    if (v_cruise < -1e-12) return false;

    int c = n - 2 * r;
    int pairs = c / 2;

    // Per-entry ramp mass fixes how much |a| the cruise jitter must add to
    // reach the step's mean target.
    double ramp_mass = 2.0 * height / static_cast<double>(n);
    if (ramp_mass > m_hi - 0.01) return false;
    double natural = ramp_mass + kCarpetMean * (2.0 * pairs) / static_cast<double>(n);
    double m_star = std::max(m_lo + 0.02, std::min(natural, m_hi - 0.02));
    m_star = std::max(m_star, ramp_mass);
    if (n >= 4) {
        // With all jitter mass concentrated in one swing pair, reaching
        // std|a| = s requires mean|a| >= s / sqrt(N/2 - 1). Below that no
        // arrangement of the mass can satisfy the dispersion band.
        double disp_floor =
            1.15 * s_lo / std::sqrt(static_cast<double>(n) / 2.0 - 1.0);
        m_star = std::max(m_star, std::min(disp_floor, m_hi - 0.02));
    }
    if (m_star > m_hi - 0.01) return false;

    double jitter_mass = (m_star - ramp_mass) * static_cast<double>(n);
    std::vector<double> eps;
    if (jitter_mass > kQuantum && pairs > 0) {
        double per_entry = jitter_mass / (2.0 * pairs);
        int active = pairs;
        int spikes = 0;
        if (per_entry < 0.04) {
            active = std::max(1, static_cast<int>(jitter_mass / (2.0 * 0.08)));
            active = std::min(active, pairs);
        } else if (per_entry > kCarpetMean * 1.3) {
            double excess = jitter_mass - 2.0 * pairs * kCarpetMean;
            spikes = std::max(1, static_cast<int>(std::lround(excess / (2.0 * kSpikeSize))));
            spikes = std::min(spikes, std::max(1, pairs / 3));
        }
        int carpet = active - spikes;
        double spike_mass = 0.0;
        if (spikes > 0) {
            spike_mass = jitter_mass - 2.0 * carpet * kCarpetMean;
            double sz = spike_mass / (2.0 * spikes);
            while (sz > std::min(a_cap - 0.5, 5.0) && spikes < pairs / 2) {
                ++spikes;
                --carpet;
                spike_mass = jitter_mass - 2.0 * carpet * kCarpetMean;
                sz = spike_mass / (2.0 * spikes);
            }
            if (sz > std::min(a_cap - 0.5, 5.0)) return false;
            if (sz < kCarpetMean) {  // not actually spiky, fold back
                spikes = 0;
                carpet = active;
            }
        }
        eps.reserve(static_cast<std::size_t>(active));
        std::vector<double> carpet_eps(static_cast<std::size_t>(carpet));
        for (auto& x : carpet_eps) x = 0.25 + rng.exponential(0.75);
        double carpet_mass = spikes > 0 ? jitter_mass - spike_mass : jitter_mass;
        if (carpet > 0 &&
            !scale_to_lattice_sum(carpet_eps, carpet_mass / 2.0, a_cap))
            return false;
        std::vector<double> spike_eps(static_cast<std::size_t>(spikes));
        for (auto& x : spike_eps) x = rng.uniform(0.85, 1.15);
        if (spikes > 0 && !scale_to_lattice_sum(spike_eps, spike_mass / 2.0, a_cap))
            return false;
        eps.insert(eps.end(), carpet_eps.begin(), carpet_eps.end());
        eps.insert(eps.end(), spike_eps.begin(), spike_eps.end());
    }

    // Dispersion correction: pairwise transfers keep the jitter mass constant
    // while steering std|a| into band. Work on a mass-accounting copy first.
    auto stats_of = [&](const std::vector<double>& ep) {
        double mass = 2.0 * height;
        double sq = 0.0;
        for (double g : up) sq += g * g;
        for (double h : down) sq += h * h;
        for (double x : ep) {
            mass += 2.0 * x;
            sq += 2.0 * x * x;
        }
        double m = mass / static_cast<double>(n);
        double q = sq / static_cast<double>(n);
        double var = q - m * m;
        return std::pair<double, double>(m, var > 0.0 ? std::sqrt(var) : 0.0);
    };

    // Transfers move lattice mass between two entries of one array, so every
    // array keeps its exact sum: swing pairs stay balanced and ramp heights
    // (and with them the exit speed) never drift.
    auto spread_eps = [&](double want) {
        if (eps.size() < 2) return false;
        std::size_t imax = 0;
        for (std::size_t i = 1; i < eps.size(); ++i)
            if (eps[i] > eps[imax]) imax = i;
        std::size_t imin = 0;
        bool found = false;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            if (i == imax || eps[i] <= 0.0) continue;
            if (!found || eps[i] < eps[imin]) {
                imin = i;
                found = true;
            }
        }
        if (!found) return false;
        double room = std::min(a_cap - eps[imax], eps[imin]);
        if (room < kQuantum) return false;
        double t = std::floor(std::min(room, want) / kQuantum) * kQuantum;
        if (t < kQuantum) return false;
        eps[imax] += t;
        eps[imin] -= t;  // fully drained swing pairs simply stay flat
        return true;
    };
    auto contract_eps = [&]() {
        if (eps.size() < 2) return false;
        std::size_t imax = 0, imin = 0;
        for (std::size_t i = 1; i < eps.size(); ++i) {
            if (eps[i] > eps[imax]) imax = i;
            if (eps[i] < eps[imin]) imin = i;
        }
        double gap = eps[imax] - eps[imin];
        if (gap < 2.0 * kQuantum) return false;
        double t = quantize(gap / 4.0);
        if (t < kQuantum) t = kQuantum;
        eps[imax] -= t;
        eps[imin] += t;
        return true;
    };
    // Ramp entries stay in [kQuantum, a_cap], so both ramps remain monotone
    // and no intermediate speed can dip below the plateau's endpoints.
    auto steepen_ramp = [&](std::vector<double>& arr, double want) {
        if (arr.size() < 2) return false;
        std::size_t imax = 0;
        for (std::size_t i = 1; i < arr.size(); ++i)
            if (arr[i] > arr[imax]) imax = i;
        std::size_t imin = 0;
        bool found = false;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (i == imax || arr[i] <= kQuantum) continue;
            if (!found || arr[i] < arr[imin]) {
                imin = i;
                found = true;
            }
        }
        if (!found) return false;
        double room = std::min(a_cap - arr[imax], arr[imin] - kQuantum);
        if (room < kQuantum) return false;
        double t = std::floor(std::min(room, want) / kQuantum) * kQuantum;
        if (t < kQuantum) return false;
        arr[imax] += t;
        arr[imin] -= t;
        return true;
    };
    auto flatten_ramp = [&](std::vector<double>& arr) {
        if (arr.size() < 2) return false;
        std::size_t imax = 0, imin = 0;
        for (std::size_t i = 1; i < arr.size(); ++i) {
            if (arr[i] > arr[imax]) imax = i;
            if (arr[i] < arr[imin]) imin = i;
        }
        double gap = arr[imax] - arr[imin];
        if (gap < 2.0 * kQuantum) return false;
        double t = quantize(gap / 4.0);
        if (t < kQuantum) t = kQuantum;
        arr[imax] -= t;
        arr[imin] += t;
        return true;
    };

    for (int it = 0; it < adjust_budget; ++it) {
        auto [m, s] = stats_of(eps);
        double need_lo = std::max(s_lo, m) + 0.015;
        double need_hi = s_hi - 0.015;
        if (s >= need_lo && s <= need_hi) break;
        if (s < need_lo) {
            double want = std::max(kQuantum, (need_lo - s) * 0.5);
            if (spread_eps(want)) continue;
            if (steepen_ramp(up, want)) continue;
            if (steepen_ramp(down, want)) continue;
            return false;
        }
        if (contract_eps()) continue;
        if (flatten_ramp(up)) continue;
        if (flatten_ramp(down)) continue;
        return false;
    }
    {
        auto [m, s] = stats_of(eps);
        if (m < m_lo || m > m_hi) return false;
        if (s < std::max(s_lo, m) || s > s_hi) return false;
    }

    // Lay out the acceleration vector: ramps at the ends, swing pairs in
    // shuffled cruise slots, leftovers stay zero.
    std::vector<double> accel(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < r; ++j) accel[static_cast<std::size_t>(j)] = dir * up[static_cast<std::size_t>(j)];
    for (int j = 0; j < r; ++j)
        accel[static_cast<std::size_t>(n - r + j)] = -dir * down[static_cast<std::size_t>(j)];

    double base_sum = 0.0;
    {
        double cur = v0;
        for (double a : accel) {
            cur += a;
            base_sum += cur;
        }
    }

    std::vector<int> slots(static_cast<std::size_t>(pairs));
    for (int k = 0; k < pairs; ++k) slots[static_cast<std::size_t>(k)] = r + 2 * k;
    rng.shuffle(slots);
    std::sort(eps.begin(), eps.end(), std::greater<double>());

    double deficit = vbar * static_cast<double>(n) - base_sum;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        int at = slots[k];
        double ep = eps[k];
        bool dip_ok = v_cruise - ep >= -1e-12;
        bool dip = deficit < 0.0 && dip_ok;
        double sign = dip ? -1.0 : 1.0;
        accel[static_cast<std::size_t>(at)] = sign * ep;
        accel[static_cast<std::size_t>(at) + 1] = -sign * ep;
        deficit -= sign * ep;
    }

    std::vector<double> v = speeds_from(v0, accel);
    double total = 0.0;
    for (double x : v) total += x;
    double objective = std::fabs(total / static_cast<double>(n) - vbar);
    out.accel = std::move(accel);
    out.objective = objective;
    if (objective >= stats.objective_threshold_mps) return false;
    return satisfies_constraints(out.accel, v0, mean_range, stats);
}

}  // namespace

std::pair<double, double> draw_mean_abs_target(const DrivingStats& stats, Rng& rng) {
    double lo = stats.mean_abs_bounds.first;
    double hi = stats.mean_abs_bounds.second;
    if (!(lo >= 0.0) || !(hi > lo) || !(stats.delta_margin > 0.0) ||
        hi - stats.delta_margin <= lo)
        throw DomainError("driving stats mean-|a| bounds are inconsistent");
    return {rng.uniform(lo, hi - stats.delta_margin), hi};
}

StepProfile synthesize_step_profile(const RouteStep& step, double v0, bool is_first,
                                    bool is_last,
                                    const std::pair<double, double>& mean_abs_range,
                                    const DrivingStats& stats, std::uint64_t seed) {
    if (!(step.t_step_s >= 2.0))
        throw DomainError("step travel time must be at least 2 s");
    if (step.d_step_m < 0.0) throw DomainError("step distance must be non-negative");
    if (v0 < 0.0) throw DomainError("entry speed must be non-negative");
    if (is_first && v0 != 0.0)
        throw DomainError("first step of a route must start from rest");
    if (is_last && v0 != 0.0)
        throw DomainError("last step cannot end at rest from a moving entry");
    if (!(mean_abs_range.first >= 0.0) || !(mean_abs_range.second > mean_abs_range.first))
        throw DomainError("mean-|a| range is inconsistent");

    int n = static_cast<int>(step.t_step_s);
    double vbar = step.d_step_m / step.t_step_s;

    double best = std::numeric_limits<double>::infinity();
    int attempts = stats.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        BuildResult res;
        int budget = 64 << attempt;
        if (try_build(n, vbar, v0, mean_abs_range, stats, rng, budget, res)) {
            StepProfile p;
            p.v0 = v0;
            p.accel = std::move(res.accel);
            p.speeds = speeds_from(v0, p.accel);
            return p;
        }
        if (res.objective < best && !res.accel.empty()) best = res.objective;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "no acceptable acceleration profile (best residual %.6f m/s)",
                  best == std::numeric_limits<double>::infinity() ? -1.0 : best);
    throw SynthesisError(buf, best);
}

std::vector<Fix> assemble_drive_segment(const std::vector<RouteStep>& steps,
                                        const std::vector<StepProfile>& profiles,
                                        std::int64_t start_unix_s) {
    if (steps.empty() || steps.size() != profiles.size())
        throw ContractError("steps and profiles must align one-to-one");
    for (std::size_t k = 0; k < steps.size(); ++k) {
        auto n = static_cast<std::size_t>(static_cast<int>(steps[k].t_step_s));
        if (profiles[k].accel.size() != n || profiles[k].speeds.size() != n)
            throw ContractError("profile length must equal int(t_step)");
        if (k > 0 && profiles[k].v0 != profiles[k - 1].speeds.back())
            throw ContractError("entry speed must match previous step exit speed");
    }

    std::vector<Fix> fixes;
    std::size_t total = 1;
    for (const auto& p : profiles) total += p.accel.size();
    fixes.reserve(total);

    Fix first;
    first.t_unix_s = start_unix_s;
    first.pos = interpolate_along(steps[0].geometry, 0.0);
    first.speed_mps = profiles[0].v0;
    first.accel_mps2 = 0.0;
    fixes.push_back(first);

    std::int64_t t = start_unix_s;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& prof = profiles[k];
        const auto& geom = steps[k].geometry;
        double integrated = 0.0;
        for (double v : prof.speeds) integrated += v;
        double length = geom.length_m();
        if (integrated <= 0.0 && length > 0.0)
            throw ContractError("profile integrates to zero distance on a non-trivial step");
        double scale = integrated > 0.0 ? length / integrated : 0.0;
        double run = 0.0;
        for (std::size_t j = 0; j < prof.speeds.size(); ++j) {
            run += prof.speeds[j];
            ++t;
            Fix f;
            f.t_unix_s = t;
            f.pos = j + 1 == prof.speeds.size() ? interpolate_along(geom, length)
                                                : interpolate_along(geom, run * scale);
            f.speed_mps = prof.speeds[j];
            f.accel_mps2 = prof.accel[j];
            fixes.push_back(f);
        }
    }
    return fixes;
}

std::vector<Fix> synth_walk(const GeoPoint& from, const GeoPoint& to,
                            std::int64_t start_unix_s, double walk_speed_mps) {
    if (!(walk_speed_mps > 0.0)) throw DomainError("walk speed must be positive");
    double dist = haversine_distance(from, to);
    if (dist <= 1e-9) {
        Fix f;
        f.t_unix_s = start_unix_s;
        f.pos = from;
        f.speed_mps = 0.0;
        f.accel_mps2 = 0.0;
        return {f};
    }
    auto dur = static_cast<std::int64_t>(std::ceil(dist / walk_speed_mps - 1e-9));
    if (dur < 1) dur = 1;
    double pace = dist / static_cast<double>(dur);
    std::vector<Fix> fixes;
    fixes.reserve(static_cast<std::size_t>(dur));
    for (std::int64_t j = 1; j <= dur; ++j) {
        double f = static_cast<double>(j) / static_cast<double>(dur);
        Fix fx;
        fx.t_unix_s = start_unix_s + j;
        fx.pos.lat = from.lat * (1.0 - f) + to.lat * f;
        fx.pos.lon = from.lon * (1.0 - f) + to.lon * f;
        fx.speed_mps = pace;
        fx.accel_mps2 = 0.0;
        fixes.push_back(fx);
    }
    return fixes;
}

std::vector<Fix> add_gps_noise(const std::vector<Fix>& fixes, double sigma_m,
                               std::uint64_t seed) {
    if (sigma_m < 0.0) throw DomainError("noise sigma must be non-negative");
    if (sigma_m == 0.0) return fixes;
    Rng rng(seed);
    std::vector<Fix> out = fixes;
    for (auto& f : out) {
        double north = rng.normal(0.0, sigma_m);
        double east = rng.normal(0.0, sigma_m);
        f.pos = offset_by_meters(f.pos, north, east);
    }
    return out;
}

}  // namespace mobisynth
